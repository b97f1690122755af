import json
import math

import numpy as np
import pytest

from thzbeam import (
    ConfigError,
    FieldSlice,
    PhaseMap,
    parse_config,
    preset,
    run_scenario,
)
from thzbeam.cli import main as cli_main
from thzbeam.io import (
    format_number,
    intensity_to_levels,
    phase_to_levels,
    write_pgm16,
    write_png16,
)

MINIMAL_FIG5 = """\
[scenario]
study = oam_bandwidth
name = tiny

[oam]
target_rate_bps = 1e12
mode_counts = 1, 32
qam_orders = 16, 1024
"""


# ---------------------------------------------------------------------------
# config parsing and validation


def test_unknown_section_rejected():
    with pytest.raises(ConfigError, match="mystery"):
        parse_config(MINIMAL_FIG5 + "\n[mystery]\nkey = 1\n")


def test_unknown_key_rejected_with_path():
    with pytest.raises(ConfigError, match="oam.blah"):
        parse_config(MINIMAL_FIG5 + "blah = 2\n")


def test_empty_wavefront_list_rejected():
    text = """\
[scenario]
study = gain_curve

[grid]
side_length_m = 0.05
frequency_hz = 3e11

[wavefronts]
names =

[distances]
start_m = 0.1
stop_m = 0.2
step_m = 0.05
"""
    with pytest.raises(ConfigError, match="wavefronts"):
        parse_config(text)


def test_missing_required_section_rejected():
    with pytest.raises(ConfigError, match="oam"):
        parse_config("[scenario]\nstudy = oam_bandwidth\n")


def test_unknown_study_rejected():
    with pytest.raises(ConfigError, match="study"):
        parse_config("[scenario]\nstudy = warp_drive\n")


def test_bad_value_reports_key_path():
    with pytest.raises(ConfigError, match="grid.side_length_m"):
        parse_config(
            "[scenario]\nstudy = gain_curve\n[grid]\nside_length_m = wide\n"
            "frequency_hz = 3e11\n[wavefronts]\nnames = beamforming\n"
            "[wavefront.beamforming]\nkind = beamforming\n"
            "[distances]\nstart_m = 0.1\nstop_m = 0.2\nstep_m = 0.05\n"
        )


# ---------------------------------------------------------------------------
# presets


def test_preset_names_and_rejection():
    for name in ("fig3", "fig4", "fig5", "fig3-ci", "fig4-ci"):
        assert preset(name).name == name
    with pytest.raises(ValueError):
        preset("fig6")


def test_fig3_preset_reproduces_reference_grid():
    config = preset("fig3")
    assert config.grid.elements_per_side == 1667
    assert config.distances[0] == pytest.approx(1.0)
    assert config.distances[-1] == pytest.approx(30.0)


def test_fig4_preset_obstacle_is_ten_percent_of_aperture():
    config = preset("fig4")
    assert config.blockage["obstacle_size"] == pytest.approx(0.025)


def test_fig5_preset_targets_one_terabit():
    config = preset("fig5")
    assert config.oam["target_rate"] == pytest.approx(1e12)
    assert 32 in config.oam["mode_counts"]


# ---------------------------------------------------------------------------
# runs and artifacts


def test_fig5_run_reference_rows(tmp_path):
    manifest = run_scenario(preset("fig5"), tmp_path)
    lines = (tmp_path / "bandwidth.csv").read_text().splitlines()
    assert lines[0] == "n_modes,qam_order,bandwidth_hz"
    table = {(float(a), float(b)): float(c) for a, b, c in (r.split(",") for r in lines[1:])}
    assert table[(32.0, 16.0)] == 7.8125e9
    assert table[(32.0, 1024.0)] == 3.125e9
    assert len(manifest.artifacts) == 1
    assert (tmp_path / "manifest.json").exists()


def test_gain_curve_run_header_and_shape(tmp_path):
    config = preset("fig3-ci")
    run_scenario(config, tmp_path)
    lines = (tmp_path / "gain_curve.csv").read_text().splitlines()
    assert lines[0] == "z_m,beamforming,beamfocusing,bessel"
    assert len(lines) - 1 == config.distances.size
    values = np.array([[float(v) for v in r.split(",")] for r in lines[1:]])
    assert values[:, 1:].min() >= 0.0
    assert values[:, 1:].max() <= 1.0 + 1e-9


def test_blockage_run_meets_comparative_criteria(tmp_path):
    run_scenario(preset("fig4-ci"), tmp_path)
    rows = (tmp_path / "healing.csv").read_text().splitlines()[1:]
    table = {r.split(",")[0]: [float(v) for v in r.split(",")[1:]] for r in rows}
    assert table["bessel"][1] >= 0.9
    assert table["bessel"][1] > table["beamforming"][1]
    caustic = (tmp_path / "caustic_blockage.csv").read_text().splitlines()[1]
    assert float(caustic.split(",")[-1]) >= 10.0
    # intensity maps written for every wavefront
    assert (tmp_path / "map_bessel_blocked.pgm").exists()
    assert (tmp_path / "map_caustic_blocked.pgm").exists()


def test_oam_crosstalk_run_schema(tmp_path):
    text = """\
[scenario]
study = oam_crosstalk
name = xtalk

[grid]
side_length_m = 0.008
frequency_hz = 1e12

[oam]
modes = 0, 1, 2
z_m = 0.05
steer_deg_list = 0, 1.0
"""
    run_scenario(parse_config(text), tmp_path)
    lines = (tmp_path / "crosstalk.csv").read_text().splitlines()
    assert lines[0] == "tx_mode,rx_mode,coupling_db"
    assert len(lines) - 1 == 9
    # diagonal entries are exactly 0 dB
    for row in lines[1:]:
        tx, rx, db = row.split(",")
        if tx == rx:
            assert float(db) == 0.0
    spill = (tmp_path / "spillover.csv").read_text().splitlines()
    assert spill[0] == "steer_deg,spillover_db"
    assert (tmp_path / "crosstalk_steer_1deg.csv").exists()


def test_rerun_is_byte_identical(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    m_a = run_scenario(preset("fig4-ci"), out_a)
    m_b = run_scenario(preset("fig4-ci"), out_b)
    assert m_a.checksums() == m_b.checksums()
    for artifact in m_a.artifacts:
        assert (out_a / artifact["path"]).read_bytes() == (out_b / artifact["path"]).read_bytes()


def test_manifest_checksums_match_files(tmp_path):
    import hashlib

    manifest = run_scenario(preset("fig5"), tmp_path)
    for artifact in manifest.artifacts:
        data = (tmp_path / artifact["path"]).read_bytes()
        assert hashlib.sha256(data).hexdigest() == artifact["sha256"]
        assert len(data) == artifact["bytes"]
    payload = json.loads((tmp_path / "manifest.json").read_text())
    assert payload["config_digest"] == preset("fig5").digest


# ---------------------------------------------------------------------------
# artifact formats


def test_number_formatting_nine_digits():
    assert format_number(7.8125e9) == "7.8125e+09"
    assert format_number(0.5) == "0.5"
    assert format_number(1.0 / 3.0) == "0.333333333"


def test_pgm16_layout(tmp_path):
    levels = np.arange(6, dtype=np.uint16).reshape(2, 3) * 1000
    path = tmp_path / "img.pgm"
    write_pgm16(path, levels)
    data = path.read_bytes()
    assert data.startswith(b"P5\n3 2\n65535\n")
    assert data[len(b"P5\n3 2\n65535\n"):] == levels.astype(">u2").tobytes()


def test_png16_deterministic_and_parsable(tmp_path):
    levels = (np.outer(np.arange(8), np.arange(8)) * 1000).astype(np.uint16)
    p1, p2 = tmp_path / "a.png", tmp_path / "b.png"
    write_png16(p1, levels)
    write_png16(p2, levels)
    d1 = p1.read_bytes()
    assert d1 == p2.read_bytes()
    assert d1.startswith(b"\x89PNG\r\n\x1a\n")
    assert b"IHDR" in d1 and b"IDAT" in d1 and d1.endswith(b"IEND\xaeB`\x82")


def test_phase_levels_span_and_wrap():
    phase = PhaseMap(np.array([[0.0, math.pi], [3 * math.pi / 2, 2 * math.pi - 1e-9]]))
    levels = phase_to_levels(phase)
    assert levels[0, 0] == 0
    assert levels[0, 1] == pytest.approx(32768, abs=1)
    assert levels[1, 1] == 65535


def test_intensity_levels_db_floor():
    samples = np.array([[1.0, 1e-2], [1e-4, 0.0]])
    slice_ = FieldSlice(1.0, samples, 1e-3)  # intensities 1, 1e-4, 1e-8, 0
    levels = intensity_to_levels(slice_, scale="db", db_floor=-60.0)
    assert levels[0, 0] == 65535
    assert levels[0, 1] == pytest.approx(round((1 - 40 / 60) * 65535), abs=1)
    assert levels[1, 0] == 0  # at the floor
    assert levels[1, 1] == 0


# ---------------------------------------------------------------------------
# CLI


def test_cli_capacity_roundtrip(tmp_path):
    code = cli_main([
        "capacity", "--rate", "1e12", "--modes", "1,32", "--qam", "16,1024",
        "--out", str(tmp_path),
    ])
    assert code == 0
    lines = (tmp_path / "bandwidth.csv").read_text().splitlines()
    assert "32,16,7.8125e+09" in lines


def test_cli_synthesize_and_propagate(tmp_path):
    code = cli_main([
        "synthesize", "--side-length", "0.02", "--frequency", "3e11",
        "--kind", "bessel", "--spot-fwhm", "0.004",
        "--format", "csv", "--format", "pgm", "--out", str(tmp_path),
    ])
    assert code == 0
    assert (tmp_path / "phase_bessel.csv").exists()
    assert (tmp_path / "phase_bessel.pgm").exists()
    code = cli_main([
        "propagate", "--side-length", "0.02", "--frequency", "3e11",
        "--kind", "beamforming", "--z", "0.1", "--format", "png",
        "--out", str(tmp_path),
    ])
    assert code == 0
    assert (tmp_path / "slice_beamforming_z0.1.png").exists()


def test_cli_preset_and_run(tmp_path):
    out = tmp_path / "fig5"
    assert cli_main(["preset", "fig5", "--out", str(out), "--write-config"]) == 0
    assert (out / "bandwidth.csv").exists()
    assert (out / "preset.ini").exists()
    rerun = tmp_path / "rerun"
    assert cli_main(["run", str(out / "preset.ini"), "--out", str(rerun)]) == 0
    assert (rerun / "bandwidth.csv").read_bytes() == (out / "bandwidth.csv").read_bytes()


def test_cli_gain_curve_small(tmp_path):
    code = cli_main([
        "gain-curve", "--side-length", "0.02", "--frequency", "3e11",
        "--spot-fwhm", "0.004", "--z-start", "0.02", "--z-stop", "0.1",
        "--z-step", "0.02", "--out", str(tmp_path),
    ])
    assert code == 0
    header = (tmp_path / "gain_curve.csv").read_text().splitlines()[0]
    assert header == "z_m,beamforming,beamfocusing,bessel"


def test_cli_oam_crosstalk(tmp_path):
    code = cli_main([
        "oam-crosstalk", "--side-length", "0.008", "--frequency", "1e12",
        "--modes", "0,1", "--z", "0.05", "--out", str(tmp_path),
    ])
    assert code == 0
    assert (tmp_path / "crosstalk.csv").exists()


def test_cli_exit_codes(tmp_path):
    # numeric error: QAM order is not a power of two
    assert cli_main(["capacity", "--rate", "1e12", "--modes", "1", "--qam", "3",
                     "--out", str(tmp_path)]) == 3
    # config error: malformed scenario file
    bad = tmp_path / "bad.ini"
    bad.write_text("[scenario]\nstudy = nonsense\n")
    assert cli_main(["run", str(bad)]) == 2
    # io error: output directory path already taken by a file
    blocker = tmp_path / "blocked"
    blocker.write_text("x")
    assert cli_main(["capacity", "--rate", "1e12", "--modes", "1", "--qam", "4",
                     "--out", str(blocker)]) == 4


def test_cli_threads_flag_does_not_change_output(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out, threads in ((a, "1"), (b, "8")):
        assert cli_main(["preset", "fig4-ci", "--out", str(out),
                         "--threads", threads]) == 0
    for name in ("healing.csv", "caustic_blockage.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_field_slice_csv_schema(tmp_path):
    from thzbeam.io import field_slice_csv

    slice_ = FieldSlice(0.5, np.array([[1 + 2j, 0j], [3j, -1 + 0j]]), 1e-3)
    path = tmp_path / "slice.csv"
    field_slice_csv(path, slice_)
    lines = path.read_text().splitlines()
    assert lines[0] == "x_m,y_m,re,im,intensity"
    assert len(lines) == 5
    x, y, re, im, intensity = (float(v) for v in lines[1].split(","))
    assert (re, im) == (1.0, 2.0)
    assert intensity == pytest.approx(5.0)


def test_phase_map_csv_roundtrip(tmp_path):
    from thzbeam.io import phase_map_csv

    phase = PhaseMap(np.array([[0.25, 1.5], [3.0, 6.0]]))
    path = tmp_path / "phase.csv"
    phase_map_csv(path, phase)
    back = np.array([[float(v) for v in line.split(",")]
                     for line in path.read_text().splitlines()])
    np.testing.assert_allclose(back, phase.values, rtol=1e-8)


def test_output_directory_from_config(tmp_path):
    text = MINIMAL_FIG5 + f"\n[output]\ndirectory = {tmp_path / 'from_config'}\n"
    config = parse_config(text)
    run_scenario(config)
    assert (tmp_path / "from_config" / "bandwidth.csv").exists()


def test_run_without_directory_is_config_error():
    with pytest.raises(ConfigError, match="directory"):
        run_scenario(parse_config(MINIMAL_FIG5))
