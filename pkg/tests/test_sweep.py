import csv
import json
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from stqdots.device import MaterialParams
from stqdots.sweep import ConfigError, RunConfig, SweepAxis, parse_config, serialize_config
from stqdots.sweep.cli import EXIT_CONFIG, EXIT_OK, EXIT_PARTIAL, main
from stqdots.sweep.runner import run_couplings, run_crosstalk, run_exchange, run_spectrum, to_csv

GOLDEN = Path(__file__).parent / "golden"

SWEEP = "[sweep]\naxis = eps_L\nmin = -2\nmax = 2\nsteps = 3\n"


def test_defaults_applied():
    cfg = parse_config("[geometry]\n" + SWEEP)
    assert cfg.hbar_omega0 == 5.0 and cfg.a == 22.0 and cfg.R == 58.0
    assert cfg.material == MaterialParams()
    assert cfg.mode == "hubbard-nn" and cfg.capacitive == "coupled"
    assert cfg.sweeps == (SweepAxis("eps_L", -2.0, 2.0, 3),)


@pytest.mark.parametrize("text,line,words", [
    ("[geometry]\na = -1\n" + SWEEP, 2, "a > 0"),
    ("[geometry]\na = 30\nR = 20\n" + SWEEP, 3, "R > a"),
    ("[geometry]\ncolour = red\n" + SWEEP, 2, "unknown key"),
    ("[weather]\nrain = 1\n" + SWEEP, 1, "unknown section"),
    ("[sweep]\naxis = eps_L\nmin = 0\nmax = 1\nsteps = 1\n", 5, "steps >= 2"),
    ("[sweep]\naxis = eps_L\nmin = 1\nmax = 1\nsteps = 4\n", 4, "min == max"),
    ("[sweep]\naxis = eps_L\nmin = 0\nsteps = 4\n", 1, "missing required key 'max'"),
    ("[sweep]\naxis = B\nmin = 0\nmax = 1\nsteps = 4\n", 2, "axis must be"),
    ("[model]\nmode = exact\n" + SWEEP, 2, "mode must be"),
    ("[geometry]\na = abc\n" + SWEEP, 2, "cannot parse"),
    ("[geometry]\na = 1\na = 2\n" + SWEEP, 3, "duplicate key"),
    ("[sweep]\naxis = a\nmin = 10\nmax = 70\nsteps = 4\n", 4, "R > a"),
])
def test_config_errors_are_line_precise(text, line, words):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.line == line
    assert words in str(exc.value)


def test_missing_sweep_section():
    with pytest.raises(ConfigError, match=r"\[sweep\]"):
        parse_config("[geometry]\na = 20\n")


det = st.floats(-10, 10, allow_nan=False)


@st.composite
def configs(draw):
    a = draw(st.floats(5, 40))
    R = a + draw(st.floats(1, 100))
    axis = draw(st.sampled_from(["eps_L", "eps_R", "hbar_omega0"]))
    lo = draw(st.floats(0.5, 5) if axis == "hbar_omega0" else det)
    hi = lo + draw(st.floats(0.1, 5))
    sweeps = (SweepAxis(axis, lo, hi, draw(st.integers(2, 50))),)
    if draw(st.booleans()):
        other = "eps_R" if axis == "eps_L" else "eps_L"
        sweeps += (SweepAxis(other, -1.0, draw(st.floats(0.0, 3.0).filter(lambda x: x != -1.0)), 3),)
    return RunConfig(MaterialParams(draw(st.floats(0.01, 1)), draw(st.floats(1, 20))), a, R,
                     draw(st.floats(0.5, 20)), draw(det), draw(det),
                     draw(st.sampled_from(["hubbard-nn", "full"])), draw(st.sampled_from(["coupled", "hartree"])),
                     sweeps, draw(st.sampled_from([None, "out/run.csv"])), draw(st.integers(1, 36)),
                     draw(st.floats(0.01, 1.0)))


@settings(max_examples=60)
@given(configs())
def test_serialize_round_trip(cfg):
    again = parse_config(serialize_config(cfg))
    assert again == cfg
    assert serialize_config(again) == serialize_config(cfg)


def test_spectrum_records():
    cfg = parse_config("[geometry]\nR = 60\n" + SWEEP)
    res = run_spectrum(cfg)
    assert len(res.rows) == 3 and len(res.columns) == len(res.rows[0])
    row = dict(zip(res.columns, res.rows[0]))
    assert row["E0"] <= row["E1"]
    assert row["E_SS"] == pytest.approx(row["E0"])


def test_exchange_flags_invalid_instead_of_nan():
    cfg = parse_config("[sweep]\naxis = R\nmin = 36\nmax = 60\nsteps = 4\n[detuning]\neps_L = -2\n")
    res = run_exchange(cfg)
    text = to_csv(res)
    assert "nan" not in text.lower()
    col = res.columns.index("J_ST_12_invalid")
    assert res.rows[0][col] == 1 and res.rows[-1][col] == 0
    assert res.masked >= 1


def test_exchange_axis_restricted():
    with pytest.raises(ConfigError):
        run_exchange(parse_config("[sweep]\naxis = eps_R\nmin = 0\nmax = 1\nsteps = 2\n"))


def test_couplings_columns():
    res = run_couplings(parse_config("[sweep]\naxis = R\nmin = 48\nmax = 66\nsteps = 3\n"))
    assert res.columns == ["R", "J_eff_23", "J_eff_23_invalid", "alpha0", "chi", "chi_invalid"]
    chi = [r[4] for r in res.rows]
    assert chi[0] > chi[1] > chi[2] > 0


def test_crosstalk_grid_mirror_columns():
    text = SWEEP + "[sweep2]\naxis = eps_R\nmin = -2\nmax = 2\nsteps = 3\n[geometry]\nR = 44\n"
    res = run_crosstalk(parse_config(text))
    J = {(r[0], r[1]): (r[2], r[3]) for r in res.rows}
    for (x, y), (j12, j34) in J.items():
        assert j34 == pytest.approx(J[(-y, -x)][0], abs=1e-9)
    with pytest.raises(ConfigError):
        run_crosstalk(parse_config(SWEEP))


def test_csv_header_and_precision():
    res = run_spectrum(parse_config(SWEEP))
    lines = to_csv(res).splitlines()
    assert lines[0] == "# schema=1"
    rows = list(csv.reader(lines[1:]))
    assert rows[0] == res.columns
    # 17 significant digits recover the doubles exactly
    assert float(rows[1][1]) == res.rows[0][1]


def test_cli_exit_codes(tmp_path):
    good = tmp_path / "good.ini"
    good.write_text(SWEEP)
    out = tmp_path / "out.csv"
    assert main(["spectrum", "--config", str(good), "--out", str(out)]) == EXIT_OK
    meta = json.loads(Path(str(out) + ".json").read_text())
    assert meta["rows"] == 3 and meta["command"] == "spectrum" and "wall_time_s" in meta
    assert parse_config(meta["config_text"]) == parse_config(SWEEP)

    bad = tmp_path / "bad.ini"
    bad.write_text("[geometry]\na = -1\n" + SWEEP)
    assert main(["spectrum", "--config", str(bad), "--out", str(out)]) == EXIT_CONFIG
    assert main(["spectrum", "--config", str(tmp_path / "missing.ini"), "--out", str(out)]) == EXIT_CONFIG
    assert main(["spectrum", "--config", str(good)]) == EXIT_CONFIG  # no output path
    assert main(["spectrum", "--config", str(good), "--out", str(out), "--threads", "0"]) == EXIT_CONFIG

    partial = tmp_path / "partial.ini"
    partial.write_text("[sweep]\naxis = R\nmin = 36\nmax = 60\nsteps = 3\n[detuning]\neps_L = -2\n")
    assert main(["exchange", "--config", str(partial), "--out", str(out)]) == EXIT_PARTIAL


def test_cli_mode_override(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text(SWEEP)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["exchange", "--config", str(cfg), "--out", str(a), "--mode", "full"])
    main(["exchange", "--config", str(cfg), "--out", str(b)])
    assert a.read_text() != b.read_text()
    assert json.loads(Path(str(a) + ".json").read_text())["config"]["model"]["mode"] == "full"


@pytest.mark.parametrize("threads", [1, 4])
def test_golden_spectrum(tmp_path, threads):
    out = tmp_path / "spectrum.csv"
    code = main(["spectrum", "--config", str(GOLDEN / "spectrum_default.ini"), "--out", str(out),
                 "--threads", str(threads)])
    assert code == EXIT_OK
    assert out.read_bytes() == (GOLDEN / "spectrum_default.csv").read_bytes()
