import json

import numpy as np
import pytest

from choquard.cli import ConfigError, RunConfig, main
from choquard.fieldio import MAGIC, FieldFormatError, read_field, write_field
from choquard.grid import Field, gaussian, make_grid
from choquard.model import ProblemSpec, energy
from choquard.sweep import FIELDS, read_csv

VALID_3D = "N=3\nalpha=2\np=2\nM=48\nL=24\nseed=0\n"


def _cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


@pytest.fixture(scope="module")
def solved(tmp_path_factory):
    d = tmp_path_factory.mktemp("solve")
    cfg = d / "run.cfg"
    cfg.write_text(VALID_3D)
    code = main(["solve", "--config", str(cfg), "--out", str(d / "out")])
    return code, d / "out", cfg


# config parsing

def test_config_parse_comments_and_types():
    cfg = RunConfig.parse("# header\nN = 3\nalpha=2  # inline\n\np=2.5\nM=16\nL=8\n")
    assert cfg.values == {"N": 3, "alpha": 2.0, "p": 2.5, "M": 16, "L": 8.0}
    assert cfg.problem().p == 2.5 and cfg.grid(3).h == 0.5


@pytest.mark.parametrize("text", ["N=3\nbogus=1\n", "N=3\nN=3\n", "N=three\n", "just words\n", "=3\n"])
def test_config_rejects(text):
    with pytest.raises(ConfigError):
        RunConfig.parse(text)


def test_config_semantic_errors():
    with pytest.raises(ConfigError):
        RunConfig.parse("N=3\nalpha=2\n").problem()
    with pytest.raises(ConfigError):
        RunConfig.parse("N=3\nalpha=2\np=2\nterms=1:2\n").problem()
    with pytest.raises(ConfigError):
        RunConfig.parse("N=3\nalpha=0\np=2\n").problem()
    with pytest.raises(ConfigError):
        RunConfig.parse("M=33\nL=8\n").grid(3)
    with pytest.raises(ConfigError):
        RunConfig.parse("max_iters=0\n").solver()
    with pytest.raises(ConfigError):
        RunConfig.parse("t_min=2\nt_max=1\n").t_grid()
    with pytest.raises(ConfigError):
        RunConfig.parse("formats=csv,xml\n").formats()


def test_config_terms_and_overrides():
    cfg = RunConfig.parse("N=2\nalpha=1\nterms=1:2.5,0.5:3\nM=16\nL=8\nM2=32\n")
    assert cfg.problem().nonlinearity.terms == ((1.0, 2.5), (0.5, 3.0))
    assert cfg.grid(2).M == 32 and cfg.solver(seed=7).seed == 7


# field file

def test_field_roundtrip(tmp_path):
    g = make_grid(3, 16, 7.5)
    u = Field(g, np.random.default_rng(0).normal(size=g.shape))
    write_field(tmp_path / "f.field", u, 1.7, ((1.0, 2.5),))
    v, meta = read_field(tmp_path / "f.field")
    assert v.grid == g and np.array_equal(v.values, u.values)
    assert meta["alpha"] == 1.7 and meta["terms"] == ((1.0, 2.5),)
    raw = meta["raw"]
    assert raw["p"] == "2.5" and raw["dtype"] == "<f8" and "xi=k/L" in raw["dft"]
    blob = (tmp_path / "f.field").read_bytes()
    assert blob.startswith(MAGIC)
    tail = np.frombuffer(blob[-g.size * 8:], dtype="<f8")
    assert np.array_equal(tail, u.values.ravel())


def test_field_rejects(tmp_path):
    g = make_grid(2, 8, 8.0)
    write_field(tmp_path / "ok.field", gaussian(g), 1.0, ((1.0, 2.0),))
    blob = (tmp_path / "ok.field").read_bytes()
    (tmp_path / "magic.field").write_bytes(b"XXXX" + blob[4:])
    (tmp_path / "short.field").write_bytes(blob[:-8])
    (tmp_path / "nohdr.field").write_bytes(MAGIC + b"N=2\n")
    for name in ("magic", "short", "nohdr"):
        with pytest.raises(FieldFormatError):
            read_field(tmp_path / f"{name}.field")


# solve

def test_solve_valid(solved):
    code, out, _ = solved
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["status"] == "converged" and summary["certificate"]["passed"]
    assert summary["residual_rel"] <= 1e-8 and summary["energy"] > 0
    assert summary["problem"] == {"N": 3, "alpha": 2.0, "p": 2.0}


def test_solve_out_of_range(tmp_path):
    cfg = _cfg(tmp_path, "N=3\nalpha=1\np=4.5\nM=32\nL=16\n")
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "o")]) == 3
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["status"] in ("degenerate_vanishing", "degenerate_spreading")


def test_solve_certificate_failure(tmp_path):
    # the L=16 box clips the tail enough to break the 1e-4 Pohozaev check
    cfg = _cfg(tmp_path, "N=3\nalpha=2\np=2\nM=32\nL=16\n")
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "o")]) == 4
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["status"] == "certificate_failed"
    assert summary["certificate"]["violations"] == ["pohozaev"]


def test_solve_config_errors(tmp_path):
    assert main(["solve", "--config", _cfg(tmp_path, "N=3\nalpah=2\n")]) == 2
    assert main(["solve", "--config", str(tmp_path / "missing.cfg")]) == 2
    assert main(["solve", "--config", _cfg(tmp_path, "N=3\nalpha=2\nterms=1:2,1:3\nM=16\nL=8\n", "t.cfg")]) == 2
    assert main(["frobnicate"]) == 2


def test_solve_deterministic(tmp_path):
    cfg = _cfg(tmp_path, "N=2\nalpha=1\np=2.5\nM=64\nL=16\nt0=0.1\n")
    runs = []
    for k in range(2):
        assert main(["solve", "--config", cfg, "--out", str(tmp_path / f"r{k}"), "--seed", "4"]) == 0
        s = json.loads((tmp_path / f"r{k}" / "summary.json").read_text())
        s.pop("wall_time_s")
        runs.append(s)
    assert runs[0] == runs[1] and runs[0]["seed"] == 4
    assert (tmp_path / "r0" / "solution.field").read_bytes() == (tmp_path / "r1" / "solution.field").read_bytes()


# path

def test_path_from_solution(solved, tmp_path):
    _, out, cfg = solved
    assert main(["path", str(out / "solution.field"), "--config", str(cfg), "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "path.csv").read_text().splitlines()
    assert lines[0] == "t,energy" and len(lines) == 98
    data = np.array([[float(x) for x in line.split(",")] for line in lines[1:]])
    k = int(np.argmax(data[:, 1]))
    assert k == 48 and data[k, 0] == pytest.approx(1.0, rel=1e-14)
    assert data[-1, 1] < 0
    info = json.loads((tmp_path / "path_summary.json").read_text())
    assert info["solution_like"]


def test_path_roundtrip_energy(solved):
    _, out, _ = solved
    u, meta = read_field(out / "solution.field")
    summary = json.loads((out / "summary.json").read_text())
    e = energy(u, ProblemSpec(3, meta["alpha"], ProblemSpec.power(3, 2.0, 2.0).nonlinearity))
    assert e == pytest.approx(summary["energy"], rel=1e-12)


def test_path_n2_spliced(tmp_path):
    cfg = _cfg(tmp_path, "N=2\nalpha=1\np=2.5\nM=64\nL=16\nt0=0.1\n")
    assert main(["solve", "--config", cfg, "--out", str(tmp_path)]) == 0
    assert main(["path", str(tmp_path / "solution.field"), "--config", cfg, "--out", str(tmp_path / "p")]) == 0
    rows = (tmp_path / "p" / "path_n2.csv").read_text().splitlines()
    assert rows[0] == "t,energy,branch"
    first = rows[1].split(",")
    assert float(first[0]) == 0.0 and float(first[1]) == 0.0 and first[2] == "ramp"


def test_path_errors(solved, tmp_path):
    _, out, _ = solved
    field = str(out / "solution.field")
    assert main(["path", str(tmp_path / "nope.field")]) == 2
    assert main(["path", field, "--config", _cfg(tmp_path, "M=32\n")]) == 2
    assert main(["path", field, "--config", _cfg(tmp_path, "alpha=1\n", "a.cfg")]) == 2
    (tmp_path / "junk.field").write_bytes(b"not a field")
    assert main(["path", str(tmp_path / "junk.field")]) == 2


# sweep

def test_sweep_ok(tmp_path):
    cfg = _cfg(tmp_path, "points=2,1,2.0; 2,1,1.2; 2,1,2.5\nM2=64\nL2=16\n")
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "sweep.csv")
    assert list(rows[0]) == FIELDS and len(rows) == 3
    assert len((tmp_path / "sweep.jsonl").read_text().splitlines()) == 3


def test_sweep_mismatch_exit(tmp_path):
    # under-resolved in-range point trips the degeneracy gate
    cfg = _cfg(tmp_path, "points=2,1,3.0\nM=32\nL=20\nformats=csv\n")
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path)]) == 5
    assert not (tmp_path / "sweep.jsonl").exists()


def test_sweep_errors(tmp_path):
    assert main(["sweep", "--config", _cfg(tmp_path, "points=\nM=16\nL=8\n")]) == 2
    assert main(["sweep", "--config", _cfg(tmp_path, "points=2,1\nM=16\nL=8\n", "b.cfg")]) == 2
    assert main(["sweep", "--config", _cfg(tmp_path, "points=3,1,2\nM2=16\nL2=8\n", "c.cfg")]) == 2


# check

@pytest.mark.parametrize("text,code", [("N=3\nalpha=2\np=2\n", 0), ("N=2\nalpha=1\np=1.4\n", 3),
                                       ("N=3\nalpha=0.0\np=2\n", 2), ("N=3\nalpha=1\np=4.5\n", 3)])
def test_check(tmp_path, capsys, text, code):
    assert main(["check", "--config", _cfg(tmp_path, text)]) == code
    if code == 0:
        out = capsys.readouterr().out
        line = next(x for x in out.splitlines() if x.startswith("existence interval"))
        lo, hi = (float(v) for v in line.split("(")[1].rstrip(")").split(","))
        assert (lo, hi) == pytest.approx((5 / 3, 5.0), rel=1e-15) and "overall: pass" in out
