from __future__ import annotations

import csv
import json
from pathlib import Path

import jsonschema
import numpy as np
import pytest
import scipy.io
import scipy.sparse as sp
import yaml
from hypothesis import given, strategies as st

from compactqed import cli
from compactqed.basis import CouplingParams, GroupParams
from compactqed.hamiltonian import build_pure_gauge_magnetic
from compactqed.torus import TERMLIST_SCHEMA

DATA = Path(__file__).parent / "data"


def _run(*argv: str) -> int:
    return cli.main(list(argv))


def _read_csv(path: Path) -> list[dict]:
    with path.open() as fh:
        return list(csv.DictReader(fh))


@given(
    inv_g2=st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=4),
    l=st.lists(st.integers(1, 12), min_size=1, max_size=3),
    rep=st.sampled_from(["electric", "magnetic", "electric-cyclic"]),
    workers=st.integers(1, 8),
)
def test_config_yaml_round_trip(inv_g2, l, rep, workers):
    cfg = cli.RunConfig(command="scan-plaquette", inv_g2=inv_g2, l=l,
                        representation=rep, workers=workers)
    again = cli.RunConfig.from_yaml(cfg.to_yaml())
    assert again == cfg
    assert again.to_yaml() == cfg.to_yaml()


def test_flags_override_config_file(tmp_path):
    conf = tmp_path / "run.yaml"
    conf.write_text(yaml.safe_dump({"l": [3], "inv_g2": [2.0], "tol": 1e-9}))
    cfg, _ = cli.resolve_config(["scan-plaquette", "--config", str(conf), "--l", "1-2"])
    assert cfg.l == [1, 2]
    assert cfg.inv_g2 == [2.0] and cfg.tol == 1e-9
    assert cfg.kappa == cli.RunConfig(command="x").kappa


def test_grid_parsers():
    assert cli._ints("1-3,7") == [1, 2, 3, 7]
    assert cli._floats("logspace:-1:1:3") == pytest.approx([0.1, 1.0, 10.0])


def test_usage_error_names_field(tmp_path, capsys):
    conf = tmp_path / "bad.yaml"
    conf.write_text(yaml.safe_dump({"inv_g2": [1.0, -2.0]}))
    assert _run("scan-plaquette", "--config", str(conf)) == cli.EXIT_USAGE
    assert "inv_g2/1" in capsys.readouterr().err
    conf.write_text(yaml.safe_dump({"colour": "red"}))
    assert _run("scan-plaquette", "--config", str(conf)) == cli.EXIT_USAGE
    with pytest.raises(cli.UsageError, match="at L"):
        cli.RunConfig.from_dict({"command": "scan-plaquette", "L": [0]})


def test_refuses_to_overwrite_without_force(tmp_path):
    out = tmp_path / "o"
    args = ["scan-plaquette", "--inv-g2", "1", "--l", "1", "--out", str(out)]
    assert _run(*args) == cli.EXIT_OK
    before = (out / "plaquette.csv").read_bytes()
    assert _run(*args) == cli.EXIT_USAGE
    assert (out / "plaquette.csv").read_bytes() == before
    assert _run(*args, "--force") == cli.EXIT_OK


def _export(tmp_path: Path, *extra: str) -> Path:
    out = tmp_path / "exp"
    assert _run("export-operator", "--representation", "magnetic", "--l", "1", "--L", "1",
                "--inv-g2", "1", "--out", str(out), *extra) == cli.EXIT_OK
    return out


def test_export_round_trip_is_bit_exact(tmp_path):
    out = _export(tmp_path)
    back = sp.csr_matrix(scipy.io.mmread(out / "operator.mtx"))
    ref = build_pure_gauge_magnetic(GroupParams(1, 1), CouplingParams(1.0)).total
    diff = (back - sp.csr_matrix(ref)).tocoo()
    assert back.shape == (27, 27)
    assert np.all(diff.data == 0)


def test_export_golden_digest(tmp_path):
    out = _export(tmp_path)
    summary = json.loads((out / "manifest.json").read_text())["summary"]
    assert summary["nnz"] == 405
    assert summary["sha256"] == (
        "66b76d566768a90ce58f64ccbf681c6676e682cc4b91f40ed0198fd5a02c6d56")


def test_export_resource_cap(tmp_path):
    assert _run("export-operator", "--l", "5", "--max-dim", "100",
                "--out", str(tmp_path / "x")) == cli.EXIT_RESOURCE
    manifest = json.loads((tmp_path / "x" / "manifest.json").read_text())
    assert manifest["status"] == cli.EXIT_RESOURCE and "exceeds" in manifest["error"]


def test_torus_termlist_validates(tmp_path):
    out = tmp_path / "t"
    assert _run("torus-gen", "--Nx", "3", "--Ny", "3", "--l", "1", "--inv-g2", "1",
                "--out", str(out)) == cli.EXIT_OK
    terms = json.loads((out / "termlist.json").read_text())
    jsonschema.validate(terms, TERMLIST_SCHEMA)
    assert len(terms["terms"]) == 155
    assert not (out / "hamiltonian.mtx").exists()


def test_runs_are_deterministic(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert _run("truncation-analysis", "--l", "2", "--L", "3", "--out", str(out)) == 0
        outs.append(out)
    for f in ("shell_populations.csv", "truncation_energies.json"):
        assert (outs[0] / f).read_bytes() == (outs[1] / f).read_bytes()
    m = [json.loads((o / "manifest.json").read_text()) for o in outs]
    for d in m:
        d.pop("started"), d.pop("seconds"), d["config"].pop("out")
    assert m[0] == m[1]


@pytest.mark.slow
def test_scan_matches_golden_plaquette_curve(tmp_path):
    golden = _read_csv(DATA / "golden_plaquette_l10.csv")
    grid = ",".join(r["inv_g2"] for r in golden)
    out = tmp_path / "g"
    assert _run("scan-plaquette", "--inv-g2", grid, "--l", "10", "--representation",
                "electric", "--out", str(out)) == cli.EXIT_OK
    rows = _read_csv(out / "plaquette.csv")
    assert len(rows) == len(golden)
    for row, ref in zip(rows, golden):
        assert float(row["inv_g2"]) == float(ref["inv_g2"])
        assert float(row["value"]) == pytest.approx(float(ref["plaquette"]), abs=1e-9)
        assert float(row["energy"]) == pytest.approx(float(ref["energy"]), rel=1e-11)
