import json
import os

import pytest

from rankineq import bipartite as bp
from rankineq import scan
from rankineq.conjecture import ConjectureVerdict
from rankineq.matrix import ContractError
from rankineq.scan import ScanParams, scan_campaign

SMALL = ScanParams(ks=(2, 3), dims=((2, 2, 2, 2), (2, 3, 3, 2), (3, 3, 4, 4)), count=60, seed=11)


def test_report_is_independent_of_shard_plan():
    one = scan_campaign(SMALL, 1).dumps()
    assert scan_campaign(SMALL, 3).dumps() == one
    assert scan_campaign(SMALL, 1).dumps() == one


def test_report_contents():
    r = scan_campaign(SMALL)
    assert r.total_instances == 60
    assert not r.violations
    cells = r.to_json()["cells"]
    assert [(c["K"], c["dims"]) for c in cells] == [(k, list(d)) for k, d in SMALL.cells()]
    for c in cells:
        assert c["instances"] == len(c["ranks"]) == 10
        num, den = (int(x) for x in c["min_ratio"])
        assert num <= c["K"] * den
        for rm, rg in c["ranks"]:
            assert rm <= c["K"] * rg


def test_cells_outside_band_are_dropped():
    p = ScanParams(ks=(4,), dims=((2, 2, 2, 2), (1, 1, 2, 2)), count=5)
    assert p.cells() == [(4, (2, 2, 2, 2))]
    with pytest.raises(ContractError):
        ScanParams(ks=(5,), dims=((2, 2, 2, 2),))
    with pytest.raises(ContractError):
        ScanParams(ks=(2,), count=0)


def test_campaign_id():
    assert SMALL.campaign_id() == ScanParams(ks=(3, 2), dims=tuple(reversed(SMALL.dims)), count=60, seed=11).campaign_id()
    assert SMALL.campaign_id() != ScanParams(ks=(2, 3), dims=SMALL.dims, count=60, seed=12).campaign_id()


def test_persistence_layout(tmp_path):
    r = scan_campaign(SMALL)
    target = r.write(tmp_path)
    assert sorted(os.listdir(target)) == ["report.json", "summary.csv"]
    assert os.path.basename(target) == SMALL.campaign_id()
    with open(os.path.join(target, "report.json")) as fh:
        assert fh.read() == r.dumps()
    rows = open(os.path.join(target, "summary.csv")).read().splitlines()
    assert rows[0].startswith("K,m1,n1,m2,n2")
    assert len(rows) == 1 + len(SMALL.cells())
    # rewriting is idempotent and leaves no temporary files
    r.write(tmp_path)
    assert sorted(os.listdir(target)) == ["report.json", "summary.csv"]


def test_atomic_write_keeps_old_file_on_failure(tmp_path, monkeypatch):
    path = tmp_path / "x.json"
    scan.atomic_write(path, "old")

    def boom(*a, **k):
        raise OSError("disk full")

    monkeypatch.setattr(scan.os, "replace", boom)
    with pytest.raises(OSError):
        scan.atomic_write(path, "new")
    assert path.read_text() == "old"
    assert os.listdir(tmp_path) == ["x.json"]


def _always_violated(m, tolerance=None):
    return ConjectureVerdict(bp.schmidt_rank(m), 99, 1, False, None, True)


def test_violations_are_persisted_and_reverified(monkeypatch, tmp_path):
    monkeypatch.setattr(scan, "check_conjecture", _always_violated)
    p = ScanParams(ks=(2,), dims=((2, 2, 2, 2),), count=3, seed=1)
    r = scan_campaign(p)
    assert len(r.violations) == 3
    stored = json.loads(open(os.path.join(r.write(tmp_path), "report.json")).read())
    inst = stored["cells"][0]["violations"][0]
    assert bp.from_json(inst) == bp.random_schmidt_rank_k(2, 2, 2, 2, 2, scan.make_rng(1, 0, 0))


def test_unconfirmed_violation_is_rejected(monkeypatch):
    calls = {"n": 0}
    real = scan.check_conjecture

    def flaky(m, tolerance=None):
        calls["n"] += 1
        return _always_violated(m) if calls["n"] == 1 else real(m)

    monkeypatch.setattr(scan, "check_conjecture", flaky)
    with pytest.raises(RuntimeError):
        scan_campaign(ScanParams(ks=(2,), dims=((2, 2, 2, 2),), count=1))
