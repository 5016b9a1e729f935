"""Acceptance suite: twelve criteria at full instance counts and exact arithmetic."""

import itertools
import os

import numpy as np

from rankineq import bipartite as bp
from rankineq import conjecture as cj
from rankineq import matrix as mx
from rankineq import states as sts
from rankineq.matrix import Matrix
from rankineq.rng import make_rng
from rankineq.scan import DEFAULT_DIMS, ScanParams, scan_campaign

from ._acceptance_log import criterion

SHARDS = max(1, min(4, os.cpu_count() or 1))


def _scan(k, count, seed):
    report = scan_campaign(ScanParams(ks=(k,), count=count, seed=seed), SHARDS)
    ratios = [rm * 1.0 / rg for c in report.cells for rm, rg in c.ranks]
    return report, ratios


def test_01_rank_three_suite():
    with criterion(1, "K=3, 10000 instances over all (2..3, 2..3, 2..4, 2..4) dims") as c:
        report, ratios = _scan(3, 10_000, 2024)
        assert report.total_instances == 10_000
        assert {cell.dims for cell in report.cells} == set(DEFAULT_DIMS)
        assert all(cell.k == 3 for cell in report.cells)
        c["detail"] = f"{report.total_instances} instances, {len(report.violations)} violations, max ratio {max(ratios):.3f}"
        assert not report.violations


def test_02_rank_two_suite():
    with criterion(2, "K=2, 5000 instances") as c:
        report, ratios = _scan(2, 5_000, 2025)
        assert report.total_instances == 5_000
        c["detail"] = f"{report.total_instances} instances, {len(report.violations)} violations, max ratio {max(ratios):.3f}"
        assert not report.violations


def test_03_maximal_schmidt_rank_shortcut():
    with criterion(3, "maximal Schmidt rank shortcut, 500 instances at K = m1 n1") as c:
        shapes = [(m1, n1, m2, n2) for m1, n1, m2, n2 in itertools.product((1, 2), (1, 2, 3), (2, 3), (2, 3))
                  if 1 < m1 * n1 <= m2 * n2]
        ok = 0
        for i in range(500):
            dims = shapes[i % len(shapes)]
            m = bp.random_schmidt_rank_k(dims[0] * dims[1], *dims, make_rng(3, i))
            chain = cj.lemma_sr_max_chain(m)
            assert cj.lemma_sr_max_shortcut(m)
            assert chain.chain_value == dims[0] * dims[1] * chain.max_block_rank
            assert chain.chain_value >= chain.rank_M_gamma
            assert chain.rank_M >= chain.max_block_rank
            ok += 1
        c["detail"] = f"{ok}/500 chains verified over {len(shapes)} shapes"


def _canonical_population():
    out = []
    for i in range(500):
        m2, n2 = 2 + i % 3, 2 + (i // 3) % 3
        rng = make_rng(4, i)
        if i % 2:
            out.append(cj.random_w_zero_instance(m2, n2, rng))
        else:
            out.append(bp.random_schmidt_rank_k(3, 2, 2, m2, n2, rng))
    return out


_POPULATION = []


def _population():
    if not _POPULATION:
        _POPULATION.extend(_canonical_population())
    return _POPULATION


def test_04_canonical_form():
    with criterion(4, "canonical form, 500 reductions") as c:
        branches = {cj.W_NONZERO: 0, cj.W_ZERO: 0}
        for m in _population():
            form = cj.reduce_to_canonical(m)
            e = form.certificate
            assert all(mx.rank(f).rank == f.rows for f in (e.U, e.V, e.W, e.X))
            assert bp.apply_local(m, e) == form.N
            assert mx.rank(form.N.data).rank == mx.rank(m.data).rank
            assert bp.schmidt_rank(form.N) == bp.schmidt_rank(m) == 3
            assert form.check_invariants(m)
            assert bp.schmidt_rank(bp.partial_transpose(form.N, "B")) == 3
            branches[form.branch] += 1
        c["detail"] = f"w!=0: {branches[cj.W_NONZERO]}, w=0: {branches[cj.W_ZERO]}"


def test_05_bound_sandwich():
    with criterion(5, "rank bound sandwich on the 500 canonical forms") as c:
        branches = {cj.W_NONZERO: 0, cj.W_ZERO: 0}
        for m in _population():
            b = cj.verify_appendix_bounds(cj.reduce_to_canonical(m))
            assert b.lower_bound_rank_M <= b.rank_M
            assert b.rank_M_gamma <= b.upper_bound_rank_gamma
            assert b.upper_bound_rank_gamma <= 3 * b.lower_bound_rank_M
            branches[b.branch] += 1
        c["detail"] = f"w!=0: {branches[cj.W_NONZERO]}, w=0: {branches[cj.W_ZERO]}"
        assert min(branches.values()) >= 100


def test_06_block_rank_inequalities():
    with criterion(6, "block rank inequalities, 1000 triples with dims <= 6") as c:
        rng = make_rng(6)
        exceptions = 0
        for _ in range(1000):
            p, q, r, s = (int(x) for x in rng.integers(1, 7, size=4))

            def low_rank(rows, cols):
                k = int(rng.integers(0, min(rows, cols) + 1))
                if k == 0:
                    return Matrix.zeros(rows, cols)
                return mx.random_matrix(rows, k, rng, 2) @ mx.random_matrix(k, cols, rng, 2)

            if not cj.block_rank_inequalities(low_rank(p, q), low_rank(r, q), low_rank(r, s)):
                exceptions += 1
        c["detail"] = f"{exceptions} exceptions"
        assert exceptions == 0


def test_07_special_layouts():
    with criterion(7, "special block layouts, 100 instances per case") as c:
        counts = {}
        for case in (cj.FULL_ROW, cj.SINGLE_PER_ROW, cj.ROW_S_MINUS_1):
            for i in range(100):
                s = 2 + i % 2
                m1 = 1 + (i // 2) % 3 if case == cj.FULL_ROW else max(2, s + (i // 2) % 2)
                n1 = s + (i // 4) % 2
                m2, n2 = 2 + i % 2, 2 + (i // 8) % 2
                m = cj.random_special_case(case, s, m1, n1, m2, n2, make_rng(7, i))
                tag = cj.detect_special_case(m)
                assert tag.case == case, (case, i, tag)
                assert cj.verify_special_case(m, tag)
                assert cj.check_conjecture(m).holds
                counts[case] = counts.get(case, 0) + 1
        c["detail"] = ", ".join(f"{k}: {v}" for k, v in counts.items())


def test_08_reduced_rank_tradeoff():
    with criterion(8, "r_AB r_AC >= r_BC on 500 states with r_AB <= 3") as c:
        rng = make_rng(8)
        violations = 0
        seen = set()
        for i in range(500):
            dA, dB, dC = (int(x) for x in rng.integers(1, 4, size=3))
            r = 1 + i % min(3, dA * dB)
            e = 1 + (i // 3) % 4
            if r > dC * e:
                e = -(-r // dC)
            s = sts.random_with_reduced_rank(dA, dB, dC, r, make_rng(8, i), purification_rank=e)
            t = sts.rank_triple(s)
            assert t.r_AB == r <= 3
            violations += not t.inequality_holds
            seen.add((t.r_AB, t.r_AC, t.r_BC))
        c["detail"] = f"{violations} violations, {len(seen)} distinct rank triples"
        assert violations == 0


def test_09_distillability_screen():
    with criterion(9, "distillability screen and PPT sanity") as c:
        for i in range(100):
            s = sts.engineered_two_two_state(2 + i % 3, 2 + (i // 3) % 2, 2 + (i // 6) % 2, make_rng(9, 0, i))
            t = sts.rank_triple(s)
            assert (t.r_AB, t.r_AC) == (2, 2)
            assert mx.rank(sts.partial_trace(s, "BC")).rank <= 4
            v = sts.distillability_screen(s)
            assert v.npt and v.distillable and v.rank_bound_used == sts.RANK_LE_4
        for i in range(100):
            r_ab, dA = [(1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (3, 1), (3, 2)][i % 7]
            s = sts.engineered_support_state(dA, r_ab * dA + i % 2, r_ab, make_rng(9, 1, i), dC=1 + i % 3)
            v = sts.distillability_screen(s)
            m, n = v.support_dims
            t = v.ranks
            assert t.r_AB <= 3 and max(m, n) >= t.r_AB * t.r_AC
            assert t.r_BC <= max(m, n)
        bell = sts.density_from_vectors(Matrix.exact([[1], [0], [0], [1]]))
        assert not sts.is_ppt(bell, (2, 2))
        for i in range(100):
            db, dc = 2 + i % 2, 2 + (i // 2) % 2
            rho = sts.product_state([sts.random_density(db, 1 + i % db, make_rng(9, 2, i)),
                                     sts.random_density(dc, 1 + i % dc, make_rng(9, 3, i))])
            assert sts.is_ppt(rho, (db, dc))
        c["detail"] = "100 rank<=4 checks, 100 rank<=max(m,n) checks, Bell NPT, 100 products PPT"


def test_10_exact_float_agreement():
    with criterion(10, "exact vs float rank on 1000 integer matrices") as c:
        rng = make_rng(10)
        agree, disagreements = 0, []
        for i in range(1000):
            r, k = (int(x) for x in rng.integers(1, 13, size=2))
            a = rng.integers(-9, 10, size=(r, k))
            if i % 2 and r > 1:
                # repeat or negate rows to force rank deficiency
                for row in range(1, r):
                    if rng.random() < 0.4:
                        a[row] = a[int(rng.integers(0, row))] * (1 if rng.random() < 0.5 else -1)
            exact = mx.rank(Matrix.from_ints(a.astype(object)))
            flt = mx.rank(Matrix.from_float(a.astype(float)))
            if exact.rank == flt.rank:
                agree += 1
            else:
                assert mx.verify_certificate(Matrix.from_ints(a.astype(object)), exact)
                disagreements.append((i, exact.rank, flt.rank, exact.pivot_rows, exact.pivot_cols))
        c["detail"] = f"{agree}/1000 agree" + (f"; exact wins on {disagreements}" if disagreements else "")
        assert agree >= 999


def test_11_determinism(tmp_path):
    with criterion(11, "scan reports are byte-identical across reruns") as c:
        params = ScanParams(ks=(2, 3, 4), count=400, seed=11)
        a = scan_campaign(params, 1)
        b = scan_campaign(params, 3)
        pa = a.write(tmp_path / "first")
        pb = b.write(tmp_path / "second")
        for name in ("report.json", "summary.csv"):
            assert (tmp_path / "first" / os.path.basename(pa) / name).read_bytes() == \
                   (tmp_path / "second" / os.path.basename(pb) / name).read_bytes()
        c["detail"] = f"campaign {a.campaign_id}, {a.total_instances} instances, shards 1 vs 3"


def test_12_pure_state_consistency():
    with criterion(12, "pure-state rank identities on 200 states") as c:
        rng = make_rng(12)
        for i in range(200):
            dims = tuple(int(x) for x in rng.integers(1, 4, size=3))
            s = sts.random_tripartite(*dims, 1, make_rng(12, i))
            t = sts.rank_triple(s)
            ra, rb, rc = (mx.rank(s.reduced(x)).rank for x in "ABC")
            assert (t.r_AB, t.r_AC, t.r_BC) == (rc, rb, ra)
        c["detail"] = "200/200 consistent"
