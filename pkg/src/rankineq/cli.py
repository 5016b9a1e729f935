"""``rankineq`` command line.

Exit codes: 0 success, 1 a verified violation of ``r(M) <= K r(M^Gamma)``,
2 usage, input or I/O errors, 3 an internal consistency check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass

from . import bipartite as bp
from . import conjecture as cj
from . import matrix as mx
from . import states as st
from .matrix import ContractError, DimensionError, MatrixFormatError
from .rng import make_rng
from .scan import DEFAULT_DIMS, ScanParams, atomic_write, reverify, scan_campaign

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class Violation(Exception):
    pass


@dataclass(frozen=True)
class Config:
    entry_bound: int = bp.DEFAULT_ENTRY_BOUND
    tolerance: float | None = None
    shards: int = 1
    out_dir: str = "reports"
    seed: int = 0

    def __post_init__(self):
        if self.entry_bound < 1:
            raise UsageError("--entry-bound must be positive")
        if self.tolerance is not None and not self.tolerance > 0:
            raise UsageError("--tolerance must be positive")
        if self.shards < 1:
            raise UsageError("--shards must be positive")
        if self.seed < 0:
            raise UsageError("--seed must be non-negative")

    def ensure_out_dir(self):
        try:
            os.makedirs(self.out_dir, exist_ok=True)
        except OSError as exc:
            raise UsageError(f"cannot create output directory {self.out_dir}: {exc.strerror}") from None
        if not os.access(self.out_dir, os.W_OK):
            raise UsageError(f"output directory {self.out_dir} is not writable")


def _ints(text, n, what):
    try:
        vals = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"{what} must be {n} comma-separated integers") from None
    if len(vals) != n or min(vals) < 1:
        raise argparse.ArgumentTypeError(f"{what} must be {n} comma-separated positive integers")
    return vals


def dims4(text):
    return _ints(text, 4, "--dims")


def dims3(text):
    return _ints(text, 3, "--dims")


def dims2(text):
    return _ints(text, 2, "--split")


# --------------------------------------------------------------------------
# I/O helpers


def _read_json(path):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}") from None


def _emit(text: str, out=None):
    if out:
        try:
            atomic_write(out, text)
        except OSError as exc:
            raise UsageError(f"cannot write {out}: {exc.strerror}") from None
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _numeric(m, args):
    if args.float:
        return mx.to_float(m)
    if args.tolerance is not None:
        raise UsageError("--tolerance applies only with --float")
    return m


def _load_bipartite(args, exact_only=False) -> bp.BipartiteMatrix:
    m = bp.from_json(_read_json(args.input))
    if exact_only and args.float:
        raise UsageError(f"{args.command} needs exact arithmetic")
    data = _numeric(m.data, args)
    return m if data is m.data else bp.BipartiteMatrix(*m.dims, data)


def _load_state(args) -> st.TripartiteState:
    s = st.from_json(_read_json(args.input))
    rho = _numeric(s.rho, args)
    return s if rho is s.rho else st.TripartiteState(*s.dims, rho)


def _verdict_line(v: cj.ConjectureVerdict) -> str:
    word = "holds" if v.holds else "VIOLATED"
    return f"K={v.schmidt_rank}, rank_M={v.rank_M}, rank_M_gamma={v.rank_M_gamma}, {word}\n"


def _raise_if_violation(m, v):
    if not v.holds:
        if m.is_exact:
            raise Violation(f"r(M) = {v.rank_M} > {v.schmidt_rank} * {v.rank_M_gamma}")
        sys.stderr.write("warning: float ranks violate the inequality; not certified, rerun exact\n")


# --------------------------------------------------------------------------
# commands


def cmd_schmidt(args, cfg):
    m = _load_bipartite(args)
    v = cj.check_conjecture(m, cfg.tolerance)
    sys.stdout.write(_verdict_line(v))
    if args.decompose:
        _emit(_dump(bp.decomposition_to_json(bp.schmidt_decompose(m, cfg.tolerance))), args.out)
    _raise_if_violation(m, v)


def cmd_check(args, cfg):
    m = _load_bipartite(args)
    v = cj.check_conjecture(m, cfg.tolerance)
    _emit(_dump(v.to_json()), args.out)
    _raise_if_violation(m, v)


def cmd_shortcut(args, cfg):
    m = _load_bipartite(args, exact_only=True)
    try:
        chain = cj.lemma_sr_max_chain(m)
    except cj.NotApplicable as exc:
        raise UsageError(f"shortcut not applicable: {exc}") from None
    out = {"schmidt_rank": chain.schmidt_rank, "rank_M": chain.rank_M,
           "max_block_rank": chain.max_block_rank, "chain_value": chain.chain_value,
           "rank_M_gamma": chain.rank_M_gamma, "orientation": chain.orientation,
           "holds": chain.holds}
    _emit(_dump(out), args.out)
    if not chain.holds:
        raise AssertionError("shortcut chain failed")


def cmd_reduce(args, cfg):
    m = _load_bipartite(args, exact_only=True)
    c = cj.reduce_to_canonical(m)
    if not c.check_invariants(m):
        raise AssertionError("canonical form failed its invariant check")
    _emit(_dump(c.to_json()), args.out)


def cmd_bounds(args, cfg):
    m = _load_bipartite(args, exact_only=True)
    b = cj.verify_appendix_bounds(cj.reduce_to_canonical(m))
    _emit(_dump({**b.to_json(), "sandwich_holds": b.sandwich_holds}), args.out)


def cmd_detect(args, cfg):
    m = _load_bipartite(args, exact_only=True)
    tag = cj.detect_special_case(m)
    out = tag.to_json()
    out["verified"] = cj.verify_special_case(m, tag)
    v = cj.check_conjecture(m)
    out["conjecture_holds"] = v.holds
    _emit(_dump(out), args.out)
    _raise_if_violation(m, v)


def cmd_gen(args, cfg):
    dims = args.dims or (2, 2, 2, 2)
    rng = make_rng(cfg.seed)
    if args.case == "w_zero":
        if dims[:2] != (2, 2):
            raise UsageError("w_zero instances are 2x2-block: use --dims 2,2,m2,n2")
        m = cj.random_w_zero_instance(dims[2], dims[3], rng, cfg.entry_bound)
    elif args.case:
        m = cj.random_special_case(args.case, args.k, *dims, rng, cfg.entry_bound)
    else:
        m = bp.random_schmidt_rank_k(args.k, *dims, rng, cfg.entry_bound)
    _emit(_dump(bp.to_json(m)), args.out)


def cmd_scan(args, cfg):
    params = ScanParams(ks=tuple(args.k), dims=tuple(args.dims or DEFAULT_DIMS),
                        count=args.count, seed=cfg.seed, entry_bound=cfg.entry_bound)
    cfg.ensure_out_dir()
    report = scan_campaign(params, cfg.shards)
    try:
        target = report.write(cfg.out_dir)
    except OSError as exc:
        raise UsageError(f"cannot write report: {exc.strerror}") from None
    with open(os.path.join(target, "report.json"), encoding="utf-8") as fh:
        persisted = json.load(fh)
    confirmed = [v for c in persisted["cells"] for v in c["violations"] if reverify(v)]
    sys.stdout.write(f"campaign {report.campaign_id}: {report.total_instances} instances, "
                     f"{len(confirmed)} violations -> {target}\n")
    if confirmed:
        raise Violation(f"{len(confirmed)} verified violation(s) in {target}/report.json")


def cmd_partial_trace(args, cfg):
    s = _load_state(args)
    _emit(_dump(mx.to_json(st.partial_trace(s, args.keep))), args.out)


def cmd_ppt(args, cfg):
    rho = _numeric(mx.from_json(_read_json(args.input)), args)
    _emit(_dump({"ppt": st.is_ppt(rho, args.split, cfg.tolerance)}), args.out)


def _triple_json(t: st.RankTriple) -> dict:
    return {"r_AB": t.r_AB, "r_AC": t.r_AC, "r_BC": t.r_BC, "inequality_holds": t.inequality_holds}


def cmd_gen_state(args, cfg):
    dA, dB, dC = args.dims or (2, 2, 2)
    rng = make_rng(cfg.seed)
    fam = args.family
    if fam == "random":
        s = st.random_tripartite(dA, dB, dC, args.rank, rng, cfg.entry_bound)
    elif fam == "reduced":
        s = st.random_with_reduced_rank(dA, dB, dC, args.rank, rng, args.purification_rank, cfg.entry_bound)
    elif fam == "two-two":
        s = st.engineered_two_two_state(dA, dB, dC, rng, entry_bound=cfg.entry_bound)
    else:
        s = st.engineered_support_state(dA, dB, args.rank, rng, dC=dC, entry_bound=cfg.entry_bound)
    _emit(_dump(st.to_json(s)), args.out)


def cmd_states(args, cfg):
    if args.input:
        s = _load_state(args)
        t = st.rank_triple(s, cfg.tolerance)
        _emit(_dump(_triple_json(t)), args.out)
        if not t.inequality_holds and t.r_AB <= 3 and s.rho.is_exact:
            raise Violation("r_AB r_AC < r_BC with r_AB <= 3")
        return
    if args.float or args.tolerance is not None:
        raise UsageError("population studies run in exact arithmetic")
    dA, dB, dC = args.dims or (3, 3, 3)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["seed", "index", "dA", "dB", "dC", "r_AB", "r_AC", "r_BC", "inequality_holds",
                "ppt_BC", "npt_BC", "rank_bound_used", "distillable"])
    bad = 0
    for i in range(args.count):
        rng = make_rng(cfg.seed, i)
        if args.r_ab is not None:
            s = st.random_with_reduced_rank(dA, dB, dC, args.r_ab, rng, args.purification_rank, cfg.entry_bound)
        else:
            s = st.random_tripartite(dA, dB, dC, args.rank, rng, cfg.entry_bound)
        v = st.distillability_screen(s)
        t = v.ranks
        bad += (not t.inequality_holds) and t.r_AB <= 3
        w.writerow([cfg.seed, i, dA, dB, dC, t.r_AB, t.r_AC, t.r_BC, t.inequality_holds,
                    not v.npt, v.npt, v.rank_bound_used, v.distillable])
    _emit(buf.getvalue(), args.out)
    if bad:
        raise Violation(f"{bad} state(s) with r_AB <= 3 violate r_AB r_AC >= r_BC")


def cmd_screen(args, cfg):
    s = _load_state(args)
    _emit(_dump(st.distillability_screen(s, cfg.tolerance).to_json()), args.out)


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    num = common.add_mutually_exclusive_group()
    num.add_argument("--exact", dest="float", action="store_false", help="exact arithmetic (default)")
    num.add_argument("--float", dest="float", action="store_true", help="floating-point arithmetic")
    common.add_argument("--tolerance", type=float, help="relative singular-value cutoff (float mode)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--entry-bound", type=int, default=bp.DEFAULT_ENTRY_BOUND,
                        help="random entries have parts in [-B, B]")
    common.add_argument("--out", help="output file (scan: report directory)")
    common.set_defaults(float=False)

    p = argparse.ArgumentParser(prog="rankineq", description="Exact rank checks for bipartite matrices and tripartite states.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, input_=True):
        sp = sub.add_parser(name, parents=[common], help=help_)
        if input_:
            sp.add_argument("input", help="JSON file, or - for stdin")
        sp.set_defaults(func=fn)
        return sp

    sp = add("schmidt", cmd_schmidt, "Schmidt rank and the rank inequality")
    sp.add_argument("--decompose", action="store_true", help="also emit the Kronecker-sum terms")
    add("check", cmd_check, "evaluate r(M) <= K r(M^Gamma)")
    add("shortcut", cmd_shortcut, "block-rank chain for maximal Schmidt rank")
    add("reduce", cmd_reduce, "canonical form of a 2x2-block Schmidt-rank-3 matrix")
    add("bounds", cmd_bounds, "rank bounds from the canonical form")
    add("detect", cmd_detect, "special block layouts")

    sp = add("gen", cmd_gen, "random bipartite matrix", input_=False)
    sp.add_argument("--k", type=int, default=3, help="Schmidt rank")
    sp.add_argument("--dims", type=dims4, help="m1,n1,m2,n2")
    sp.add_argument("--case", choices=[cj.FULL_ROW, cj.ROW_S_MINUS_1, cj.SINGLE_PER_ROW, "w_zero"])

    sp = add("scan", cmd_scan, "randomized campaign", input_=False)
    sp.add_argument("--k", type=int, action="append", required=True, help="Schmidt rank (repeatable)")
    sp.add_argument("--dims", type=dims4, action="append", help="m1,n1,m2,n2 (repeatable)")
    sp.add_argument("--count", type=int, default=1000, help="total instances")
    sp.add_argument("--shards", type=int, default=1, help="worker processes")

    sp = add("partial-trace", cmd_partial_trace, "reduced state on a pair")
    sp.add_argument("--keep", choices=sorted(st.PAIRS), required=True)
    sp = add("ppt", cmd_ppt, "PPT test of a bipartite density matrix")
    sp.add_argument("--split", type=dims2, required=True, help="d1,d2")

    sp = add("gen-state", cmd_gen_state, "random tripartite state", input_=False)
    sp.add_argument("--dims", type=dims3, help="dA,dB,dC")
    sp.add_argument("--family", choices=["random", "reduced", "two-two", "support"], default="random")
    sp.add_argument("--rank", type=int, default=1, help="rank of rho (random) or of rho_AB (reduced, support)")
    sp.add_argument("--purification-rank", type=int)

    sp = sub.add_parser("states", parents=[common], help="rank triple of a state, or a population CSV")
    sp.add_argument("input", nargs="?", help="state JSON; omit to sample a population")
    sp.add_argument("--dims", type=dims3, help="dA,dB,dC")
    sp.add_argument("--count", type=int, default=100)
    sp.add_argument("--rank", type=int, default=2, help="rank of rho when --r-ab is not given")
    sp.add_argument("--r-ab", type=int, help="certified rank of rho_AB")
    sp.add_argument("--purification-rank", type=int)
    sp.set_defaults(func=cmd_states)

    add("screen", cmd_screen, "rank-based distillability screen")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = Config(entry_bound=args.entry_bound, tolerance=args.tolerance,
                     shards=getattr(args, "shards", 1), out_dir=args.out or "reports", seed=args.seed)
        if getattr(args, "count", 1) < 1:
            raise UsageError("--count must be positive")
        args.func(args, cfg)
    except Violation as exc:
        sys.stderr.write(f"VIOLATION: {exc}\n")
        return EXIT_VIOLATION
    except MatrixFormatError as exc:
        sys.stderr.write(f"error: invalid input: field {exc}\n")
        return EXIT_USAGE
    except (UsageError, ContractError, DimensionError, cj.NotApplicable) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (AssertionError, RuntimeError) as exc:
        sys.stderr.write(f"internal check failed: {exc}\n")
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
