"""Seeded, sharded search for violations of ``r(M) <= K r(M^Gamma)``."""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import multiprocessing
import os
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction

from . import bipartite as bp
from .conjecture import check_conjecture
from .matrix import ContractError
from .rng import make_rng

REPORT_FORMAT = "rankineq-scan/1"
DEFAULT_DIMS = tuple(itertools.product((2, 3), (2, 3), (2, 3, 4), (2, 3, 4)))


def band_ok(k, dims) -> bool:
    m1, n1, m2, n2 = dims
    return 1 <= k <= min(m1 * n1, m2 * n2)


@dataclass(frozen=True)
class ScanParams:
    ks: tuple
    dims: tuple = DEFAULT_DIMS
    count: int = 1000
    seed: int = 0
    entry_bound: int = bp.DEFAULT_ENTRY_BOUND

    def __post_init__(self):
        object.__setattr__(self, "ks", tuple(sorted(set(int(k) for k in self.ks))))
        object.__setattr__(self, "dims", tuple(sorted(set(tuple(int(x) for x in d) for d in self.dims))))
        if not self.ks or not self.dims:
            raise ContractError("need at least one K and one dimension tuple")
        if any(len(d) != 4 or min(d) < 1 for d in self.dims):
            raise ContractError("dimension tuples are positive (m1, n1, m2, n2)")
        if self.count < 1 or self.entry_bound < 1:
            raise ContractError("count and entry_bound must be positive")
        if not self.cells():
            raise ContractError("no (K, dims) pair satisfies K <= min(m1 n1, m2 n2)")

    def cells(self):
        """``(K, dims)`` pairs inside the admissible band, in a fixed order."""
        return [(k, d) for k in self.ks for d in self.dims if band_ok(k, d)]

    def allocation(self):
        """Instances per cell: ``count`` split as evenly as possible."""
        n = len(self.cells())
        q, r = divmod(self.count, n)
        return [q + (i < r) for i in range(n)]

    def to_json(self) -> dict:
        return {"ks": list(self.ks), "dims": [list(d) for d in self.dims],
                "count": self.count, "seed": self.seed, "entry_bound": self.entry_bound}

    def campaign_id(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _run_instance(params: ScanParams, cell_idx: int, j: int):
    k, dims = params.cells()[cell_idx]
    m = bp.random_schmidt_rank_k(k, *dims, make_rng(params.seed, cell_idx, j), params.entry_bound)
    v = check_conjecture(m)
    if v.schmidt_rank != k:
        raise RuntimeError(f"generator produced Schmidt rank {v.schmidt_rank}, expected {k}")
    return (cell_idx, j, v.rank_M, v.rank_M_gamma, None if v.holds else bp.to_json(m))


def _run_tasks(args):
    params, tasks = args
    return [_run_instance(params, c, j) for c, j in tasks]


@dataclass
class CellReport:
    k: int
    dims: tuple
    ranks: list = field(default_factory=list)  # [rank_M, rank_M_gamma] per instance
    violations: list = field(default_factory=list)

    @property
    def instances(self):
        return len(self.ranks)

    def _ratios(self):
        return [Fraction(r, g) for r, g in self.ranks]

    @property
    def min_ratio(self):
        return min(self._ratios(), default=None)

    @property
    def max_ratio(self):
        return max(self._ratios(), default=None)

    def to_json(self) -> dict:
        def pair(x):
            return None if x is None else [str(x.numerator), str(x.denominator)]
        return {"K": self.k, "dims": list(self.dims), "instances": self.instances,
                "min_ratio": pair(self.min_ratio), "max_ratio": pair(self.max_ratio),
                "ranks": self.ranks, "violations": self.violations}


@dataclass
class ScanReport:
    params: ScanParams
    cells: list

    @property
    def campaign_id(self):
        return self.params.campaign_id()

    @property
    def total_instances(self):
        return sum(c.instances for c in self.cells)

    @property
    def violations(self):
        return [v for c in self.cells for v in c.violations]

    def to_json(self) -> dict:
        return {"format": REPORT_FORMAT, "campaign_id": self.campaign_id,
                "params": self.params.to_json(), "total_instances": self.total_instances,
                "total_violations": len(self.violations),
                "cells": [c.to_json() for c in self.cells]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":")) + "\n"

    def summary_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["K", "m1", "n1", "m2", "n2", "instances", "min_ratio", "max_ratio", "violations"])
        for c in self.cells:
            w.writerow([c.k, *c.dims, c.instances, str(c.min_ratio), str(c.max_ratio), len(c.violations)])
        return buf.getvalue()

    def write(self, out_dir) -> str:
        """Persist under ``<out_dir>/<campaign_id>/``; returns that directory."""
        target = os.path.join(out_dir, self.campaign_id)
        os.makedirs(target, exist_ok=True)
        atomic_write(os.path.join(target, "report.json"), self.dumps())
        atomic_write(os.path.join(target, "summary.csv"), self.summary_csv())
        return target


def atomic_write(path, text: str):
    """Write ``text`` to a temporary sibling and rename it over ``path``."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def reverify(obj) -> bool:
    """Re-parse a persisted instance and confirm it violates the inequality."""
    m = bp.from_json(json.loads(json.dumps(obj)))
    return m.is_exact and not check_conjecture(m).holds


def scan_campaign(params: ScanParams, shards: int = 1) -> ScanReport:
    """Run every instance of ``params`` over ``shards`` worker processes.

    Instance ``j`` of cell ``c`` draws from the sub-stream ``(seed, c, j)``,
    so the report depends only on ``params``; the shard count changes
    wall-clock time, never content.
    """
    if shards < 1:
        raise ContractError("shards must be positive")
    tasks = [(c, j) for c, n in enumerate(params.allocation()) for j in range(n)]
    chunks = [(params, tasks[s::shards]) for s in range(shards)]
    if shards == 1:
        results = _run_tasks(chunks[0])
    else:
        with multiprocessing.Pool(shards) as pool:
            results = [r for part in pool.map(_run_tasks, chunks) for r in part]
    results.sort(key=lambda t: (t[0], t[1]))

    cells = [CellReport(k, d) for k, d in params.cells()]
    for c, _j, r, g, bad in results:
        cells[c].ranks.append([r, g])
        if bad is not None:
            if not reverify(bad):
                raise RuntimeError("violation did not survive re-verification")
            cells[c].violations.append(bad)
    return ScanReport(params, cells)


def load_report(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
