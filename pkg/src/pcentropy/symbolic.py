"""Iterated preimages of the discontinuity set and monotone piece counting.

The n-step discontinuity set is computed backwards, one preimage level at a
time, never by forward composition: inverting a monotone branch is
well-conditioned, and the level structure carries enough provenance (first
orbit step that hits the base set, which base point, and the accumulated
monotone direction) to decide in O(1) whether a cut point is a removable
junction of the n-th iterate.  Piece counts then follow from component
counting plus the removable-junction merge rule.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResourceCapExceeded, SubadditivityError
from .estimators import EntropySeries, SeriesRecord, estimate_table
from .intervals import PointSet
from .maps import LEFT, RIGHT, Branch, PcMap, branch_inverse, limit_step

DEFAULT_DELTA_CAP = 2_000_000
_INVERSE_TOL = 1e-15


def _branch_preimages(branch: Branch, ys: np.ndarray) -> np.ndarray:
    """Preimages of each target under one branch closure; NaN where absent."""
    lo, hi = branch.piece.lo, branch.piece.hi
    aff = branch.affine
    if aff is not None:
        a, b = aff
        xs = (ys - b) / a
        pad = 1e-12 * max(1.0, abs(hi - lo))
        xs = np.where((xs >= lo - pad) & (xs <= hi + pad), np.clip(xs, lo, hi), np.nan)
        return xs
    out = np.empty(len(ys))
    for i, y in enumerate(ys):
        x = branch_inverse(branch, float(y), _INVERSE_TOL)
        out[i] = np.nan if x is None else x
    return out


class DeltaTable:
    """Levels f^{-(k-1)}(Delta) with provenance, merged cumulatively per n."""

    def __init__(self, pcmap: PcMap):
        self.map = pcmap
        nd = len(pcmap.delta)
        base = np.asarray(pcmap.delta.points)
        lvl0 = (base, np.zeros(nd, dtype=np.int64), np.arange(nd), np.ones(nd, dtype=np.int64))
        self.levels = [lvl0]  # index k holds f^{-k}(Delta) as (xs, hit, root, dirp)
        empty = (np.empty(0), np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0, np.int64))
        self.cumulative = [empty]  # index n holds merged Delta^n
        if nd:
            self.cumulative.append(lvl0)
        # one-sided limit orbits from each base point: [(value, dirprod), ...]
        self._memo: dict[tuple[int, int], list[tuple[float, int]]] = {}

    # -- construction -------------------------------------------------------

    def _next_level(self):
        ys, _, root, dirp = self.levels[-1]
        xs_all, root_all, dirp_all = [], [], []
        for b in self.map.branches:
            xs = _branch_preimages(b, ys)
            ok = ~np.isnan(xs)
            if ok.any():
                xs_all.append(xs[ok])
                root_all.append(root[ok])
                dirp_all.append(dirp[ok] * b.direction)
        hit_step = len(self.levels)
        if not xs_all:
            empties = (np.empty(0), np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0, np.int64))
            self.levels.append(empties)
            return
        xs = np.concatenate(xs_all)
        root_a = np.concatenate(root_all)
        dirp_a = np.concatenate(dirp_all)
        order = np.argsort(xs, kind="stable")
        xs, root_a, dirp_a = xs[order], root_a[order], dirp_a[order]
        keep = self._dedupe_mask(xs, np.full(len(xs), hit_step, dtype=np.int64))
        hit = np.full(int(keep.sum()), hit_step, dtype=np.int64)
        self.levels.append((xs[keep], hit, root_a[keep], dirp_a[keep]))

    def _dedupe_mask(self, xs: np.ndarray, hit: np.ndarray) -> np.ndarray:
        tol = self.map.tol
        keep = np.ones(len(xs), dtype=bool)
        last = None
        last_i = -1
        for i, x in enumerate(xs):
            if last is not None and x - last <= tol:
                keep[i] = False
                if hit[i] < hit[last_i]:
                    hit[last_i] = hit[i]  # prefer the earliest hit as provenance
            else:
                last, last_i = x, i
        return keep

    def _merge_cumulative(self, n: int):
        cx, ch, cr, cp = self.cumulative[n - 1]
        lx, lh, lr, lp = self.levels[n - 1]
        xs = np.concatenate([cx, lx])
        hit = np.concatenate([ch, lh])
        root = np.concatenate([cr, lr])
        dirp = np.concatenate([cp, lp])
        order = np.lexsort((hit, xs))
        xs, hit, root, dirp = xs[order], hit[order], root[order], dirp[order]
        tol = self.map.tol
        keep = np.ones(len(xs), dtype=bool)
        last = None
        last_i = -1
        for i, x in enumerate(xs):
            if last is not None and x - last <= tol:
                keep[i] = False
                if hit[i] < hit[last_i]:
                    hit[last_i], root[last_i], dirp[last_i] = hit[i], root[i], dirp[i]
            else:
                last, last_i = x, i
        self.cumulative.append((xs[keep], hit[keep], root[keep], dirp[keep]))

    def ensure(self, n: int, cap: int | None = None):
        """Build levels up to n, honoring the point cap as a budget on the set
        size itself (so a cached deeper table still respects a smaller cap)."""
        cap = DEFAULT_DELTA_CAP if cap is None else cap
        if not len(self.map.delta):
            while len(self.cumulative) <= n:
                self.cumulative.append(self.cumulative[0])
            return
        for k in range(1, n + 1):
            if k < len(self.cumulative):
                size = len(self.cumulative[k][0])
            else:
                while len(self.levels) < k:
                    self._next_level()
                size = len(self.cumulative[k - 1][0]) + len(self.levels[k - 1][0])
            if size > cap:
                raise ResourceCapExceeded(
                    f"Delta^{k} holds about {size} points (cap {cap})",
                    completed=k - 1,
                )
            if k >= len(self.cumulative):
                self._merge_cumulative(k)

    # -- queries -------------------------------------------------------------

    def delta_points(self, n: int) -> np.ndarray:
        return self.cumulative[n][0]

    def level_points(self, k: int) -> np.ndarray:
        """f^{-(k-1)}(Delta) for k >= 1."""
        if k - 1 >= len(self.levels):  # no cut set, so no levels were built
            return self.levels[0][0][:0]
        return self.levels[k - 1][0]

    def _limit_seq(self, root: int, side: int, m: int) -> tuple[float, int]:
        seq = self._memo.setdefault((root, side), [(float(self.map.delta.points[root]), 1)])
        if len(seq) <= m:
            v = seq[-1][0]
            d = seq[-1][1]
            s = side
            # recover the current side by replaying the stored prefix direction
            s = side if d > 0 else 1 - side
            for _ in range(len(seq), m + 1):
                v, s, bi = limit_step(self.map, v, s)
                d *= self.map.branches[bi].direction
                seq.append((v, d))
        return seq[m]

    def count_pieces(self, n: int, merge_removable: bool = True) -> int:
        if n < 1:
            raise ValueError("n must be >= 1")
        xs, hit, root, dirp = self.cumulative[n]
        dom = self.map.domain
        tol = self.map.tol
        interior = (xs > dom.lo + tol) & (xs < dom.hi - tol)
        count = int(interior.sum()) + 1
        if not merge_removable or not interior.any():
            return count
        for x_i, h_i, r_i, p_i in zip(xs[interior], hit[interior], root[interior], dirp[interior]):
            m = int(n - h_i)
            s_left = LEFT if p_i > 0 else RIGHT
            v_l, d_l = self._limit_seq(int(r_i), s_left, m)
            v_r, d_r = self._limit_seq(int(r_i), 1 - s_left, m)
            if abs(v_l - v_r) <= tol and d_l == d_r:
                count -= 1
        return count


_TABLES: "weakref.WeakKeyDictionary[PcMap, DeltaTable]" = weakref.WeakKeyDictionary()


def delta_table(pcmap: PcMap) -> DeltaTable:
    table = _TABLES.get(pcmap)
    if table is None:
        table = DeltaTable(pcmap)
        _TABLES[pcmap] = table
    return table


def preimage_set(pcmap: PcMap, targets: PointSet) -> PointSet:
    """All x whose branch-closure limit maps onto a target; merged by tolerance."""
    dom = pcmap.domain
    for t in targets:
        if t < dom.lo - pcmap.tol or t > dom.hi + pcmap.tol:
            raise DomainError(f"target {t!r} outside domain {dom!r}")
    ys = np.asarray(targets.points)
    hits: list[np.ndarray] = []
    for b in pcmap.branches:
        xs = _branch_preimages(b, ys)
        hits.append(xs[~np.isnan(xs)])
    merged = np.concatenate(hits) if hits else np.empty(0)
    return PointSet.of(merged, tol=pcmap.tol)


def delta_n(pcmap: PcMap, n: int, cap: int | None = None) -> PointSet:
    """The n-step discontinuity set (empty at n=0 by convention)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    table = delta_table(pcmap)
    table.ensure(n, cap)
    return PointSet(tuple(table.delta_points(n)), pcmap.tol)


def count_pieces(pcmap: PcMap, n: int, merge_removable: bool = True, cap: int | None = None) -> int:
    """Smallest number of intervals on which the n-th iterate is monotone and
    essentially continuous.

    Components of the domain minus the n-step discontinuity set, minus the
    cut points where both one-sided limits of the iterate agree and the
    monotone direction matches (removable junctions).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    table = delta_table(pcmap)
    table.ensure(n, cap)
    return table.count_pieces(n, merge_removable)


def _check_submultiplicative(counts: dict[int, int]):
    for n in counts:
        for m in counts:
            if n + m in counts and counts[n + m] > counts[n] * counts[m]:
                raise SubadditivityError(
                    f"piece counts are not submultiplicative: c_{n + m}={counts[n + m]} "
                    f"> c_{n}*c_{m}={counts[n] * counts[m]} "
                    "(likely a tolerance undercount upstream)",
                    witness=(n, m),
                )


def ms_entropy(
    pcmap: PcMap,
    n_max: int,
    estimator: str = "slope-fit",
    cap: int | None = None,
    merge_removable: bool = True,
) -> EntropySeries:
    """Piece-count growth series and its entropy estimate."""
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    table = delta_table(pcmap)
    records = []
    truncated = False
    for n in range(1, n_max + 1):
        try:
            table.ensure(n, cap)
        except ResourceCapExceeded:
            truncated = True
            break
        records.append(SeriesRecord(n, table.count_pieces(n, merge_removable)))
    if not records:
        raise ResourceCapExceeded("no level fits under the resource cap", completed=0)
    _check_submultiplicative({r.n: int(r.value) for r in records})
    if truncated:
        records[-1] = SeriesRecord(records[-1].n, records[-1].value, flag="truncated")
    pairs = [(r.n, math.log(r.value)) for r in records]
    estimate, method, estimates = estimate_table(pairs, estimator, fallback=truncated)
    return EntropySeries(
        method="misiurewicz-szlenk",
        records=tuple(records),
        estimate=estimate,
        estimate_method=method,
        estimates=estimates,
        truncated=truncated,
    )


@dataclass(frozen=True)
class FullBranchReport:
    surjective: bool
    no_connection: bool
    checked_to: int
    rows: tuple[tuple[int, int, int, int], ...]  # (n, #Delta^n, expected, c_n)
    counts_ok: bool
    messages: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return self.surjective and self.no_connection and self.counts_ok


def full_branch_check(pcmap: PcMap, n_max: int, cap: int | None = None) -> FullBranchReport:
    """Verify the log-N regime: every branch onto the domain, no preimage of the
    cut set falling back on the cut set, #Delta^n = N^n - 1 and |c_n - N^n| <= 1."""
    dom = pcmap.domain
    messages = []
    surjective = True
    for b in pcmap.branches:
        vmin, vmax = b.image
        if abs(vmin - dom.lo) > 1e-9 or abs(vmax - dom.hi) > 1e-9:
            surjective = False
            messages.append(f"branch on {b.piece!r} has image [{vmin:.17g}, {vmax:.17g}], not the domain")
    table = delta_table(pcmap)
    truncated_at = None
    try:
        table.ensure(n_max, cap)
    except ResourceCapExceeded as exc:
        truncated_at = exc.completed
        messages.append(str(exc))
    checked_to = n_max if truncated_at is None else truncated_at

    no_connection = True
    base = np.asarray(pcmap.delta.points)
    for k in range(2, checked_to + 1):
        level = table.level_points(k)
        if len(level) == 0 or len(base) == 0:
            continue
        idx = np.searchsorted(base, level)
        for j in (np.clip(idx - 1, 0, len(base) - 1), np.clip(idx, 0, len(base) - 1)):
            if (np.abs(base[j] - level) <= pcmap.tol).any():
                no_connection = False
        if not no_connection:
            messages.append(f"f^-{k - 1}(Delta) meets Delta: connection at depth {k - 1}")
            break

    n_branches = pcmap.n_pieces
    rows = []
    counts_ok = True
    for n in range(1, checked_to + 1):
        d_count = len(table.delta_points(n))
        expected = n_branches**n - 1
        c_n = table.count_pieces(n, merge_removable=False)
        rows.append((n, d_count, expected, c_n))
        if surjective and no_connection:
            if d_count != expected or abs(c_n - n_branches**n) > 1:
                counts_ok = False
                messages.append(
                    f"n={n}: #Delta^n={d_count} (expected {expected}), c_n={c_n}"
                )
    return FullBranchReport(
        surjective=surjective,
        no_connection=no_connection,
        checked_to=checked_to,
        rows=tuple(rows),
        counts_ok=counts_ok and surjective and no_connection,
        messages=tuple(messages),
    )
