"""Constructions the entropy identities quantify over: iterates, piecewise
affine conjugations, and restriction to invariant regions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvarianceError, MapValidationError
from .expr import Compose, PiecewiseAffine, Var
from .intervals import Interval, PointSet, RegionSet, components_of_complement
from .maps import (
    LEFT,
    RIGHT,
    PcMap,
    build_map,
    evaluate,
    evaluate_many,
    identity_map,
    limit_step,
)
from .symbolic import delta_n


@dataclass(frozen=True)
class PlHomeo:
    """Continuous piecewise-affine bijection between two compact intervals."""

    nodes: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.nodes) < 2:
            raise ValueError("need at least two nodes")
        xs = [p[0] for p in self.nodes]
        ys = [p[1] for p in self.nodes]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("node abscissas must be strictly increasing")
        up = all(b > a for a, b in zip(ys, ys[1:]))
        down = all(b < a for a, b in zip(ys, ys[1:]))
        if not (up or down):
            raise ValueError("node ordinates must be strictly monotone")

    @property
    def xs(self) -> tuple[float, ...]:
        return tuple(p[0] for p in self.nodes)

    @property
    def ys(self) -> tuple[float, ...]:
        return tuple(p[1] for p in self.nodes)

    @property
    def increasing(self) -> bool:
        return self.nodes[1][1] > self.nodes[0][1]

    @property
    def domain(self) -> tuple[float, float]:
        return (self.nodes[0][0], self.nodes[-1][0])

    @property
    def codomain(self) -> tuple[float, float]:
        lo, hi = self.nodes[0][1], self.nodes[-1][1]
        return (lo, hi) if lo < hi else (hi, lo)

    def __call__(self, v):
        return np.interp(v, self.xs, self.ys)

    def inverse(self) -> "PlHomeo":
        pairs = sorted((y, x) for x, y in self.nodes)
        return PlHomeo(tuple(pairs))

    def as_expr(self, arg=None) -> PiecewiseAffine:
        return PiecewiseAffine(arg if arg is not None else Var(), self.xs, self.ys)


def iterate_map(pcmap: PcMap, k: int, validation_grid: int = 65, cap: int | None = None) -> PcMap:
    """The k-th iterate as a map in its own right: pieces are the components of
    the domain minus the k-step cut set, branches the k-fold compositions."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return identity_map((pcmap.domain.lo, pcmap.domain.hi), tol=pcmap.tol)
    if k == 1:
        return pcmap
    cuts = delta_n(pcmap, k, cap)
    comps = components_of_complement(pcmap.domain, cuts)
    rows = []
    for comp in comps:
        probe = _interior_probe(pcmap, comp, k)
        v = probe
        seq = []
        for _ in range(k):
            bi = pcmap.piece_index(v)
            seq.append(bi)
            v = evaluate(pcmap, v)
        expr = pcmap.branches[seq[0]].expr
        inc = pcmap.branches[seq[0]].increasing
        for bi in seq[1:]:
            expr = Compose(pcmap.branches[bi].expr, expr)
            inc = inc == pcmap.branches[bi].increasing
        rows.append((comp.lo, comp.hi, expr, inc))
    return build_map(
        (pcmap.domain.lo, pcmap.domain.hi),
        rows,
        at_delta=pcmap.at_delta,
        tol=pcmap.tol,
        validation_grid=validation_grid,
    )


def _interior_probe(pcmap: PcMap, comp: Interval, k: int) -> float:
    for frac in (0.5, 0.381966, 0.618034, 0.271828, 0.707107):
        x = comp.lo + frac * comp.diameter
        v, ok = x, True
        for _ in range(k):
            if pcmap._delta_index_near(v) is not None:
                ok = False
                break
            v = evaluate(pcmap, v)
        if ok:
            return x
    raise MapValidationError(f"cannot probe component {comp!r} away from the cut set")


def conjugate_map(pcmap: PcMap, phi: PlHomeo, validation_grid: int = 129) -> PcMap:
    """Change of coordinates g = phi o f o phi^-1 with the cut set mapped along."""
    dlo, dhi = phi.domain
    if abs(dlo - pcmap.domain.lo) > 1e-9 or abs(dhi - pcmap.domain.hi) > 1e-9:
        raise MapValidationError(
            f"phi domain [{dlo:g}, {dhi:g}] does not match the map domain {pcmap.domain!r}"
        )
    inv = phi.inverse()
    phi_e, inv_e = phi.as_expr(), inv.as_expr()
    rows = []
    for b in pcmap.branches:
        ya = float(phi(b.piece.lo))
        yb = float(phi(b.piece.hi))
        lo, hi = (ya, yb) if ya < yb else (yb, ya)
        expr = Compose(phi_e, Compose(b.expr, inv_e))
        rows.append((lo, hi, expr, b.increasing))
    at_delta = pcmap.at_delta
    if not phi.increasing:
        at_delta = "right" if at_delta == "left" else "left"
    return build_map(
        phi.codomain,
        rows,
        at_delta=at_delta,
        tol=pcmap.tol,
        validation_grid=validation_grid,
    )


@dataclass(frozen=True)
class InvarianceReport:
    region: RegionSet
    grid: int
    checked_points: int
    boundary_limits_ok: bool

    def __str__(self):
        return (
            f"invariance verified on {self.checked_points} grid points of {self.region!r}; "
            f"one-sided limits at interior cut points stay inside: {self.boundary_limits_ok}"
        )


@dataclass(frozen=True)
class RestrictedMap:
    """A map together with a verified (pseudo-)invariant region."""

    pcmap: PcMap
    region: RegionSet
    report: InvarianceReport

    def as_pcmap(self, validation_grid: int = 257) -> PcMap:
        """The restriction as a map on its own interval (single-part regions)."""
        if len(self.region.parts) != 1:
            raise MapValidationError("only single-interval regions restrict to a pc-map")
        part = self.region.parts[0]
        inner = PointSet.of(
            [d for d in self.pcmap.delta if part.lo + self.pcmap.tol < d < part.hi - self.pcmap.tol],
            tol=self.pcmap.tol,
        )
        comps = components_of_complement(Interval.closed(part.lo, part.hi), inner)
        rows = []
        for comp in comps:
            mid = 0.5 * (comp.lo + comp.hi)
            b = self.pcmap.branches[self.pcmap.piece_index(mid)]
            rows.append((comp.lo, comp.hi, b.expr, b.increasing))
        return build_map(
            (part.lo, part.hi),
            rows,
            at_delta=self.pcmap.at_delta,
            tol=self.pcmap.tol,
            validation_grid=validation_grid,
        )

    def bowen_entropy(self, n_range, eps_schedule, grid, metric=None):
        from .bowen import bowen_entropy

        return bowen_entropy(self.pcmap, self.region, n_range, eps_schedule, grid, metric)

    def cover_entropy(self, cover, n_max, **kw):
        from .covers import cover_entropy

        return cover_entropy(self.pcmap, cover, n_max, region=self.region, **kw)


def restrict_map(pcmap: PcMap, region: RegionSet, grid: int = 10_000, tol: float = 1e-9) -> RestrictedMap:
    """Verify the region is (pseudo-)invariant and return the restriction handle.

    Grid-based: failures are certain (a witness point is reported), passes are
    up to the verification tolerance.  Points of the cut set inside the region
    pass when at least one one-sided limit stays in the region.
    """
    if region.is_empty():
        raise InvarianceError("region is empty")
    dom = pcmap.domain
    for p in region.parts:
        if p.lo < dom.lo - tol or p.hi > dom.hi + tol:
            raise InvarianceError(f"region part {p!r} is not inside the domain {dom!r}")
    checked = 0
    for part in region.parts:
        xs = np.linspace(part.lo, part.hi, max(2, grid))
        if len(pcmap.delta):
            d = pcmap._delta_arr
            idx = np.searchsorted(d, xs)
            near = np.zeros(len(xs), dtype=bool)
            for jj in (np.clip(idx - 1, 0, len(d) - 1), np.clip(idx, 0, len(d) - 1)):
                near |= np.abs(d[jj] - xs) <= pcmap.tol
            xs = xs[~near]
        vals = evaluate_many(pcmap, xs)
        ok = region.contains_many(vals, tol=tol)
        if not ok.all():
            i = int(np.argmax(~ok))
            raise InvarianceError(
                f"f({xs[i]:.17g}) = {vals[i]:.17g} leaves the region",
                witness=float(xs[i]),
            )
        checked += len(xs)
    limits_ok = True
    for d in pcmap.delta:
        if not region.contains(d, tol=tol):
            continue
        vl, _, _ = limit_step(pcmap, d, LEFT)
        vr, _, _ = limit_step(pcmap, d, RIGHT)
        if not (region.contains(vl, tol=tol) or region.contains(vr, tol=tol)):
            raise InvarianceError(
                f"both one-sided limits at {d:.17g} ({vl:.17g}, {vr:.17g}) leave the region",
                witness=float(d),
            )
    report = InvarianceReport(region, grid, checked, limits_ok)
    return RestrictedMap(pcmap, region, report)
