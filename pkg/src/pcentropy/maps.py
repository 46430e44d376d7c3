"""Piecewise continuous interval maps with user-declared monotone branches.

A map is a compact interval tiled by the closures of finitely many pieces,
one continuous strictly monotone branch per piece.  The boundaries between
pieces form the discontinuity set; values there follow a one-sided-limit
convention that, by construction, never influences piece counting or cover
refinement.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, ExprParseError, MapValidationError, MonotonicityError
from .expr import Expr, Var, as_affine, compile_expr, eval_expr, parse_constant, parse_expression
from .intervals import Interval, PointSet

DEFAULT_MAP_TOL = 1e-10
IMAGE_TOL = 1e-9
VALIDATION_GRID = 257


@dataclass(frozen=True)
class Branch:
    piece: Interval  # open at interior boundaries, closed at domain endpoints
    expr: Expr
    increasing: bool

    @cached_property
    def fn(self):
        return compile_expr(self.expr)

    @cached_property
    def affine(self) -> tuple[float, float] | None:
        return as_affine(self.expr)

    @cached_property
    def image(self) -> tuple[float, float]:
        """One-sided limit values at the piece ends, sorted (closure of image)."""
        lo_val = eval_expr(self.expr, self.piece.lo)
        hi_val = eval_expr(self.expr, self.piece.hi)
        return (min(lo_val, hi_val), max(lo_val, hi_val))

    @property
    def direction(self) -> int:
        return 1 if self.increasing else -1


@dataclass(frozen=True)
class PcMap:
    domain: Interval
    branches: tuple[Branch, ...]
    at_delta: str = "left"  # value convention at discontinuities: left|right limit
    tol: float = DEFAULT_MAP_TOL

    @property
    def n_pieces(self) -> int:
        return len(self.branches)

    @cached_property
    def delta(self) -> PointSet:
        cuts = [b.piece.hi for b in self.branches[:-1]]
        return PointSet(tuple(cuts), self.tol)

    @cached_property
    def _delta_arr(self) -> np.ndarray:
        return np.asarray(self.delta.points)

    def piece_index(self, x: float) -> int:
        return int(bisect.bisect_right(self.delta.points, x))

    def _delta_index_near(self, x: float) -> int | None:
        arr = self.delta.points
        i = bisect.bisect_left(arr, x)
        for j in (i - 1, i):
            if 0 <= j < len(arr) and abs(arr[j] - x) <= self.tol:
                return j
        return None


def _check_in_domain(pcmap: PcMap, x: float) -> float:
    d = pcmap.domain
    if x < d.lo or x > d.hi:
        if x < d.lo - IMAGE_TOL or x > d.hi + IMAGE_TOL:
            raise DomainError(f"{x!r} outside domain {d!r}")
        x = min(max(x, d.lo), d.hi)
    return x


def evaluate(pcmap: PcMap, x: float) -> float:
    """Map value at x; at a discontinuity this is the configured one-sided limit."""
    x = _check_in_domain(pcmap, x)
    j = pcmap._delta_index_near(x)
    if j is not None:
        b = pcmap.branches[j if pcmap.at_delta == "left" else j + 1]
        v = eval_expr(b.expr, pcmap.delta.points[j])
    else:
        v = float(pcmap.branches[pcmap.piece_index(x)].fn(x))
    return _check_in_domain(pcmap, v)


def evaluate_many(pcmap: PcMap, xs: np.ndarray) -> np.ndarray:
    """Vectorized evaluation for points away from the discontinuity set."""
    idx = np.searchsorted(pcmap._delta_arr, xs, side="right")
    out = np.empty_like(xs, dtype=float)
    for i, b in enumerate(pcmap.branches):
        m = idx == i
        if m.any():
            out[m] = b.fn(xs[m])
    return np.clip(out, pcmap.domain.lo, pcmap.domain.hi)


def evaluate_orbit(pcmap: PcMap, x: float, n: int) -> list[float]:
    """[x, f(x), ..., f^(n-1)(x)]."""
    if n < 1:
        raise ValueError("orbit length must be >= 1")
    out = [_check_in_domain(pcmap, x)]
    for _ in range(n - 1):
        out.append(evaluate(pcmap, out[-1]))
    return out


LEFT, RIGHT = 0, 1


def limit_step(pcmap: PcMap, v: float, side: int) -> tuple[float, int, int]:
    """One-sided limit of f at v from ``side``; returns (value, new side, branch).

    The new side is where the image values approach their limit from, which
    flips under a decreasing branch.  This is the primitive that makes every
    piece/cover computation independent of the value convention at
    discontinuities.
    """
    v = _check_in_domain(pcmap, v)
    j = pcmap._delta_index_near(v)
    if j is not None:
        bi = j if side == LEFT else j + 1
        v = pcmap.delta.points[j]
    elif v - pcmap.domain.lo <= pcmap.tol:
        bi, v = 0, pcmap.domain.lo
    elif pcmap.domain.hi - v <= pcmap.tol:
        bi, v = pcmap.n_pieces - 1, pcmap.domain.hi
    else:
        bi = pcmap.piece_index(v)
    b = pcmap.branches[bi]
    value = _check_in_domain(pcmap, eval_expr(b.expr, v))
    new_side = side if b.increasing else 1 - side
    return value, new_side, bi


def limit_orbit(pcmap: PcMap, x: float, side: int, n: int) -> tuple[float, int, int]:
    """n-step one-sided limit orbit; returns (value, side, direction product)."""
    v, s, d = x, side, 1
    for _ in range(n):
        v, s, bi = limit_step(pcmap, v, s)
        d *= pcmap.branches[bi].direction
    return v, s, d


def orbit_avoids_delta(pcmap: PcMap, x: float, horizon: int) -> bool:
    """True iff the first ``horizon`` orbit points miss the discontinuity set."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    v = _check_in_domain(pcmap, x)
    for _ in range(horizon):
        if pcmap._delta_index_near(v) is not None:
            return False
        v = evaluate(pcmap, v)
    return True


def branch_inverse(branch: Branch, y: float, tol: float = 1e-12) -> float | None:
    """Solve branch(x) = y on the piece closure; None when y is out of range.

    Affine branches are solved in closed form; anything else falls back to
    bisection with bracket width at most ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi = branch.piece.lo, branch.piece.hi
    aff = branch.affine
    if aff is not None:
        a, b = aff
        x = (y - b) / a
        if x < lo - tol or x > hi + tol:
            return None
        return min(max(x, lo), hi)
    vmin, vmax = branch.image
    if y < vmin - tol or y > vmax + tol:
        return None
    y = min(max(y, vmin), vmax)
    f = branch.fn
    sgn = 1.0 if branch.increasing else -1.0
    flo, fhi = sgn * float(f(lo)), sgn * float(f(hi))
    ty = sgn * y
    if not flo <= fhi:
        raise MonotonicityError(
            f"branch values at piece ends contradict declared direction on {branch.piece!r}"
        )
    if ty <= flo:
        return lo
    if ty >= fhi:
        return hi
    a, b = lo, hi
    for _ in range(200):
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        fm = sgn * float(f(mid))
        if fm < flo - tol or fm > fhi + tol:
            raise MonotonicityError(f"bracket violation at {mid!r} on {branch.piece!r}")
        if fm < ty:
            a = mid
        else:
            b = mid
        if b - a <= tol:
            break
    return 0.5 * (a + b)


# ---------------------------------------------------------------------------
# construction and validation


def _infer_direction(expr: Expr, piece: Interval) -> bool:
    lo_val = eval_expr(expr, piece.lo)
    hi_val = eval_expr(expr, piece.hi)
    if lo_val == hi_val:
        raise MapValidationError(f"branch on {piece!r} is not strictly monotone")
    return hi_val > lo_val


def _validate_branch(domain: Interval, branch: Branch, grid: int):
    xs = np.linspace(branch.piece.lo, branch.piece.hi, max(grid, 8))
    with np.errstate(all="ignore"):
        try:
            vals = branch.fn(xs)
        except ZeroDivisionError:
            raise MapValidationError(f"branch on {branch.piece!r} divides by zero") from None
    vals = np.asarray(vals, dtype=float)
    if vals.shape != xs.shape:
        vals = np.full_like(xs, float(vals))
    if not np.isfinite(vals).all():
        raise MapValidationError(f"branch on {branch.piece!r} is not evaluable everywhere")
    diffs = np.diff(vals)
    if branch.increasing and not (diffs > 0).all():
        raise MapValidationError(
            f"branch on {branch.piece!r} is not strictly increasing on the validation grid"
        )
    if not branch.increasing and not (diffs < 0).all():
        raise MapValidationError(
            f"branch on {branch.piece!r} is not strictly decreasing on the validation grid"
        )
    if vals.min() < domain.lo - IMAGE_TOL or vals.max() > domain.hi + IMAGE_TOL:
        raise MapValidationError(
            f"branch image on {branch.piece!r} escapes the domain "
            f"([{vals.min():.17g}, {vals.max():.17g}] vs {domain!r})"
        )


def build_map(
    domain: tuple[float, float],
    pieces: list[tuple[float, float, Expr, bool | None]],
    at_delta: str = "left",
    tol: float = DEFAULT_MAP_TOL,
    validation_grid: int = VALIDATION_GRID,
) -> PcMap:
    """Assemble and validate a map from (lo, hi, expr, increasing?) rows."""
    if at_delta not in ("left", "right"):
        raise MapValidationError(f"at_delta must be 'left' or 'right', got {at_delta!r}")
    dlo, dhi = domain
    if not dlo < dhi:
        raise MapValidationError("domain must have non-empty interior")
    if not pieces:
        raise MapValidationError("a map needs at least one piece")
    rows = sorted(pieces, key=lambda r: r[0])
    if rows[0][0] != dlo:
        raise MapValidationError("first piece must start at the domain's left endpoint")
    if rows[-1][1] != dhi:
        raise MapValidationError("last piece must end at the domain's right endpoint")
    for (a, b, _, _), (c, _, _, _) in zip(rows, rows[1:]):
        if not a < b:
            raise MapValidationError(f"piece ({a!r}, {b!r}) has empty interior")
        if c < b:
            raise MapValidationError(f"pieces overlap at {c!r}")
        if c > b:
            raise MapValidationError(f"pieces leave a gap between {b!r} and {c!r}")
    if not rows[-1][0] < rows[-1][1]:
        raise MapValidationError("piece has empty interior")

    dom = Interval.closed(dlo, dhi)
    branches = []
    n = len(rows)
    for i, (a, b, expr, inc) in enumerate(rows):
        piece = Interval(a, b, lo_open=(i > 0), hi_open=(i < n - 1))
        if inc is None:
            inc = _infer_direction(expr, piece)
        branches.append(Branch(piece, expr, inc))
    pcmap = PcMap(dom, tuple(branches), at_delta, tol)
    for br in branches:
        _validate_branch(dom, br, validation_grid)
    return pcmap


def identity_map(domain: tuple[float, float], tol: float = DEFAULT_MAP_TOL) -> PcMap:
    return build_map(domain, [(domain[0], domain[1], Var(), True)], tol=tol)


# ---------------------------------------------------------------------------
# map-definition files

_PIECE_RE = re.compile(r"^piece\s*\((?P<lo>[^,]+),(?P<hi>[^)]+)\)\s*:\s*(?P<body>.+)$")
_DOMAIN_RE = re.compile(r"^domain\s*=\s*\[(?P<lo>[^,]+),(?P<hi>[^\]]+)\]\s*$")
_AT_DELTA_RE = re.compile(r"^at_delta\s*=\s*(?P<side>\w+)\s*$")


def parse_map(source: str, tol: float = DEFAULT_MAP_TOL, validation_grid: int = VALIDATION_GRID) -> PcMap:
    """Parse the map-definition format.

    Header ``domain = [lo, hi]``, optional ``at_delta = left|right``, then one
    ``piece (a, b): <expression> [inc|dec]`` line per branch.  ``#`` starts a
    comment; bounds may be constant expressions such as ``1/3``.
    """
    domain = None
    at_delta = "left"
    pieces: list[tuple[float, float, Expr, bool | None]] = []
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _DOMAIN_RE.match(line)
        if m:
            if domain is not None:
                raise ExprParseError("duplicate domain line", lineno, 1)
            domain = (parse_constant(m.group("lo"), lineno), parse_constant(m.group("hi"), lineno))
            continue
        m = _AT_DELTA_RE.match(line)
        if m:
            at_delta = m.group("side")
            if at_delta not in ("left", "right"):
                raise ExprParseError(f"at_delta must be left or right, got {at_delta!r}", lineno, 1)
            continue
        m = _PIECE_RE.match(line)
        if m:
            if domain is None:
                raise ExprParseError("piece line before domain line", lineno, 1)
            lo = parse_constant(m.group("lo"), lineno)
            hi = parse_constant(m.group("hi"), lineno)
            body = m.group("body").strip()
            inc: bool | None = None
            tail = body.rsplit(None, 1)
            if len(tail) == 2 and tail[1] in ("inc", "dec"):
                body, inc = tail[0], tail[1] == "inc"
            col = raw.index(":") + 2 if ":" in raw else 1
            expr = parse_expression(body, lineno, col)
            pieces.append((lo, hi, expr, inc))
            continue
        raise ExprParseError(f"unrecognized line: {line!r}", lineno, 1)
    if domain is None:
        raise ExprParseError("missing domain line", 1, 1)
    if not pieces:
        raise ExprParseError("no piece lines", 1, 1)
    return build_map(domain, pieces, at_delta=at_delta, tol=tol, validation_grid=validation_grid)
