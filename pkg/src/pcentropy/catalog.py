"""Built-in maps with known entropy values, used as the test corpus.

Every entry is stored as map-definition text so that ``catalog show`` output
round-trips through the parser unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

from .maps import PcMap, parse_map

# closest doubles to (sqrt(5)-1)/2 and its complement; the irrational split
# keeps preimage points from ever colliding, stressing tolerance handling
GOLDEN_SPLIT = 0.6180339887498949
GOLDEN_SHIFT = 0.3819660112501051


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    source: str
    known_entropy: float | None
    provenance: str

    @cached_property
    def map(self) -> PcMap:
        return parse_map(self.source)


def _mod_n_source(n: int) -> str:
    lines = [f"# multiply-by-{n} map, right-continuous at the cuts", "domain = [0, 1]", "at_delta = right"]
    for j in range(n):
        lines.append(f"piece ({j}/{n}, {j + 1}/{n}): {n}*x - {j} inc")
    return "\n".join(lines) + "\n"


_ENTRIES = [
    CatalogEntry(
        "mod2",
        _mod_n_source(2),
        math.log(2),
        "doubling map with a jump at 1/2; each branch onto [0,1], entropy log 2",
    ),
    CatalogEntry(
        "mod3",
        _mod_n_source(3),
        math.log(3),
        "multiply-by-3 map; three full branches, entropy log 3",
    ),
    CatalogEntry(
        "mod5",
        _mod_n_source(5),
        math.log(5),
        "multiply-by-5 map; five full branches, entropy log 5",
    ),
    CatalogEntry(
        "tent",
        "domain = [0, 1]\n"
        "piece (0, 1/2): 2*x inc\n"
        "piece (1/2, 1): 2 - 2*x dec\n",
        math.log(2),
        "symmetric tent map; both branches onto [0,1], entropy log 2",
    ),
    CatalogEntry(
        "asym-tent",
        "domain = [0, 1]\n"
        "piece (0, 0.3): x/0.3 inc\n"
        "piece (0.3, 1): (1 - x)/0.7 dec\n",
        math.log(2),
        "tent with the peak at 0.3: unequal piece lengths, still two full branches",
    ),
    CatalogEntry(
        "lorenz-full",
        "domain = [0, 1]\n"
        "piece (0, 1/2): (2*x)^2 inc\n"
        "piece (1/2, 1): (2*x - 1)^2 inc\n",
        math.log(2),
        "one-dimensional Lorenz-type map: two increasing nonlinear branches onto [0,1]",
    ),
    CatalogEntry(
        "anzie",
        "domain = [0, 1]\n"
        "piece (0, 0.3): 7*x/3 inc\n"
        "piece (0.3, 0.7): 0.55 + 1.125*(x - 0.3) inc\n"
        "piece (0.7, 0.85): 0.7 + 2*(x - 0.7) inc\n"
        "piece (0.85, 1): 1 - 2*(x - 0.85) dec\n",
        None,
        "four monotone branches; the last two form a full tent on [0.7, 1], so the "
        "entropy is at least log 2",
    ),
    CatalogEntry(
        "iet2-golden",
        "domain = [0, 1]\n"
        "at_delta = right\n"
        f"piece (0, {GOLDEN_SPLIT!r}): x + {GOLDEN_SHIFT!r} inc\n"
        f"piece ({GOLDEN_SPLIT!r}, 1): x - {GOLDEN_SPLIT!r} inc\n",
        0.0,
        "two-interval exchange with the golden split: injective, entropy zero",
    ),
    CatalogEntry(
        "pw-contraction",
        "domain = [0, 1]\n"
        "at_delta = right\n"
        "piece (0, 1/2): 0.5*x + 0.5 inc\n"
        "piece (1/2, 1): 0.45 - 0.4*x dec\n",
        0.0,
        "injective piecewise contraction (slopes .5 and -.4, disjoint branch images); "
        "entropy zero",
    ),
    CatalogEntry(
        "identity",
        "domain = [0, 1]\npiece (0, 1): x inc\n",
        0.0,
        "identity map; entropy zero",
    ),
]

_REGISTRY = {e.name: e for e in _ENTRIES}


def names() -> list[str]:
    return [e.name for e in _ENTRIES]


def get(name: str) -> CatalogEntry:
    entry = _REGISTRY.get(name)
    if entry is None:
        raise KeyError(f"unknown catalog map {name!r}; available: {', '.join(names())}")
    return entry
