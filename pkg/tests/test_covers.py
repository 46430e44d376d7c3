import math

import numpy as np
import pytest

from pcentropy.catalog import get as catalog_get
from pcentropy.covers import (
    Cover,
    boundary_of_refined_natural_cover,
    cover_entropy,
    domainify_cover,
    lebesgue_number,
    minimal_subcover,
    minimal_subcover_cardinality,
    natural_cover,
    pullback_cover,
    refine_n,
    vee,
)
from pcentropy.errors import NotACoverError
from pcentropy.intervals import Interval, OpenSet, PointSet, RegionSet
from pcentropy.symbolic import delta_n

X = RegionSet.of((0.0, 1.0))


@pytest.fixture(scope="module")
def tent():
    return catalog_get("tent").map


def spans(cover):
    return sorted((p.lo, p.hi) for el in cover.elements for p in el.parts)


class TestNaturalCover:
    def test_tent(self, tent):
        assert spans(natural_cover(tent)) == [(0.0, 0.5), (0.5, 1.0)]

    def test_identity_covers_whole_domain(self):
        ident = catalog_get("identity").map
        nc = natural_cover(ident)
        assert len(nc) == 1
        assert minimal_subcover_cardinality(nc, X) == 1

    def test_mod3_has_three_elements(self):
        assert len(natural_cover(catalog_get("mod3").map)) == 3


class TestVee:
    def test_two_covers(self):
        c = Cover((OpenSet.of((0.0, 0.6)), OpenSet.of((0.4, 1.0))), "a")
        d = Cover((OpenSet.of((0.0, 0.5)), OpenSet.of((0.5, 1.0))), "b")
        w = vee([c, d])
        assert spans(w) == [(0.0, 0.5), (0.4, 0.5), (0.5, 0.6), (0.5, 1.0)]

    def test_identity_element(self, tent):
        c = natural_cover(tent)
        whole = Cover((OpenSet((tent.domain,)),), "X")
        assert set(vee([c, whole]).elements) == set(c.elements)

    def test_self_product_cardinality(self, tent):
        c = natural_cover(tent)
        w = vee([c, c])
        assert set(c.elements) <= set(w.elements)
        assert minimal_subcover_cardinality(w, X, delta_n(tent, 1)) == minimal_subcover_cardinality(
            c, X, delta_n(tent, 1)
        )

    def test_empty_intersections_dropped(self):
        c = Cover((OpenSet.of((0.0, 0.3)),), "a")
        d = Cover((OpenSet.of((0.5, 1.0)),), "b")
        assert len(vee([c, d])) == 0


class TestPullback:
    def test_tent_interval(self, tent):
        pb = pullback_cover(tent, Cover((OpenSet.of((0.4, 0.6)),), "c"), 1)
        assert spans(pb) == [(0.2, 0.3), (0.7, 0.8)]

    def test_j_zero_identity(self, tent):
        c = natural_cover(tent)
        assert set(pullback_cover(tent, c, 0).elements) == set(c.elements)

    def test_identity_map_fixed(self):
        ident = catalog_get("identity").map
        c = Cover((OpenSet.of((0.1, 0.4)), OpenSet.of((0.3, 0.9))), "c")
        for j in (1, 2, 5):
            assert set(pullback_cover(ident, c, j).elements) == set(c.elements)


class TestRefine:
    def test_tent_depth_two_matches_components(self, tent):
        refined = refine_n(tent, natural_cover(tent), 2)
        assert spans(refined) == [(0.0, 0.25), (0.25, 0.5), (0.5, 0.75), (0.75, 1.0)]

    def test_depth_one_is_cover_minus_cuts(self, tent):
        refined = refine_n(tent, natural_cover(tent), 1)
        expected = [el.subtract_points(tent.delta) for el in natural_cover(tent).elements]
        assert set(refined.elements) == set(expected)

    def test_identity_fixed(self):
        ident = catalog_get("identity").map
        single = Cover((OpenSet((ident.domain,)),), "X")
        assert set(refine_n(ident, single, 4).elements) == set(single.elements)
        # with several elements the product picks up self-intersections, but
        # the original elements survive and the minimal cardinality is unchanged
        c = Cover((OpenSet.of((0.0, 0.6)), OpenSet.of((0.5, 1.0))), "c")
        c = domainify_cover(c, ident.domain)
        refined = refine_n(ident, c, 4)
        assert set(c.elements) <= set(refined.elements)
        assert minimal_subcover_cardinality(refined, X) == minimal_subcover_cardinality(c, X)

    def test_elements_avoid_cut_set(self, tent):
        refined = refine_n(tent, natural_cover(tent), 4)
        cuts = delta_n(tent, 4)
        for el in refined.elements:
            assert all(not el.contains(c) for c in cuts)


class TestMinimalSubcover:
    def test_two_overlapping(self):
        cov = Cover((OpenSet.of((-0.1, 0.6)), OpenSet.of((0.4, 1.1))), "c")
        assert minimal_subcover_cardinality(cov, X) == 2

    def test_whole_domain_single(self):
        cov = Cover((OpenSet((Interval.closed(0.0, 1.0),)),), "X")
        assert minimal_subcover_cardinality(cov, X) == 1

    def test_refined_natural_cover(self, tent):
        d2 = refine_n(tent, natural_cover(tent), 2)
        assert minimal_subcover_cardinality(d2, X, delta_n(tent, 2)) == 4

    def test_redundant_elements_skipped(self):
        cov = Cover(
            (OpenSet.of((-0.1, 0.4)), OpenSet.of((0.2, 0.5)), OpenSet.of((0.3, 1.1))), "c"
        )
        res = minimal_subcover(cov, X)
        assert res.count == 2 and res.exact
        assert set(res.indices) == {0, 2}

    def test_not_a_cover(self):
        cov = domainify_cover(
            Cover((OpenSet.of((0.0, 0.4)), OpenSet.of((0.6, 1.0))), "c"),
            Interval.closed(0.0, 1.0),
        )
        with pytest.raises(NotACoverError) as exc:
            minimal_subcover_cardinality(cov, X)
        assert 0.4 <= exc.value.witness <= 0.6

    def test_excluded_points_do_not_need_cover(self):
        cov = Cover((OpenSet.of((0.0, 0.5)), OpenSet.of((0.5, 1.0))), "c")
        cov = domainify_cover(cov, Interval.closed(0.0, 1.0))
        with pytest.raises(NotACoverError):
            minimal_subcover_cardinality(cov, X)
        assert minimal_subcover_cardinality(cov, X, PointSet.of([0.5])) == 2

    def test_union_elements_exact(self):
        # element 0 alone covers the two ends; elements 1+2 needed for the middle
        cov = Cover(
            (
                OpenSet.of((0.0, 0.3), (0.7, 1.0)),
                OpenSet.of((0.25, 0.6)),
                OpenSet.of((0.55, 0.75)),
            ),
            "c",
        )
        cov = domainify_cover(cov, Interval.closed(0.0, 1.0))
        res = minimal_subcover(cov, X)
        assert res.count == 3 and res.exact

    def test_union_element_single_suffices(self):
        cov = Cover(
            (
                OpenSet.of((0.0, 0.6), (0.5, 1.0)),  # merges to the whole interval
                OpenSet.of((0.2, 0.9)),
            ),
            "c",
        )
        cov = domainify_cover(cov, Interval.closed(0.0, 1.0))
        assert minimal_subcover_cardinality(cov, X) == 1

    def test_multi_part_region(self):
        region = RegionSet.of((0.0, 0.2), (0.8, 1.0))
        cov = Cover((OpenSet.of((-0.1, 0.25)), OpenSet.of((0.75, 1.1))), "c")
        assert minimal_subcover_cardinality(cov, region) == 2


class TestCoverEntropy:
    def test_tent_natural(self, tent):
        series = cover_entropy(tent, natural_cover(tent), 8)
        assert [r.value for r in series.records] == [2**n for n in range(1, 9)]
        assert series.estimate == pytest.approx(math.log(2), abs=1e-9)
        assert series.estimates["slope-fit"] == pytest.approx(math.log(2), abs=1e-9)

    def test_identity_whole_cover(self):
        ident = catalog_get("identity").map
        series = cover_entropy(ident, Cover((OpenSet((ident.domain,)),), "X"), 6)
        assert series.estimate == 0.0

    def test_tent_overlapping_halves(self, tent):
        # frozen from a direct refinement run; growth stays below the natural
        # cover's rate, consistent with refinement monotonicity
        series = cover_entropy(tent, Cover((OpenSet.of((0.0, 0.55)), OpenSet.of((0.45, 1.0))), "h"), 8)
        assert [r.value for r in series.records] == [2, 4, 8, 16, 31, 59, 112, 212]
        assert all(r.flag is None for r in series.records)  # exact, no cap hit
        assert series.estimate <= math.log(2) + 1e-9
        assert series.estimate >= 0.5

    def test_cover_not_covering_raises(self, tent):
        bad = Cover((OpenSet.of((0.0, 0.4)),), "bad")
        with pytest.raises(NotACoverError):
            cover_entropy(tent, bad, 4)


class TestBoundary:
    def test_tent(self, tent):
        assert list(boundary_of_refined_natural_cover(tent, 2)) == pytest.approx([0.25, 0.5, 0.75])

    def test_identity_empty(self):
        assert len(boundary_of_refined_natural_cover(catalog_get("identity").map, 3)) == 0

    def test_doubling_level_three(self):
        pts = boundary_of_refined_natural_cover(catalog_get("mod2").map, 3)
        assert len(pts) == 7
        d3 = delta_n(catalog_get("mod2").map, 3)
        assert np.allclose(list(pts), list(d3))


class TestAlephProperties:
    def _random_cover(self, rng, k):
        # overlapping segments that provably cover [0, 1]
        cuts = np.sort(rng.uniform(0.05, 0.95, size=k - 1))
        bounds = np.concatenate([[0.0], cuts, [1.0]])
        elements = []
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            pad_lo = rng.uniform(0.01, 0.2)
            pad_hi = rng.uniform(0.01, 0.2)
            elements.append(OpenSet.of((lo - pad_lo, hi + pad_hi)))
        return domainify_cover(Cover(tuple(elements), "rand"), Interval.closed(0.0, 1.0))

    def _refine_elements(self, rng, cover):
        out = []
        for el in cover.elements:
            p = el.parts[0]
            mid = rng.uniform(p.lo + 0.25 * p.diameter, p.hi - 0.25 * p.diameter)
            pad = 0.05 * p.diameter
            out.append(OpenSet((Interval(p.lo, mid + pad, p.lo_open, True),)))
            out.append(OpenSet((Interval(mid - pad, p.hi, True, p.hi_open),)))
        return Cover(tuple(out), "finer")

    def test_monotone_product_subcollection(self):
        rng = np.random.RandomState(3)
        for _ in range(60):
            c = self._random_cover(rng, rng.randint(2, 6))
            d = self._refine_elements(rng, c)
            a_c = minimal_subcover_cardinality(c, X)
            a_d = minimal_subcover_cardinality(d, X)
            assert a_c <= a_d  # finer cover needs at least as many elements
            bigger = Cover(c.elements + (OpenSet.of((0.3, 0.7)),), "sup")
            assert minimal_subcover_cardinality(bigger, X) <= a_c  # sub-collection bound
            e = self._random_cover(rng, rng.randint(2, 5))
            a_ve = minimal_subcover_cardinality(vee([c, e]), X)
            assert a_ve <= a_c * minimal_subcover_cardinality(e, X)

    def test_pullback_bound(self, tent):
        rng = np.random.RandomState(5)
        for _ in range(40):
            c = self._random_cover(rng, rng.randint(2, 6))
            a_c = minimal_subcover_cardinality(c, X)
            for j in (1, 2):
                pb = pullback_cover(tent, c, j)
                a_pb = minimal_subcover_cardinality(pb, X, delta_n(tent, j))
                assert a_pb <= a_c

    def test_subadditivity_of_refinements(self, tent):
        counts = {}
        from pcentropy.covers import refinement_steps

        for n, cov in enumerate(refinement_steps(tent, natural_cover(tent), 8), start=1):
            counts[n] = minimal_subcover_cardinality(cov, X, delta_n(tent, n))
        for n in range(1, 5):
            for k in range(1, 5):
                assert math.log(counts[n + k]) <= math.log(counts[n]) + math.log(counts[k]) + 1e-9


class TestLebesgue:
    def test_every_ball_fits(self, tent):
        cov = domainify_cover(
            Cover((OpenSet.of((0.0, 0.55)), OpenSet.of((0.45, 1.0))), "h"), tent.domain
        )
        delta = lebesgue_number(cov, X, grid=1000)
        assert delta > 0
        for x in np.linspace(0.0, 1.0, 1000):
            ball_lo, ball_hi = max(0.0, x - delta), min(1.0, x + delta)
            assert any(
                any(p.lo <= ball_lo and ball_hi <= p.hi for p in el.parts)
                for el in cov.elements
            )

    def test_uncovered_point_raises(self):
        cov = Cover((OpenSet.of((0.0, 0.4)),), "partial")
        with pytest.raises(NotACoverError):
            lebesgue_number(cov, X, grid=100)
