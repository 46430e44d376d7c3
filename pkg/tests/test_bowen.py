import math

import numpy as np
import pytest

from pcentropy.bowen import (
    bowen_entropy,
    max_separated,
    min_spanning,
    rho_n,
    sample_region,
)
from pcentropy.catalog import get as catalog_get
from pcentropy.errors import EmptySampleError
from pcentropy.intervals import RegionSet
from pcentropy.transforms import PlHomeo

X = RegionSet.of((0.0, 1.0))


@pytest.fixture(scope="module")
def tent():
    return catalog_get("tent").map


@pytest.fixture(scope="module")
def identity():
    return catalog_get("identity").map


@pytest.fixture(scope="module")
def tent_sample(tent):
    return sample_region(tent, X, grid=1025, horizon=8)


class TestRhoN:
    def test_zero_on_diagonal(self, tent):
        assert rho_n(tent, 0.3, 0.3, 5) == 0.0

    def test_n_one_is_distance(self, tent):
        assert rho_n(tent, 0.1, 0.2, 1) == pytest.approx(0.1)

    def test_orbit_expansion(self, tent):
        assert rho_n(tent, 0.1, 0.2, 2) == pytest.approx(0.2)

    def test_dominates_base_distance_and_monotone(self, tent, tent_sample):
        pts = list(tent_sample.points)[::97]
        for x in pts:
            for y in pts:
                base = abs(x - y)
                prev = 0.0
                for n in (1, 2, 4, 8):
                    r = rho_n(tent, x, y, n)
                    assert r >= base - 1e-15
                    assert r >= prev - 1e-15
                    prev = r

    def test_metric_axioms_on_sampled_triples(self, tent, tent_sample):
        pts = list(tent_sample.points)[::211]
        for x in pts:
            for y in pts:
                rxy = rho_n(tent, x, y, 4)
                assert rxy == pytest.approx(rho_n(tent, y, x, 4), abs=1e-12)
                if x != y:
                    assert rxy > 0
                for z in pts[::3]:
                    assert rxy <= rho_n(tent, x, z, 4) + rho_n(tent, z, y, 4) + 1e-12


class TestSampleRegion:
    def test_identity_unchanged(self, identity):
        s = sample_region(identity, X, grid=11, horizon=3)
        assert len(s.points) == 11
        assert list(s.points) == pytest.approx(list(np.linspace(0, 1, 11)))

    def test_tent_peak_handled(self, tent):
        s = sample_region(tent, X, grid=5, horizon=1)
        assert not any(abs(p - 0.5) <= tent.tol for p in s.points)

    def test_empty_sample(self, tent):
        with pytest.raises(EmptySampleError):
            sample_region(tent, RegionSet.of((0.5, 0.5)), grid=2, horizon=1)

    def test_all_points_avoid_cuts(self, tent, tent_sample):
        from pcentropy.maps import orbit_avoids_delta

        for p in list(tent_sample.points)[::53]:
            assert orbit_avoids_delta(tent, p, tent_sample.horizon)

    def test_density_recorded(self, tent_sample):
        assert 0 < tent_sample.density < 0.01


class TestSeparated:
    def test_identity_packing_oracle(self, identity):
        # 1-d packing: floor(1/eps) + 1 points at spacing eps
        s = sample_region(identity, X, grid=11, horizon=1)
        assert max_separated(identity, s, 1, 0.5) == 3

    def test_eps_beyond_diameter(self, tent, tent_sample):
        assert max_separated(tent, tent_sample, 3, 1.5) == 1

    def test_regression_tent(self, tent):
        # frozen deterministic greedy value
        s = sample_region(tent, X, grid=4097, horizon=6)
        assert max_separated(tent, s, 6, 0.05) == 529
        assert [max_separated(tent, s, n, 0.05) for n in range(1, 7)] == [20, 39, 76, 148, 288, 529]

    def test_monotone_in_eps(self, tent, tent_sample):
        for n in (2, 5, 8):
            vals = [max_separated(tent, tent_sample, n, eps) for eps in (0.2, 0.1, 0.05, 0.02)]
            assert vals == sorted(vals)

    def test_monotone_in_n(self, tent, tent_sample):
        vals = [max_separated(tent, tent_sample, n, 0.05) for n in range(1, 9)]
        assert vals == sorted(vals)


class TestSpanning:
    def test_identity_covering_oracle(self, identity):
        # grid without an exact eps multiple: ceil(1/(2*eps - delta)) balls
        s = sample_region(identity, X, grid=12, horizon=1)
        assert min_spanning(identity, s, 1, 0.5) == 2

    def test_eps_beyond_diameter(self, tent, tent_sample):
        assert min_spanning(tent, tent_sample, 4, 1.5) == 1

    def test_monotone_in_eps(self, tent, tent_sample):
        for n in (2, 5, 8):
            vals = [min_spanning(tent, tent_sample, n, eps) for eps in (0.2, 0.1, 0.05, 0.02)]
            assert vals == sorted(vals)

    def test_sandwich(self, tent, tent_sample):
        for n in (2, 4, 6, 8):
            for eps in (0.1, 0.05, 0.02):
                r = min_spanning(tent, tent_sample, n, eps)
                s = max_separated(tent, tent_sample, n, eps)
                r_half = min_spanning(tent, tent_sample, n, eps / 2)
                assert r <= s <= r_half


class TestBowenEntropy:
    def test_identity_zero(self, identity):
        sep, span = bowen_entropy(identity, X, [2, 4, 6, 8], [0.1, 0.05], grid=513)
        assert abs(sep.estimate) <= 0.05
        assert abs(span.estimate) <= 0.05

    def test_tent_desk_scale(self, tent):
        # grid and schedule matched so the finest eps still resolves: the full
        # 8193-point configuration is exercised by the acceptance suite
        sep, span = bowen_entropy(tent, X, list(range(4, 11)), [0.1, 0.05], grid=2049)
        for est in (sep.estimate, span.estimate):
            assert abs(est - math.log(2)) <= 0.15 * math.log(2)

    def test_contraction_trends_to_zero(self):
        pw = catalog_get("pw-contraction").map
        sep, span = bowen_entropy(pw, X, [4, 6, 8, 10], [0.05, 0.02, 0.01], grid=1025)
        assert sep.estimate <= 0.1
        assert span.estimate <= 0.1

    def test_records_carry_eps(self, identity):
        sep, _ = bowen_entropy(identity, X, [2, 4, 6, 8], [0.1, 0.05], grid=257)
        assert {r.aux for r in sep.records} == {0.1, 0.05}

    def test_coarse_flagging(self, identity):
        sep, _ = bowen_entropy(identity, X, [2, 3, 4, 5], [0.01, 0.005], grid=65)
        assert all("coarse" in (r.flag or "") for r in sep.records if r.aux == 0.005)

    def test_schedule_must_decrease(self, identity):
        with pytest.raises(ValueError):
            bowen_entropy(identity, X, [2, 3, 4, 5], [0.01, 0.05], grid=65)

    def test_metric_transform_is_order_preserving(self, tent, tent_sample):
        phi = PlHomeo(((0.0, 0.0), (0.35, 0.55), (1.0, 1.0)))
        for n in (3, 6):
            s_plain = max_separated(tent, tent_sample, n, 0.05)
            s_metric = max_separated(tent, tent_sample, n, 0.05, metric=phi)
            assert s_metric > 0 and abs(math.log(s_metric / s_plain)) < 1.0
