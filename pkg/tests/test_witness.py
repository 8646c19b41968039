import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from partialmetric.contraction import check_condition_b, iterate
from partialmetric.core import DomainError
from partialmetric.solver import picard_solve, triple_residual
from partialmetric.witness import (
    IndexBudgetExceeded,
    WitnessMap,
    apply_witness,
    as_selfmap,
    audit_witness,
    partition_index,
    stabilization_index,
)

W = WitnessMap()
unit = st.floats(min_value=1e-300, max_value=1.0, exclude_min=False)


def shell_oracle(x, b=Fraction(1, 5)):
    # scan exact rational powers, no logarithms
    xf = Fraction(x)
    n = 0
    if xf <= b**n:
        while xf <= b ** (n + 1):
            n += 1
    else:
        while not xf <= b**n:
            n -= 1
    return n


class TestPartitionIndex:
    @pytest.mark.parametrize("x, n", [(0.3, 0), (0.01, 2), (0.2, 1), (1.0, 0), (0.04, 2), (0.0016, 4)])
    def test_examples(self, x, n):
        assert partition_index(W, x) == n

    def test_boundary_is_inside(self):
        for n in range(1, 30):
            assert partition_index(W, W.power(n)) == n

    @settings(max_examples=300)
    @given(x=unit)
    def test_against_scan(self, x):
        n = partition_index(W, x)
        assert W.in_shell(x, n) and not W.in_shell(x, n + 1)

    def test_outside_carrier(self):
        with pytest.raises(DomainError):
            partition_index(W, 0.0)

    @settings(max_examples=200)
    @given(x=unit, y=unit)
    def test_monotone(self, x, y):
        lo, hi = sorted((x, y))
        assert partition_index(W, lo) >= partition_index(W, hi)


def test_shell_scan_matches_rational_powers():
    # away from exact powers, rounded-double boundaries agree with exact rationals
    rng = np.random.default_rng(3)
    for x in 10.0 ** rng.uniform(-20, 0, size=500):
        assert partition_index(W, float(x)) == shell_oracle(float(x))


class TestStabilizationIndex:
    @pytest.mark.parametrize("n, k", [(1, 5), (2, 25), (0, 1), (-3, 1), (4, 625)])
    def test_examples(self, n, k):
        assert stabilization_index(W, n) == k

    @pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 13])
    def test_direct_scan(self, n):
        k = stabilization_index(W, n)
        assert W.seq(k) <= W.power(n) < W.seq(k - 1)

    def test_cached(self):
        assert 50 in W.k_cache

    def test_budget(self):
        small = WitnessMap(index_budget=10**6)
        assert stabilization_index(small, 8) == 5**8
        with pytest.raises(IndexBudgetExceeded, match="budget"):
            stabilization_index(small, 9)


class TestApply:
    @pytest.mark.parametrize("x, fx", [(0.3, 0.04), (0.01, 0.0016), (1.0, 0.04)])
    def test_examples(self, x, fx):
        assert apply_witness(W, x) == fx

    def test_boundary_image(self):
        assert W.in_shell(apply_witness(W, 0.01), 4)

    @settings(max_examples=300)
    @given(x=st.floats(min_value=1e-250, max_value=1.0))
    def test_image_confined_and_deeper(self, x):
        fx = apply_witness(W, x)
        n = partition_index(W, x)
        assert W.in_shell(fx, max(n, 0) + 2)
        assert W.p_u(fx) <= 0.2
        # structural no-fixed-point: p(fx, u) <= b p(x, u) < p(x, u)
        assert W.p_u(fx) <= float(W.b) * W.p_u(x) < W.p_u(x)
        assert fx != x

    @settings(max_examples=200)
    @given(x=st.floats(min_value=1e-250, max_value=1.0), y=st.floats(min_value=1e-250, max_value=1.0))
    def test_monotone_dispatch(self, x, y):
        lo, hi = sorted((x, y))
        assert apply_witness(W, lo) <= apply_witness(W, hi)

    def test_b_validation(self):
        with pytest.raises(ValueError):
            WitnessMap(b=1.5)


class TestAudit:
    def test_single_point_example(self):
        x = 0.3
        fx = apply_witness(W, x)
        assert fx == 0.04 and W.view.eval(x, fx) == 0.3
        assert W.p_u(fx) <= 0.2 * 0.3

    def test_pair_example(self):
        v = check_condition_b(W.view.base, as_selfmap(W), 0.5, [(0.3, 0.3)], depth=64)
        (rec,) = v.records
        assert rec.p_fxfy == 0.04 and rec.delta_depth == 0.3 and v.satisfied

    def test_small_audit(self):
        rep = audit_witness(W, samples=500, seed=1)
        assert rep.passed
        assert rep.image_diameter_sampled <= rep.image_diameter_closed_form == 0.04

    def test_json_keys(self):
        d = json.loads(json.dumps(audit_witness(W, samples=50, seed=2).to_dict()))
        assert {"samples", "checks", "worst_margins", "b", "r", "seed"} <= set(d)
        assert set(d["checks"]) == {
            "no_fixed_point", "contraction_to_u", "bound_iii", "condition_b", "finiteness",
        }
        assert (d["b"], d["r"]) == (0.2, 0.5)

    def test_samples_positive(self):
        with pytest.raises(ValueError):
            audit_witness(W, samples=0)


class TestPicardOnWitness:
    @pytest.mark.parametrize("x0", [1.0, 0.3, 0.01])
    def test_no_certificate_at_any_budget(self, x0):
        # literal form: the orbit tends to the missing point u, the pm1
        # residual tends to 0 with it, and any positive tolerance is
        # eventually met, so this is expected to fail
        cert = picard_solve(W.view.base, as_selfmap(W), x0, max_iter=200, tol=1e-9)
        assert not cert.valid

    @pytest.mark.parametrize("x0", [1.0, 0.3, 0.01, 1e-5])
    def test_residual_never_zero(self, x0):
        space = W.view.base
        f = as_selfmap(W)
        b = float(W.b)
        for x in iterate(space, f, x0, 25):
            res = triple_residual(space, x, f(x))
            assert res > 0 and res >= (1 - b) * W.p_u(x)

    @pytest.mark.parametrize("tol", [1e-6, 1e-9, 1e-12])
    def test_valid_certificate_only_shadows_u(self, tol):
        cert = picard_solve(W.view.base, as_selfmap(W), 0.3, max_iter=200, tol=tol)
        assert W.p_u(cert.x_star) < tol / (1 - float(W.b))
        assert apply_witness(W, cert.x_star) != cert.x_star

    def test_exact_tolerance_exhausts_index_budget(self):
        with pytest.raises(IndexBudgetExceeded):
            picard_solve(W.view.base, as_selfmap(W), 0.3, max_iter=1000, tol=0.0)
