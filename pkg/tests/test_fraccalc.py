from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.special import gamma

from abelsum import (
    Grid1D,
    SpecError,
    accretivity_certificate,
    difference_frac_coeffs,
    difference_frac_coeffs_alt,
    grid_from_function,
    marchaud_derivative,
    marchaud_matrix,
    riesz_potential,
    rl_derivative,
    rl_integral,
    time_frac_derivative,
)


class TestGrid:
    def test_csv_round_trip(self, tmp_path):
        g = grid_from_function(0.0, 2.0, 33, lambda x: np.exp(1j * x))
        path = tmp_path / "g.csv"
        g.to_csv(path)
        back = Grid1D.from_csv(path)
        assert back.a == g.a and back.b == g.b and back.n == g.n
        assert np.array_equal(back.values, g.values)

    def test_bad_grid_rejected(self):
        with pytest.raises(SpecError):
            Grid1D(a=1.0, b=0.0, n=5, values=np.zeros(5))
        with pytest.raises(SpecError):
            Grid1D(a=0.0, b=1.0, n=1, values=np.zeros(1))


class TestRLIntegral:
    def test_order_one_is_antiderivative(self):
        g = grid_from_function(1.0, 3.0, 801, lambda x: np.ones_like(x))
        out = rl_integral(g, 1.0)
        assert np.max(np.abs(out.values - (g.x - 1.0))) <= 5e-3

    def test_half_order_of_one(self):
        # I^(1/2) 1 = 2 sqrt(x/pi)
        g = grid_from_function(0.0, 1.0, 1001, lambda x: np.ones_like(x))
        out = rl_integral(g, 0.5)
        target = 2.0 * np.sqrt(g.x / np.pi)
        assert np.max(np.abs(out.values - target)) <= 5.0 * g.h

    def test_semigroup(self):
        g = grid_from_function(0.0, 1.0, 2001, lambda x: x**2)
        comp = rl_integral(rl_integral(g, 0.3), 0.4)
        direct = rl_integral(g, 0.7)
        scale = np.max(np.abs(direct.values))
        assert np.max(np.abs(comp.values - direct.values)) <= 1e-3 * scale

    def test_semigroup_first_order_convergence(self):
        errs = []
        for n in (251, 501, 1001):
            g = grid_from_function(0.0, 1.0, n, lambda x: np.sin(2 * x))
            comp = rl_integral(rl_integral(g, 0.3), 0.4)
            direct = rl_integral(g, 0.7)
            errs.append(np.max(np.abs(comp.values - direct.values)))
        assert errs[1] <= 0.62 * errs[0]
        assert errs[2] <= 0.62 * errs[1]

    def test_negative_order_rejected(self):
        g = grid_from_function(0.0, 1.0, 11, lambda x: x)
        with pytest.raises(SpecError):
            rl_integral(g, -0.5)


class TestRLDerivative:
    def test_inverts_integral(self):
        g = grid_from_function(0.0, math.pi, 4001, np.sin)
        back = rl_derivative(rl_integral(g, 0.5), 0.5)
        interior = slice(8, -8)
        scale = np.max(np.abs(g.values[interior]))
        err = np.max(np.abs(back.values[interior] - g.values[interior]))
        assert err <= 1e-2 * scale

    def test_integer_order(self):
        g = grid_from_function(0.0, 1.0, 501, lambda x: x**2)
        out = rl_derivative(g, 1.0)
        gap = np.abs(out.values - 2.0 * g.x)
        assert np.max(gap[2:-2]) <= 10.0 * g.h**2
        assert np.max(gap) <= 2.0 * g.h  # endpoint rows are first order

    def test_power_rule_constant(self):
        # D^(1/2) sqrt(x) = Gamma(3/2), flat away from the endpoint singularity
        g = grid_from_function(0.0, 1.0, 4001, np.sqrt)
        out = rl_derivative(g, 0.5)
        interior = out.values[200:-8].real
        assert np.max(np.abs(interior - gamma(1.5))) <= 2e-2

    def test_too_coarse_rejected(self):
        g = grid_from_function(0.0, 1.0, 3, lambda x: x)
        with pytest.raises(SpecError):
            rl_derivative(g, 1.5)


class TestMarchaud:
    def test_zero_function(self):
        g = grid_from_function(0.0, 1.0, 65, lambda x: np.zeros_like(x))
        out = marchaud_derivative(g, 0.5, 2.0 / 64.0)
        assert np.allclose(out.values, 0.0)

    def test_constant_boundary_term(self):
        # difference integral cancels; only the zero-extension tail survives
        n = 257
        g = grid_from_function(0.0, 1.0, n, lambda x: np.ones_like(x))
        eps = g.h
        out = marchaud_derivative(g, 0.4, eps)
        x = g.x[: n - 8]
        target = (1.0 - x) ** (-0.4) / gamma(0.6)
        assert np.max(np.abs(out.values[: n - 8] - target) / target) <= 1e-10

    def test_converges_to_rl(self):
        fn = lambda x: x**2 * (1.0 - x) ** 2
        interior = slice(20, -20)

        def gap(n, eps_mult):
            g = grid_from_function(0.0, 1.0, n, fn)
            # right-side derivative: reflect, differentiate, reflect back
            refl = g.with_values(g.values[::-1])
            rl = rl_derivative(refl, 0.5).values[::-1]
            out = marchaud_derivative(g, 0.5, eps_mult * g.h).values
            scale = np.max(np.abs(rl[interior]))
            return np.max(np.abs(out[interior] - rl[interior])) / scale

        gaps = [gap(2001, m) for m in (8, 4, 2, 1)]
        assert all(a > b for a, b in zip(gaps, gaps[1:]))
        assert gap(4001, 1) <= 2e-2

    def test_eps_below_step_rejected(self):
        g = grid_from_function(0.0, 1.0, 33, lambda x: x)
        with pytest.raises(SpecError):
            marchaud_derivative(g, 0.5, g.h / 4.0)


class TestRiesz:
    def test_indicator_closed_form(self):
        beta = 0.5
        n = 4001
        g = grid_from_function(0.0, 1.0, n, lambda x: np.ones_like(x))
        out = riesz_potential(g, beta)
        B = 1.0 / (2.0 * gamma(beta) * math.cos(beta * math.pi / 2.0))
        x = g.x[400:-400]
        target = B * (x**beta + (1 - x) ** beta) / beta
        err = np.max(np.abs(out.values[400:-400] - target))
        assert err <= 2e-3
        mid = out.values[n // 2].real
        assert abs(mid - 1.1284) <= 2e-3

    def test_zero(self):
        g = grid_from_function(-1.0, 1.0, 65, lambda x: np.zeros_like(x))
        assert np.allclose(riesz_potential(g, 0.3).values, 0.0)

    def test_even_symmetry(self):
        g = grid_from_function(-1.0, 1.0, 257, lambda x: np.exp(-4 * x**2))
        out = riesz_potential(g, 0.7).values
        assert np.max(np.abs(out - out[::-1])) <= 1e-12


class TestDifferenceCoeffs:
    def test_leading_values(self):
        C = difference_frac_coeffs(0.5, 1.0, 4)
        assert C[0] == pytest.approx(1.0)
        assert C[1] == pytest.approx(-0.5)
        assert C[2] == pytest.approx(-1.0 / 8.0)

    def test_scale(self):
        c = 1.7
        C = difference_frac_coeffs(0.3, c, 2)
        assert C[0] == pytest.approx(c**0.3)
        assert C[1] == pytest.approx(-0.3 * c**0.3)

    def test_alt_agrees_at_zero(self):
        Cp = difference_frac_coeffs_alt(0.3, 2.0, 3)
        assert Cp[0] == pytest.approx(2.0**0.3, rel=1e-10)

    def test_alt_first_difference(self):
        C = difference_frac_coeffs(0.3, 2.0, 2)
        Cp = difference_frac_coeffs_alt(0.3, 2.0, 2)
        assert abs((Cp[1] - Cp[0]) - C[1]) <= 1e-10

    def test_consistency_to_fifty(self):
        for alpha, c in ((0.5, 1.0), (0.3, 2.0), (0.85, 0.7)):
            C = difference_frac_coeffs(alpha, c, 51)
            Cp = difference_frac_coeffs_alt(alpha, c, 51)
            gap = np.max(np.abs(np.diff(Cp) - C[1:]))
            assert gap <= 1e-10

    def test_tail_decay(self):
        alpha = 0.6
        C = difference_frac_coeffs(alpha, 1.0, 200)
        k = np.arange(1, 201)
        scaled = np.abs(C[1:]) * k ** (1 + alpha)
        assert np.max(scaled) <= 1.0  # 1/|Gamma(-alpha)| < 1 for alpha in (0,1)

    def test_nilpotent_binomial_exact(self):
        alpha, c, n = 0.5, 1.3, 16
        C = difference_frac_coeffs(alpha, c, n - 1)
        S = np.zeros((n, n))
        idx = np.arange(n - 1)
        S[idx + 1, idx] = 1.0
        lhs = sum(C[k] * np.linalg.matrix_power(S, k) for k in range(n))
        # extending the truncation cannot change anything: S^k = 0 for k >= n
        C_long = difference_frac_coeffs(alpha, c, 3 * n)
        rhs = sum(C_long[k] * np.linalg.matrix_power(S, k) for k in range(3 * n + 1))
        assert np.array_equal(lhs, rhs)
        from scipy.linalg import fractional_matrix_power

        Y = c * (np.eye(n) - S)
        oracle = fractional_matrix_power(Y, alpha)
        assert np.max(np.abs(lhs - oracle)) <= 1e-8


class TestTimeFracDerivative:
    def test_eigenrelation(self):
        lam, alpha, t = 1.5, 2.0, 1.0
        u = lambda s: np.array([np.exp(-(lam**alpha) * s)])
        out = time_frac_derivative(u, alpha, t)
        target = lam * np.exp(-(lam**alpha) * t)
        assert abs(out[0] - target) / target <= 1e-6

    def test_classical_derivative(self):
        u = lambda s: np.array([np.exp(-2.0 * s)])
        out = time_frac_derivative(u, 1.0, 0.7)
        assert out[0] == pytest.approx(2.0 * np.exp(-1.4), rel=1e-8)

    def test_linearity(self):
        alpha, t = 1.5, 0.8
        u1 = lambda s: np.array([np.exp(-1.2 * s)])
        u2 = lambda s: np.array([np.exp(-2.0 * s), ])
        both = lambda s: u1(s) + u2(s)
        d = time_frac_derivative(both, alpha, t)
        d1 = time_frac_derivative(u1, alpha, t)
        d2 = time_frac_derivative(u2, alpha, t)
        assert abs(d[0] - d1[0] - d2[0]) <= 1e-9 * max(1.0, abs(d[0]))

    def test_small_order_rejected(self):
        with pytest.raises(SpecError):
            time_frac_derivative(lambda s: np.array([0.0]), 0.5, 1.0)


class TestAccretivity:
    def test_certificate_values(self):
        assert accretivity_certificate(0.5, 1.0) == pytest.approx(1.0 / math.sqrt(math.pi))
        assert accretivity_certificate(1e-6, 1.0) == pytest.approx(1.0, abs=1e-4)
        assert accretivity_certificate(0.5, 2.0) == pytest.approx(0.39894, rel=1e-4)

    def test_discrete_refinement(self):
        mu = accretivity_certificate(0.5, 1.0)
        lows = []
        for n in (33, 65, 129, 257):
            h = 1.0 / (n - 1)
            M = marchaud_matrix(0.0, 1.0, n, 0.5, h)
            herm = (M + M.conj().T) / 2.0
            lows.append(float(np.linalg.eigvalsh(herm)[0]))
        assert lows[-1] >= mu * 0.95
        # refinement does not drift the bound away
        assert lows[-1] >= lows[0] - 0.05
