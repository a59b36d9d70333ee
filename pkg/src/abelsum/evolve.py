"""Cauchy problems D^{1/alpha} u = phi(W) u and the concrete operator zoo.

A problem couples an operator given by its Jordan data, a symbol, a
summation order and an initial element.  Solutions are grouped root-vector
series; verification confronts them with the time-fractional derivative on
one side and an independent evaluation of phi(W)u on the other, so the two
routes share no code path with the series itself.
"""

from __future__ import annotations

import dataclasses
import math
import warnings

import numpy as np

from . import abel
from .contour import (
    QuadratureSettings,
    build_contour,
    contour_integral,
    eigenfunction_apply,
)
from .errors import ConstructionWarning, DecayError, SpecError
from .fraccalc import (
    Grid1D,
    rl_derivative,
    rl_derivative_matrix,
    time_frac_derivative,
)
from .funcspec import FunctionSpec, phi_alpha  # noqa: F401  (re-exported)
from .linops import (
    DenseOperator,
    JordanSpec,
    build_jordan_operator,
    diagonal_spec,
)


@dataclasses.dataclass
class CauchyProblem:
    """Operator + symbol + order + initial element, with cached solutions."""

    operator: JordanSpec
    phi: object
    alpha: float
    f: np.ndarray
    label: str = ""

    def __post_init__(self):
        if self.alpha < 1.0:
            raise SpecError("summation order must satisfy alpha >= 1")
        f = np.asarray(self.f, dtype=complex).ravel()
        if f.size != self.operator.dim:
            raise SpecError(
                f"initial element has length {f.size}, operator dimension "
                f"{self.operator.dim}"
            )
        self.f = f
        lams = self.operator.characteristic_numbers
        decay = np.array([phi_alpha(self.phi, z, self.alpha) for z in lams])
        bad = np.where(decay.real <= 1e-8)[0]
        if bad.size:
            raise DecayError(
                "modes without strict decay: "
                + ", ".join(f"lambda = {lams[i]:.6g}" for i in bad),
                offenders=tuple(complex(lams[i]) for i in bad),
            )
        self._solutions = {}

    def solve(self, t: float, grouping=None) -> np.ndarray:
        key = (float(t), None if grouping is None else grouping.boundaries)
        hit = self._solutions.get(key)
        if hit is not None:
            return hit
        val = abel.abel_series_sum(
            self.operator, grouping, self.phi, self.alpha, float(t), self.f
        )
        self._solutions[key] = val
        return val


def solve_cauchy(p: CauchyProblem, grouping, t: float) -> np.ndarray:
    """Grouped series solution u(t) = sum of weighted root-vector projections."""
    if t < 0:
        raise SpecError("time must be non-negative")
    return p.solve(t, grouping)


def residual(p: CauchyProblem, t: float, settings: QuadratureSettings | None = None) -> float:
    """|| D^{1/alpha} u - phi(W) u || / max(1, ||phi(W) u||) at time t.

    The left side differentiates the series solution in time by quadrature
    and stencil; the right side never touches the series weights: it is the
    eigen-sum for diagonalizable specs and the phi-weighted contour integral
    otherwise.
    """
    if t <= 0:
        raise SpecError("residual needs t > 0")
    settings = settings or QuadratureSettings()
    if not np.any(p.f):
        return 0.0

    deriv = time_frac_derivative(lambda s: p.solve(s), p.alpha, t)

    if p.operator.diagonalizable:
        rhs = eigenfunction_apply(p.operator, p.phi, p.solve(t))
    else:
        lams = p.operator.characteristic_numbers
        theta = float(np.max(np.abs(np.angle(lams))))
        # Long chains give high-order poles, so push the rays as far from the
        # spectrum as the decay condition allows instead of the cautious
        # default opening.
        varsigma = None
        if hasattr(p.phi, "terms"):
            n_max = max((abs(n) for _, n in p.phi.terms()), default=1)
            budget = math.pi / (2.0 * p.alpha * max(n_max, 1))
            if budget > theta:
                varsigma = 0.5 * (budget - theta)
        cont = build_contour(
            np.abs(lams), theta, varsigma, t, p.phi, p.alpha, settings
        )
        B = build_jordan_operator(p.operator)
        rhs = contour_integral(
            B.entries, p.phi, p.alpha, t, p.f, cont, settings, phi_weight=True
        ).value
    return float(np.linalg.norm(deriv - rhs) / max(1.0, np.linalg.norm(rhs)))


def solution_gap(p: CauchyProblem, t: float, grouping=None) -> float:
    """|| u(t) - f ||, the initial-condition gap."""
    return float(np.linalg.norm(p.solve(t, grouping) - p.f))


# ---------------------------------------------------------------------------
# operator builders


def build_sturm_liouville(a: complex, N: int) -> JordanSpec:
    """Modal operator with characteristic numbers a n^2, n = 1..N."""
    a = complex(a)
    if a.real <= 0:
        raise SpecError("spectral coefficient must have positive real part")
    if N < 1:
        raise SpecError("need at least one mode")
    n = np.arange(1, N + 1, dtype=float)
    lam = a * n * n
    return diagonal_spec(1.0 / lam, label=f"modes a n^2, a = {a:.6g}")


def sturm_liouville_grid(a: complex, n: int, length: float = math.pi) -> DenseOperator:
    """Second-difference realization of -a d^2/dx^2 with Dirichlet ends."""
    a = complex(a)
    if a.real <= 0:
        raise SpecError("spectral coefficient must have positive real part")
    if n < 3:
        raise SpecError("need at least three grid points")
    h = length / (n - 1)
    m = n - 2
    entries = np.zeros((m, m), dtype=complex)
    idx = np.arange(m)
    entries[idx, idx] = 2.0 * a / h / h
    entries[idx[:-1], idx[:-1] + 1] = -a / h / h
    entries[idx[:-1] + 1, idx[:-1]] = -a / h / h
    return DenseOperator(dim=m, entries=entries, label=f"grid -a D2, n = {n}")


def _second_difference_interior(n: int, h: float) -> np.ndarray:
    m = n - 2
    D2 = np.zeros((m, m))
    idx = np.arange(m)
    D2[idx, idx] = -2.0 / h / h
    D2[idx[:-1], idx[:-1] + 1] = 1.0 / h / h
    D2[idx[:-1] + 1, idx[:-1]] = 1.0 / h / h
    return D2


def build_frac_perturbed(eta: float, xi: float, beta: float,
                         a: float = 0.0, b: float = 1.0, n: int = 129,
                         seed: int = 0) -> tuple[DenseOperator, dict]:
    """Grid matrix of eta D^2 + xi D^beta with Dirichlet ends, plus certificates.

    The left fractional derivative acts with zero extension, so dropping the
    boundary columns is exact.  Certificates sample the sandwich
    c_minus (-D2 f, f) <= Re(W f, f) <= c_plus (-D2 f, f) and the bilinear
    bound |Im(W f, f)| <= C ||f||_H1 ||f|| over seeded random elements in the
    h-weighted inner product.
    """
    if eta >= 0:
        raise SpecError("second-order coefficient must be negative")
    # xi = 0 degenerates to the pure Dirichlet Laplacian, still a valid
    # (and useful) sectorial reference point.
    if xi < 0:
        raise SpecError("fractional coefficient must be non-negative")
    if not (0.0 < beta < 1.0):
        raise SpecError("fractional order must lie in (0, 1)")
    if n < 8:
        raise SpecError("grid too coarse for both stencils")
    h = (b - a) / (n - 1)
    D2 = _second_difference_interior(n, h)
    Dbeta = rl_derivative_matrix(n, h, beta)[1:-1, 1:-1]
    W = eta * D2 + xi * Dbeta

    rng = np.random.default_rng(seed)
    m = n - 2
    lo, hi, H3 = math.inf, -math.inf, 0.0
    violations = 0
    for _ in range(64):
        f = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        quad = h * np.vdot(f, -D2 @ f).real
        Wf = W @ f
        num = h * np.vdot(f, Wf)
        ratio = num.real / quad
        lo, hi = min(lo, ratio), max(hi, ratio)
        if ratio <= 0:
            violations += 1
        grad = np.gradient(f, h)
        h1 = math.sqrt(h * (np.vdot(f, f).real + np.vdot(grad, grad).real))
        l2 = math.sqrt(h * np.vdot(f, f).real)
        H3 = max(H3, abs(num.imag) / (h1 * l2))
    if violations:
        warnings.warn(
            f"sandwich certificate failed on {violations} of 64 samples",
            ConstructionWarning,
        )
    certs = {
        "sandwich_low": lo,
        "sandwich_high": hi,
        "imag_h1_bound": H3,
        "violations": violations,
    }
    op = DenseOperator(
        dim=m, entries=W.astype(complex),
        label=f"eta D2 + xi D^beta, eta={eta:.3g}, xi={xi:.3g}, beta={beta:.3g}",
    )
    return op, certs


def frac_perturbed_modal(eta: float, xi: float, beta: float, modes: int = 24,
                         a: float = 0.0, b: float = 1.0, n: int = 201) -> JordanSpec:
    """Diagonal modal truncation of the perturbed operator.

    The grid matrix restricted to the span of its lowest modes is exactly
    diagonal in the eigenvector coordinates, so the modal problem is solved
    without any discretization residue; the grid only selects the numbers.
    """
    op, _ = build_frac_perturbed(eta, xi, beta, a, b, n)
    lam = np.linalg.eigvals(op.entries)
    order = np.argsort(np.abs(lam))[:modes]
    sel = lam[order]
    scale = np.max(np.abs(sel))
    for i in range(sel.size):
        for j in range(i + 1, sel.size):
            if abs(sel[i] - sel[j]) < 1e-6 * scale:
                raise SpecError(
                    "modal truncation hit a near-degenerate pair; "
                    "reduce the mode count"
                )
    return diagonal_spec(1.0 / sel, label=f"modal truncation, {modes} modes")


def build_difference_operator(c: float, n: int) -> JordanSpec:
    """c (I - S) with S the one-step down-shift: one chain of length n at c.

    The eigenvector is the last coordinate; each next root vector climbs one
    slot with an alternating 1/c scale, matching (B - c) e_{i+1} = e_i.
    """
    if c <= 0:
        raise SpecError("step scale must be positive")
    if n < 1:
        raise SpecError("dimension must be at least 1")
    S = np.zeros((n, n), dtype=complex)
    for i in range(n):
        S[n - 1 - i, i] = (-1.0) ** i / c ** i
    return JordanSpec(
        eigenvalues=(complex(c),),
        chains=((n,),),
        basis=S,
        label=f"difference step, c = {c:.6g}, dim = {n}",
    )


def difference_matrix(c: float, n: int) -> np.ndarray:
    """The bidiagonal matrix c (I - S) itself."""
    Y = c * np.eye(n, dtype=complex)
    idx = np.arange(n - 1)
    Y[idx + 1, idx] = -c
    return Y


def artificial_modulus(kappa: float, q: float, n) -> np.ndarray:
    """mu_n = n^kappa ln^kappa(n+q) lnln^kappa(n+q)."""
    n = np.asarray(n, dtype=float)
    inner = np.log(n + q)
    return n ** kappa * inner ** kappa * np.log(inner) ** kappa


def build_artificial_normal(kappa: float, q: float, dim: int,
                            imag_rule=None) -> JordanSpec:
    """Diagonal spec with lambda_n = mu_n + i eta_n from the slow-growth rule.

    The default imaginary parts mu_n^{1/2}/2 keep |eta_n| <= |lambda_n|^{1/2}
    and the parabolic membership Re z > sqrt(1 - e^{-kappa}) (Im z)^2; a
    custom rule is validated against both.
    """
    if kappa <= 0:
        raise SpecError("growth exponent must be positive")
    if q <= math.e ** math.e - 1.0:
        raise SpecError("shift must exceed e^e - 1 so the double log is positive")
    if dim < 1:
        raise SpecError("dimension must be at least 1")
    n = np.arange(1, dim + 1, dtype=float)
    mu = artificial_modulus(kappa, q, n)
    if imag_rule is None:
        eta = np.sqrt(mu) / 2.0
    elif callable(imag_rule):
        eta = np.asarray([imag_rule(int(k)) for k in n], dtype=float)
    else:
        eta = np.asarray(imag_rule, dtype=float).ravel()
        if eta.size != dim:
            raise SpecError("imaginary rule must supply one value per mode")
    lam = mu + 1j * eta
    if np.any(np.abs(eta) > np.sqrt(np.abs(lam)) * (1.0 + 1e-12)):
        raise SpecError("imaginary parts exceed the square-root bound")
    slope = math.sqrt(1.0 - math.exp(-kappa))
    if np.any(lam.real <= slope * eta ** 2):
        raise SpecError("spectrum leaves the parabolic domain")
    return diagonal_spec(1.0 / lam, label=f"artificial normal, kappa = {kappa:.3g}")


# ---------------------------------------------------------------------------
# quasi-polynomials of fractional powers


@dataclasses.dataclass(frozen=True)
class QuasiPolynomial:
    """Signed combination of fractional derivative orders."""

    terms: tuple

    def __post_init__(self):
        orders = [o for _, o in self.terms]
        if len(set(orders)) != len(orders):
            raise SpecError("quasi-polynomial orders must be distinct")


def quasi_polynomial_expand(n: int, beta: float) -> QuasiPolynomial:
    """Binomial expansion of (-D^2 + D^beta)^n into pure fractional orders.

    Term k carries (-1)^{n-k} C(n,k) at order beta k + 2(n-k); validity of
    the composition rule needs beta < 1/n.
    """
    if n < 1:
        raise SpecError("power must be at least 1")
    if not (0.0 < beta < 1.0 / n):
        raise SpecError(f"order must lie in (0, 1/{n})")
    terms = []
    for k in range(n + 1):
        coeff = (-1.0) ** (n - k) * math.comb(n, k)
        order = beta * k + 2.0 * (n - k)
        terms.append((coeff, order))
    return QuasiPolynomial(terms=tuple(terms))


def quasi_polynomial_apply(qp: QuasiPolynomial, f: Grid1D) -> Grid1D:
    out = np.zeros(f.n, dtype=complex)
    for coeff, order in qp.terms:
        out += coeff * rl_derivative(f, order).values
    return f.with_values(out)


def quasi_polynomial_matrix(qp: QuasiPolynomial, n: int, h: float) -> np.ndarray:
    out = np.zeros((n, n))
    for coeff, order in qp.terms:
        out += coeff * rl_derivative_matrix(n, h, order)
    return out
