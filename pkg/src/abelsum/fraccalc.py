"""One-dimensional fractional calculus on uniform grids and in time.

Spatial operators act on Grid1D samples with the standing convention that
functions extend by zero outside the interval.  The weakly singular kernels
are integrated exactly against the piecewise-linear interpolant (product
trapezoid), so no kernel value is ever taken at the singularity and the
composite rules are first-order accurate.

The time-side derivative is the right-hand generalized derivative of order
1/alpha built from the tail integral of the solution; the substitution
x = s^(alpha/(alpha-1)) removes the endpoint singularity exactly, after
which an ordinary adaptive rule and a high-order difference stencil apply.
"""

from __future__ import annotations

import csv
import dataclasses
import math

import numpy as np
from scipy.integrate import quad, quad_vec
from scipy.special import gamma

from .errors import DecayError, SpecError, ToleranceError


@dataclasses.dataclass
class Grid1D:
    """Uniformly spaced complex samples on [a, b]."""

    a: float
    b: float
    n: int
    values: np.ndarray

    def __post_init__(self):
        if not self.b > self.a:
            raise SpecError("need b > a")
        if self.n < 2:
            raise SpecError("need at least two grid points")
        values = np.asarray(self.values, dtype=complex).ravel()
        if values.size != self.n:
            raise SpecError(f"expected {self.n} values, got {values.size}")
        self.values = values

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.n)

    def with_values(self, values) -> "Grid1D":
        return Grid1D(self.a, self.b, self.n, values)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "re", "im"])
            for x, v in zip(self.x, self.values):
                writer.writerow([f"{x:.16e}", f"{v.real:.16e}", f"{v.imag:.16e}"])

    @classmethod
    def from_csv(cls, path) -> "Grid1D":
        xs, vals = [], []
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [c.strip() for c in header[:3]] != ["x", "re", "im"]:
                raise SpecError("grid CSV must start with the header x,re,im")
            for row in reader:
                xs.append(float(row[0]))
                vals.append(complex(float(row[1]), float(row[2])))
        if len(xs) < 2:
            raise SpecError("grid CSV holds fewer than two samples")
        return cls(a=xs[0], b=xs[-1], n=len(xs), values=np.array(vals))


def grid_from_function(a: float, b: float, n: int, fn) -> Grid1D:
    x = np.linspace(a, b, n)
    return Grid1D(a, b, n, np.asarray(fn(x), dtype=complex))


@dataclasses.dataclass(frozen=True)
class FracOrder:
    """Positive order split as integer plus fractional part."""

    psi: float

    def __post_init__(self):
        if not (np.isfinite(self.psi) and self.psi > 0):
            raise SpecError("fractional order must be positive and finite")

    @property
    def integer_part(self) -> int:
        return int(math.floor(self.psi))

    @property
    def fractional_part(self) -> float:
        return self.psi - self.integer_part


def _as_order(psi) -> FracOrder:
    return psi if isinstance(psi, FracOrder) else FracOrder(float(psi))


def _pt_kernel_weights(n: int, psi: float) -> tuple[np.ndarray, np.ndarray]:
    """Product-trapezoid weights for the kernel (x - s)^(psi - 1) / Gamma(psi).

    Row i of the implied matrix is pref * [c0[i], K[i-1], ..., K[1], K[0]]
    acting on f_0..f_i, exact for piecewise-linear f.
    """
    m = np.arange(0, n, dtype=float)
    K = np.empty(n)
    K[0] = 1.0
    if n > 1:
        mm = m[1:]
        K[1:] = (mm + 1.0) ** (psi + 1.0) - 2.0 * mm ** (psi + 1.0) + (mm - 1.0) ** (psi + 1.0)
    i = np.arange(0, n, dtype=float)
    c0 = np.zeros(n)
    if n > 1:
        ii = i[1:]
        c0[1:] = (ii - 1.0) ** (psi + 1.0) - ii ** psi * (ii - psi - 1.0)
    return K, c0


def rl_integral(f: Grid1D, psi) -> Grid1D:
    """Left fractional integral of order psi; the value at x = a is 0."""
    order = _as_order(psi)
    p = order.psi
    h = f.h
    K, c0 = _pt_kernel_weights(f.n, p)
    pref = h ** p / gamma(p + 2.0)
    vals = f.values
    out = np.zeros(f.n, dtype=complex)
    if f.n > 1:
        conv = np.convolve(vals[1:], K)[: f.n - 1]
        out[1:] = pref * (c0[1:] * vals[0] + conv)
    return f.with_values(out)


def rl_integral_matrix(n: int, h: float, psi: float) -> np.ndarray:
    """Dense matrix of rl_integral on an n-point grid of spacing h."""
    K, c0 = _pt_kernel_weights(n, psi)
    pref = h ** psi / gamma(psi + 2.0)
    M = np.zeros((n, n))
    for i in range(1, n):
        M[i, 1 : i + 1] = K[:i][::-1]
        M[i, 0] = c0[i]
    return pref * M


def _gradient_power(values: np.ndarray, h: float, m: int) -> np.ndarray:
    out = values
    for _ in range(m):
        out = np.gradient(out, h, axis=0, edge_order=2)
    return out


def rl_derivative(f: Grid1D, psi) -> Grid1D:
    """Left fractional derivative: integer-order differences of a co-order integral."""
    order = _as_order(psi)
    m = order.integer_part + 1
    if f.n <= order.integer_part + 2 or f.n < 3:
        raise SpecError(
            f"grid of {f.n} points is too coarse for {m} difference passes"
        )
    g = rl_integral(f, FracOrder(1.0 - order.fractional_part))
    return f.with_values(_gradient_power(g.values, f.h, m))


def rl_derivative_matrix(n: int, h: float, psi: float) -> np.ndarray:
    order = _as_order(psi)
    m = order.integer_part + 1
    if n <= order.integer_part + 2 or n < 3:
        raise SpecError(f"grid of {n} points is too coarse for {m} difference passes")
    M = rl_integral_matrix(n, h, 1.0 - order.fractional_part)
    return _gradient_power(M, h, m)


def _marchaud_cells(n: int, h: float, alpha: float, m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact cell integrals of t^(-alpha-1) against linear interpolants.

    For the cell [j h, (j+1) h]: A is the plain kernel mass, B1 weights the
    right node, B0 the left one.
    """
    j = np.arange(m, n, dtype=float)
    lo = j * h
    hi = (j + 1.0) * h
    A = (lo ** (-alpha) - hi ** (-alpha)) / alpha
    mom = (hi ** (1.0 - alpha) - lo ** (1.0 - alpha)) / (1.0 - alpha)
    B1 = (mom - lo * A) / h
    B0 = A - B1
    return A, B0, B1


def marchaud_matrix(a: float, b: float, n: int, alpha: float, eps: float) -> np.ndarray:
    """Grid matrix of the right-side truncated difference derivative.

    Row i realizes (alpha / Gamma(1-alpha)) * integral over (eps, b - x_i) of
    [f(x_i) - f(x_i + t)] t^(-alpha-1) dt plus the zero-extension tail
    f(x_i) T^(-alpha) / Gamma(1-alpha) with T = max(eps, b - x_i).
    eps snaps up to a whole number of grid steps.
    """
    if not (0.0 < alpha < 1.0):
        raise SpecError("difference-derivative order must lie in (0, 1)")
    h = (b - a) / (n - 1)
    if eps < h * (1.0 - 1e-12):
        raise SpecError(f"truncation radius {eps} below the grid step {h}")
    m = max(1, int(math.ceil(eps / h - 1e-12)))
    k = alpha / gamma(1.0 - alpha)
    A, B0, B1 = _marchaud_cells(n, h, alpha, m)
    cumA = np.concatenate([[0.0], np.cumsum(A)])
    M = np.zeros((n, n))
    for i in range(n):
        jmax = n - 2 - i
        if jmax >= m:
            ncell = jmax - m + 1
            M[i, i] += k * cumA[ncell]
            M[i, i + m : i + jmax + 1] -= k * B0[:ncell]
            M[i, i + m + 1 : i + jmax + 2] -= k * B1[:ncell]
            T = (n - 1 - i) * h
        else:
            T = m * h
        M[i, i] += T ** (-alpha) / gamma(1.0 - alpha)
    return M


def marchaud_derivative(f: Grid1D, alpha: float, eps: float) -> Grid1D:
    """Right-side difference derivative of order alpha truncated at eps."""
    M = marchaud_matrix(f.a, f.b, f.n, alpha, eps)
    return f.with_values(M @ f.values)


def riesz_potential(f: Grid1D, beta: float) -> Grid1D:
    """Symmetric potential with kernel |s - x|^(beta - 1), zero extension."""
    if not (0.0 < beta < 1.0):
        raise SpecError("potential order must lie in (0, 1)")
    plus = rl_integral(f, FracOrder(beta)).values
    flipped = f.with_values(f.values[::-1])
    minus = rl_integral(flipped, FracOrder(beta)).values[::-1]
    return f.with_values((plus + minus) / (2.0 * math.cos(beta * math.pi / 2.0)))


def difference_frac_coeffs(alpha: float, c: float, K: int) -> np.ndarray:
    """Coefficients of the fractional power of c(I - shift), by recurrence.

    C_0 = c^alpha, C_1 = -alpha c^alpha, C_{k+1} = C_k (k - alpha)/(k + 1);
    the recurrence is the stable route, the ratio never grows.
    """
    if not (0.0 < alpha < 1.0):
        raise SpecError("power must lie in (0, 1)")
    if c <= 0:
        raise SpecError("scale c must be positive")
    out = np.zeros(K + 1, dtype=complex)
    out[0] = c ** alpha
    if K >= 1:
        out[1] = -alpha * c ** alpha
    for k in range(1, K):
        out[k + 1] = out[k] * (k - alpha) / (k + 1.0)
    return out


def difference_frac_coeffs_alt(alpha: float, c: float, K: int) -> np.ndarray:
    """Same coefficients' partial-sum companions, by independent quadrature.

    C'_k = (c^{k+1} sin(alpha pi)/pi) * integral over xi in (0, inf) of
    xi^(alpha-1) (xi + c)^(-k-1).  The substitution xi = c u/(1-u) turns this
    into a Beta-type integral on (0, 1) whose endpoint powers the algebraic
    weight rule integrates essentially exactly.
    """
    if not (0.0 < alpha < 1.0):
        raise SpecError("power must lie in (0, 1)")
    if c <= 0:
        raise SpecError("scale c must be positive")
    pref = c ** alpha * math.sin(alpha * math.pi) / math.pi
    out = np.zeros(K + 1, dtype=complex)
    for k in range(K + 1):
        # The default stopping tolerance leaves qaws with a pessimistic error
        # estimate at large k even though the computed value is exact; asking
        # for more forces the extra subdivisions that tighten the estimate.
        res = quad(
            lambda u: 1.0, 0.0, 1.0,
            weight="alg", wvar=(alpha - 1.0, k - alpha),
            epsabs=1e-13, epsrel=1e-13, limit=200, full_output=True,
        )
        if len(res) > 3:
            raise ToleranceError(
                f"coefficient quadrature failed at k = {k}: {res[3]}",
                estimate=pref * res[0], error=res[1],
            )
        value, abserr = res[0], res[1]
        if abserr > 1e-11 * max(1.0, abs(value)):
            raise ToleranceError(
                f"coefficient quadrature too loose at k = {k}",
                estimate=pref * value, error=abserr,
            )
        out[k] = pref * value
    return out


def _stencil_derivative(fn, t: float, h: float) -> np.ndarray:
    """Fourth-order five-point first derivative."""
    fp2 = np.asarray(fn(t + 2.0 * h), dtype=complex)
    fp1 = np.asarray(fn(t + h), dtype=complex)
    fm1 = np.asarray(fn(t - h), dtype=complex)
    fm2 = np.asarray(fn(t - 2.0 * h), dtype=complex)
    return (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h)


def time_frac_derivative(u, alpha: float, t: float, quad_tol: float = 1e-13) -> np.ndarray:
    """Right-hand time derivative of order 1/alpha of a decaying evaluator.

    alpha = 1 short-circuits to -du/dt.  For alpha > 1 the defining tail
    integral is regularized by x = s^(alpha/(alpha-1)) and differentiated
    with the same five-point stencil, step 1e-5 * max(1, t).
    """
    if alpha < 1.0:
        raise SpecError("summation order must satisfy alpha >= 1")
    if t <= 0.0:
        raise SpecError("time derivative needs t > 0")
    h = 1e-5 * max(1.0, t)
    if alpha == 1.0:
        return -_stencil_derivative(lambda s: np.atleast_1d(u(s)), t, h)

    g = alpha / (alpha - 1.0)
    ref = np.linalg.norm(np.atleast_1d(u(t)))
    smax = 1.0
    for _ in range(64):
        tail = np.linalg.norm(np.atleast_1d(u(t + smax ** g)))
        if tail <= 1e-13 * (1.0 + ref):
            break
        smax *= 2.0
    else:
        raise DecayError(
            f"evaluator does not decay: |u| = {tail:.3e} at offset {smax ** g:.3e}",
            offenders=(smax,),
        )

    def tail_integral(tau: float) -> np.ndarray:
        val, err = quad_vec(
            lambda s: np.atleast_1d(u(tau + s ** g)),
            0.0, smax, epsabs=quad_tol, epsrel=1e-12,
        )
        if err > 1e4 * quad_tol * (1.0 + np.linalg.norm(val)):
            raise ToleranceError(
                "tail quadrature did not reach tolerance", estimate=val, error=err,
            )
        return g * val

    dF = _stencil_derivative(tail_integral, t, h)
    return -dF / gamma(1.0 - 1.0 / alpha)


def accretivity_certificate(alpha: float, d: float) -> float:
    """Lower bound mu for the real part of the difference-derivative form.

    On an interval of length d and order alpha in (0,1) the monotone-weight
    bound reduces to mu = 1 / (Gamma(1-alpha) d^alpha).
    """
    if not (0.0 < alpha < 1.0):
        raise SpecError("order must lie in (0, 1)")
    if d <= 0:
        raise SpecError("interval length must be positive")
    return 1.0 / (gamma(1.0 - alpha) * d ** alpha)
