"""Growth analytics for zero sequences of entire functions.

Everything here works on finite truncations.  Quantities that are limits in
nature (convergence exponent, divergence at the exponent) are produced as
estimates with declared tolerance, never as exact claims: the tail-window
tests compare weighted block sums of the last half of the data, which is the
sharpest statistic the truncation supports.
"""

from __future__ import annotations

import dataclasses
import math
import warnings

import numpy as np

from .errors import ConstructionWarning, ExtrapolationWarning, PoleError, SpecError

# Block-sum ratio of the boundary (harmonic-like) tail; convergence is
# declared strictly below it so exact-boundary data classifies divergent.
_RATIO_CRITICAL = math.log(4.0 / 3.0) / math.log(1.5)
_RATIO_MARGIN = 1e-3


@dataclasses.dataclass
class ZeroSequence:
    """Ascending moduli of a zero set, optionally with matching arguments."""

    moduli: np.ndarray
    args: np.ndarray | None = None

    def __post_init__(self):
        m = np.asarray(self.moduli, dtype=float).ravel()
        if m.size and (not np.all(m > 0) or not np.all(np.diff(m) >= 0)):
            raise SpecError("moduli must be positive and non-decreasing")
        self.moduli = m
        if self.args is not None:
            a = np.asarray(self.args, dtype=float).ravel()
            if a.size != m.size:
                raise SpecError("argument list must match the moduli in length")
            self.args = a

    def __len__(self) -> int:
        return int(self.moduli.size)

    def zeros(self) -> np.ndarray:
        if self.args is None:
            return self.moduli.astype(complex)
        return self.moduli * np.exp(1j * self.args)

    def to_csv(self) -> str:
        args = self.args if self.args is not None else np.zeros(len(self))
        lines = ["modulus,arg"]
        lines.extend(f"{m:.16e},{a:.16e}" for m, a in zip(self.moduli, args))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "ZeroSequence":
        rows = [ln for ln in text.strip().splitlines() if ln.strip()]
        if not rows or rows[0].strip().lower() != "modulus,arg":
            raise SpecError("zero-sequence csv must start with 'modulus,arg'")
        moduli, args = [], []
        for ln in rows[1:]:
            parts = ln.split(",")
            if len(parts) != 2:
                raise SpecError(f"bad zero-sequence row: {ln!r}")
            moduli.append(float(parts[0]))
            args.append(float(parts[1]))
        return cls(moduli=np.asarray(moduli), args=np.asarray(args))


@dataclasses.dataclass
class GrowthReport:
    rho_hat: float
    genus: int
    diverges_at_rho: bool
    beta_samples: tuple = ()

    def __post_init__(self):
        if not (self.genus - 0.05 <= self.rho_hat <= self.genus + 1.05):
            raise SpecError(
                f"estimate rho = {self.rho_hat:.4f} outside [p, p+1] for p = {self.genus}"
            )

    def to_text(self) -> str:
        lines = [
            f"rho_hat = {self.rho_hat:.6f}",
            f"genus = {self.genus}",
            f"diverges_at_rho = {str(self.diverges_at_rho).lower()}",
        ]
        for r, b in self.beta_samples:
            lines.append(f"beta({r:.6e}) = {b:.6e}")
        return "\n".join(lines) + "\n"


def counting_function(z: ZeroSequence, r: float) -> int:
    if not r > 0:
        raise SpecError("counting radius must be positive")
    return int(np.searchsorted(z.moduli, r, side="left"))


def _tail_blocks(moduli: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = moduli.size
    window = moduli[n // 2 :]
    half = window.size // 2
    return window[:half], window[half:]


def _block_ratio(first: np.ndarray, second: np.ndarray, e: float) -> float:
    with np.errstate(over="ignore", under="ignore"):
        s1 = float(np.sum(first ** (-e)))
        s2 = float(np.sum(second ** (-e)))
    if not (np.isfinite(s1) and s1 > 0):
        return float("inf")
    return s2 / s1


def _tail_converges(moduli: np.ndarray, e: float) -> bool:
    first, second = _tail_blocks(moduli)
    return _block_ratio(first, second, e) <= _RATIO_CRITICAL - _RATIO_MARGIN


def _diverges_at(moduli: np.ndarray, e: float) -> bool:
    """Dyadic partial-sum increment test at exponent e.

    For a tail that genuinely converges the increments over doubling index
    blocks shrink geometrically; near the exponent they stall.  The 0.7
    cutoff tolerates slowly varying corrections on the divergent side.
    """
    n = moduli.size
    marks = [n // 8, n // 4, n // 2, n]
    with np.errstate(over="ignore", under="ignore"):
        incs = [
            float(np.sum(moduli[a:b] ** (-e))) for a, b in zip(marks, marks[1:])
        ]
    if any(not np.isfinite(v) or v == 0.0 for v in incs):
        return True
    return min(incs[1] / incs[0], incs[2] / incs[1]) >= 0.7


def convergence_exponent(z: ZeroSequence, lam_grid=None) -> GrowthReport:
    """Estimate the convergence exponent and genus from a finite truncation.

    The boundary between tail-convergent and tail-divergent exponents on the
    grid is refined by bisection.  The estimate is declared good to 0.05;
    diverges_at_rho reports the increment test at the estimate itself.
    """
    moduli = z.moduli
    if moduli.size < 1000:
        raise SpecError(
            f"need at least 1000 moduli for a tail estimate, got {moduli.size}"
        )
    grid = np.linspace(0.05, 4.0, 80) if lam_grid is None else np.asarray(lam_grid, float)
    if grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise SpecError("exponent grid must be increasing with at least two points")

    conv = [_tail_converges(moduli, e) for e in grid]
    if not any(conv):
        raise SpecError("no convergent exponent on the grid; extend it upward")
    k = conv.index(True)
    if k == 0:
        lo, hi = min(1e-3, grid[0] / 10.0), grid[0]
    else:
        lo, hi = grid[k - 1], grid[k]
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _tail_converges(moduli, mid):
            hi = mid
        else:
            lo = mid
    rho_hat = 0.5 * (lo + hi)

    genus = None
    for p in range(0, 12):
        if _tail_converges(moduli, float(p + 1)):
            genus = p
            break
    if genus is None:
        raise SpecError("genus exceeds 11; sequence grows too slowly")

    return GrowthReport(
        rho_hat=rho_hat,
        genus=genus,
        diverges_at_rho=_diverges_at(moduli, rho_hat),
    )


def _segment_lower(s1, s2, p):
    # integral of t^(-p-1) over (s1, s2)
    if p == 0:
        return np.log(s2 / s1)
    return (s1 ** (-p) - s2 ** (-p)) / p


def _segment_upper(s1, s2, p):
    # integral of t^(-p-2) over (s1, s2)
    return (s1 ** (-p - 1.0) - s2 ** (-p - 1.0)) / (p + 1.0)


def beta_function(z: ZeroSequence, r: float, p: int, rho1: float, tail_exponent=None) -> float:
    """Growth weight r^(p - rho1) * (lower + r * upper counting integrals).

    Step-function segments integrate in closed form; past the last modulus
    the count extrapolates as c t^tau with c pinned by continuity at the
    data edge.  The upper integral requires tau < p + 1.
    """
    if not r > 0:
        raise SpecError("radius must be positive")
    if p < 0 or p != int(p):
        raise SpecError("genus must be a non-negative integer")
    p = int(p)
    # rho1 only scales the prefactor, so the endpoint cases p and p+1 stay
    # well defined; the decay statements just make no promise there.
    m = z.moduli
    n = m.size
    if n == 0:
        return 0.0
    tau = float(tail_exponent) if tail_exponent is not None else None
    if tau is None:
        raise SpecError("tail exponent required to extrapolate the count")
    if tau >= p + 1.0:
        raise SpecError(
            f"tail exponent {tau} >= p + 1 makes the upper integral diverge"
        )
    if r > 10.0 * m[-1]:
        warnings.warn(
            f"radius {r:.3e} lies beyond 10x the last modulus {m[-1]:.3e}",
            ExtrapolationWarning,
        )
    c = n / m[-1] ** tau

    lower = 0.0
    upper = 0.0
    if n > 1:
        lo = m[:-1]
        hi = m[1:]
        k = np.arange(1, n, dtype=float)
        # pieces of (m_j, m_{j+1}) below r
        s2 = np.minimum(hi, r)
        mask = lo < s2
        if np.any(mask):
            lower += float(np.sum(k[mask] * _segment_lower(lo[mask], s2[mask], p)))
        # pieces above r
        s1 = np.maximum(lo, r)
        mask = s1 < hi
        if np.any(mask):
            upper += float(np.sum(k[mask] * _segment_upper(s1[mask], hi[mask], p)))

    # beyond the data edge: n(t) ~ c t^tau
    if r > m[-1]:
        d = tau - p
        if abs(d) < 1e-12:
            lower += c * math.log(r / m[-1])
        else:
            lower += c * (r ** d - m[-1] ** d) / d
    s0 = max(r, m[-1])
    upper += c * s0 ** (tau - p - 1.0) / (p + 1.0 - tau)

    return r ** (p - rho1) * (lower + r * upper)


def canonical_product(zeros, z: complex, p: int) -> complex:
    """Finite product of primary factors G(z/a, p) = (1-w) exp(sum w^k / k)."""
    if p < 0 or p != int(p):
        raise SpecError("genus must be a non-negative integer")
    p = int(p)
    a = np.asarray(zeros, dtype=complex).ravel()
    if a.size and np.any(np.abs(a) < 1e-300):
        raise SpecError("zeros must be nonzero")
    z = complex(z)
    hit = np.abs(z - a) <= 1e-14 * np.maximum(np.abs(a), abs(z))
    if np.any(hit):
        warnings.warn("argument coincides with a zero", ConstructionWarning)
        return 0j
    w = z / a
    out = np.prod(1.0 - w)
    if p > 0:
        acc = np.zeros_like(w)
        for k in range(p, 0, -1):
            acc = (acc + 1.0 / k) * w
        out = out * np.exp(np.sum(acc))
    return complex(out)


def canonical_product_log_abs(zeros, z: complex, p: int) -> float:
    """ln of the product magnitude, stable for large truncations."""
    if p < 0 or p != int(p):
        raise SpecError("genus must be a non-negative integer")
    p = int(p)
    a = np.asarray(zeros, dtype=complex).ravel()
    z = complex(z)
    w = z / a
    hit = np.abs(1.0 - w) < 1e-300
    if np.any(hit):
        return -math.inf
    total = float(np.sum(np.log(np.abs(1.0 - w))))
    if p > 0:
        acc = np.zeros_like(w)
        for k in range(p, 0, -1):
            acc = (acc + 1.0 / k) * w
        total += float(np.sum(acc.real))
    return total


def fredholm_det(B, lam: complex) -> complex:
    """det(I - lam B) as the product over eigenvalues."""
    entries = np.asarray(getattr(B, "entries", B), dtype=complex)
    mu = np.linalg.eigvals(entries)
    return complex(np.prod(1.0 - complex(lam) * mu))


def det_resolvent_bound_check(B, lam: complex) -> tuple[float, float]:
    """Both sides of |det(I-lam B)| ||(I-lam B)^-1|| <= 2 prod(1+|lam| s_n)."""
    entries = np.asarray(getattr(B, "entries", B), dtype=complex)
    lam = complex(lam)
    n = entries.shape[0]
    A = np.eye(n) - lam * entries
    s = np.linalg.svd(A, compute_uv=False)
    if s[-1] <= 1e-14 * max(1.0, s[0]):
        raise PoleError("1/lambda sits on the spectrum", pole=lam)
    det = np.prod(1.0 - lam * np.linalg.eigvals(entries))
    lhs = abs(det) / s[-1]
    sB = np.linalg.svd(entries, compute_uv=False)
    rhs = 2.0 * float(np.prod(1.0 + abs(lam) * sB))
    return float(lhs), rhs


def angular_H(delta_jumps, rho: float, psi: float) -> float:
    """Angular weight H(psi) for a discrete angular density.

    delta_jumps is a sequence of (angle, increment) pairs with angles in
    (0, 2 pi] and non-negative increments; the value is the Stieltjes sum
    (pi / sin pi rho) * sum cos(rho (d_j - pi)) * jump_j with d_j the
    circular distance from psi to the jump angle.
    """
    if abs(rho - round(rho)) < 1e-12:
        raise SpecError("angular exponent must be non-integer")
    if not (0.0 < rho < 1.0):
        raise SpecError("angular exponent must lie in (0, 1)")
    total = 0.0
    for phi, jump in delta_jumps:
        if jump < 0:
            raise SpecError("angular density must be non-decreasing")
        if not (0.0 < phi <= 2.0 * math.pi + 1e-12):
            raise SpecError(f"jump angle {phi} outside (0, 2 pi]")
        d = math.pi - abs(((psi - phi) % (2.0 * math.pi)) - math.pi)
        total += math.cos(rho * (d - math.pi)) * jump
    return math.pi / math.sin(math.pi * rho) * total


def _count_target(x: np.ndarray, rho1: float) -> np.ndarray:
    # log of a^rho1 / (ln a * ln ln a) at x = ln a
    return rho1 * x - np.log(x) - np.log(np.log(x))


def example41_sequence(rho1: float, N: int) -> ZeroSequence:
    """Moduli solving n = a^rho1 / (ln a * ln ln a) on the increasing branch.

    In x = ln a the target rho1 x - ln(x ln x) decreases then increases; the
    turning point solves (ln x + 1)/(x ln x) = rho1 and every index bisects
    on the increasing branch beyond it.  Indices below the branch minimum
    (possible only for rho1 large) clamp just above the turning point.
    """
    if not (rho1 > 0) or abs(rho1 - round(rho1)) < 1e-12:
        raise SpecError("exponent must be positive and non-integer")
    if N < 1000:
        raise SpecError("need at least 1000 terms")

    def slope_gap(x):
        return (math.log(x) + 1.0) / (x * math.log(x))

    x_floor = math.e + 1e-6
    if slope_gap(x_floor) > rho1:
        lo, hi = x_floor, 10.0
        while slope_gap(hi) > rho1:
            hi *= 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if slope_gap(mid) > rho1:
                lo = mid
            else:
                hi = mid
        x_floor = hi

    targets = np.log(np.arange(1, N + 1, dtype=float))
    base = _count_target(np.array([x_floor]), rho1)[0]
    solvable = targets >= base

    x_hi = (targets[-1] + 30.0) / rho1 + x_floor + 10.0
    lo = np.full(N, x_floor)
    hi = np.full(N, x_hi)
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        below = _count_target(mid, rho1) < targets
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    x = 0.5 * (lo + hi)
    k = int(np.sum(~solvable))
    if k:
        # indices below the branch minimum: park them strictly increasing
        # just under the turning point, still above ln a = e
        step = min(1e-9, (x_floor - (math.e + 1e-7)) / (k + 1))
        x[:k] = x_floor - step * np.arange(k, 0, -1, dtype=float)
    return ZeroSequence(np.exp(x))
