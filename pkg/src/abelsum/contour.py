"""Sector contours and adaptive operator-valued contour quadrature.

The working contour surrounds the characteristic numbers with an arc of
radius half the smallest modulus and two rays truncated where the analytic
tail bound (1+R) e^{-t Re phi^alpha} drops below a tenth of the absolute
tolerance.  Quadrature is 15-point Gauss-Kronrod with worst-panel bisection;
the embedded 7-point rule supplies the error estimate, summed over panels.

Orientation: the path runs in along the lower ray, counterclockwise over the
arc, out along the upper ray.  Together with the closing arc at infinity this
winds clockwise around every pole, so (1/2 pi i) times the path integral of
the resolvent weight equals the sum of projector values directly.
"""

from __future__ import annotations

import dataclasses
import heapq
import math

import numpy as np

from .errors import DecayError, PoleError, SpecError, ToleranceError
from .funcspec import FunctionSpec, monomial, phi_alpha
from .linops import JordanSpec, sector_gauge, singular_values

# QUADPACK 15-point Kronrod nodes on [-1, 1] (non-negative half) with the
# Kronrod weights and the embedded 7-point Gauss weights.
_XGK = np.array([
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0,
])
_WGK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
])


@dataclasses.dataclass(frozen=True)
class QuadratureSettings:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_panels: int = 4000
    tail_bound_kind: str = "exponential"

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise SpecError("quadrature tolerances must be positive")
        if self.max_panels < 4:
            raise SpecError("panel budget too small")


@dataclasses.dataclass
class ContourResult:
    value: np.ndarray
    error: float
    panels: int
    tail_bound: float


@dataclasses.dataclass(frozen=True)
class _Piece:
    """Parametrized path piece on s in [0, 1]: returns (lambda, dlambda/ds)."""

    kind: str
    p0: complex
    p1: complex

    def at(self, s: float) -> tuple[complex, complex]:
        if self.kind == "exp":
            # p0 (p1/p0)^s: logarithmic ray through the origin direction
            ratio = self.p1 / self.p0
            lam = self.p0 * ratio ** s
            return lam, lam * np.log(ratio)
        if self.kind == "line":
            return self.p0 + (self.p1 - self.p0) * s, self.p1 - self.p0
        if self.kind == "arc":
            # p0 = radius, p1 = start angle + i * sweep
            a0, sweep = self.p1.real, self.p1.imag
            ang = a0 + sweep * s
            lam = self.p0 * np.exp(1j * ang)
            return lam, 1j * sweep * lam
        raise SpecError(f"unknown piece kind {self.kind!r}")


@dataclasses.dataclass
class SectorContour:
    kind: str
    r: float
    semi_angle: float
    r_max: float
    vertex: float = 0.0
    tail_bound: float = 0.0

    def __post_init__(self):
        if self.kind not in ("theta", "gamma"):
            raise SpecError("contour kind must be theta or gamma")
        if self.kind == "theta":
            if not self.r > 0:
                raise SpecError("arc radius must be positive")
            if not (0 < self.semi_angle < math.pi / 2):
                raise SpecError("contour semi-angle must lie in (0, pi/2)")
        else:
            if not self.vertex < 0:
                raise SpecError("small-angle contour needs a negative vertex")
        if not self.r_max > max(self.r, 0.0):
            raise SpecError("ray truncation must exceed the arc radius")

    def pieces(self) -> list:
        w = self.semi_angle
        if self.kind == "theta":
            lo_far = self.r_max * np.exp(-1j * w)
            lo_near = self.r * np.exp(-1j * w)
            hi_near = self.r * np.exp(1j * w)
            hi_far = self.r_max * np.exp(1j * w)
            return [
                _Piece("exp", lo_far, lo_near),
                _Piece("arc", complex(self.r), complex(-w, 2 * w)),
                _Piece("exp", hi_near, hi_far),
            ]
        v = complex(self.vertex)
        return [
            _Piece("line", v + self.r_max * np.exp(-1j * w), v),
            _Piece("line", v, v + self.r_max * np.exp(1j * w)),
        ]


def _ray_decay(phi, alpha: float, omega: float, R: float, vertex: complex = 0j) -> float:
    """min over the two ray tips of Re phi^alpha."""
    vals = []
    for sgn in (1.0, -1.0):
        lam = vertex + R * np.exp(sgn * 1j * omega)
        vals.append(phi_alpha(phi, lam, alpha).real)
    return min(vals)


def _check_ray_angles(phi, alpha: float, omega: float, radii) -> None:
    """Sampled decay condition |arg phi(lambda)| < pi/(2 alpha) along the rays."""
    bound = math.pi / (2.0 * alpha) - 0.05
    for rho in radii:
        for sgn in (1.0, -1.0):
            val = phi(rho * np.exp(sgn * 1j * omega))
            if abs(np.angle(complex(val))) >= bound:
                raise DecayError(
                    f"symbol argument {np.angle(complex(val)):.4f} leaves the "
                    f"decay sector at |lambda| = {rho:.3e}",
                    offenders=(rho,),
                )


def default_varsigma(theta: float, alpha: float) -> float:
    room = math.pi / (2.0 * alpha) - theta
    if room <= 0:
        raise DecayError(
            f"sector semi-angle {theta:.4f} leaves no room below pi/(2 alpha)"
        )
    return min(0.05, room / 4.0)


def build_contour(moduli, theta: float, varsigma: float | None = None,
                  t: float = 1.0, phi=None, alpha: float = 1.0,
                  settings: QuadratureSettings | None = None,
                  kind: str = "theta", vertex: float | None = None) -> SectorContour:
    """Contour surrounding the characteristic numbers of moduli given.

    The arc radius is half the smallest modulus; the ray truncation solves
    (1 + R) exp(-t q(R)) < abs_tol / 10 with q the sampled ray decay of
    Re phi^alpha, floored at twice the largest modulus.
    """
    m = np.asarray(moduli, dtype=float).ravel()
    if m.size == 0 or np.any(m <= 0):
        raise SpecError("need positive characteristic-number moduli")
    if alpha < 1.0:
        raise SpecError("summation order must satisfy alpha >= 1")
    if phi is None:
        phi = monomial(1)
    settings = settings or QuadratureSettings()
    if varsigma is None:
        varsigma = default_varsigma(theta, alpha)
    if varsigma <= 0:
        raise SpecError("ray inclination margin must be positive")
    omega = theta + varsigma
    if omega >= math.pi / 2:
        raise DecayError("contour rays may not reach the imaginary axis")
    if isinstance(phi, FunctionSpec):
        if phi.angle_margin(omega, alpha) <= 0:
            raise DecayError(
                "coefficient angle condition fails: the weight does not decay "
                f"on rays of inclination {omega:.4f}"
            )
        if phi.kind == "entire":
            _check_ray_angles(phi, alpha, omega, np.geomspace(m.min() / 2, 4 * m.max(), 24))
    else:
        _check_ray_angles(phi, alpha, omega, np.geomspace(m.min() / 2, 4 * m.max(), 24))
    if t <= 0:
        raise DecayError("ray truncation needs t > 0: the weight never decays")

    v = 0j if kind == "theta" else complex(vertex if vertex is not None else -0.5 * m.min())
    if kind == "gamma" and v.real >= 0:
        raise SpecError("small-angle contour needs a negative vertex")

    target = settings.abs_tol / 10.0
    R = max(2.0 * m.max(), 1.0)
    floor = R

    def tail(rr: float) -> float:
        return (1.0 + rr) * math.exp(-t * max(_ray_decay(phi, alpha, omega, rr, v), 0.0))

    k = 0
    while tail(R) >= target:
        R *= 2.0
        k += 1
        if k > 200:
            raise DecayError("tail bound never reaches the tolerance; weight too flat")
    lo, hi = R / 2.0, R
    if k > 0:
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            if tail(mid) < target:
                hi = mid
            else:
                lo = mid
    r_max = max(hi, floor)

    return SectorContour(
        kind=kind,
        r=0.5 * m.min() if kind == "theta" else 0.0,
        semi_angle=omega,
        r_max=r_max,
        vertex=v.real,
        tail_bound=tail(r_max),
    )


def _solve_node(B: np.ndarray, lam: complex, f: np.ndarray) -> np.ndarray:
    A = np.eye(B.shape[0], dtype=complex) - lam * B
    try:
        x = np.linalg.solve(A, f)
    except np.linalg.LinAlgError as exc:
        raise PoleError(f"resolvent singular at lambda = {lam}", pole=lam) from exc
    if np.linalg.norm(A @ x - f) > 1e-8 * (np.linalg.norm(f) + np.linalg.norm(x)):
        raise PoleError(f"resolvent solve lost accuracy at lambda = {lam}", pole=lam)
    return B @ x


def _panel(Fs, piece: _Piece, a: float, b: float):
    """K15 and |K15 - G7| of the mapped integrand over [a, b] in s."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    k15 = None
    g7 = None
    for idx in range(8):
        xs = (mid - half * _XGK[idx],) if idx == 7 else (
            mid - half * _XGK[idx], mid + half * _XGK[idx]
        )
        acc = None
        for s in xs:
            lam, dlam = piece.at(s)
            val = Fs(lam) * dlam
            acc = val if acc is None else acc + val
        if k15 is None:
            k15 = _WGK[idx] * acc
        else:
            k15 = k15 + _WGK[idx] * acc
        if idx % 2 == 1:
            contrib = _WG[idx // 2] * acc
            g7 = contrib if g7 is None else g7 + contrib
    k15 = k15 * half
    g7 = g7 * half
    return k15, float(np.linalg.norm(k15 - g7))


def _adaptive(Fs, pieces, settings: QuadratureSettings, initial: int = 6):
    heap = []
    counter = 0
    total = None
    for piece in pieces:
        edges = np.linspace(0.0, 1.0, initial + 1)
        for a, b in zip(edges[:-1], edges[1:]):
            val, err = _panel(Fs, piece, a, b)
            total = val if total is None else total + val
            heapq.heappush(heap, (-err, counter, a, b, piece, val, err))
            counter += 1
    while True:
        err_sum = sum(item[6] for item in heap)
        tol = max(settings.abs_tol, settings.rel_tol * float(np.linalg.norm(total)))
        if err_sum <= tol:
            return total, err_sum, counter
        if counter >= settings.max_panels:
            raise ToleranceError(
                f"panel budget {settings.max_panels} exhausted at error {err_sum:.3e}",
                estimate=total, error=err_sum,
            )
        _, _, a, b, piece, val, _ = heapq.heappop(heap)
        midp = 0.5 * (a + b)
        for aa, bb in ((a, midp), (midp, b)):
            v, e = _panel(Fs, piece, aa, bb)
            total = total + v
            heapq.heappush(heap, (-e, counter, aa, bb, piece, v, e))
            counter += 1
        total = total - val


def contour_integral(B, phi, alpha: float, t: float, f, contour: SectorContour,
                     settings: QuadratureSettings | None = None,
                     phi_weight: bool = False) -> ContourResult:
    """(1/2 pi i) path integral of e^{-phi^alpha(lambda) t} B (I-lambda B)^{-1} f.

    With phi_weight the integrand carries an extra phi(lambda) factor, which
    evaluates the operator function applied to the evolved element.
    """
    entries = np.asarray(getattr(B, "entries", B), dtype=complex)
    f = np.asarray(f, dtype=complex).ravel()
    if f.size != entries.shape[0]:
        raise SpecError("element length does not match the operator dimension")
    if t <= 0:
        raise SpecError("contour evaluation needs t > 0")
    if contour.kind == "gamma" and alpha != int(alpha):
        raise SpecError(
            "small-angle contour crosses the branch cut for non-integer order"
        )
    settings = settings or QuadratureSettings()
    if not np.any(f):
        return ContourResult(np.zeros_like(f), 0.0, 0, contour.tail_bound)

    def Fs(lam: complex) -> np.ndarray:
        w = np.exp(-t * phi_alpha(phi, lam, alpha))
        if phi_weight:
            w = w * phi(lam)
        return w * _solve_node(entries, lam, f)

    total, err, panels = _adaptive(Fs, contour.pieces(), settings)
    value = total / (2j * math.pi)
    scale = np.linalg.norm(f)
    return ContourResult(
        value=value,
        error=err / (2.0 * math.pi) + contour.tail_bound * scale,
        panels=panels,
        tail_bound=contour.tail_bound,
    )


def pole_residue(B, lam_q: complex, phi, alpha: float, t: float, f,
                 circle_radius: float | None = None,
                 settings: QuadratureSettings | None = None) -> ContourResult:
    """Projector value P_q(phi^alpha, t) f as minus the circle residue.

    The circle must separate lam_q from every other characteristic number
    and from the origin, where the fractional weight branches.
    """
    entries = np.asarray(getattr(B, "entries", B), dtype=complex)
    f = np.asarray(f, dtype=complex).ravel()
    lam_q = complex(lam_q)
    if t < 0:
        raise SpecError("time must be non-negative")
    settings = settings or QuadratureSettings()

    mu = np.linalg.eigvals(entries)
    mu = mu[np.abs(mu) > 1e-14]
    lams = 1.0 / mu
    dist = np.abs(lams - lam_q)
    # Computed eigenvalues of a defective block scatter like eps^(1/k), so a
    # cluster tolerance near machine precision would mistake the scattered
    # copies of lam_q for neighbouring poles and shrink the circle into them.
    others = dist > 1e-3 * max(1.0, abs(lam_q))
    min_sep = float(np.min(dist[others])) if np.any(others) else math.inf
    limit = min(min_sep, abs(lam_q))
    radius = circle_radius if circle_radius is not None else 0.5 * limit
    if not 0 < radius < limit * (1.0 + 1e-12):
        raise SpecError(
            f"circle radius {radius:.3e} reaches another characteristic number "
            f"or the origin (separation {limit:.3e})"
        )

    def Fs(lam: complex) -> np.ndarray:
        w = np.exp(-t * phi_alpha(phi, lam, alpha))
        return w * _solve_node(entries, lam, f)

    circle = _Piece("arc", complex(radius), complex(0.0, 2.0 * math.pi))

    @dataclasses.dataclass(frozen=True)
    class _Shifted:
        base: _Piece
        center: complex

        def at(self, s):
            lam, dlam = self.base.at(s)
            return lam + self.center, dlam

    total, err, panels = _adaptive(Fs, [_Shifted(circle, lam_q)], settings, initial=8)
    return ContourResult(
        value=-total / (2j * math.pi),
        error=err / (2.0 * math.pi),
        panels=panels,
        tail_bound=0.0,
    )


def ray_resolvent_bound_check(B, theta: float, psi: float, samples: int = 100) -> float:
    """max over sampled radii of sin(phi*) ||(I - lambda B)^{-1}|| on the ray.

    phi* is the angular distance from the ray to the sector, capped at pi/2;
    the sector membership of B is certified first and the declared theta must
    cover the sampled numerical range.
    """
    entries = np.asarray(getattr(B, "entries", B), dtype=complex)
    dim = entries.shape[0]
    gauge = sector_gauge(entries, vertex=0.0, samples=max(dim * dim, 256))
    if not gauge.certified:
        raise SpecError("operator is not certified sectorial about the origin")
    if gauge.semi_angle > theta + 1e-9:
        raise SpecError(
            f"declared semi-angle {theta:.4f} below the sampled range "
            f"{gauge.semi_angle:.4f}"
        )
    margin = abs(psi) - theta
    if margin <= 0:
        raise SpecError("ray lies inside the sector")
    phi_star = min(margin, math.pi / 2.0)
    s = singular_values(entries)
    smax = s[0] if s[0] > 0 else 1.0
    smin = s[-1] if s[-1] > 1e-12 * smax else smax * 1e-12
    radii = np.geomspace(1e-3 / smax, 1e3 / smin, samples)
    worst = 0.0
    eye = np.eye(dim)
    for rho in radii:
        lam = rho * np.exp(1j * psi)
        sv = np.linalg.svd(eye - lam * entries, compute_uv=False)
        worst = max(worst, math.sin(phi_star) / float(sv[-1]))
    return worst


def gamma_boundary_bound_check(B, contour: SectorContour, theta: float,
                               samples: int = 100) -> float:
    """max of sin(varsigma) ||(I - lambda B)^{-1}|| along a small-angle contour."""
    if contour.kind != "gamma":
        raise SpecError("check applies to small-angle contours only")
    entries = np.asarray(getattr(B, "entries", B), dtype=complex)
    margin = contour.semi_angle - theta
    if margin <= 0:
        raise SpecError("contour semi-angle does not clear the sector")
    dim = entries.shape[0]
    eye = np.eye(dim)
    worst = 0.0
    for piece in contour.pieces():
        for s in np.linspace(0.0, 1.0, samples // 2 + 2)[1:-1]:
            lam, _ = piece.at(float(s))
            sv = np.linalg.svd(eye - lam * entries, compute_uv=False)
            worst = max(worst, math.sin(min(margin, math.pi / 2)) / float(sv[-1]))
    return worst


def eigenfunction_apply(spec: JordanSpec, phi, f) -> np.ndarray:
    """phi(W) f = sum e_q phi(lambda_q) (f, g_q) for diagonalizable specs."""
    if not spec.diagonalizable:
        raise SpecError("eigen-sum evaluation needs a diagonalizable spec")
    f = np.asarray(f, dtype=complex).ravel()
    if f.size != spec.dim:
        raise SpecError("element length does not match the operator dimension")
    lam = spec.characteristic_numbers
    vals = np.asarray(phi(lam), dtype=complex)
    coeffs = spec._inv_basis @ f
    return spec.basis @ (vals * coeffs)
