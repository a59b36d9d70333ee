"""Root-vector series summation with exponential weights.

The solution weights e^{-phi^alpha(lambda_q) t} act on spectral terms grouped
by modulus gaps; inside a Jordan chain the time dependence enters through the
Taylor coefficients H_m of the weight composed with the inverse map, which
are produced here by truncated power-series arithmetic, never by symbolic
differentiation.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .errors import SpecError
from .funcspec import FunctionSpec, phi_alpha
from .linops import JordanSpec, inner


# ---------------------------------------------------------------------------
# truncated power series in (zeta - zeta_0), coefficient arrays of fixed length


def _series_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)[: a.size]


def _series_exp(g: np.ndarray) -> np.ndarray:
    out = np.zeros_like(g)
    out[0] = np.exp(g[0])
    for k in range(1, g.size):
        acc = 0.0 + 0j
        for j in range(1, k + 1):
            acc += j * g[j] * out[k - j]
        out[k] = acc / k
    return out


def _series_log(b: np.ndarray) -> np.ndarray:
    if b[0] == 0:
        raise SpecError("series has no logarithm: zero constant term")
    out = np.zeros_like(b)
    out[0] = np.log(b[0])
    for k in range(1, b.size):
        acc = k * b[k]
        for j in range(1, k):
            acc -= j * out[j] * b[k - j]
        out[k] = acc / (k * b[0])
    return out


def _series_pow(b: np.ndarray, alpha: float) -> np.ndarray:
    if alpha == 1.0:
        return b.copy()
    if alpha == int(alpha) and 1 <= int(alpha) <= 8:
        out = b.copy()
        for _ in range(int(alpha) - 1):
            out = _series_mul(out, b)
        return out
    return _series_exp(alpha * _series_log(b))


def _phi_inverse_series(phi: FunctionSpec, lam: complex, length: int) -> np.ndarray:
    """Coefficients of phi(1/zeta) about zeta_0 = 1/lambda."""
    if not isinstance(phi, FunctionSpec):
        raise SpecError("chain weights need a structured symbol, not a bare callable")
    w = np.zeros(length, dtype=complex)
    for k in range(length):
        w[k] = (-1.0) ** k * lam ** (k + 1)

    acc = np.zeros(length, dtype=complex)
    top = phi.max_degree
    low = max(phi.min_degree, 0)
    for k in range(top, low - 1, -1):
        acc = _series_mul(acc, w)
        acc[0] += phi._coeff(k)
    for _ in range(low):
        acc = _series_mul(acc, w)
    if phi.min_degree < 0:
        zeta = np.zeros(length, dtype=complex)
        zeta[0] = 1.0 / lam
        if length > 1:
            zeta[1] = 1.0
        neg = np.zeros(length, dtype=complex)
        for k in range(phi.min_degree, 0):
            neg = _series_mul(neg, zeta)
            neg[0] += phi._coeff(k)
        acc = acc + _series_mul(neg, zeta)
    return acc


@dataclasses.dataclass
class HmTable:
    """Derivative coefficients H_0..H_M of the chain weight at one eigenvalue."""

    alpha: float
    lam: complex
    t: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex).ravel()
        if vals.size == 0 or vals[0] != 1.0:
            raise SpecError("H_0 must equal 1 exactly")
        if self.t == 0.0 and vals.size > 1 and np.any(vals[1:] != 0):
            raise SpecError("all higher coefficients must vanish at t = 0")
        self.values = vals


def h_coefficients(phi, alpha: float, lam: complex, t: float, M: int) -> HmTable:
    """H_m = (e^{phi^alpha(lam) t} / m!) d^m/dzeta^m e^{-phi^alpha(1/zeta) t}.

    Evaluated at zeta_0 = 1/lam through series composition: invert, compose
    with the symbol, raise to alpha, scale by -t, exponentiate, normalize.
    """
    if lam == 0:
        raise SpecError("chain eigenvalue must be nonzero")
    if t < 0:
        raise SpecError("time must be non-negative")
    if M < 0:
        raise SpecError("need a non-negative coefficient count")
    if alpha < 1.0:
        raise SpecError("summation order must satisfy alpha >= 1")
    comp = _phi_inverse_series(phi, complex(lam), M + 1)
    if comp[0] == 0:
        raise SpecError("symbol vanishes at the chain eigenvalue")
    powered = _series_pow(comp, alpha)
    # Drop the constant before exponentiating; the shared e^{-phi^alpha t}
    # factor would otherwise under- or overflow long before the normalized
    # table does, and H_0 = e^0 = 1 lands exactly.
    shifted = -t * powered
    shifted[0] = 0.0
    values = _series_exp(shifted)
    return HmTable(alpha=alpha, lam=complex(lam), t=t, values=values)


def chain_time_coeffs(coeffs, lam: complex, phi, alpha: float, t: float) -> np.ndarray:
    """Time evolution of one Jordan chain's expansion coefficients.

    c_i(t) = e^{-phi^alpha(lam) t} sum_m H_m c_{i+m}; the eigenvector slot
    i = 0 keeps every coefficient of the chain in play.
    """
    c = np.asarray(coeffs, dtype=complex).ravel()
    k = c.size - 1
    table = h_coefficients(phi, alpha, lam, t, k).values
    decay = np.exp(-t * phi_alpha(phi, lam, alpha))
    out = np.empty_like(c)
    for i in range(c.size):
        out[i] = decay * np.dot(table[: k - i + 1], c[i:])
    return out


def fourier_chain_coeffs(spec: JordanSpec, f: np.ndarray, q: int, xi: int) -> np.ndarray:
    """Expansion coefficients (f, g_i) along one chain of the biorthogonal system."""
    sl = spec.chain_slice(q, xi)
    G = spec.biorthogonal[:, sl]
    return np.array([inner(f, G[:, i]) for i in range(G.shape[1])])


def projector_apply(spec: JordanSpec, q: int, phi, alpha: float, t: float, f) -> np.ndarray:
    """Weighted spectral projection of f onto the root space of eigenvalue q."""
    f = np.asarray(f, dtype=complex).ravel()
    if f.size != spec.dim:
        raise SpecError(f"vector length {f.size} does not match dimension {spec.dim}")
    if not 0 <= q < len(spec.eigenvalues):
        raise SpecError(f"eigenvalue index {q} out of range")
    lam = 1.0 / spec.eigenvalues[q]
    out = np.zeros(spec.dim, dtype=complex)
    for xi in range(len(spec.chains[q])):
        sl = spec.chain_slice(q, xi)
        c = fourier_chain_coeffs(spec, f, q, xi)
        ct = chain_time_coeffs(c, lam, phi, alpha, t)
        out += spec.basis[:, sl] @ ct
    return out


# ---------------------------------------------------------------------------
# grouping


@dataclasses.dataclass
class GroupingScheme:
    """Partition of modulus-ordered spectral indices into contiguous groups.

    boundaries holds 0 = N_0 < N_1 < ... < N_V = count; group nu covers the
    index window [N_nu, N_{nu+1}).
    """

    boundaries: tuple
    method: str = "manual"
    certified: tuple = ()

    def __post_init__(self):
        b = tuple(int(v) for v in self.boundaries)
        if len(b) < 2 or b[0] != 0 or any(y <= x for x, y in zip(b, b[1:])):
            raise SpecError("group boundaries must rise strictly from 0")
        self.boundaries = b

    @property
    def count(self) -> int:
        return self.boundaries[-1]

    @property
    def groups(self) -> int:
        return len(self.boundaries) - 1

    @property
    def single_group(self) -> bool:
        return self.groups == 1

    def windows(self):
        b = self.boundaries
        return [(b[i], b[i + 1]) for i in range(len(b) - 1)]


def group_by_gaps(moduli, sigma: float, K: float | None = None) -> GroupingScheme:
    """Split the ordered moduli after every relative gap at least K m^(1-sigma).

    With K omitted it is set from the order statistics of the observed gap
    ratios so that at least a quarter of the indices become group boundaries
    whenever the data admits it.
    """
    m = np.asarray(moduli, dtype=float).ravel()
    if m.size == 0:
        raise SpecError("cannot group an empty spectrum")
    if np.any(m <= 0) or np.any(np.diff(m) < 0):
        raise SpecError("moduli must be positive and ascending")
    if sigma < 0:
        raise SpecError("gap exponent must be non-negative")
    gaps = np.diff(m)
    scales = m[1:] ** (1.0 - sigma)
    ratios = gaps / scales
    if K is None:
        K = default_gap_constant(m, sigma)
    splits = [j + 1 for j in range(m.size - 1) if gaps[j] >= K * scales[j] - 1e-15]
    boundaries = [0] + splits + [int(m.size)]
    boundaries = sorted(set(boundaries))
    certified = tuple(
        (int(j), float(gaps[j - 1]), float(K * scales[j - 1])) for j in splits
    )
    return GroupingScheme(
        boundaries=tuple(boundaries),
        method=f"gaps(K={K:.6g}, sigma={sigma:.6g})",
        certified=certified,
    )


def default_gap_constant(moduli, sigma: float) -> float:
    """Largest K that still yields at least ceil(n/4) groups, by order statistic."""
    m = np.asarray(moduli, dtype=float).ravel()
    if m.size < 2:
        return 1.0
    ratios = np.diff(m) / m[1:] ** (1.0 - sigma)
    target_groups = -(-m.size // 4)
    need = target_groups - 1
    if need <= 0:
        return float(2.0 * np.max(ratios) + 1.0)
    pos = ratios[ratios > 0]
    if pos.size < need:
        return float(np.min(ratios[ratios > 0], initial=1.0))
    return float(np.sort(pos)[::-1][need - 1])


def make_power_grouping(beta: int, eta: int, count: int) -> GroupingScheme:
    """Boundaries N_nu = beta (nu+1)^gamma truncated to the spectrum size."""
    if beta < 1 or eta < 1 or beta % eta:
        raise SpecError("need positive integers with eta dividing beta")
    gamma = beta + eta
    bounds = [0]
    nu = 0
    while bounds[-1] < count:
        bounds.append(min(beta * (nu + 1) ** gamma, count))
        nu += 1
    return GroupingScheme(
        boundaries=tuple(bounds), method=f"power(beta={beta}, eta={eta})"
    )


def abel_series_sum(spec: JordanSpec, grouping: GroupingScheme | None, phi, alpha: float, t: float, f) -> np.ndarray:
    """Grouped weighted expansion of f over the root-vector system.

    Eigenvalues enter in ascending characteristic-number modulus; a missing
    grouping means one term per eigenvalue.  Grouping cannot change the sum
    of a finite expansion, only its evaluation order, which is exactly the
    invariance the cross-checks rely on.
    """
    f = np.asarray(f, dtype=complex).ravel()
    lam = spec.characteristic_numbers
    order = np.argsort(np.abs(lam), kind="stable")
    if grouping is None:
        windows = [(i, i + 1) for i in range(order.size)]
    else:
        if grouping.count != order.size:
            raise SpecError(
                f"grouping covers {grouping.count} terms, spectrum has {order.size}"
            )
        windows = grouping.windows()
    out = np.zeros(spec.dim, dtype=complex)
    for a, b in windows:
        part = np.zeros(spec.dim, dtype=complex)
        for q in order[a:b]:
            part += projector_apply(spec, int(q), phi, alpha, t, f)
        out += part
    return out


# ---------------------------------------------------------------------------
# order-reduction splitting


@dataclasses.dataclass(frozen=True)
class SplitRow:
    nu: int
    N_nu: int
    N_0: int
    N_k: tuple
    lower: int
    upper: int


@dataclasses.dataclass
class SplitTable:
    """Integer split of the group sizes N_nu = beta (nu+1)^gamma, gamma = beta + eta.

    Row nu distributes the count over slots k = 1..nu^eta with
    N_k = gamma (nu^beta - k^{beta/eta}) and the remainder in slot 0; the
    two-sided bounds certify that slot 0 keeps the dominant share.
    """

    beta: int
    eta: int
    rows: tuple

    @property
    def gamma(self) -> int:
        return self.beta + self.eta

    def to_csv_rows(self):
        out = [["nu", "N_nu", "N_0", "lower", "upper", "slots"]]
        for row in self.rows:
            out.append(
                [row.nu, row.N_nu, row.N_0, row.lower, row.upper, len(row.N_k)]
            )
        return out


def split_order_reduction(beta: int, eta: int, nu_max: int) -> SplitTable:
    if beta < 1 or eta < 1 or beta % eta:
        raise SpecError("need positive integers with eta dividing beta")
    gamma = beta + eta
    power = beta // eta
    rows = []
    for nu in range(1, nu_max + 1):
        N_nu = beta * (nu + 1) ** gamma
        ks = range(1, nu ** eta + 1)
        N_k = tuple(gamma * (nu ** beta - k ** power) for k in ks)
        if any(v < 0 for v in N_k):
            raise SpecError(f"negative slot count at nu = {nu}")
        N_0 = N_nu - sum(N_k)
        lower = beta + gamma * beta * nu ** (gamma - 1)
        upper = gamma * gamma * (nu + 1) ** (gamma - 1) - eta
        if not lower <= N_0 <= upper:
            raise SpecError(
                f"slot-zero count {N_0} escapes [{lower}, {upper}] at nu = {nu}"
            )
        rows.append(
            SplitRow(
                nu=nu, N_nu=int(N_nu), N_0=int(N_0), N_k=N_k,
                lower=int(lower), upper=int(upper),
            )
        )
    return SplitTable(beta=beta, eta=eta, rows=tuple(rows))
