"""Dense complex linear algebra with declared spectral structure.

Operators are built from their Jordan data, never the other way around:
recovering chain structure from an arbitrary matrix is ill posed, so a
JordanSpec carries eigenvalues, chain lengths and the root-vector basis,
and the matrix is materialized from them.  Arbitrary matrices enter only
through the diagonalizable path, guarded by an eigenvalue-separation check.

Inner products follow the convention (f, g) = sum f_j conj(g_j), linear in
the first slot and conjugate-linear in the second.
"""

from __future__ import annotations

import dataclasses
import json

import numpy as np

from .errors import PoleError, SpecError

# Declared eigenvalues closer than this, relative to the larger modulus,
# are rejected: the chain data would not identify the blocks.
EIGEN_CLUSTER_RTOL = 1e-8

# Diagonalizable path demands this much relative separation from a solver's
# eigenvalues before trusting the computed eigenbasis.
DIAG_SEPARATION = 1e-6

_COND_LIMIT = 1e12


def inner(f: np.ndarray, g: np.ndarray) -> complex:
    """(f, g), conjugate-linear in the second argument."""
    return complex(np.vdot(g, f))


@dataclasses.dataclass
class DenseOperator:
    """Square complex matrix with a free-text label."""

    dim: int
    entries: np.ndarray
    label: str = ""

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise SpecError("operator entries must form a square matrix")
        if entries.shape[0] != self.dim or self.dim < 1:
            raise SpecError(f"dim {self.dim} does not match a {entries.shape} matrix")
        if not np.isfinite(entries).all():
            raise SpecError("operator entries must be finite")
        self.entries = entries

    def apply(self, f: np.ndarray) -> np.ndarray:
        return self.entries @ np.asarray(f, dtype=complex)


def dense(entries, label: str = "") -> DenseOperator:
    entries = np.asarray(entries, dtype=complex)
    return DenseOperator(dim=entries.shape[0], entries=entries, label=label)


@dataclasses.dataclass
class JordanSpec:
    """Eigenvalues, chain lengths and the root-vector basis of an operator B.

    eigenvalues lists the distinct mu_q; chains[q] lists the chain lengths
    attached to mu_q; basis columns are the root vectors in chain order with
    the eigenvector first.  The biorthogonal system G = (S^{-1})^* is derived
    so that (e_i, g_j) = delta_ij; with that normalization the expansion
    coefficient of f along e_i is simply (f, g_i).
    """

    eigenvalues: np.ndarray
    chains: tuple[tuple[int, ...], ...]
    basis: np.ndarray
    label: str = ""

    def __post_init__(self):
        mu = np.asarray(self.eigenvalues, dtype=complex).ravel()
        if mu.size == 0:
            raise SpecError("need at least one eigenvalue")
        if np.any(mu == 0):
            raise SpecError("zero eigenvalue has no finite characteristic number")
        for i in range(mu.size):
            for j in range(i + 1, mu.size):
                scale = max(abs(mu[i]), abs(mu[j]))
                if abs(mu[i] - mu[j]) < EIGEN_CLUSTER_RTOL * scale:
                    raise SpecError(
                        f"eigenvalues {mu[i]} and {mu[j]} are not separated "
                        f"(relative clustering tolerance {EIGEN_CLUSTER_RTOL:g})"
                    )
        chains = tuple(tuple(int(k) for k in ch) for ch in self.chains)
        if len(chains) != mu.size:
            raise SpecError("one chain-length list required per eigenvalue")
        if any(len(ch) == 0 or min(ch) < 1 for ch in chains):
            raise SpecError("chain lengths must be positive integers")
        dim = sum(sum(ch) for ch in chains)
        basis = np.asarray(self.basis, dtype=complex)
        if basis.shape != (dim, dim):
            raise SpecError(
                f"basis must be {dim}x{dim} to carry {dim} root vectors, got {basis.shape}"
            )
        cond = np.linalg.cond(basis)
        if not np.isfinite(cond) or cond > _COND_LIMIT:
            raise SpecError(
                f"root-vector basis is numerically singular: cond(S) = {cond:.3e} "
                f"exceeds {_COND_LIMIT:.0e}"
            )
        self.eigenvalues = mu
        self.chains = chains
        self.basis = basis
        self._inv_basis = np.linalg.inv(basis)
        self.biorthogonal = self._inv_basis.conj().T

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def characteristic_numbers(self) -> np.ndarray:
        """lambda_q = 1/mu_q, the resolvent poles in the lambda variable."""
        return 1.0 / self.eigenvalues

    def chain_slices(self):
        """Yield (q, xi, slice) for every chain in basis-column order."""
        start = 0
        for q, lengths in enumerate(self.chains):
            for xi, k in enumerate(lengths):
                yield q, xi, slice(start, start + k)
                start += k

    def chain_slice(self, q: int, xi: int) -> slice:
        for qq, xx, sl in self.chain_slices():
            if qq == q and xx == xi:
                return sl
        raise SpecError(f"no chain ({q}, {xi}) in this spec")

    def jordan_matrix(self) -> np.ndarray:
        J = np.zeros((self.dim, self.dim), dtype=complex)
        for q, _, sl in self.chain_slices():
            n = sl.stop - sl.start
            J[sl, sl] = self.eigenvalues[q] * np.eye(n) + np.eye(n, k=1)
        return J

    @property
    def diagonalizable(self) -> bool:
        return all(k == 1 for ch in self.chains for k in ch)

    def to_text(self) -> str:
        doc = {
            "eigenvalues": [[m.real, m.imag] for m in self.eigenvalues],
            "chains": [list(ch) for ch in self.chains],
            "basis": [[[v.real, v.imag] for v in row] for row in self.basis],
            "label": self.label,
        }
        return json.dumps(doc, sort_keys=True, indent=1)

    @classmethod
    def from_text(cls, text: str) -> "JordanSpec":
        try:
            doc = json.loads(text)
            mu = [complex(re, im) for re, im in doc["eigenvalues"]]
            chains = tuple(tuple(ch) for ch in doc["chains"])
            basis = np.array(
                [[complex(re, im) for re, im in row] for row in doc["basis"]]
            )
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise SpecError(f"unreadable operator document: {exc}") from exc
        return cls(
            eigenvalues=np.array(mu), chains=chains, basis=basis,
            label=doc.get("label", ""),
        )


def diagonal_spec(eigenvalues, basis=None, label: str = "") -> JordanSpec:
    """JordanSpec of a diagonalizable operator with the given eigenvalues."""
    mu = np.asarray(eigenvalues, dtype=complex).ravel()
    if basis is None:
        basis = np.eye(mu.size, dtype=complex)
    return JordanSpec(
        eigenvalues=mu, chains=tuple((1,) for _ in mu), basis=basis, label=label,
    )


def diagonalizable_spec_from_matrix(entries, label: str = "") -> JordanSpec:
    """Admit an arbitrary matrix through the diagonalizable path.

    Eigenvalues must be pairwise separated by DIAG_SEPARATION relative to the
    larger modulus, otherwise the computed eigenbasis is not trustworthy and
    the matrix is rejected.
    """
    entries = np.asarray(entries, dtype=complex)
    values, vectors = np.linalg.eig(entries)
    n = values.size
    for i in range(n):
        for j in range(i + 1, n):
            scale = max(abs(values[i]), abs(values[j]), 1e-300)
            if abs(values[i] - values[j]) < DIAG_SEPARATION * scale:
                raise SpecError(
                    f"eigenvalues {values[i]} and {values[j]} are closer than the "
                    f"diagonalizable-path separation guard {DIAG_SEPARATION:g}"
                )
    order = np.argsort(-np.abs(values))
    return diagonal_spec(values[order], vectors[:, order], label=label)


@dataclasses.dataclass
class SectorGauge:
    """Monte-Carlo certificate that the numerical range sits in a sector.

    vertex is the sector apex on the real axis, semi_angle the largest
    sampled |arg((Bf,f) - vertex)|.  certified means every sample kept a
    positive real part after the vertex shift; the angle is exact only up to
    the sampling, which is documented as a certificate, not a proof.
    """

    vertex: float
    semi_angle: float
    sample_count: int
    certified: bool


def build_jordan_operator(spec: JordanSpec, label: str | None = None) -> DenseOperator:
    """Materialize B = S J S^{-1} from its declared structure."""
    S = spec.basis
    J = spec.jordan_matrix()
    B = (S @ J) @ spec._inv_basis
    defect = np.linalg.norm(B @ S - S @ J) / max(np.linalg.norm(S @ J), 1e-300)
    if defect > 1e-12:
        raise SpecError(
            f"structure equation B S = S J violated at relative {defect:.3e}; "
            f"cond(S) = {np.linalg.cond(S):.3e}"
        )
    return DenseOperator(
        dim=spec.dim, entries=B,
        label=spec.label if label is None else label,
    )


def resolvent_apply(B: DenseOperator, lam: complex, f: np.ndarray) -> np.ndarray:
    """Solve (I - lam B) x = f with a pole guard and a residual check."""
    f = np.asarray(f, dtype=complex)
    lam = complex(lam)
    mu = np.linalg.eigvals(B.entries)
    for m in mu:
        if m == 0:
            continue
        pole = 1.0 / m
        if abs(lam - pole) <= 1e-12 * max(1.0, abs(pole)):
            raise PoleError(
                f"lambda = {lam} sits on the characteristic number {pole}", pole=pole,
            )
    A = np.eye(B.dim, dtype=complex) - lam * B.entries
    x = np.linalg.solve(A, f)
    residual = np.linalg.norm(A @ x - f)
    if residual > 1e-10 * max(np.linalg.norm(f), 1e-300):
        raise PoleError(
            f"solve residual {residual:.3e} exceeds tolerance; lambda = {lam} "
            "is too close to a pole for a reliable solve"
        )
    return x


def jordan_resolvent_chain(spec: JordanSpec, zeta: complex, q: int, xi: int, i: int) -> np.ndarray:
    """(zeta I - B)^{-1} e_{q_xi + i} from the closed-form chain expansion.

    The resolvent maps a root vector of height i into the span of the lower
    part of its own chain with coefficients (zeta - mu_q)^{-(i - j + 1)}.
    """
    mu_q = spec.eigenvalues[q]
    zeta = complex(zeta)
    if abs(zeta - mu_q) <= 1e-14 * max(1.0, abs(mu_q)):
        raise PoleError(f"zeta = {zeta} is the eigenvalue mu_q = {mu_q}", pole=mu_q)
    sl = spec.chain_slice(q, xi)
    k = sl.stop - sl.start
    if not (0 <= i < k):
        raise SpecError(f"chain offset {i} outside chain of length {k}")
    out = np.zeros(spec.dim, dtype=complex)
    for j in range(i + 1):
        out += spec.basis[:, sl.start + j] / (zeta - mu_q) ** (i - j + 1)
    return out


def _range_boundary_directions(entries: np.ndarray, angles: int) -> list[np.ndarray]:
    """Unit vectors whose Rayleigh quotients trace the numerical-range boundary.

    For each rotation angle the extreme eigenvector of Re(e^{-i psi} B) gives
    a supporting point of the range; these are genuine unit-vector samples and
    make the sampled semi-angle sharp in practice.
    """
    out = []
    for psi in np.linspace(0.0, 2.0 * np.pi, angles, endpoint=False):
        H = 0.5 * (np.exp(-1j * psi) * entries + (np.exp(-1j * psi) * entries).conj().T)
        _, vecs = np.linalg.eigh(H)
        out.append(vecs[:, -1])
    return out


def _as_dense(B) -> DenseOperator:
    if isinstance(B, DenseOperator):
        return B
    entries = np.asarray(B, dtype=complex)
    return DenseOperator(dim=entries.shape[0], entries=entries, label="")


def sector_gauge(B, vertex: float, samples: int, seed: int = 0) -> SectorGauge:
    """Certify a sector for the numerical range of B around a real vertex.

    Sampled directions are seeded random unit vectors, the eigenvector
    directions, and the numerical-range boundary directions, so the reported
    semi-angle is attained rather than merely approached.
    """
    B = _as_dense(B)
    if samples < B.dim * B.dim:
        raise SpecError(f"need at least dim^2 = {B.dim ** 2} samples, got {samples}")
    rng = np.random.default_rng(seed)
    directions = []
    for _ in range(samples):
        v = rng.standard_normal(B.dim) + 1j * rng.standard_normal(B.dim)
        directions.append(v / np.linalg.norm(v))
    _, eigvecs = np.linalg.eig(B.entries)
    for j in range(B.dim):
        v = eigvecs[:, j]
        directions.append(v / np.linalg.norm(v))
    boundary = _range_boundary_directions(B.entries, max(64, min(1024, samples // 4)))
    directions.extend(boundary)

    theta = 0.0
    certified = True
    for v in directions:
        w = inner(B.apply(v), v) - vertex
        if w.real <= 0.0:
            return SectorGauge(
                vertex=vertex, semi_angle=np.pi / 2.0,
                sample_count=len(directions), certified=False,
            )
        theta = max(theta, float(abs(np.angle(w))))
    certified = theta < np.pi / 2.0
    return SectorGauge(
        vertex=vertex, semi_angle=theta,
        sample_count=len(directions), certified=certified,
    )


def hermitian_components(B: DenseOperator) -> tuple[DenseOperator, DenseOperator]:
    """Hermitian pair (Re B, Im B) with B = Re B + i Im B exactly."""
    re = 0.5 * (B.entries + B.entries.conj().T)
    im = (B.entries - B.entries.conj().T) / 2j
    return (
        DenseOperator(B.dim, re, label=f"Re({B.label})" if B.label else "Re"),
        DenseOperator(B.dim, im, label=f"Im({B.label})" if B.label else "Im"),
    )


def singular_values(B) -> np.ndarray:
    """s-numbers in descending order."""
    return np.linalg.svd(_as_dense(B).entries, compute_uv=False)


def random_jordan_spec(seed: int, dim: int, max_chain: int = 4,
                       sector: float = 0.3,
                       modulus_range: tuple[float, float] = (0.5, 8.0)) -> JordanSpec:
    """Seeded sectorial test operator with explicit Jordan data.

    Characteristic numbers sit in the sector |arg| <= sector with pairwise
    well-separated moduli; the root-vector basis is a bounded perturbation of
    the identity so conditioning never degrades the oracle comparisons.
    """
    if dim < 1:
        raise SpecError("dimension must be at least 1")
    if max_chain < 1:
        raise SpecError("chains need positive length")
    rng = np.random.default_rng(seed)

    lengths = []
    left = dim
    while left > 0:
        k = int(rng.integers(1, min(max_chain, left) + 1))
        lengths.append(k)
        left -= k
    n_eig = int(rng.integers(1, len(lengths) + 1))
    chains = [[] for _ in range(n_eig)]
    for i, k in enumerate(lengths):
        chains[i % n_eig].append(k)

    lo, hi = modulus_range
    for _ in range(64):
        moduli = np.sort(rng.uniform(lo, hi, n_eig))
        if n_eig == 1 or np.min(np.diff(moduli) / moduli[1:]) > 5e-2:
            break
    else:
        moduli = np.geomspace(lo, hi, n_eig)
    args = rng.uniform(-sector, sector, n_eig)
    lam = moduli * np.exp(1j * args)

    for _ in range(64):
        G = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
        S = np.eye(dim, dtype=complex) + 0.25 * G / np.sqrt(dim)
        if np.linalg.cond(S) < 1e3:
            break
    else:
        S = np.eye(dim, dtype=complex)

    return JordanSpec(
        eigenvalues=1.0 / lam,
        chains=tuple(tuple(ch) for ch in chains),
        basis=S,
        label=f"seeded spec {seed}, dim {dim}",
    )


def decaying_element(spec: JordanSpec, seed: int = 0, base: float = 0.5) -> np.ndarray:
    """Element whose root-vector coefficients decay geometrically.

    Fast-decaying coefficients keep the early spectral groups dominant,
    which is what the initial-condition studies need.
    """
    if not (0 < base < 1):
        raise SpecError("decay base must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    n = spec.dim
    phases = np.exp(2j * np.pi * rng.uniform(size=n))
    coeffs = base ** np.arange(n) * phases
    return spec.basis @ coeffs
