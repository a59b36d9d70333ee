"""Shared oracles and corpora.

The matrix-function oracle here deliberately avoids every code path of the
library: matrix powers, a Schur-Pade fractional power, and expm.  Tests that
freeze derived values cite this oracle.
"""

from __future__ import annotations

import numpy as np
import pytest
from scipy.linalg import expm, fractional_matrix_power, inv

from abelsum import (
    CauchyProblem,
    build_difference_operator,
    build_jordan_operator,
    decaying_element,
    diagonal_spec,
    frac_perturbed_modal,
    monomial,
    random_jordan_spec,
)


def phi_matrix(W: np.ndarray, phi) -> np.ndarray:
    """phi(W) as an explicit matrix, term by term in matrix powers."""
    P = np.zeros_like(W)
    Winv = None
    for c, n in phi.terms():
        if n >= 0:
            P = P + c * np.linalg.matrix_power(W, n)
        else:
            Winv = inv(W) if Winv is None else Winv
            P = P + c * np.linalg.matrix_power(Winv, -n)
    return P


def weight_matrix_oracle(spec, phi, alpha: float, t: float, f: np.ndarray) -> np.ndarray:
    """e^{-t (phi(W))^alpha} f through scipy matrix functions only."""
    W = inv(build_jordan_operator(spec).entries)
    P = phi_matrix(W, phi)
    if alpha != 1.0:
        if float(alpha).is_integer():
            P = np.linalg.matrix_power(P, int(alpha))
        else:
            P = fractional_matrix_power(P, alpha)
    return expm(-t * P) @ f


def random_sectorial(seed: int, dim: int, angle_scale: float = 0.6) -> np.ndarray:
    """Dense matrix with positive-definite Hermitian part (vertex 0 sector)."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    H = X @ X.conj().T / dim + 0.3 * np.eye(dim)
    Y = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    K = (Y + Y.conj().T) / 2.0
    return H + 1j * angle_scale * K


def exact_semi_angle(B: np.ndarray) -> float:
    """Numerical-range semi-angle at vertex 0 via the Hermitian pencil.

    tan(theta) maximizes |Im (Bf,f)| / Re (Bf,f), which is the largest
    absolute eigenvalue of the pencil (Im B, Re B).
    """
    from scipy.linalg import eigh

    H = (B + B.conj().T) / 2.0
    K = (B - B.conj().T) / 2.0j
    vals = eigh(K, H, eigvals_only=True)
    return float(np.arctan(np.max(np.abs(vals))))


def diag_corpus():
    out = []
    for seed in (11, 12, 13):
        spec = random_jordan_spec(seed, dim=6, max_chain=1, modulus_range=(0.5, 3.0))
        out.append((spec, decaying_element(spec, seed)))
    lam = np.array([0.8, 1.4, 2.0 + 0.3j, 3.1 - 0.2j])
    spec = diagonal_spec(1.0 / lam, label="fixed diagonal")
    out.append((spec, decaying_element(spec, 4)))
    return out


def jordan_corpus():
    out = []
    for seed in (0, 1, 2, 3):
        spec = random_jordan_spec(seed, dim=6, max_chain=3)
        out.append((spec, decaying_element(spec, seed)))
    return out


def evolution_corpus():
    """Problem corpus: diagonal, Jordan, difference, modal truncation."""
    members = []
    dspec, df = diag_corpus()[0]
    jspec, jf = jordan_corpus()[0]
    dop = build_difference_operator(1.0, 12)
    mop = frac_perturbed_modal(-1.0, 0.5, 0.5, modes=24, n=201)
    for spec, f, label in (
        (dspec, df, "diagonal"),
        (jspec, jf, "jordan"),
        (dop, decaying_element(dop, 5), "difference"),
        (mop, decaying_element(mop, 6), "modal"),
    ):
        for alpha in (1.0, 1.5, 2.0):
            members.append(
                CauchyProblem(
                    operator=spec, phi=monomial(1), alpha=alpha, f=f,
                    label=f"{label} alpha={alpha}",
                )
            )
    return members


@pytest.fixture(scope="session")
def corpus_problems():
    return evolution_corpus()
