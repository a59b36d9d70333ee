"""Symbol specifications for operator functions.

A FunctionSpec describes the scalar symbol phi that is lifted to an operator
function phi(W).  Four shapes are supported: a pure monomial z^n, a
polynomial, a finite Laurent sum, and a truncated entire function with a
declared growth order below one half.  Instances are callable on complex
arguments and know how to raise themselves to a real power alpha on the
principal branch, which is the combination the evolution solvers need.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .errors import SpecError

_KINDS = ("monomial", "polynomial", "laurent", "entire")


@dataclasses.dataclass(frozen=True)
class FunctionSpec:
    """Scalar symbol phi with its coefficient data.

    coeffs holds c_{min_degree} .. c_{min_degree + len - 1} in ascending
    degree order.  For a monomial z^n the single stored coefficient is 1.
    entire carries a declared order (must be < 1/2) and an optional type
    bound; both are certificates supplied by the caller, the numeric check
    happens where the symbol is used on a contour.
    """

    kind: str
    coeffs: tuple[complex, ...]
    min_degree: int = 0
    order: float | None = None
    type_bound: float | None = None
    sector_certificate: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise SpecError(f"unknown symbol kind {self.kind!r}; expected one of {_KINDS}")
        if not self.coeffs:
            raise SpecError("symbol needs at least one coefficient")
        coeffs = tuple(complex(c) for c in self.coeffs)
        if not all(np.isfinite([c.real, c.imag]).all() for c in coeffs):
            raise SpecError("symbol coefficients must be finite")
        object.__setattr__(self, "coeffs", coeffs)
        if self.kind == "monomial":
            if len(coeffs) != 1 or coeffs[0] != 1:
                raise SpecError("monomial stores exactly the coefficient 1")
            if self.min_degree < 1:
                raise SpecError("monomial degree must be a positive integer")
        elif self.kind == "polynomial":
            if self.min_degree != 0:
                raise SpecError("polynomial coefficients start at degree 0")
        elif self.kind == "laurent":
            if self.min_degree >= 0:
                raise SpecError("laurent symbol must include a negative degree")
        elif self.kind == "entire":
            if self.min_degree != 0:
                raise SpecError("entire coefficients start at degree 0")
            if self.order is None or not (0 <= self.order < 0.5):
                raise SpecError("entire symbol requires a declared order below 1/2")
        if all(c == 0 for c in coeffs):
            raise SpecError("symbol is identically zero")

    @property
    def max_degree(self) -> int:
        return self.min_degree + len(self.coeffs) - 1

    @property
    def leading(self) -> tuple[complex, int]:
        """Highest nonzero coefficient and its degree."""
        for k in range(len(self.coeffs) - 1, -1, -1):
            if self.coeffs[k] != 0:
                return self.coeffs[k], self.min_degree + k
        raise SpecError("symbol is identically zero")

    def terms(self):
        """Nonzero (coefficient, degree) pairs, ascending degree."""
        return [
            (c, self.min_degree + k)
            for k, c in enumerate(self.coeffs)
            if c != 0
        ]

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        # Horner on the nonnegative part, separate Horner in w = 1/z for the rest.
        acc = np.zeros_like(z)
        for k in range(self.max_degree, -1, -1):
            acc = acc * z + self._coeff(k)
        if self.min_degree < 0:
            w = 1.0 / z
            neg = np.zeros_like(z)
            for k in range(self.min_degree, 0):
                neg = (neg + self._coeff(k)) * w
            acc = acc + neg
        if acc.ndim == 0:
            return complex(acc)
        return acc

    def _coeff(self, degree: int) -> complex:
        idx = degree - self.min_degree
        if 0 <= idx < len(self.coeffs):
            return self.coeffs[idx]
        return 0j

    def alpha_power(self, z, alpha: float):
        """phi(z)**alpha on the principal branch (cut on the negative reals)."""
        value = self(np.asarray(z, dtype=complex))
        if alpha == 1:
            return value
        if float(alpha).is_integer() and alpha > 0:
            return value ** int(alpha)
        return np.exp(alpha * np.log(value))

    def angle_margin(self, theta: float, alpha: float) -> float:
        """Worst-case margin of the per-coefficient angle condition.

        Each nonzero term c_n z^n must satisfy |arg c_n| + n*theta < pi/(2 alpha)
        for its alpha-power to decay along rays of inclination theta.  Negative
        return value means the condition fails for some term.
        """
        if alpha <= 0:
            raise SpecError("alpha must be positive")
        bound = math.pi / (2.0 * alpha)
        margin = math.inf
        for c, n in self.terms():
            margin = min(margin, bound - (abs(np.angle(c)) + abs(n) * theta))
        return margin

    def to_config(self) -> dict:
        doc = {
            "kind": self.kind,
            "coeffs": [[c.real, c.imag] for c in self.coeffs],
        }
        if self.kind == "monomial":
            doc["degree"] = self.min_degree
        elif self.kind == "laurent":
            doc["min_degree"] = self.min_degree
        elif self.kind == "entire":
            doc["order"] = self.order
            if self.type_bound is not None:
                doc["type_bound"] = self.type_bound
        return doc

    @classmethod
    def from_config(cls, doc: dict) -> "FunctionSpec":
        kind = doc.get("kind")
        if kind == "monomial":
            return monomial(int(doc["degree"]))
        coeffs = [complex(re, im) for re, im in doc["coeffs"]]
        if kind == "polynomial":
            return polynomial(coeffs)
        if kind == "laurent":
            return laurent(coeffs, int(doc["min_degree"]))
        if kind == "entire":
            return entire_truncated(coeffs, float(doc["order"]), doc.get("type_bound"))
        raise SpecError(f"unknown symbol kind {kind!r}")


def monomial(n: int) -> FunctionSpec:
    return FunctionSpec(kind="monomial", coeffs=(1.0 + 0j,), min_degree=int(n))


def polynomial(coeffs) -> FunctionSpec:
    return FunctionSpec(kind="polynomial", coeffs=tuple(coeffs), min_degree=0)


def laurent(coeffs, min_degree: int) -> FunctionSpec:
    return FunctionSpec(kind="laurent", coeffs=tuple(coeffs), min_degree=int(min_degree))


def entire_truncated(coeffs, order: float, type_bound: float | None = None) -> FunctionSpec:
    return FunctionSpec(
        kind="entire", coeffs=tuple(coeffs), min_degree=0,
        order=float(order), type_bound=type_bound,
    )


def phi_alpha(phi, z, alpha: float):
    """alpha-power of a symbol value; phi may be a FunctionSpec or a callable."""
    if isinstance(phi, FunctionSpec):
        return phi.alpha_power(z, alpha)
    value = np.asarray(phi(np.asarray(z, dtype=complex)), dtype=complex)
    if alpha == 1:
        return value
    if float(alpha).is_integer() and alpha > 0:
        return value ** int(alpha)
    return np.exp(alpha * np.log(value))
