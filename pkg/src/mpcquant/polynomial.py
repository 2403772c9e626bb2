"""Sparse real polynomials on phase space R^{2n}.

Variables are ordered ``(p_1, ..., p_n, q_1, ..., q_n)``. Polynomials are
immutable mappings from exponent tuples to coefficients, which keeps exact
differentiation cheap and lets the integration kernels evaluate gradients and
Hessians from a flat table of monomials.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = ["Polynomial", "EvaluationPlan", "univariate_from_string"]


def _clean(terms: Mapping[tuple[int, ...], float]) -> dict[tuple[int, ...], float]:
    return {e: c for e, c in terms.items() if c != 0}


@dataclass(frozen=True)
class Polynomial:
    """Polynomial in ``dim`` real variables.

    Parameters
    ----------
    dim : int
        Number of variables (``2n`` for phase space).
    terms : mapping
        ``{exponents: coefficient}`` with ``len(exponents) == dim``.
    """

    dim: int
    terms: Mapping[tuple[int, ...], float]

    def __post_init__(self):
        cleaned = {}
        for e, c in self.terms.items():
            e = tuple(int(k) for k in e)
            if len(e) != self.dim:
                raise ValueError(f"exponent {e} has length {len(e)}, expected {self.dim}")
            if any(k < 0 for k in e):
                raise ValueError(f"negative exponent in {e}")
            cleaned[e] = cleaned.get(e, 0.0) + float(c)
        object.__setattr__(self, "terms", _clean(cleaned))

    # -- construction -------------------------------------------------
    @classmethod
    def constant(cls, dim: int, value: float) -> "Polynomial":
        return cls(dim, {(0,) * dim: value})

    @classmethod
    def variable(cls, dim: int, index: int) -> "Polynomial":
        e = [0] * dim
        e[index] = 1
        return cls(dim, {tuple(e): 1.0})

    @classmethod
    def from_terms(cls, dim: int, terms: Iterable[tuple[float, Sequence[int]]]) -> "Polynomial":
        """Build from ``[(coef, exponents), ...]`` pairs (duplicates are summed)."""
        acc: dict[tuple[int, ...], float] = {}
        for coef, exps in terms:
            key = tuple(int(k) for k in exps)
            acc[key] = acc.get(key, 0.0) + float(coef)
        return cls(dim, acc)

    @classmethod
    def from_expression(cls, n: int, text: str) -> "Polynomial":
        """Parse an expression in ``p1..pn, q1..qn`` (``^`` allowed for powers)."""
        import sympy
        from sympy.parsing.sympy_parser import (
            convert_xor,
            implicit_multiplication_application,
            parse_expr,
            standard_transformations,
        )

        names = [f"p{j}" for j in range(1, n + 1)] + [f"q{j}" for j in range(1, n + 1)]
        symbols = sympy.symbols(names, real=True)
        local = dict(zip(names, symbols))
        transformations = standard_transformations + (
            implicit_multiplication_application,
            convert_xor,
        )
        expr = parse_expr(text, local_dict=local, transformations=transformations)
        poly = sympy.Poly(sympy.expand(expr), *symbols)
        return cls(2 * n, {tuple(m): float(c) for m, c in poly.terms()})

    # -- algebra ------------------------------------------------------
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.dim != self.dim:
                raise ValueError("dimension mismatch")
            return other
        return Polynomial.constant(self.dim, float(other))

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        acc = dict(self.terms)
        for e, c in other.terms.items():
            acc[e] = acc.get(e, 0.0) + c
        return Polynomial(self.dim, acc)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.dim, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Polynomial":
        other = self._coerce(other)
        acc: dict[tuple[int, ...], float] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                acc[e] = acc.get(e, 0.0) + c1 * c2
        return Polynomial(self.dim, acc)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        if k < 0:
            raise ValueError("negative power")
        out = Polynomial.constant(self.dim, 1.0)
        for _ in range(k):
            out = out * self
        return out

    def compose_univariate(self, coefficients: Sequence[float]) -> "Polynomial":
        """Return ``f(self)`` for ``f(x) = sum_k coefficients[k] x^k``."""
        out = Polynomial.constant(self.dim, 0.0)
        power = Polynomial.constant(self.dim, 1.0)
        for c in coefficients:
            if c:
                out = out + power * c
            power = power * self
        return out

    def diff(self, index: int) -> "Polynomial":
        acc: dict[tuple[int, ...], float] = {}
        for e, c in self.terms.items():
            k = e[index]
            if k == 0:
                continue
            e2 = list(e)
            e2[index] = k - 1
            acc[tuple(e2)] = acc.get(tuple(e2), 0.0) + c * k
        return Polynomial(self.dim, acc)

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    # -- evaluation ---------------------------------------------------
    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if not self.terms:
            return 0.0
        exps = np.array(list(self.terms.keys()), dtype=float)
        coef = np.array(list(self.terms.values()))
        return float(coef @ np.prod(x[None, :] ** exps, axis=1))

    def gradient(self) -> list["Polynomial"]:
        return [self.diff(i) for i in range(self.dim)]

    def hessian(self) -> list[list["Polynomial"]]:
        grad = self.gradient()
        return [[g.diff(j) for j in range(self.dim)] for g in grad]

    def evaluation_plan(self) -> "EvaluationPlan":
        return EvaluationPlan.for_hamiltonian(self)

    def to_terms(self) -> list[list]:
        """JSON-friendly ``[[coef, [exponents...]], ...]`` sorted by exponent."""
        return [[c, list(e)] for e, c in sorted(self.terms.items())]


@dataclass(frozen=True)
class EvaluationPlan:
    """Flattened monomial table for the integration kernels.

    Slot ``i < dim`` receives ``dH/dx_i``; slot ``dim + i*dim + j`` receives
    ``d2H/dx_i dx_j``. Terms are sorted by slot, so the first ``ngrad_terms``
    rows produce the gradient alone.
    """

    dim: int
    coef: np.ndarray  # (T,) float64
    exps: np.ndarray  # (T, dim) int32
    slot: np.ndarray  # (T,) int32
    ngrad_terms: int

    @classmethod
    def for_hamiltonian(cls, H: Polynomial) -> "EvaluationPlan":
        d = H.dim
        rows: list[tuple[int, float, tuple[int, ...]]] = []
        grad = H.gradient()
        for i, g in enumerate(grad):
            rows.extend((i, c, e) for e, c in sorted(g.terms.items()))
        ngrad = len(rows)
        for i, g in enumerate(grad):
            for j in range(d):
                h = g.diff(j)
                rows.extend((d + i * d + j, c, e) for e, c in sorted(h.terms.items()))
        if rows:
            slot = np.array([r[0] for r in rows], dtype=np.int32)
            coef = np.array([r[1] for r in rows], dtype=np.float64)
            exps = np.array([r[2] for r in rows], dtype=np.int32).reshape(len(rows), d)
        else:
            slot = np.zeros(0, dtype=np.int32)
            coef = np.zeros(0, dtype=np.float64)
            exps = np.zeros((0, d), dtype=np.int32)
        return cls(d, coef, np.ascontiguousarray(exps), slot, ngrad)


def univariate_from_string(text: str, var: str = "x") -> list[float]:
    """Coefficients (ascending powers) of a univariate polynomial like ``"x^3+2x"``."""
    import sympy
    from sympy.parsing.sympy_parser import (
        convert_xor,
        implicit_multiplication_application,
        parse_expr,
        standard_transformations,
    )

    x = sympy.Symbol(var, real=True)
    transformations = standard_transformations + (implicit_multiplication_application, convert_xor)
    expr = parse_expr(text, local_dict={var: x}, transformations=transformations)
    poly = sympy.Poly(sympy.expand(expr), x)
    coeffs = [float(c) for c in reversed(poly.all_coeffs())]
    return coeffs


def exact_linear_form_exterior_derivative(matrix: Sequence[Sequence]) -> np.ndarray:
    """Coefficient matrix of ``d(sum_ij A_ij x_i dx_j)`` as ``A - A^T`` in exact arithmetic.

    The result ``D`` encodes ``sum_{i<j} D_ij dx_i ^ dx_j``.
    """
    A = [[Fraction(a) for a in row] for row in matrix]
    d = len(A)
    return np.array([[A[i][j] - A[j][i] for j in range(d)] for i in range(d)], dtype=object)
