"""The rational map ``f: I^n -> I^n`` whose image of ``u0`` performs ML decoding.

For a code C, ``F_x(u) = prod_i rho_i(u_i)`` with ``rho_i = u_i`` when
``x_i = 1`` and ``1 - u_i`` otherwise, ``H(u) = sum_x F_x(u)`` and
``f_i(u) = sum_{x: x_i = 1} F_x(u) / H(u)``.  Evaluation is one sweep over
the codeword table.  Coordinate arguments (``i``, index sets) are 1-based.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import BitVector, DyadicRational
from .code import TABLE_LIMIT, LinearCode, codeword_table
from .errors import (InvalidEpsilon, LengthMismatch, NotACodeword, PoleError, TooLarge)

# above this length F_x products are accumulated as logarithms
LOG_DOMAIN_MIN_N = 65


@dataclass(frozen=True, eq=False)
class LikelihoodPoint:
    """A point ``u`` of the unit cube; ``v = u - 1/2`` is the centred view."""

    u: np.ndarray

    def __post_init__(self):
        u = np.array(self.u, dtype=np.float64)
        if u.ndim != 1 or u.size == 0:
            raise ValueError("u must be a non-empty vector")
        if np.any(~(u >= 0.0) | ~(u <= 1.0)):
            raise ValueError("u must lie in [0, 1]^n")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @classmethod
    def center(cls, n: int) -> "LikelihoodPoint":
        return cls(np.full(n, 0.5))

    @classmethod
    def from_v(cls, v) -> "LikelihoodPoint":
        return cls(np.asarray(v, dtype=np.float64) + 0.5)

    @property
    def n(self) -> int:
        return self.u.size

    @property
    def v(self) -> np.ndarray:
        return self.u - 0.5

    @property
    def interior(self) -> bool:
        return bool(np.all((self.u > 0.0) & (self.u < 1.0)))

    def __len__(self):
        return self.n


class PointClass(enum.Enum):
    CODEWORD_FIXED = "CodewordFixed"
    POLE = "Pole"
    INTERIOR = "Interior"
    BOUNDARY_REGULAR = "BoundaryRegular"


def _as_point(u) -> LikelihoodPoint:
    return u if isinstance(u, LikelihoodPoint) else LikelihoodPoint(u)


def _check_n(code: LinearCode, n: int) -> None:
    if n != code.n:
        raise LengthMismatch(f"point has length {n}, code has n = {code.n}")


def codeword_poly(code: LinearCode, x: BitVector, u) -> float:
    """``F_x(u)``; this equals ``P(y | x)`` at ``u = u0(y, eps)``."""
    u = _as_point(u).u
    _check_n(code, u.size)
    if not code.contains(x):
        raise NotACodeword(f"{x} is not a codeword of {code.name}")
    bits = x.to_array().astype(bool)
    return float(np.prod(np.where(bits, u, 1.0 - u)))


def _codeword_weights(code: LinearCode, u: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """``(X, w, log_scale)`` with ``F_x(u) = w_x * exp(log_scale)``.

    For short codes ``log_scale`` is 0 and ``w`` holds the plain products.
    Otherwise the logs are shifted so the largest weight is 1.  Codewords that
    disagree with a boundary coordinate of ``u`` get weight exactly 0.
    """
    if code.k > TABLE_LIMIT:
        raise TooLarge(code.k, TABLE_LIMIT)
    X = codeword_table(code)
    if code.n < LOG_DOMAIN_MIN_N:
        w = np.prod(np.where(X.astype(bool), u, 1.0 - u), axis=1)
        return X, w, 0.0
    at0 = u == 0.0
    at1 = u == 1.0
    alive = np.ones(X.shape[0], dtype=bool)
    if at0.any():
        alive &= ~X[:, at0].any(axis=1)
    if at1.any():
        alive &= X[:, at1].all(axis=1)
    inner = ~(at0 | at1)
    Xi = X[:, inner].astype(np.float64)
    lu = np.log(u[inner])
    l1u = np.log1p(-u[inner])
    logw = Xi @ (lu - l1u) + l1u.sum()
    w = np.zeros(X.shape[0])
    if alive.any():
        top = logw[alive].max()
        w[alive] = np.exp(logw[alive] - top)
        return X, w, float(top)
    return X, w, 0.0


def H_eval(code: LinearCode, u) -> float:
    """``H(u) = sum_x F_x(u)``."""
    u = _as_point(u).u
    _check_n(code, u.size)
    _, w, scale = _codeword_weights(code, u)
    return float(w.sum() * np.exp(scale))


def map_eval(code: LinearCode, u) -> LikelihoodPoint:
    """Image ``f(u)`` under the rational map.

    Raises
    ------
    PoleError
        If ``H(u) = 0``, which can only happen on the boundary of the cube.
    """
    u = _as_point(u).u
    _check_n(code, u.size)
    X, w, _ = _codeword_weights(code, u)
    total = w.sum()
    if total == 0.0:
        raise PoleError("H(u) = 0: u is a pole of the rational map")
    num = w @ X
    return LikelihoodPoint(np.clip(num / total, 0.0, 1.0))


def init_point(y: BitVector, epsilon: float) -> LikelihoodPoint:
    """``u0_i = eps`` where ``y_i = 0`` and ``1 - eps`` where ``y_i = 1``."""
    check_epsilon(epsilon)
    return LikelihoodPoint(np.where(y.to_array().astype(bool), 1.0 - epsilon, epsilon))


def check_epsilon(epsilon: float) -> None:
    if not 0.0 < epsilon < 0.5:
        raise InvalidEpsilon(f"epsilon must be in (0, 1/2), got {epsilon}")


def classify_vertex(code: LinearCode, u: BitVector) -> PointClass:
    """Binary points are fixed points iff they are codewords, poles otherwise."""
    return PointClass.CODEWORD_FIXED if code.contains(u) else PointClass.POLE


def classify_point(code: LinearCode, u) -> PointClass:
    """Classify any point of the cube."""
    pt = _as_point(u)
    _check_n(code, pt.n)
    u = pt.u
    binary = (u == 0.0) | (u == 1.0)
    if binary.all():
        return classify_vertex(code, BitVector.from_bits(u.astype(int)))
    if not binary.any():
        return PointClass.INTERIOR
    X = codeword_table(code)
    fixed = np.flatnonzero(binary)
    match = (X[:, fixed] == u[fixed].astype(np.uint8)).all(axis=1)
    return PointClass.BOUNDARY_REGULAR if match.any() else PointClass.POLE


def jacobian_at_p(code: LinearCode) -> np.ndarray:
    """Jacobian of f at the centre: ``J_ij = 1`` iff columns ``g_i == g_j``."""
    keys = np.array(code.column_keys, dtype=object)
    return (keys[:, None] == keys[None, :]).astype(np.int64)


def jacobian_numeric(code: LinearCode, u, h: float = 1e-5) -> np.ndarray:
    """Difference-quotient Jacobian of :func:`map_eval`.

    Central differences, clamped to the cube: at a boundary coordinate the
    quotient becomes one-sided.
    """
    u = _as_point(u).u
    n = u.size
    _check_n(code, n)
    J = np.empty((n, n))
    for j in range(n):
        hi = u.copy()
        lo = u.copy()
        hi[j] = min(u[j] + h, 1.0)
        lo[j] = max(u[j] - h, 0.0)
        J[:, j] = (map_eval(code, hi).u - map_eval(code, lo).u) / (hi[j] - lo[j])
    return J


@dataclass(frozen=True)
class EigenComponent:
    """A class of equal columns and the eigenpairs of J it carries.

    ``indices`` are 1-based and ascending.  The first eigenvector is the
    all-ones vector on the class (eigenvalue = class size); the rest are the
    ``e_a - e_b`` differences of consecutive members (eigenvalue 0).
    """

    indices: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.indices)

    @property
    def eigenvalue(self) -> int:
        return self.size

    def eigenpairs(self, n: int) -> list[tuple[int, np.ndarray]]:
        pairs = []
        ones = np.zeros(n, dtype=np.int64)
        ones[[i - 1 for i in self.indices]] = 1
        pairs.append((self.size, ones))
        for a, b in zip(self.indices, self.indices[1:]):
            d = np.zeros(n, dtype=np.int64)
            d[a - 1] = 1
            d[b - 1] = -1
            pairs.append((0, d))
        return pairs


@dataclass(frozen=True)
class EigenStructure:
    n: int
    components: tuple[EigenComponent, ...]

    def spectrum(self) -> list[int]:
        """Eigenvalues in component order: ``n_i`` then ``n_i - 1`` zeros."""
        out = []
        for c in self.components:
            out.append(c.eigenvalue)
            out.extend([0] * (c.size - 1))
        return out

    def eigenpairs(self) -> list[tuple[int, np.ndarray]]:
        return [pair for c in self.components for pair in c.eigenpairs(self.n)]

    @property
    def hyperbolic(self) -> bool:
        """True iff no eigenvalue has modulus 1 (every class has size >= 2)."""
        return all(c.size != 1 for c in self.components)


def eigen_structure(code: LinearCode) -> EigenStructure:
    """Eigen-decomposition of J from its equal-column classes.

    Every eigenpair is checked with an exact integer product ``J p = lambda p``.
    """
    classes: dict[int, list[int]] = {}
    for j, g in enumerate(code.column_keys, start=1):
        classes.setdefault(g, []).append(j)
    comps = tuple(EigenComponent(tuple(v)) for v in sorted(classes.values()))
    es = EigenStructure(code.n, comps)
    J = jacobian_at_p(code)
    for lam, vec in es.eigenpairs():
        if not np.array_equal(J @ vec, lam * vec):
            raise ArithmeticError("eigenpair check failed")
    return es


def gradient_residual(code: LinearCode, u) -> float:
    """``max_i |f_i(u) - u_i - u_i (1 - u_i) d/du_i log H(u)|`` at interior ``u``.

    ``d/du_i H`` is taken exactly from the multilinear form: each codeword
    contributes ``+-F_x(u) / rho_i(u_i)``.
    """
    pt = _as_point(u)
    if not pt.interior:
        raise PoleError("the gradient identity is checked at interior points only")
    u = pt.u
    _check_n(code, u.size)
    X, w, _ = _codeword_weights(code, u)
    total = w.sum()
    num = w @ X
    f = num / total
    # sum_x sigma_i(x) F_x / rho_i  =  num_i / u_i - (total - num_i) / (1 - u_i)
    dH = num / u - (total - num) / (1.0 - u)
    return float(np.max(np.abs(f - u - u * (1.0 - u) * dH / total)))


def derivative_oracle(code: LinearCode, target: str | int, S: Sequence[int]) -> DyadicRational:
    """Exact ``d^S H(p)`` (``target="H"``) or ``d^S I_i(p)`` (``target=i``).

    Computed by signed enumeration: each codeword contributes
    ``prod_{j in S} sigma_j(x) * 2^-(n - |S|)`` with ``sigma_j = +1`` when
    ``x_j = 1`` and ``-1`` otherwise; ``I_i`` sums only codewords with
    ``x_i = 1``.  Repeated indices give 0 since H and I_i are multilinear.
    """
    S = tuple(S)
    if len(S) > 4:
        raise ValueError("|S| must be at most 4")
    if len(set(S)) != len(S):
        return DyadicRational(0)
    n = code.n
    for j in S:
        if not 1 <= j <= n:
            raise IndexError(f"index {j} outside [1, {n}]")
    X = codeword_table(code)
    if target != "H":
        i = int(target)
        if not 1 <= i <= n:
            raise IndexError(f"index {i} outside [1, {n}]")
        X = X[X[:, i - 1] == 1]
    if S:
        zeros = len(S) - X[:, [j - 1 for j in S]].sum(axis=1, dtype=np.int64)
        total = int(np.sum(1 - 2 * (zeros & 1)))
    else:
        total = X.shape[0]
    return DyadicRational(total, -(n - len(S)))
