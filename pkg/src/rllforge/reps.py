"""Representation-level data: evaluation L-operators, coproduct, antipode, transfer operators.

An L-operator is stored as an array of shape ``(2, 2, d, d)``: two auxiliary
indices (row, column) followed by a ``d x d`` block acting on quantum space.
``dense`` flattens it with the auxiliary index first.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .report import DEFAULT_TOL, CheckReport, ResidualLog, Sampler
from .rmatrix import StructuredR, eval_r

Matrix = np.ndarray
Blocks = np.ndarray


class DimensionError(ValueError):
    pass


class NonDegenerateWarning(UserWarning):
    """Trace transfer over a chain whose R-matrices differ; commutativity is not expected."""


def dense(blocks: Blocks) -> Matrix:
    """``(2, 2, d, d)`` blocks to a ``2d x 2d`` matrix, auxiliary index first."""
    a, b, d, _ = blocks.shape
    return blocks.transpose(0, 2, 1, 3).reshape(a * d, b * d)


def from_dense(m: Matrix, aux: int = 2) -> Blocks:
    d = m.shape[0] // aux
    return m.reshape(aux, d, aux, d).transpose(0, 2, 1, 3)


def dot_tensor(A: Blocks, B: Blocks) -> Blocks:
    """``(A ⊗̇ B)^a_b = sum_c A^a_c ⊗ B^c_b``: contract the shared auxiliary index."""
    if A.shape[1] != B.shape[0]:
        raise DimensionError(f"auxiliary dimensions differ: {A.shape[1]} vs {B.shape[0]}")
    da, db = A.shape[2], B.shape[2]
    out = np.einsum("acij,cbkl->abikjl", A, B)
    return out.reshape(A.shape[0], B.shape[1], da * db, da * db)


@dataclass(frozen=True)
class EvalL:
    """Evaluation L-operator ``L(u) = R(u - w)`` read as a 2x2 matrix of 2x2 blocks.

    ``index`` is the family index ``n`` of the algebra it represents (the
    operator intertwines ``R^(n)`` and ``R^(n+1)``).  ``shift`` is added to
    the spectral argument before evaluation.
    """

    R: StructuredR
    w: complex = 0j
    index: int = 0
    shift: complex = 0j

    @property
    def dim(self) -> int:
        return 2

    @property
    def degenerate(self) -> bool:
        return True

    def __call__(self, u: complex) -> Blocks:
        m = eval_r(self.R, u + self.shift - self.w)
        return from_dense(m)

    def shifted(self, s: complex) -> "EvalL":
        return replace(self, shift=self.shift + s)


@dataclass(frozen=True)
class ConstantL:
    """An L-operator independent of ``u``; ``ConstantL(eye)`` is the counit representation."""

    blocks: Blocks
    index: int = 0
    shift: complex = 0j

    @property
    def dim(self) -> int:
        return self.blocks.shape[2]

    def __call__(self, u: complex) -> Blocks:
        return self.blocks

    def shifted(self, s: complex) -> "ConstantL":
        return self


def counit_rep(index: int = 0) -> ConstantL:
    """The one-dimensional representation ``L^a_b -> delta^a_b``."""
    return ConstantL(np.eye(2, dtype=complex).reshape(2, 2, 1, 1), index)


@dataclass(frozen=True)
class CompositeL:
    """``La(u + sign*hbar*c_{n+1}/4) ⊗̇ Lb(u - sign*hbar*c_n/4)``."""

    left: object
    right: object
    left_shift: complex
    right_shift: complex
    center: complex
    index: int
    shift: complex = 0j

    @property
    def dim(self) -> int:
        return self.left.dim * self.right.dim

    def __call__(self, u: complex) -> Blocks:
        u = u + self.shift
        return dot_tensor(self.left(u + self.left_shift), self.right(u + self.right_shift))

    def shifted(self, s: complex) -> "CompositeL":
        return replace(self, shift=self.shift + s)


def coproduct_compose(La, Lb, cn: complex, cn1: complex, hbar: complex | None = None, sign: int = 1) -> CompositeL:
    """Coproduct image at family index ``n``: left leg shifted by ``+sign*hbar*c_{n+1}/4``, right by ``-sign*hbar*c_n/4``.

    ``hbar`` defaults to the left leg's R-matrix parameter.  The composite's
    center is ``c_n + c_{n+1}``.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if hbar is None:
        hbar = getattr(getattr(La, "R", None), "params", None)
        hbar = hbar.hbar if hbar is not None else 0.0
    return CompositeL(La, Lb, sign * hbar * cn1 / 4, -sign * hbar * cn / 4, cn + cn1, getattr(La, "index", 0))


def counit(L) -> Matrix:
    """``epsilon(L^a_b) = delta^a_b``."""
    return np.eye(L(0.5).shape[0] if callable(L) else 2, dtype=complex)


@dataclass(frozen=True)
class AntipodeL:
    """``u -> L(u)^-1`` (as a block matrix), carrying the shifted family index."""

    base: object
    index: int
    shift: complex = 0j

    @property
    def dim(self) -> int:
        return self.base.dim

    def __call__(self, u: complex) -> Blocks:
        m = dense(self.base(u + self.shift))
        cond = np.linalg.cond(m)
        if not np.isfinite(cond) or cond > 1e12:
            raise np.linalg.LinAlgError(f"L(u) is singular at u={u} (condition {cond:.3g})")
        return from_dense(np.linalg.inv(m), self.base(u).shape[0])

    def shifted(self, s: complex) -> "AntipodeL":
        return replace(self, shift=self.shift + s)


def antipode(L, u: complex | None = None, sign: int = 1):
    """Antipode image ``S(L) = L^-1`` with family index ``n + sign``.

    With ``u`` given, returns the inverse matrix (dense, auxiliary index
    first) at that point; otherwise the operator itself, which can be fed back
    into :func:`antipode`.
    """
    op = AntipodeL(L, getattr(L, "index", 0) + sign)
    return dense(op(u)) if u is not None else op


# RLL checks ----------------------------------------------------------------------------------------


def _leg(blocks: Blocks, slot: int) -> Matrix:
    """Embed an L-operator on aux slot 1 or 2 of ``aux ⊗ aux ⊗ quantum``."""
    a, _, d, _ = blocks.shape
    eye = np.eye(a, dtype=complex)
    if slot == 1:
        t = np.einsum("acij,bd->abicdj", blocks, eye)
    else:
        t = np.einsum("bdij,ac->abicdj", blocks, eye)
    return t.reshape(a * a * d, a * a * d)


def rll_residual(L, R_left: StructuredR, u: complex, v: complex, R_right: StructuredR | None = None) -> float:
    """``|R(u-v) L1(u) L2(v) - L2(v) L1(u) R'(u-v)| / scale`` on ``aux ⊗ aux ⊗ quantum``."""
    R_right = R_left if R_right is None else R_right
    Lu, Lv = L(u), L(v)
    d = Lu.shape[2]
    eye_q = np.eye(d, dtype=complex)
    Ri = np.kron(eval_r(R_left, u - v), eye_q)
    Rj = np.kron(eval_r(R_right, u - v), eye_q)
    L1, L2 = _leg(Lu, 1), _leg(Lv, 2)
    lhs = Ri @ L1 @ L2
    rhs = L2 @ L1 @ Rj
    scale = max(1.0, np.abs(lhs).max(), np.abs(rhs).max())
    return float(np.abs(lhs - rhs).max() / scale)


def check_rll(L, R: StructuredR, sampler: Sampler | None = None, tol: float = 1e-10, R_right: StructuredR | None = None) -> CheckReport:
    sampler = sampler or Sampler(count=20)
    log = ResidualLog("rll_representation", tol, sampler.seed, R.params.as_dict())

    def avoid(u: complex, v: complex) -> bool:
        return R.near_pole(u - v) or (R_right is not None and R_right.near_pole(u - v))

    for idx, (u, v) in enumerate(sampler.tuples(sampler.count, 2, avoid=avoid, stream=20)):
        log.add(rll_residual(L, R, u, v, R_right), sample=idx, u=u, v=v)
    return log.report()


# transfer operators ------------------------------------------------------------------------------------


def _components(data: Sequence) -> list[Matrix]:
    out = []
    for x in data:
        m = np.asarray(x, dtype=complex)
        out.append(m.reshape(1, 1) if m.ndim == 0 else m)
    shapes = {m.shape for m in out}
    if len(shapes) != 1:
        raise DimensionError(f"components have different shapes: {sorted(shapes)}")
    return out


def pairing(Y: Sequence, X: Sequence) -> Matrix:
    """``sum_a Y_a X^a``; matrix-valued components act on separate spaces (``Y_a ⊗ X^a``)."""
    Ys, Xs = _components(Y), _components(X)
    if len(Ys) != len(Xs):
        raise DimensionError(f"{len(Ys)} covector components against {len(Xs)} vector components")
    return sum(np.kron(y, x) for y, x in zip(Ys, Xs))


def chain_product(chain: Sequence, u: complex) -> Blocks:
    if not chain:
        raise DimensionError("empty chain")
    out = chain[0](u)
    for L in chain[1:]:
        out = dot_tensor(out, L(u))
    return out


def _is_degenerate(chain: Sequence) -> bool:
    Rs = [getattr(L, "R", None) for L in chain]
    Rs = [R for R in Rs if R is not None]
    return all(R.params == Rs[0].params and R.form.name == Rs[0].form.name for R in Rs)


def trace_transfer(chain: Sequence, u: complex, metadata: dict | None = None) -> Matrix:
    """Trace over the auxiliary space of the ⊗̇-product of the chain at ``u``.

    A chain whose R-matrices differ is flagged in ``metadata["degenerate"]``
    and with a :class:`NonDegenerateWarning`.
    """
    degenerate = _is_degenerate(chain)
    if metadata is not None:
        metadata["degenerate"] = degenerate
    if not degenerate:
        warnings.warn("trace transfer over a non-degenerate chain", NonDegenerateWarning, stacklevel=2)
    M = chain_product(chain, u)
    return np.einsum("aaij->ij", M)


@dataclass(frozen=True)
class TransferChain:
    """``<Y^(n), L^(n+1) ⊗̇ ... ⊗̇ L^(m-1) ⊗̇ X^(m)>`` with data for ``Y`` and ``X``.

    ``Y`` and ``X`` are sequences of two components, each a scalar or a
    square matrix, or callables ``u -> such a sequence``.  The result acts
    on ``V_Y ⊗ quantum ⊗ V_X``.
    """

    Y: object
    L: tuple = ()
    X: object = None
    n: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "L", tuple(self.L))
        for k, L in enumerate(self.L):
            idx = getattr(L, "index", self.n + 1 + k)
            if idx != self.n + 1 + k:
                raise ValueError(f"chain indices must run n+1..m-1 consecutively; position {k} has index {idx}, expected {self.n + 1 + k}")

    @property
    def m(self) -> int:
        return self.n + len(self.L) + 1

    def _at(self, data, u: complex) -> list[Matrix]:
        return _components(data(u) if callable(data) else data)

    def __call__(self, u: complex) -> Matrix:
        return transfer(self, u)


def transfer(chain: TransferChain, u: complex) -> Matrix:
    Ys, Xs = chain._at(chain.Y, u), chain._at(chain.X, u)
    if not chain.L:
        return pairing(Ys, Xs)
    M = chain_product(chain.L, u)
    if len(Ys) != M.shape[0] or len(Xs) != M.shape[1]:
        raise DimensionError(f"Y has {len(Ys)} and X has {len(Xs)} components; the chain has {M.shape[0]}x{M.shape[1]}")
    out = 0
    for a in range(M.shape[0]):
        for b in range(M.shape[1]):
            out = out + np.kron(np.kron(Ys[a], M[a, b]), Xs[b])
    return out


def extend_transfer(chain: TransferChain, L) -> TransferChain:
    """Comorphism step: ``X^(m) -> L^(m) ⊗̇ X^(m+1)``, so the chain gains one L and ``m -> m + 1``."""
    if hasattr(L, "index"):
        L = replace(L, index=chain.m)
    return TransferChain(chain.Y, chain.L + (L,), chain.X, chain.n)


def trace_realization(L: Sequence, u: complex) -> Matrix:
    """Sum over basis covectors ``Y = e_a`` with matching ``X = e_a``: the auxiliary trace."""
    total = 0
    n = getattr(L[0], "index", 1) - 1 if L else 0
    for a in range(2):
        basis = [1.0 if b == a else 0.0 for b in range(2)]
        total = total + transfer(TransferChain(basis, tuple(L), basis, n), u)
    return total


def commutator_residual(T: Callable[[complex], Matrix], u: complex, v: complex) -> float:
    Tu, Tv = T(u), T(v)
    prod = Tu @ Tv
    denom = max(np.linalg.norm(prod), 1e-300)
    return float(np.linalg.norm(prod - Tv @ Tu) / denom)


def check_commuting(T: Callable[[complex], Matrix], sampler: Sampler | None = None, tol: float = 1e-10, avoid: Callable[..., bool] | None = None, name: str = "transfer_commuting", params: dict | None = None) -> CheckReport:
    """Max over sampled ``(u, v)`` of ``|T(u)T(v) - T(v)T(u)| / |T(u)T(v)|``."""
    sampler = sampler or Sampler(count=10)
    log = ResidualLog(name, tol, sampler.seed, params or {})
    for idx, (u, v) in enumerate(sampler.tuples(sampler.count, 2, avoid=avoid, stream=21)):
        log.add(commutator_residual(T, u, v), sample=idx, u=u, v=v)
    return log.report()


def chain_avoid(chain: Sequence) -> Callable[[complex, complex], bool]:
    """Sampling filter keeping every site's argument away from its R-matrix poles."""

    def avoid(*us: complex) -> bool:
        for u in us:
            for L in chain:
                R = getattr(L, "R", None)
                if R is not None and R.near_pole(u + L.shift - L.w, 1e-3):
                    return True
        return False

    return avoid


# vector-algebra relations ------------------------------------------------------------------------------


def rxx_residual(R: StructuredR, X: Callable[[complex], Sequence], u: complex, v: complex) -> float:
    """``|R(u-v) X1(u) X2(v) - X2(v) X1(u)| / scale`` for vector data ``X``."""
    Xu, Xv = _components(X(u)), _components(X(v))
    M = eval_r(R, u - v)
    d = Xu[0].shape[0]
    lhs = np.zeros((4, d, d), dtype=complex)
    rhs = np.zeros((4, d, d), dtype=complex)
    for a in range(2):
        for b in range(2):
            rhs[2 * a + b] = Xv[b] @ Xu[a]
            for c in range(2):
                for e in range(2):
                    lhs[2 * a + b] += M[2 * a + b, 2 * c + e] * (Xu[c] @ Xv[e])
    scale = max(1.0, np.abs(lhs).max(), np.abs(rhs).max())
    return float(np.abs(lhs - rhs).max() / scale)


def ryy_residual(R_next: StructuredR, Y: Callable[[complex], Sequence], u: complex, v: complex) -> float:
    """``|Y1(v) Y2(u) R'(v-u) - Y2(u) Y1(v)| / scale`` for covector data ``Y``."""
    Yu, Yv = _components(Y(u)), _components(Y(v))
    M = eval_r(R_next, v - u)
    d = Yu[0].shape[0]
    lhs = np.zeros((4, d, d), dtype=complex)
    rhs = np.zeros((4, d, d), dtype=complex)
    for c in range(2):
        for e in range(2):
            rhs[2 * c + e] = Yu[e] @ Yv[c]
            for a in range(2):
                for b in range(2):
                    lhs[2 * c + e] += (Yv[a] @ Yu[b]) * M[2 * a + b, 2 * c + e]
    scale = max(1.0, np.abs(lhs).max(), np.abs(rhs).max())
    return float(np.abs(lhs - rhs).max() / scale)
