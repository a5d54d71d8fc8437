"""Gauss decomposition of 2x2 block matrices into (f, k, e) factors.

    L = [[1, 0], [f, 1]] @ diag(k1, k2) @ [[1, e], [0, 1]]
      = [[k1, k1 e], [f k1, k2 + f k1 e]]
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

COND_LIMIT = 1e12


class SingularBlockError(np.linalg.LinAlgError):
    def __init__(self, block: str, cond: float):
        self.block = block
        self.cond = cond
        super().__init__(f"block {block} is singular or ill-conditioned (condition estimate {cond:.3g})")


def _as_block(x) -> np.ndarray:
    a = np.asarray(x, dtype=complex)
    return a.reshape(1, 1) if a.ndim == 0 else a


def _inv(m: np.ndarray, name: str) -> np.ndarray:
    try:
        cond = float(np.linalg.cond(m))
    except np.linalg.LinAlgError:
        # SVD fails on subnormal or non-finite blocks
        cond = float("inf")
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularBlockError(name, cond)
    return np.linalg.inv(m)


@dataclass(frozen=True)
class BlockMatrix2:
    """Four ``d x d`` blocks ``[[A, B], [C, D]]``; ``d = 1`` is the scalar case."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self) -> None:
        blocks = [_as_block(x) for x in (self.A, self.B, self.C, self.D)]
        shapes = {b.shape for b in blocks}
        if len(shapes) != 1 or blocks[0].shape[0] != blocks[0].shape[1]:
            raise ValueError(f"blocks must share one square shape, got {sorted(shapes)}")
        for name, b in zip("ABCD", blocks):
            object.__setattr__(self, name, b)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def dense(self) -> np.ndarray:
        return np.block([[self.A, self.B], [self.C, self.D]])

    @classmethod
    def from_dense(cls, m) -> "BlockMatrix2":
        m = np.asarray(m, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise ValueError(f"need an even square matrix, got shape {m.shape}")
        d = m.shape[0] // 2
        return cls(m[:d, :d], m[:d, d:], m[d:, :d], m[d:, d:])


@dataclass(frozen=True)
class GaussFactors:
    k1: np.ndarray
    k2: np.ndarray
    e: np.ndarray
    f: np.ndarray

    def __post_init__(self) -> None:
        for name in ("k1", "k2", "e", "f"):
            object.__setattr__(self, name, _as_block(getattr(self, name)))


def decompose(L: BlockMatrix2) -> GaussFactors:
    """``k1 = A``, ``e = k1^-1 B``, ``f = C k1^-1``, ``k2 = D - f k1 e``."""
    k1_inv = _inv(L.A, "L11")
    e = k1_inv @ L.B
    f = L.C @ k1_inv
    k2 = L.D - f @ L.A @ e
    _inv(k2, "k2")
    return GaussFactors(L.A.copy(), k2, e, f)


def compose(g: GaussFactors) -> BlockMatrix2:
    return BlockMatrix2(g.k1, g.k1 @ g.e, g.f @ g.k1, g.k2 + g.f @ g.k1 @ g.e)


def invert(g: GaussFactors) -> BlockMatrix2:
    """Inverse of ``compose(g)`` written in the factors: ``[[k1^-1 + e k2^-1 f, -e k2^-1], [-k2^-1 f, k2^-1]]``."""
    k1i = _inv(g.k1, "k1")
    k2i = _inv(g.k2, "k2")
    return BlockMatrix2(k1i + g.e @ k2i @ g.f, -g.e @ k2i, -k2i @ g.f, k2i)
