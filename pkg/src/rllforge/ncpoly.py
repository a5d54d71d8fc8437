"""Noncommutative polynomials in Gauss-current symbols with complex coefficients."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

PRUNE_REL = 1e-14

KINDS = ("F", "K1", "K2", "E")
# block order of the normal form: all F, then all K (k1 and k2 together), then all E
GROUP = {"F": 0, "K1": 1, "K2": 1, "E": 2}
SIGN_RANK = {1: 0, -1: 1}


@dataclass(frozen=True, order=True)
class SpectralTag:
    """A spectral argument ``table[base_index] + shift_quanta * quantum``."""

    base_index: int
    shift_quanta: int = 0

    def shifted(self, quanta: int) -> "SpectralTag":
        return SpectralTag(self.base_index, self.shift_quanta + quanta)

    def __str__(self) -> str:
        if self.shift_quanta == 0:
            return f"u{self.base_index}"
        sign = "+" if self.shift_quanta > 0 else "-"
        q = abs(self.shift_quanta)
        return f"u{self.base_index}{sign}{'' if q == 1 else q}d"


@dataclass(frozen=True)
class TagTable:
    """Numeric values for tags: sampled base points and the shift quantum ``hbar c / 4``."""

    values: tuple[complex, ...]
    quantum: complex = 0j

    def value(self, tag: SpectralTag) -> complex:
        return self.values[tag.base_index] + tag.shift_quanta * self.quantum

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class CurrentSymbol:
    """One of the Gauss currents ``k1, k2, e, f`` with a sign, a tag and, for k's, an inversion flag."""

    kind: str
    sign: int
    tag: SpectralTag
    inverted: bool = False

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown current kind {self.kind!r}")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign!r}")
        if self.inverted and self.kind not in ("K1", "K2"):
            raise ValueError("only k1 and k2 may be inverted")

    @property
    def group(self) -> int:
        return GROUP[self.kind]

    @property
    def order_key(self) -> tuple[int, int, int]:
        return (SIGN_RANK[self.sign], self.tag.base_index, self.tag.shift_quanta)

    @property
    def is_k(self) -> bool:
        return self.kind in ("K1", "K2")

    def inverse(self) -> "CurrentSymbol":
        if not self.is_k:
            raise ValueError(f"{self} is not invertible in the current algebra")
        return CurrentSymbol(self.kind, self.sign, self.tag, not self.inverted)

    def retag(self, kind: str, inverted: bool = False) -> "CurrentSymbol":
        """Same sign and tag, different kind."""
        return CurrentSymbol(kind, self.sign, self.tag, inverted)

    def __str__(self) -> str:
        name = {"F": "f", "K1": "k1", "K2": "k2", "E": "e"}[self.kind]
        s = "+" if self.sign > 0 else "-"
        inv = "^-1" if self.inverted else ""
        return f"{name}{s}({self.tag}){inv}"

    __repr__ = __str__


Word = tuple[CurrentSymbol, ...]


def k1(sign: int, tag: SpectralTag, inverted: bool = False) -> CurrentSymbol:
    return CurrentSymbol("K1", sign, tag, inverted)


def k2(sign: int, tag: SpectralTag, inverted: bool = False) -> CurrentSymbol:
    return CurrentSymbol("K2", sign, tag, inverted)


def e(sign: int, tag: SpectralTag) -> CurrentSymbol:
    return CurrentSymbol("E", sign, tag)


def f(sign: int, tag: SpectralTag) -> CurrentSymbol:
    return CurrentSymbol("F", sign, tag)


class NCPoly:
    """A finite sum ``sum_w c_w * w`` over words ``w``; the empty word is the scalar term.

    Instances are treated as immutable values.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Word, complex] | Iterable[tuple[Word, complex]] | None = None):
        acc: dict[Word, complex] = {}
        if terms is not None:
            items = terms.items() if isinstance(terms, Mapping) else terms
            for w, c in items:
                w = tuple(w)
                acc[w] = acc.get(w, 0j) + complex(c)
        self._terms = {w: c for w, c in acc.items() if c != 0}

    @classmethod
    def word(cls, *symbols: CurrentSymbol, coef: complex = 1.0) -> "NCPoly":
        return cls({tuple(symbols): coef})

    @classmethod
    def scalar(cls, c: complex) -> "NCPoly":
        return cls({(): c})

    @classmethod
    def zero(cls) -> "NCPoly":
        return cls()

    @property
    def terms(self) -> dict[Word, complex]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Word, complex]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, w: Word) -> complex:
        return self._terms.get(tuple(w), 0j)

    def max_abs(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def words(self) -> list[Word]:
        return list(self._terms)

    def __add__(self, other: "NCPoly") -> "NCPoly":
        acc = dict(self._terms)
        for w, c in other._terms.items():
            acc[w] = acc.get(w, 0j) + c
        return NCPoly(acc)

    def __neg__(self) -> "NCPoly":
        return NCPoly({w: -c for w, c in self._terms.items()})

    def __sub__(self, other: "NCPoly") -> "NCPoly":
        return self + (-other)

    def __mul__(self, other: "NCPoly | complex | float | int") -> "NCPoly":
        if isinstance(other, NCPoly):
            acc: dict[Word, complex] = {}
            for w1, c1 in self._terms.items():
                for w2, c2 in other._terms.items():
                    w = w1 + w2
                    acc[w] = acc.get(w, 0j) + c1 * c2
            return NCPoly(acc)
        return NCPoly({w: c * other for w, c in self._terms.items()})

    def __rmul__(self, other: complex | float | int) -> "NCPoly":
        return NCPoly({w: other * c for w, c in self._terms.items()})

    def pruned(self, rel: float = PRUNE_REL, scale: float | None = None) -> "NCPoly":
        """Drop coefficients below ``rel`` times ``scale`` (default: the largest coefficient)."""
        scale = self.max_abs() if scale is None else scale
        cut = rel * scale
        return NCPoly({w: c for w, c in self._terms.items() if abs(c) > cut})

    def allclose(self, other: "NCPoly", atol: float) -> bool:
        return (self - other).max_abs() <= atol

    def __eq__(self, other: object) -> bool:
        return isinstance(other, NCPoly) and self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __repr__(self) -> str:
        if not self._terms:
            return "NCPoly(0)"
        parts = []
        for w, c in sorted(self._terms.items(), key=lambda wc: [str(s) for s in wc[0]]):
            word = "*".join(str(s) for s in w) or "1"
            parts.append(f"({c:.6g})*{word}")
        return "NCPoly(" + " + ".join(parts) + ")"


def is_normal(w: Word) -> bool:
    """True when the word is sorted: F block, then K block, then E block, each by (sign, tag)."""
    return all(not _out_of_order(x, y) for x, y in zip(w, w[1:]))


def _out_of_order(x: CurrentSymbol, y: CurrentSymbol) -> bool:
    if x.group != y.group:
        return x.group > y.group
    return x.order_key > y.order_key
