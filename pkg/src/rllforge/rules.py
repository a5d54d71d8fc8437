"""Oriented rewrite rules for Gauss currents and the normal-ordering engine.

Every rule rewrites an adjacent pair of symbols that is out of normal order
(F block, K block, E block; inside a block by sign then tag).  Coefficients
are numbers: the R-matrix entries evaluated at the sampled tags.

Each symbol enters the left R-matrix ``R_i`` at ``value(tag) - sign*quantum``
and the right one ``R_j`` at ``value(tag) + sign*quantum``.  For equal signs
the shifts cancel in differences; for a (+,-) pair they reproduce the
``u_-  - v_+`` and ``u_+ - v_-`` arguments of the mixed relation.

Pairs whose relation degenerates at coincident arguments (for instance
``e(u) k1(u)^-1``) have no rule and stay as they are.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .ncpoly import GROUP, PRUNE_REL, CurrentSymbol, NCPoly, TagTable, Word, _out_of_order
from .rmatrix import PoleError, StructuredR

STEP_BUDGET = 100_000
MIN_SEPARATION = 1e-4

Replacement = tuple[tuple[complex, Word], ...]

RULE_FAMILIES = ("kk1", "kk3", "kk5", "ek1", "ek2", "fk1", "fk2", "ef", "ee", "ff")


class RulePoleError(ValueError):
    def __init__(self, rule: str, pair: tuple[CurrentSymbol, CurrentSymbol], cause: Exception):
        self.rule = rule
        self.pair = pair
        super().__init__(f"rule {rule} for pair {pair[0]} {pair[1]}: {cause}")


class NonTerminationError(RuntimeError):
    def __init__(self, word: Word, steps: int):
        self.word = word
        self.steps = steps
        super().__init__(f"rewriting did not terminate within {steps} steps; offending word {' '.join(map(str, word))}")


@dataclass
class RuleSet:
    """Catalog relations instantiated at numeric tags.

    ``faults`` names rule families whose coefficients are deliberately
    corrupted (ratio inverted); it exists for negative controls only.
    """

    R_i: StructuredR
    R_j: StructuredR
    epsilon: int
    table: TagTable
    separation: float = MIN_SEPARATION
    faults: frozenset[str] = frozenset()
    _cache: dict = field(default_factory=dict, repr=False)
    pole_pairs: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if self.epsilon not in (1, -1):
            raise ValueError("epsilon must be +1 or -1")
        self.faults = frozenset(self.faults)
        unknown = self.faults - set(RULE_FAMILIES)
        if unknown:
            raise ValueError(f"unknown rule families in faults: {sorted(unknown)}")

    # arguments ---------------------------------------------------------------
    def arg_i(self, s: CurrentSymbol) -> complex:
        return self.table.value(s.tag) - s.sign * self.table.quantum

    def arg_j(self, s: CurrentSymbol) -> complex:
        return self.table.value(s.tag) + s.sign * self.table.quantum

    def di(self, x: CurrentSymbol, y: CurrentSymbol) -> complex:
        return self.arg_i(x) - self.arg_i(y)

    def dj(self, x: CurrentSymbol, y: CurrentSymbol) -> complex:
        return self.arg_j(x) - self.arg_j(y)

    def _coincident(self, x: CurrentSymbol, y: CurrentSymbol, which: str = "ij") -> bool:
        if "i" in which and abs(self.di(x, y)) < self.separation:
            return True
        if "j" in which and abs(self.dj(x, y)) < self.separation:
            return True
        return False

    def _ri(self, name: str, z: complex) -> complex:
        return self.R_i.entry(name, z)

    def _rj(self, name: str, z: complex) -> complex:
        return self.R_j.entry(name, z)

    # rule lookup ---------------------------------------------------------------
    def rewrite(self, x: CurrentSymbol, y: CurrentSymbol) -> Replacement | None:
        """Replacement for the adjacent pair ``x y``, or ``None`` if the pair is irreducible."""
        key = (x, y)
        if key in self._cache:
            return self._cache[key]
        try:
            rep, family = self._rewrite(x, y)
        except PoleError as exc:
            raise RulePoleError(self._family(x, y), (x, y), exc) from exc
        except ZeroDivisionError as exc:
            raise RulePoleError(self._family(x, y), (x, y), exc) from exc
        self._cache[key] = rep
        return rep

    def _family(self, x: CurrentSymbol, y: CurrentSymbol) -> str:
        kinds = {x.kind, y.kind}
        if kinds <= {"K1", "K2"}:
            return {frozenset({"K1"}): "kk1", frozenset({"K2"}): "kk5"}.get(frozenset(kinds), "kk3")
        if "E" in kinds and "F" in kinds:
            return "ef"
        if kinds == {"E"}:
            return "ee"
        if kinds == {"F"}:
            return "ff"
        if "E" in kinds:
            return "ek1" if "K1" in kinds else "ek2"
        return "fk1" if "K1" in kinds else "fk2"

    def _rewrite(self, x: CurrentSymbol, y: CurrentSymbol) -> tuple[Replacement | None, str]:
        if x.is_k and y.is_k and x.kind == y.kind and x.sign == y.sign and x.tag == y.tag and x.inverted != y.inverted:
            return ((1.0 + 0j, ()),), "cancel"
        if not _out_of_order(x, y):
            return None, ""
        family = self._family(x, y)
        if family in ("kk1", "kk3", "kk5"):
            if self._coincident(x, y):
                return None, family
            r = self.k_ratio(x, y)
            return ((r, (y, x)),), family
        if family in ("ek1", "ek2"):
            return self._move_e(x, y), family
        if family in ("fk1", "fk2"):
            return self._move_f(x, y), family
        if family == "ef":
            return self._swap_ef(x, y), family
        if family == "ee":
            return self._swap_ee(x, y), family
        return self._swap_ff(x, y), family

    # k-k ----------------------------------------------------------------------
    def k_base_ratio(self, x: CurrentSymbol, y: CurrentSymbol) -> complex:
        """``r`` with ``X Y = r Y X`` for the uninverted currents of ``x`` and ``y``."""
        if x.kind == "K1" and y.kind == "K1":
            r = self._rj("a", self.dj(x, y)) / self._ri("a", self.di(x, y))
            return 1 / r if "kk1" in self.faults else r
        if x.kind == "K2" and y.kind == "K2":
            r = self._rj("d", self.dj(x, y)) / self._ri("d", self.di(x, y))
            return 1 / r if "kk5" in self.faults else r
        if x.kind == "K1":
            r = self._rj("b", self.dj(x, y)) / self._ri("b", self.di(x, y))
        else:
            r = self._ri("b", self.di(y, x)) / self._rj("b", self.dj(y, x))
        return 1 / r if "kk3" in self.faults else r

    def k_ratio(self, x: CurrentSymbol, y: CurrentSymbol) -> complex:
        r = self.k_base_ratio(x, y)
        return r if x.inverted == y.inverted else 1 / r

    # e moving right past k ------------------------------------------------------
    def _move_e(self, x: CurrentSymbol, k: CurrentSymbol) -> Replacement | None:
        if self._coincident(x, k, "j"):
            return None
        e_at_k = k.retag("E")
        bad = "ek1" in self.faults or "ek2" in self.faults
        if k.kind == "K1":
            D = self.dj(k, x)
            a, b, s = self._rj("a", D), self._rj("b", D), self._rj("s", D)
            if bad:
                a, b = b, a
            if not k.inverted:
                return ((a / b, (k, x)), (-s / b, (k, e_at_k)))
            return ((b / a, (k, x)), (s / a, (e_at_k, k)))
        D = self.dj(x, k)
        b, d, t = self._rj("b", D), self._rj("d", D), self._rj("t", D)
        eps = self.epsilon
        if bad:
            b, d = d, b
        if not k.inverted:
            return ((d / b, (k, x)), (-eps * t / b, (k, e_at_k)))
        return ((b / d, (k, x)), (eps * t / d, (e_at_k, k)))

    # f moving left past k --------------------------------------------------------
    def _move_f(self, k: CurrentSymbol, y: CurrentSymbol) -> Replacement | None:
        if self._coincident(k, y, "i"):
            return None
        f_at_k = k.retag("F")
        bad = "fk1" in self.faults or "fk2" in self.faults
        if k.kind == "K1":
            D = self.di(k, y)
            a, b, t = self._ri("a", D), self._ri("b", D), self._ri("t", D)
            if bad:
                a, b = b, a
            if not k.inverted:
                return ((a / b, (y, k)), (-t / b, (f_at_k, k)))
            return ((b / a, (y, k)), (t / a, (k, f_at_k)))
        D = self.di(y, k)
        b, d, s = self._ri("b", D), self._ri("d", D), self._ri("s", D)
        eps = self.epsilon
        if bad:
            b, d = d, b
        if not k.inverted:
            return ((d / b, (y, k)), (-eps * s / b, (f_at_k, k)))
        return ((b / d, (y, k)), (eps * s / d, (k, f_at_k)))

    # e-f exchange ---------------------------------------------------------------------
    def _swap_ef(self, x: CurrentSymbol, y: CurrentSymbol) -> Replacement | None:
        if self._coincident(x, y):
            return None
        eps = self.epsilon
        Di, Dj = self.di(x, y), self.dj(x, y)
        phi_i = self._ri("t", Di) / self._ri("b", Di)
        phi_j = self._rj("t", Dj) / self._rj("b", Dj)
        if "ef" in self.faults:
            phi_i, phi_j = phi_j, phi_i
        k1e_inv, k2e = x.retag("K1", inverted=True), x.retag("K2")
        k2f, k1f_inv = y.retag("K2"), y.retag("K1", inverted=True)
        return ((eps + 0j, (y, x)), (-eps * phi_i, (k1e_inv, k2e)), (eps * phi_j, (k2f, k1f_inv)))

    # e-e and f-f, from the composite (k1 e)(k1 e) and (f k1)(f k1) relations -------------
    def _k1_swap(self, y: CurrentSymbol, x: CurrentSymbol) -> complex:
        """``rho`` with ``k1_y k1_x = rho k1_x k1_y``."""
        return self.k_base_ratio(y.retag("K1"), x.retag("K1"))

    def _swap_ee(self, x: CurrentSymbol, y: CurrentSymbol) -> Replacement | None:
        if self._coincident(x, y):
            return None
        eps = self.epsilon
        k1x, k1y = x.retag("K1"), y.retag("K1")

        def A(k: CurrentSymbol, e_: CurrentSymbol) -> tuple[complex, complex]:
            D = self.dj(k, e_)
            b = self._rj("b", D)
            return self._rj("a", D) / b, self._rj("s", D) / b

        A_yx, S_yx = A(k1y, x)
        A_xy, S_xy = A(k1x, y)
        rho = self._k1_swap(y, x)
        ai = self._ri("a", self.di(x, y))
        dj = self._rj("d", self.dj(x, y))
        if "ee" in self.faults:
            ai, dj = dj, ai
        c_xy = ai * A_yx
        c_yy = -ai * S_yx
        c_yx = -eps * dj * rho * A_xy
        c_xx = eps * dj * rho * S_xy
        return ((-c_yx / c_xy, (y, x)), (-c_xx / c_xy, (x, x)), (-c_yy / c_xy, (y, y)))

    def _swap_ff(self, x: CurrentSymbol, y: CurrentSymbol) -> Replacement | None:
        if self._coincident(x, y):
            return None
        eps = self.epsilon
        k1x, k1y = x.retag("K1"), y.retag("K1")

        def A(k: CurrentSymbol, f_: CurrentSymbol) -> tuple[complex, complex]:
            D = self.di(k, f_)
            b = self._ri("b", D)
            return self._ri("a", D) / b, self._ri("t", D) / b

        A_xy, T_xy = A(k1x, y)
        A_yx, T_yx = A(k1y, x)
        rho = self._k1_swap(y, x)
        di = self._ri("d", self.di(x, y))
        aj = self._rj("a", self.dj(x, y))
        if "ff" in self.faults:
            di, aj = aj, di
        c_xy = di * A_xy
        c_xx = -di * T_xy
        c_yx = -eps * aj * rho * A_yx
        c_yy = eps * aj * rho * T_yx
        return ((-c_yx / c_xy, (y, x)), (-c_xx / c_xy, (x, x)), (-c_yy / c_xy, (y, y)))

    # eager instantiation ----------------------------------------------------------------
    def instantiate(self, alphabet: Iterable[CurrentSymbol]) -> dict[tuple[CurrentSymbol, CurrentSymbol], Replacement]:
        """All rules among ``alphabet``, evaluated now.

        Pairs whose coefficients sit on a pole are recorded in
        ``pole_pairs``; they raise :class:`RulePoleError` only if a reduction
        actually needs them.
        """
        symbols = list(alphabet)
        out = {}
        for x in symbols:
            for y in symbols:
                try:
                    rep = self.rewrite(x, y)
                except RulePoleError as exc:
                    self.pole_pairs[(x, y)] = exc
                    continue
                if rep is not None:
                    out[(x, y)] = rep
        return out


def alphabet(table: TagTable, signs: Iterable[int] = (1, -1), shifts: Iterable[int] = (0,)) -> list[CurrentSymbol]:
    """Every current symbol (k's with and without inversion) over the given tags."""
    from .ncpoly import SpectralTag

    out = []
    for base in range(len(table)):
        for q in shifts:
            tag = SpectralTag(base, q)
            for sg in signs:
                out.append(CurrentSymbol("F", sg, tag))
                out.append(CurrentSymbol("E", sg, tag))
                for kind in ("K1", "K2"):
                    out.append(CurrentSymbol(kind, sg, tag))
                    out.append(CurrentSymbol(kind, sg, tag, True))
    return out


def instantiate_catalog(R_i: StructuredR, R_j: StructuredR, epsilon: int, table: TagTable, faults: Iterable[str] = (), separation: float = MIN_SEPARATION, shifts: Iterable[int] = (0,)) -> RuleSet:
    """Build a :class:`RuleSet` and evaluate every rule over the tag table's alphabet."""
    rules = RuleSet(R_i, R_j, epsilon, table, separation, frozenset(faults))
    rules.instantiate(alphabet(table, shifts=shifts))
    return rules


# normal ordering ------------------------------------------------------------------------


class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def spend(self, word: Word) -> None:
        self.used += 1
        if self.used > self.limit:
            raise NonTerminationError(word, self.limit)


def _reducible_positions(w: Word, rules: RuleSet) -> list[tuple[int, Replacement]]:
    out = []
    for i in range(len(w) - 1):
        rep = rules.rewrite(w[i], w[i + 1])
        if rep is not None:
            out.append((i, rep))
    return out


def _first_reducible(w: Word, rules: RuleSet) -> tuple[int, Replacement] | None:
    for i in range(len(w) - 1):
        rep = rules.rewrite(w[i], w[i + 1])
        if rep is not None:
            return i, rep
    return None


class Reducer:
    """Leftmost-first reduction with memoised normal forms of words."""

    def __init__(self, rules: RuleSet, budget: int = STEP_BUDGET):
        self.rules = rules
        self.budget = _Budget(budget)
        self.memo: dict[Word, dict[Word, complex]] = {}
        self._active: set[Word] = set()

    def word_nf(self, w: Word) -> dict[Word, complex]:
        got = self.memo.get(w)
        if got is not None:
            return got
        if w in self._active:
            raise NonTerminationError(w, self.budget.used)
        hit = _first_reducible(w, self.rules)
        if hit is None:
            out = {w: 1.0 + 0j}
        else:
            self._active.add(w)
            self.budget.spend(w)
            i, rep = hit
            out: dict[Word, complex] = {}
            for c, mid in rep:
                for nw, nc in self.word_nf(w[:i] + mid + w[i + 2:]).items():
                    out[nw] = out.get(nw, 0j) + c * nc
            self._active.discard(w)
        self.memo[w] = out
        return out

    def reduce(self, p: NCPoly) -> tuple[NCPoly, float]:
        acc: dict[Word, complex] = {}
        scale = p.max_abs()
        for w, c in p.items():
            nf = self.word_nf(w)
            for nw, nc in nf.items():
                acc[nw] = acc.get(nw, 0j) + c * nc
                scale = max(scale, abs(c * nc))
        return NCPoly(acc).pruned(PRUNE_REL, scale), scale


def _random_reduce(p: NCPoly, rules: RuleSet, rng: random.Random, budget: int) -> tuple[NCPoly, float]:
    spent = _Budget(budget)
    work: dict[Word, complex] = dict(p.items())
    done: dict[Word, complex] = {}
    scale = p.max_abs()
    while work:
        w = rng.choice(sorted(work, key=lambda x: [str(s) for s in x]))
        c = work.pop(w)
        options = _reducible_positions(w, rules)
        if not options:
            done[w] = done.get(w, 0j) + c
            continue
        spent.spend(w)
        i, rep = rng.choice(options)
        for rc, mid in rep:
            nw = w[:i] + mid + w[i + 2:]
            val = work.get(nw, 0j) + c * rc
            scale = max(scale, abs(val))
            work[nw] = val
    return NCPoly(done).pruned(PRUNE_REL, scale), scale


def normal_order(p: NCPoly, rules: RuleSet, order: str = "leftmost", seed: int | None = None, budget: int = STEP_BUDGET, with_scale: bool = False):
    """Reduce ``p`` to a fixed point of ``rules``.

    ``order="leftmost"`` always rewrites the leftmost reducible pair (with
    memoised word normal forms); ``order="random"`` picks words and positions
    with a seeded RNG, giving an independent reduction path for the same
    rules.  With ``with_scale`` the largest intermediate coefficient is
    returned alongside the result.
    """
    if order == "leftmost":
        nf, scale = Reducer(rules, budget).reduce(p)
    elif order == "random":
        nf, scale = _random_reduce(p, rules, random.Random(seed), budget)
    else:
        raise ValueError(f"unknown order {order!r}")
    return (nf, scale) if with_scale else nf


def is_reduced(p: NCPoly, rules: RuleSet) -> bool:
    return all(_first_reducible(w, rules) is None for w in p.words())
