"""Component-wise verification of the generalized RLL relations in Gauss currents.

``expand_components`` writes every matrix entry of

    R^(i)(u - v) L1(u) W L2(v) W  -  W L2(v) W L1(u) R^(j)(u - v)

(``W = diag(1, 1, 1, eps)``) as a noncommutative polynomial in the currents,
with ``L = [[k1, k1 e], [f k1, k2 + f k1 e]]``.  The verifiers normal-order
those polynomials with a :class:`~rllforge.rules.RuleSet` and check that
nothing survives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .family import FamilyOrbit
from .ncpoly import CurrentSymbol, NCPoly, SpectralTag, TagTable, e, f, k1, k2
from .report import DEFAULT_TOL, CheckReport, ResidualLog, Sampler
from .rmatrix import StructuredR, eval_r
from .rules import MIN_SEPARATION, RulePoleError, RuleSet, instantiate_catalog, normal_order

SIGN_PAIRS = ((1, 1), (-1, -1), (1, -1))
INDEX_PAIRS = ((1, 1), (1, 2), (2, 1), (2, 2))
CROSS_ORDER_TOL = 1e-10
MAX_REDRAWS = 50


class TagShiftError(ValueError):
    """Raised when a mixed-sign expansion is requested outside ``|u| < |v|``."""


def _basis(i: int, j: int) -> int:
    return 2 * (i - 1) + (j - 1)


def varpi_sign(i: int, j: int, epsilon: int) -> int:
    return epsilon if i == j == 2 else 1


def l_entries(sign: int, tag: SpectralTag) -> dict[tuple[int, int], NCPoly]:
    """Gauss form of the 2x2 L-matrix at one sign and tag."""
    K1, K2, E, F = k1(sign, tag), k2(sign, tag), e(sign, tag), f(sign, tag)
    return {
        (1, 1): NCPoly.word(K1),
        (1, 2): NCPoly.word(K1, E),
        (2, 1): NCPoly.word(F, K1),
        (2, 2): NCPoly.word(K2) + NCPoly.word(F, K1, E),
    }


def expand_components(
    R_i: StructuredR,
    R_j: StructuredR,
    epsilon: int,
    sign_pair: tuple[int, int],
    u: SpectralTag,
    v: SpectralTag,
    table: TagTable,
) -> list[NCPoly]:
    """The 16 components, ordered ``((i,j),(k,l))`` lexicographically over ``{1,2}``.

    Tags are plain; the shift of each argument by ``sign * quantum`` (minus
    for ``R_i``, plus for ``R_j``) is applied here and in the rules alike.
    """
    su, sv = sign_pair
    if (su, sv) not in SIGN_PAIRS and (su, sv) != (-1, 1):
        raise ValueError(f"bad sign pair {sign_pair}")
    if su != sv and abs(table.value(u)) >= abs(table.value(v)):
        raise TagShiftError(f"mixed sign pair needs |u| < |v|, got |{table.value(u)}| >= |{table.value(v)}|")
    uu, vv = table.value(u), table.value(v)
    q = table.quantum
    Mi = eval_r(R_i, (uu - su * q) - (vv - sv * q))
    Mj = eval_r(R_j, (uu + su * q) - (vv + sv * q))
    Lu, Lv = l_entries(su, u), l_entries(sv, v)
    out = []
    for i, j in INDEX_PAIRS:
        for k, l in INDEX_PAIRS:
            lhs = NCPoly()
            rhs = NCPoly()
            for m, n in INDEX_PAIRS:
                ri = Mi[_basis(i, j), _basis(m, n)]
                if ri != 0:
                    w = varpi_sign(k, n, epsilon) * varpi_sign(k, l, epsilon)
                    lhs = lhs + (Lu[(m, k)] * Lv[(n, l)]) * (ri * w)
                rj = Mj[_basis(m, n), _basis(k, l)]
                if rj != 0:
                    w = varpi_sign(i, j, epsilon) * varpi_sign(i, n, epsilon)
                    rhs = rhs + (Lv[(j, n)] * Lu[(i, m)]) * (rj * w)
            out.append(lhs - rhs)
    return out


def component_label(index: int) -> str:
    (i, j), (k, l) = INDEX_PAIRS[index // 4], INDEX_PAIRS[index % 4]
    return f"(({i},{j}),({k},{l}))"


def weight(word: Iterable[CurrentSymbol]) -> int:
    """Number of e's minus number of f's."""
    return sum((s.kind == "E") - (s.kind == "F") for s in word)


@dataclass(frozen=True)
class Reduction:
    residual: float
    scale: float
    cross_order: float
    leftover: NCPoly


def reduce_and_compare(p: NCPoly, rules: RuleSet, seed: int, cross_order: bool = True) -> Reduction:
    """Normal-order ``p`` leftmost-first and, optionally, along a random path; report both discrepancies."""
    nf, scale = normal_order(p, rules, with_scale=True)
    scale = max(scale, 1e-300)
    residual = nf.max_abs() / scale
    diff = 0.0
    if cross_order:
        alt = normal_order(p, rules, order="random", seed=seed)
        diff = (nf - alt).max_abs() / scale
    return Reduction(residual, scale, diff, nf)


def _worst_word(p: NCPoly) -> tuple[str, complex] | None:
    if p.is_zero():
        return None
    w, c = max(p.items(), key=lambda wc: abs(wc[1]))
    return " ".join(map(str, w)) or "1", c


def _quantum(R_i: StructuredR, c: complex) -> complex:
    hbar = R_i.params.get("hbar") if "hbar" in R_i.params.as_dict() else 0.0
    return hbar * c / 4


def _pair_ok(R_i: StructuredR, R_j: StructuredR, u: complex, v: complex, q: complex, guard_sep: float) -> bool:
    # every argument difference the rules can meet, for all sign combinations and shifts up to 4 quanta
    for a in range(-4, 5):
        for x, y in ((u, v), (v, u)):
            d = x - y + a * q
            if abs(d) < guard_sep:
                return False
            if R_i.near_pole(d) or R_j.near_pole(d):
                return False
    return True


def sample_tag_pairs(R_i: StructuredR, R_j: StructuredR, q: complex, sampler: Sampler, count: int, stream: int) -> list[tuple[complex, complex]]:
    """``count`` pairs ``(u, v)`` with ``|u| < |v|``, away from poles and from coincidences."""
    rng = sampler.rng(stream)
    out = []
    draws = 0
    while len(out) < count:
        draws += 1
        if draws > count * MAX_REDRAWS:
            raise RuntimeError("could not sample admissible tag pairs")
        u, v = (complex(*rng.uniform(-sampler.box, sampler.box, 2)) for _ in range(2))
        if abs(u) > abs(v):
            u, v = v, u
        if abs(abs(u) - abs(v)) < 1e-3:
            continue
        if _pair_ok(R_i, R_j, u, v, q, 10 * MIN_SEPARATION):
            out.append((u, v))
    return out


def verify_components(
    orbit: FamilyOrbit,
    i: int,
    j: int,
    epsilon: int,
    sampler: Sampler | None = None,
    tol: float = 1e-9,
    c: complex | None = None,
    sign_pairs: Iterable[tuple[int, int]] = SIGN_PAIRS,
    faults: Iterable[str] = (),
    cross_order: bool = True,
) -> CheckReport:
    """Every component of every sign pair must normal-order to zero at each sampled tag pair."""
    sampler = sampler or Sampler(count=20)
    R_i, R_j = orbit.member(i), orbit.member(j)
    c = orbit.center(i, j) if c is None else c
    q = _quantum(R_i, c)
    sign_pairs = tuple(sign_pairs)
    pairs = sample_tag_pairs(R_i, R_j, q, sampler, sampler.count, stream=10)
    params = {"i": i, "j": j, "epsilon": epsilon, "c": c, "R_i": R_i.params.as_dict(), "R_j": R_j.params.as_dict()}
    log = ResidualLog("verify_components", tol, sampler.seed, params)
    worst_cross = 0.0
    u_tag, v_tag = SpectralTag(0), SpectralTag(1)
    for idx, (u, v) in enumerate(pairs):
        table = TagTable((u, v), q)
        rules = instantiate_catalog(R_i, R_j, epsilon, table, faults)
        for sp in sign_pairs:
            comps = expand_components(R_i, R_j, epsilon, sp, u_tag, v_tag, table)
            for ci, comp in enumerate(comps):
                where = {"sample": idx, "sign_pair": list(sp), "component": component_label(ci)}
                try:
                    red = reduce_and_compare(comp, rules, seed=sampler.seed * 1_000_003 + idx * 97 + ci, cross_order=cross_order)
                except RulePoleError as exc:
                    log.add(math.inf, error=str(exc), **where)
                    continue
                worst_cross = max(worst_cross, red.cross_order)
                word = _worst_word(red.leftover)
                if word is not None:
                    where["word"], where["coefficient"] = word
                log.add(red.residual, **where)
                if red.cross_order > CROSS_ORDER_TOL:
                    log.add(red.cross_order / CROSS_ORDER_TOL * tol, cross_order=True, **where)
    return log.report(tag_pairs=len(pairs), sign_pairs=[list(sp) for sp in sign_pairs], cross_order_max=worst_cross, faults=sorted(faults))


# E and F -------------------------------------------------------------------------------------


def big_e(tag: SpectralTag, quanta: int = 1) -> NCPoly:
    """``E = e+(tag - quanta*d) - e-(tag + quanta*d)``."""
    return NCPoly.word(e(1, tag.shifted(-quanta))) - NCPoly.word(e(-1, tag.shifted(quanta)))


def big_f(tag: SpectralTag, quanta: int = 1) -> NCPoly:
    """``F = f+(tag + quanta*d) - f-(tag - quanta*d)``."""
    return NCPoly.word(f(1, tag.shifted(quanta))) - NCPoly.word(f(-1, tag.shifted(-quanta)))


EF_RELATIONS = ("ke1", "ke2", "ke3", "ke4", "kf1", "kf2", "kf3", "kf4")


def ef_relation(name: str, R_i: StructuredR, R_j: StructuredR, table: TagTable, quanta: int = 1) -> NCPoly:
    """LHS - RHS of one k/E or k/F exchange relation, at tags u (index 0) and v (index 1).

    The scalar coefficients always use the true shift ``v -/+ quantum``; only
    the E/F definitions take ``quanta``, so a wrong shift there shows up as a
    nonzero residual.
    """
    U, V = SpectralTag(0), SpectralTag(1)
    u, v = table.values
    d = table.quantum
    v_m, v_p = v - d, v + d
    ai, bi, di = (lambda z, n=n: R_i.entry(n, z) for n in "abd")
    aj, bj, dj = (lambda z, n=n: R_j.entry(n, z) for n in "abd")
    w = NCPoly.word
    if name == "ke1":
        return w(k1(1, U)) * big_e(V, quanta) * aj(u - v_m) - big_e(V, quanta) * w(k1(1, U)) * bj(u - v_m)
    if name == "ke2":
        return w(k1(1, U)) * big_f(V, quanta) * bi(u - v_p) - big_f(V, quanta) * w(k1(1, U)) * ai(u - v_p)
    if name == "ke3":
        return big_e(U, quanta) * w(k1(-1, V)) * bj(v_m - u) - w(k1(-1, V)) * big_e(U, quanta) * aj(v_m - u)
    if name == "ke4":
        return w(k1(-1, V)) * big_f(U, quanta) * bi(v_p - u) - big_f(U, quanta) * w(k1(-1, V)) * ai(v_p - u)
    if name == "kf1":
        return w(k2(1, U, True)) * big_e(V, quanta) * bj(v_m - u) - big_e(V, quanta) * w(k2(1, U, True)) * dj(v_m - u)
    if name == "kf2":
        return w(k2(1, U, True)) * big_f(V, quanta) * di(v_p - u) - big_f(V, quanta) * w(k2(1, U, True)) * bi(v_p - u)
    if name == "kf3":
        return w(k2(-1, V, True)) * big_e(U, quanta) * bj(u - v_m) - big_e(U, quanta) * w(k2(-1, V, True)) * dj(u - v_m)
    if name == "kf4":
        return w(k2(-1, V, True)) * big_f(U, quanta) * di(u - v_p) - big_f(U, quanta) * w(k2(-1, V, True)) * bi(u - v_p)
    raise ValueError(f"unknown relation {name!r}; expected one of {EF_RELATIONS}")


def verify_EF_relations(
    orbit: FamilyOrbit,
    i: int,
    j: int,
    epsilon: int,
    c: complex,
    sampler: Sampler | None = None,
    tol: float = 1e-9,
    relations: Iterable[str] = EF_RELATIONS,
    quanta: int = 1,
    faults: Iterable[str] = (),
    cross_order: bool = True,
) -> CheckReport:
    """Normal-order LHS - RHS of each k/E and k/F relation and require zero.

    ``quanta=2`` defines E and F with twice the correct shift; it is the
    negative control and should fail whenever ``c != 0``.
    """
    sampler = sampler or Sampler(count=10)
    R_i, R_j = orbit.member(i), orbit.member(j)
    q = _quantum(R_i, c)
    relations = tuple(relations)
    pairs = sample_tag_pairs(R_i, R_j, q, sampler, sampler.count, stream=11)
    params = {"i": i, "j": j, "epsilon": epsilon, "c": c, "quanta": quanta, "R_i": R_i.params.as_dict(), "R_j": R_j.params.as_dict()}
    log = ResidualLog("verify_EF_relations", tol, sampler.seed, params)
    worst_cross = 0.0
    for idx, (u, v) in enumerate(pairs):
        table = TagTable((u, v), q)
        rules = instantiate_catalog(R_i, R_j, epsilon, table, faults, shifts=sorted({-quanta, 0, quanta}))
        for ri, name in enumerate(relations):
            where = {"sample": idx, "relation": name}
            try:
                red = reduce_and_compare(ef_relation(name, R_i, R_j, table, quanta), rules, seed=sampler.seed * 1_000_003 + idx * 97 + ri, cross_order=cross_order)
            except RulePoleError as exc:
                log.add(math.inf, error=str(exc), **where)
                continue
            worst_cross = max(worst_cross, red.cross_order)
            word = _worst_word(red.leftover)
            if word is not None:
                where["word"], where["coefficient"] = word
            log.add(red.residual, **where)
            if red.cross_order > CROSS_ORDER_TOL:
                log.add(red.cross_order / CROSS_ORDER_TOL * tol, cross_order=True, **where)
    return log.report(tag_pairs=len(pairs), relations=list(relations), cross_order_max=worst_cross)


def brute_force_components(R_i: StructuredR, R_j: StructuredR, epsilon: int, sign_pair: tuple[int, int], u: SpectralTag, v: SpectralTag, table: TagTable) -> list[NCPoly]:
    """Same expansion as :func:`expand_components` via explicit 4x4 products of NCPoly matrices."""
    su, sv = sign_pair
    q = table.quantum
    uu, vv = table.value(u), table.value(v)
    Mi = eval_r(R_i, (uu - su * q) - (vv - sv * q))
    Mj = eval_r(R_j, (uu + su * q) - (vv + sv * q))
    W = np.diag([1, 1, 1, epsilon])
    Lu, Lv = l_entries(su, u), l_entries(sv, v)
    one, zero = NCPoly.scalar(1), NCPoly()

    def big(L: dict, slot: int) -> list[list[NCPoly]]:
        m = [[zero] * 4 for _ in range(4)]
        for a in range(2):
            for b in range(2):
                for cc in range(2):
                    for dd in range(2):
                        if slot == 1 and b == dd:
                            m[2 * a + b][2 * cc + dd] = L[(a + 1, cc + 1)]
                        if slot == 2 and a == cc:
                            m[2 * a + b][2 * cc + dd] = L[(b + 1, dd + 1)]
        return m

    def scal(M) -> list[list[NCPoly]]:
        return [[one * complex(M[r, s]) for s in range(4)] for r in range(4)]

    def mul(A, B):
        return [[sum((A[r][t] * B[t][s] for t in range(4)), NCPoly()) for s in range(4)] for r in range(4)]

    L1, L2 = big(Lu, 1), big(Lv, 2)
    lhs = mul(mul(mul(mul(scal(Mi), L1), scal(W)), L2), scal(W))
    rhs = mul(mul(mul(mul(scal(W), L2), scal(W)), L1), scal(Mj))
    return [lhs[r][s] - rhs[r][s] for r in range(4) for s in range(4)]
