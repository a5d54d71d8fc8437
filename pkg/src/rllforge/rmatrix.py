"""Structured 4x4 R-matrices of six-vertex (ice-rule) type.

Layout follows the tensor basis ``(1,1), (1,2), (2,1), (2,2)`` for rows
``(i,j)`` and columns ``(k,l)``::

    [[a, 0, 0, 0],
     [0, b, t, 0],
     [0, s, c, 0],
     [0, 0, 0, d]]
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Mapping

import numpy as np

from .report import DEFAULT_POLE_GUARD, DEFAULT_TOL, CheckReport, ResidualLog, Sampler

ENTRY_NAMES = ("a", "b", "c", "d", "s", "t")

# (row, col) of every entry in the 4x4 layout
ENTRY_POSITIONS = {"a": (0, 0), "b": (1, 1), "t": (1, 2), "s": (2, 1), "c": (2, 2), "d": (3, 3)}

Entry = Callable[[complex], complex]


class PoleError(ValueError):
    """Raised when an entry function is evaluated too close to one of its poles."""

    def __init__(self, entry: str, point: complex, distance: float, guard: float):
        self.entry = entry
        self.point = point
        self.distance = distance
        self.guard = guard
        super().__init__(
            f"entry {entry!r} evaluated at u={point} lies {distance:.3g} from a pole (guard {guard:g})"
        )


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class Params:
    """Parameters an entry form is closed over."""

    eta: complex = 1 / math.pi
    hbar: complex = 0.3
    extra: tuple[tuple[str, complex], ...] = ()

    def get(self, name: str) -> complex:
        if name == "eta":
            return self.eta
        if name == "hbar":
            return self.hbar
        for k, v in self.extra:
            if k == name:
                return v
        raise KeyError(name)

    def with_values(self, **values: complex) -> "Params":
        eta = values.pop("eta", self.eta)
        hbar = values.pop("hbar", self.hbar)
        extra = dict(self.extra)
        extra.update(values)
        return Params(eta, hbar, tuple(sorted(extra.items())))

    def as_dict(self) -> dict[str, complex]:
        return {"eta": self.eta, "hbar": self.hbar, **dict(self.extra)}


@dataclass(frozen=True)
class EntryForm:
    """A named rule turning :class:`Params` into the six entry functions.

    ``poles(params)`` returns a function ``u -> (entry, distance)`` giving the
    entry whose pole is nearest to ``u``; forms without poles return ``None``.
    """

    name: str
    build: Callable[[Params], dict[str, Entry]]
    poles: Callable[[Params], Callable[[complex], tuple[str, float]]] | None = None
    uses: tuple[str, ...] = ()


def _sinh_pole_distance(eta: complex, hbar: complex) -> Callable[[complex], tuple[str, float]]:
    # zeros of sinh(pi*eta*(u+hbar)) sit at u = -hbar + i k / eta
    def dist(u: complex) -> tuple[str, float]:
        z = eta * (u + hbar)
        k = round(z.imag)
        return "b", abs(z - 1j * k) / abs(eta)

    return dist


def _trig_build(p: Params) -> dict[str, Entry]:
    if p.eta == 0:
        raise ParameterError("trigonometric R-matrix needs eta != 0")
    if p.hbar == 0:
        raise ParameterError("trigonometric R-matrix needs hbar != 0")
    k = math.pi * p.eta
    num_t = cmath.sinh(k * p.hbar)

    def b(u: complex) -> complex:
        return cmath.sinh(k * u) / cmath.sinh(k * (u + p.hbar))

    def t(u: complex) -> complex:
        return num_t / cmath.sinh(k * (u + p.hbar))

    def one(u: complex) -> complex:
        return 1.0 + 0j

    return {"a": one, "b": b, "c": b, "d": one, "s": t, "t": t}


def _rational_build(p: Params) -> dict[str, Entry]:
    if p.hbar == 0:
        raise ParameterError("rational R-matrix needs hbar != 0")
    h = complex(p.hbar)

    def b(u: complex) -> complex:
        return u / (u + h)

    def t(u: complex) -> complex:
        return h / (u + h)

    def one(u: complex) -> complex:
        return 1.0 + 0j

    return {"a": one, "b": b, "c": b, "d": one, "s": t, "t": t}


def _rational_poles(p: Params) -> Callable[[complex], tuple[str, float]]:
    return lambda u: ("b", abs(u + p.hbar))


TRIG = EntryForm("trig", _trig_build, lambda p: _sinh_pole_distance(p.eta, p.hbar), uses=("eta", "hbar"))
RATIONAL = EntryForm("rational", _rational_build, _rational_poles, uses=("hbar",))


def constant_form(name: str = "constant", **values: complex) -> EntryForm:
    """Entries that do not depend on ``u`` (defaults: identity matrix)."""
    vals = {"a": 1.0, "b": 1.0, "c": 1.0, "d": 1.0, "s": 0.0, "t": 0.0}
    vals.update(values)

    def build(p: Params) -> dict[str, Entry]:
        return {k: (lambda u, v=complex(v): v) for k, v in vals.items()}

    return EntryForm(name, build)


def polynomial_ratio_form(table: Mapping[str, tuple[list[complex], list[complex]]], name: str = "inline") -> EntryForm:
    """Rational entries given as ``{entry: (numerator coeffs, denominator coeffs)}``.

    Coefficients are highest power first (``numpy.polyval`` convention).
    Missing entries default to ``a=d=1``, ``b=c=1``, ``s=t=0``.
    """
    defaults = {"a": ([1], [1]), "b": ([1], [1]), "c": ([1], [1]), "d": ([1], [1]), "s": ([0], [1]), "t": ([0], [1])}
    spec = {k: (np.asarray(v[0], dtype=complex), np.asarray(v[1], dtype=complex)) for k, v in {**defaults, **table}.items()}
    roots = {k: np.roots(den) if len(den) > 1 else np.array([], dtype=complex) for k, (_, den) in spec.items()}

    def build(p: Params) -> dict[str, Entry]:
        return {k: (lambda u, n=num, d=den: complex(np.polyval(n, u) / np.polyval(d, u))) for k, (num, den) in spec.items()}

    def poles(p: Params) -> Callable[[complex], tuple[str, float]]:
        def dist(u: complex) -> tuple[str, float]:
            best = ("a", math.inf)
            for k in ENTRY_NAMES:
                if len(roots[k]):
                    d = float(np.min(np.abs(roots[k] - u)))
                    if d < best[1]:
                        best = (k, d)
            return best

        return dist

    return EntryForm(name, build, poles)


@dataclass(frozen=True, eq=False)
class StructuredR:
    """A 4x4 R-matrix given by six entry functions.

    ``scales`` and ``overrides`` are entry-level modifications that survive
    re-parameterisation (``with_params``); ``transposed`` marks the R21 image.
    ``lineage`` is bookkeeping owned by :mod:`rllforge.family`.
    """

    form: EntryForm
    params: Params = field(default_factory=Params)
    grading: int = 1
    scales: tuple[tuple[str, complex], ...] = ()
    overrides: tuple[tuple[str, Entry], ...] = ()
    transposed: bool = False
    guard: float = DEFAULT_POLE_GUARD
    lineage: Any = None

    def __post_init__(self) -> None:
        if self.grading not in (1, -1):
            raise ParameterError(f"grading must be +1 or -1, got {self.grading}")
        entries = dict(self.form.build(self.params))
        for name, factor in self.scales:
            entries[name] = (lambda f, c: (lambda u: c * f(u)))(entries[name], factor)
        for name, fn in self.overrides:
            entries[name] = fn
        if self.transposed:
            entries["b"], entries["c"] = entries["c"], entries["b"]
            entries["s"], entries["t"] = entries["t"], entries["s"]
        object.__setattr__(self, "_entries", entries)
        object.__setattr__(self, "_poles", self.form.poles(self.params) if self.form.poles else None)

    # identity for comparisons: same form, same parameters, same modifications
    def key(self) -> tuple:
        return (self.form.name, self.params, self.grading, self.scales, tuple(id(f) for _, f in self.overrides), self.transposed)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, StructuredR) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        mods = []
        if self.scales:
            mods.append(f"scales={dict(self.scales)}")
        if self.overrides:
            mods.append(f"overrides={[k for k, _ in self.overrides]}")
        if self.transposed:
            mods.append("r21")
        extra = (", " + ", ".join(mods)) if mods else ""
        return f"StructuredR({self.form.name}, {self.params}, eps={self.grading}{extra})"

    @property
    def epsilon(self) -> int:
        return self.grading

    @property
    def varpi(self) -> np.ndarray:
        return np.diag([1.0, 1.0, 1.0, float(self.grading)]).astype(complex)

    def raw(self, name: str) -> Entry:
        return self._entries[name]

    def pole_distance(self, u: complex) -> tuple[str, float]:
        if self._poles is None:
            return ("a", math.inf)
        return self._poles(u)

    def near_pole(self, u: complex, guard: float | None = None) -> bool:
        guard = self.guard if guard is None else guard
        return self.pole_distance(u)[1] < guard

    def check_point(self, u: complex) -> None:
        name, dist = self.pole_distance(u)
        if dist < self.guard:
            raise PoleError(name, u, dist, self.guard)

    def entry(self, name: str, u: complex) -> complex:
        self.check_point(u)
        return complex(self._entries[name](complex(u)))

    def a(self, u: complex) -> complex:
        return self.entry("a", u)

    def b(self, u: complex) -> complex:
        return self.entry("b", u)

    def c(self, u: complex) -> complex:
        return self.entry("c", u)

    def d(self, u: complex) -> complex:
        return self.entry("d", u)

    def s(self, u: complex) -> complex:
        return self.entry("s", u)

    def t(self, u: complex) -> complex:
        return self.entry("t", u)

    def entries(self, u: complex) -> dict[str, complex]:
        self.check_point(u)
        u = complex(u)
        return {k: complex(self._entries[k](u)) for k in ENTRY_NAMES}

    def with_params(self, params: Params, lineage: Any = None) -> "StructuredR":
        return replace(self, params=params, lineage=lineage)

    def with_grading(self, grading: int) -> "StructuredR":
        return replace(self, grading=grading)

    def scaled(self, name: str, factor: complex) -> "StructuredR":
        return replace(self, scales=self.scales + ((name, complex(factor)),), lineage=None)

    def with_entries(self, **fns: Entry) -> "StructuredR":
        return replace(self, overrides=self.overrides + tuple(fns.items()), lineage=None)

    def with_guard(self, guard: float) -> "StructuredR":
        return replace(self, guard=guard)


def builtin_trig(eta: complex = 1 / math.pi, hbar: complex = 0.3, grading: int = 1) -> StructuredR:
    """Trigonometric six-vertex R-matrix, ``b = sinh(pi eta u) / sinh(pi eta (u + hbar))``."""
    if eta == 0 or hbar == 0:
        raise ParameterError("builtin_trig needs eta != 0 and hbar != 0")
    return StructuredR(TRIG, Params(complex(eta), complex(hbar)), grading)


def builtin_rational(hbar: complex = 0.3, grading: int = 1) -> StructuredR:
    """Rational (Yangian) R-matrix, ``b = u / (u + hbar)``, ``t = hbar / (u + hbar)``."""
    if hbar == 0:
        raise ParameterError("builtin_rational needs hbar != 0")
    return StructuredR(RATIONAL, Params(0j, complex(hbar)), grading)


def identity_r(grading: int = 1) -> StructuredR:
    return StructuredR(constant_form("identity"), Params(0j, 0j), grading)


def eval_r(R: StructuredR, u: complex) -> np.ndarray:
    """Evaluate ``R(u)`` as a 4x4 complex matrix with exact structural zeros."""
    e = R.entries(u)
    m = np.zeros((4, 4), dtype=complex)
    for name, pos in ENTRY_POSITIONS.items():
        m[pos] = e[name]
    return m


PERMUTATION = np.eye(4, dtype=complex)[[0, 2, 1, 3]]


def r21(R: StructuredR) -> StructuredR:
    """The R-matrix with tensor factors exchanged: ``P R P``."""
    return replace(R, transposed=not R.transposed, lineage=None)


def _scale(*mats: np.ndarray) -> float:
    return max(1.0, float(np.prod([np.max(np.abs(m)) for m in mats])))


def unitarity_residual(R: StructuredR, u: complex) -> float:
    A = eval_r(R, u)
    B = eval_r(r21(R), -u)
    return float(np.max(np.abs(A @ B - np.eye(4)))) / _scale(A, B)


def check_unitarity(R: StructuredR, sampler: Sampler | None = None, tol: float = DEFAULT_TOL) -> CheckReport:
    """Sample ``R12(u) R21(-u) = 1``; failures are reported, never raised."""
    sampler = sampler or Sampler()
    log = ResidualLog("unitarity", tol, sampler.seed, R.params.as_dict())
    avoid = lambda u: R.near_pole(u) or R.near_pole(-u)
    for idx, u in enumerate(sampler.points(avoid=avoid, stream=1)):
        log.add(unitarity_residual(R, u), sample=idx, u=u)
    return log.report()


def embed(m: np.ndarray, pair: tuple[int, int]) -> np.ndarray:
    """Embed a 4x4 two-site operator into the 8-dim space of three sites."""
    t = m.reshape(2, 2, 2, 2)
    eye = np.eye(2, dtype=complex)
    if pair == (1, 2):
        full = np.einsum("abcd,ef->abecdf", t, eye)
    elif pair == (1, 3):
        full = np.einsum("abcd,ef->aebcfd", t, eye)
    elif pair == (2, 3):
        full = np.einsum("abcd,ef->eabfcd", t, eye)
    else:
        raise ValueError(f"unsupported pair {pair}")
    return full.reshape(8, 8)


def ybe_residual(R: StructuredR, u: complex, v: complex, w: complex) -> float:
    r12 = embed(eval_r(R, u - v), (1, 2))
    r13 = embed(eval_r(R, u - w), (1, 3))
    r23 = embed(eval_r(R, v - w), (2, 3))
    lhs = r12 @ r13 @ r23
    rhs = r23 @ r13 @ r12
    return float(np.max(np.abs(lhs - rhs))) / _scale(r12, r13, r23)


def check_ybe(R: StructuredR, sampler: Sampler | None = None, tol: float = DEFAULT_TOL) -> CheckReport:
    """Sample the Yang-Baxter equation on triples ``(u, v, w)``.

    The argument pattern is ``R12(u-v) R13(u-w) R23(v-w)``.
    """
    sampler = sampler or Sampler(count=50)
    log = ResidualLog("ybe", tol, sampler.seed, R.params.as_dict())
    avoid = lambda u, v, w: R.near_pole(u - v) or R.near_pole(u - w) or R.near_pole(v - w)
    for idx, (u, v, w) in enumerate(sampler.tuples(sampler.count, 3, avoid=avoid, stream=2)):
        log.add(ybe_residual(R, u, v, w), sample=idx, u=u, v=v, w=w)
    return log.report()
