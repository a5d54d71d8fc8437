"""Orbits of R-matrices generated by the parameter maps rho_n^{+/-}.

Every member of an orbit is computed in closed form from an anchor (the
parameters and index an R-matrix had when it entered the orbit), walking the
single steps ``k -> k+1`` monotonically.  Applying ``rho^-_{n+1}`` after
``rho^+_n`` therefore reproduces the anchor computation exactly, with no
floating-point drift.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Mapping

from .report import DEFAULT_TOL, CheckReport, Sampler, combine, encode_value
from .rmatrix import Params, StructuredR, check_unitarity, check_ybe

KINDS = ("identity", "period_recursion", "period_replace", "phase_shift", "custom")


def decode_complex(v: Any) -> complex:
    if isinstance(v, (list, tuple)):
        re, im = v
        return complex(float(re), float(im))
    return complex(v)


class MissingParameterError(ValueError):
    pass


class OrbitRangeError(IndexError):
    pass


@dataclass(frozen=True)
class Seq:
    """An integer-indexed complex sequence: a default plus explicit values."""

    default: complex = 0j
    values: tuple[tuple[int, complex], ...] = ()

    def __call__(self, n: int) -> complex:
        for k, v in self.values:
            if k == n:
                return v
        return self.default

    def has(self, n: int) -> bool:
        return any(k == n for k, _ in self.values)

    @classmethod
    def of(cls, value: Any) -> "Seq":
        """Accept a Seq, a number, an ``[re, im]`` pair, or ``{"default": .., "values": {n: ..}}``."""
        if isinstance(value, Seq):
            return value
        if isinstance(value, Mapping):
            values = tuple(sorted((int(k), decode_complex(v)) for k, v in value.get("values", {}).items()))
            return cls(decode_complex(value.get("default", 0)), values)
        return cls(decode_complex(value))

    def to_json(self) -> Any:
        out: dict[str, Any] = {"default": encode_value(self.default)}
        if self.values:
            out["values"] = {str(k): encode_value(v) for k, v in self.values}
        return out


@dataclass(frozen=True)
class RhoSpec:
    """A rule for the steps between consecutive orbit members.

    The step between indices ``k`` and ``k+1`` is governed by
    ``overrides[k]`` when present, otherwise by this rho's own ``kind``.

    - ``period_recursion``: ``1/eta(k+1) - 1/eta(k) = hbar * charges(k)``
    - ``period_replace``: ``eta(k) = periods(k)`` wherever ``periods`` has a value
    - ``phase_shift``: ``hbar(k+1) = hbar(k) + shifts(k)``
    - ``custom``: arbitrary ``forward``/``backward`` maps on :class:`StructuredR`
      (no exactness guarantee; meant for experiments and negative controls)
    """

    kind: str = "identity"
    charges: Seq = Seq()
    periods: Seq = Seq()
    shifts: Seq = Seq()
    overrides: tuple[tuple[int, "RhoSpec"], ...] = ()
    forward: Callable[[StructuredR], StructuredR] | None = field(default=None, compare=False)
    backward: Callable[[StructuredR], StructuredR] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown rho kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "custom" and (self.forward is None or self.backward is None):
            raise ValueError("custom rho needs both forward and backward maps")

    def rule(self, k: int) -> "RhoSpec":
        """The rule for the step between ``k`` and ``k + 1``."""
        for idx, r in self.overrides:
            if idx == k:
                return r
        return self

    @property
    def is_identity(self) -> bool:
        return self.kind == "identity" and all(r.is_identity for _, r in self.overrides)

    def _step(self, p: Params, k: int, up: bool, uses: tuple[str, ...]) -> Params:
        rule = self.rule(k)
        kind = rule.kind
        if kind == "identity":
            return p
        if kind in ("period_recursion", "period_replace") and "eta" not in uses:
            raise MissingParameterError(f"{kind} needs a period parameter 'eta' (R-matrix form lacks it)")
        if kind in ("period_recursion", "phase_shift") and "hbar" not in uses:
            raise MissingParameterError(f"{kind} needs the deformation parameter 'hbar'")
        if kind == "period_recursion":
            if p.eta == 0:
                raise MissingParameterError("period_recursion needs eta != 0")
            delta = p.hbar * rule.charges(k)
            inv = 1 / p.eta + delta if up else 1 / p.eta - delta
            if inv == 0:
                raise MissingParameterError(f"period recursion hits 1/eta = 0 at step {k}")
            return Params(1 / inv, p.hbar, p.extra)
        if kind == "period_replace":
            target = k + 1 if up else k
            if not rule.periods.has(target):
                return p
            return Params(rule.periods(target), p.hbar, p.extra)
        if kind == "phase_shift":
            xi = rule.shifts(k)
            return Params(p.eta, p.hbar + xi if up else p.hbar - xi, p.extra)
        raise ValueError(f"rule kind {kind!r} has no closed-form step")

    def params_at(self, anchor: Params, anchor_index: int, target: int, uses: tuple[str, ...] = ("eta", "hbar")) -> Params:
        """Closed-form parameters at ``target`` for an orbit anchored at ``anchor``."""
        p = anchor
        if target >= anchor_index:
            for k in range(anchor_index, target):
                p = self._step(p, k, True, uses)
        else:
            for k in range(anchor_index - 1, target - 1, -1):
                p = self._step(p, k, False, uses)
        return p

    def has_custom(self) -> bool:
        return self.kind == "custom" or any(r.has_custom() for _, r in self.overrides)

    def to_json(self) -> dict[str, Any]:
        if self.has_custom():
            raise ValueError("custom rho rules are not serialisable")
        out: dict[str, Any] = {"kind": self.kind}
        if self.kind == "period_recursion":
            out["charges"] = self.charges.to_json()
        if self.kind == "period_replace":
            out["periods"] = self.periods.to_json()
        if self.kind == "phase_shift":
            out["shifts"] = self.shifts.to_json()
        if self.overrides:
            out["overrides"] = {str(k): r.to_json() for k, r in self.overrides}
        return out

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "RhoSpec":
        overrides = tuple(sorted((int(k), cls.from_json(v)) for k, v in data.get("overrides", {}).items()))
        return cls(
            kind=data.get("kind", "identity"),
            charges=Seq.of(data.get("charges", 0)),
            periods=Seq.of(data.get("periods", 0)),
            shifts=Seq.of(data.get("shifts", 0)),
            overrides=overrides,
        )


def identity_rho() -> RhoSpec:
    return RhoSpec("identity")


def phase_shift(xi: Any) -> RhoSpec:
    return RhoSpec("phase_shift", shifts=Seq.of(xi))


def period_recursion(charges: Any) -> RhoSpec:
    return RhoSpec("period_recursion", charges=Seq.of(charges))


def period_replace(periods: Mapping[int, complex]) -> RhoSpec:
    return RhoSpec("period_replace", periods=Seq(0j, tuple(sorted((int(k), complex(v)) for k, v in periods.items()))))


def mostly_identity(steps: Mapping[int, RhoSpec]) -> RhoSpec:
    """Identity everywhere except the listed steps."""
    return RhoSpec("identity", overrides=tuple(sorted(steps.items())))


@dataclass(frozen=True)
class Lineage:
    rho: RhoSpec
    anchor: Params
    anchor_index: int
    index: int


def _uses(R: StructuredR) -> tuple[str, ...]:
    return R.form.uses


def apply_rho(rho: RhoSpec, sign: str | int, n: int, R: StructuredR) -> StructuredR:
    """Apply ``rho_n^+`` (sign ``+``) or ``rho_n^-`` (sign ``-``) to ``R``, taken to sit at index ``n``."""
    up = sign in ("+", 1, +1)
    if not up and sign not in ("-", -1):
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    target = n + 1 if up else n - 1
    rule = rho.rule(n if up else n - 1)
    if rule.kind == "custom":
        out = rule.forward(R) if up else rule.backward(R)  # type: ignore[misc]
        return out.with_params(out.params, lineage=None)
    lin = R.lineage
    if isinstance(lin, Lineage) and lin.rho == rho and lin.index == n:
        anchor, anchor_index = lin.anchor, lin.anchor_index
    else:
        anchor, anchor_index = R.params, n
    params = rho.params_at(anchor, anchor_index, target, _uses(R))
    if target == anchor_index:
        params = anchor
    return R.with_params(params, lineage=Lineage(rho, anchor, anchor_index, target))


class FamilyOrbit:
    """The indexed sequence ``R^(n)`` generated from ``base = R^(0)``.

    Members are generated lazily and memoised; concurrent fills are
    idempotent because every member is a pure function of ``(base, rho, n)``.
    """

    def __init__(self, base: StructuredR, rho: RhoSpec, range: tuple[int, int] = (-3, 3), charges: Any = None):
        lo, hi = range
        if not lo <= 0 <= hi:
            raise OrbitRangeError(f"orbit range {range} must contain 0")
        self.rho = rho
        self.range = (int(lo), int(hi))
        if charges is None:
            charges = rho.charges if rho.kind == "period_recursion" else Seq()
        self.charges = Seq.of(charges)
        self.base = base.with_params(base.params, lineage=Lineage(rho, base.params, 0, 0))
        self._members: dict[int, StructuredR] = {0: self.base}
        self._lock = threading.Lock()

    def __repr__(self) -> str:
        return f"FamilyOrbit({self.base!r}, kind={self.rho.kind}, range={self.range})"

    def __contains__(self, n: int) -> bool:
        return self.range[0] <= n <= self.range[1]

    def indices(self) -> range:
        return range(self.range[0], self.range[1] + 1)

    def _check(self, n: int) -> None:
        if n not in self:
            raise OrbitRangeError(f"index {n} outside orbit range {self.range}")

    def member(self, n: int) -> StructuredR:
        self._check(n)
        got = self._members.get(n)
        if got is not None:
            return got
        step = 1 if n > 0 else -1
        prev = self.member(n - step)
        R = apply_rho(self.rho, "+" if step > 0 else "-", n - step, prev)
        with self._lock:
            return self._members.setdefault(n, R)

    def members(self) -> Iterator[tuple[int, StructuredR]]:
        for n in self.indices():
            yield n, self.member(n)

    def charge(self, n: int) -> complex:
        return self.charges(n)

    def center(self, n: int, m: int) -> complex:
        """``c^(n,m) = c_n + ... + c_{m-1}``."""
        return sum((self.charges(k) for k in range(n, m)), 0j)

    def to_json(self) -> dict[str, Any]:
        return {"rho": self.rho.to_json(), "range": list(self.range), "charges": self.charges.to_json()}


def orbit(base: StructuredR, rho: RhoSpec, range: tuple[int, int] = (-3, 3), charges: Any = None) -> FamilyOrbit:
    return FamilyOrbit(base, rho, range, charges)


@dataclass(frozen=True)
class ParamMap:
    """A composite of single orbit steps, taking member(source) to member(target).

    ``steps`` lists ``(sign, k)`` pairs applied left to right.
    """

    orbit: FamilyOrbit
    source: int
    target: int
    steps: tuple[tuple[str, int], ...]

    def __call__(self, R: StructuredR) -> StructuredR:
        for sign, k in self.steps:
            R = apply_rho(self.orbit.rho, sign, k, R)
        return R

    def params(self, p: Params | None = None) -> Params:
        R = self.orbit.member(self.source) if p is None else self.orbit.member(self.source).with_params(p)
        return self(R).params

    def __matmul__(self, other: "ParamMap") -> "ParamMap":
        # (self @ other) applies other first
        if other.target != self.source:
            raise ValueError(f"cannot compose map from {self.source} with map into {other.target}")
        return ParamMap(self.orbit, other.source, self.target, other.steps + self.steps)

    def equals(self, other: "ParamMap") -> bool:
        """Exact equality as parameter maps, tested on the source member."""
        if (self.source, self.target) != (other.source, other.target):
            return False
        return self.params() == other.params()


def tau(orb: FamilyOrbit, m: int, n: int) -> ParamMap:
    """The morphism taking member ``n`` to member ``m`` as a composite of single steps."""
    orb._check(m)
    orb._check(n)
    if m >= n:
        steps = tuple(("+", k) for k in range(n, m))
    else:
        steps = tuple(("-", k) for k in range(n, m, -1))
    return ParamMap(orb, n, m, steps)


def check_rho_admissible(rho: RhoSpec, R: StructuredR, sampler: Sampler | None = None, tol: float = DEFAULT_TOL, n: int = 0) -> CheckReport:
    """Unitarity and YBE of both images ``rho_n^{+/-} R``."""
    sampler = sampler or Sampler()
    parts = []
    for sign in ("+", "-"):
        image = apply_rho(rho, sign, n, R)
        for rep in (check_unitarity(image, sampler, tol), check_ybe(image, sampler.with_count(max(1, sampler.count // 2)), tol)):
            rep.check_name = f"{rep.check_name}[rho{sign}]"
            parts.append(rep)
    out = combine("rho_admissible", parts, tol)
    out.params = {"kind": rho.kind, "n": n, **R.params.as_dict()}
    return out


def check_orbit(orb: FamilyOrbit, sampler: Sampler | None = None, tol: float = DEFAULT_TOL, ybe_samples: int | None = None) -> CheckReport:
    """Unitarity and YBE at every member of the orbit."""
    sampler = sampler or Sampler()
    ybe_sampler = sampler.with_count(ybe_samples or max(1, sampler.count // 2))
    parts = []
    for n, R in orb.members():
        for rep in (check_unitarity(R, sampler, tol), check_ybe(R, ybe_sampler, tol)):
            rep.check_name = f"{rep.check_name}[{n}]"
            rep.params = {"n": n, **R.params.as_dict()}
            parts.append(rep)
    out = combine("orbit", parts, tol)
    out.params = {"kind": orb.rho.kind, "range": list(orb.range)}
    return out
