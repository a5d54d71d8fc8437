"""Check reports and seeded sampling of spectral points."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Mapping

import numpy as np

DEFAULT_TOL = 1e-9
DEFAULT_POLE_GUARD = 1e-6
DEFAULT_BOX = 2.0
MAX_FAILURES = 20


def encode_value(value: Any) -> Any:
    """Convert numbers to JSON-ready values; complex numbers become ``[re, im]``."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, Mapping):
        return {str(k): encode_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [encode_value(v) for v in value]
    return value


@dataclass
class CheckReport:
    """Outcome of one verification run.

    ``status`` is derived from ``max_residual`` and ``tolerance``; it is never
    set independently.
    """

    check_name: str
    max_residual: float
    samples_used: int
    seed: int | None
    tolerance: float
    params: dict[str, Any] = field(default_factory=dict)
    failures: list[dict[str, Any]] = field(default_factory=list)
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.max_residual)) and self.max_residual <= self.tolerance

    def to_dict(self) -> dict[str, Any]:
        out = {
            "check": self.check_name,
            "status": self.status,
            "max_residual": float(self.max_residual),
            "tolerance": float(self.tolerance),
            "samples": int(self.samples_used),
            "seed": self.seed,
            "params": encode_value(self.params),
            "failures": encode_value(self.failures),
        }
        if self.details:
            out["details"] = encode_value(self.details)
        return out


class ResidualLog:
    """Accumulates per-sample residuals into a :class:`CheckReport`."""

    def __init__(self, name: str, tol: float, seed: int | None, params: Mapping[str, Any] | None = None):
        self.name = name
        self.tol = tol
        self.seed = seed
        self.params = dict(params or {})
        self.max_residual = 0.0
        self.count = 0
        self.failures: list[dict[str, Any]] = []

    def add(self, residual: float, **where: Any) -> None:
        residual = float(residual)
        self.count += 1
        if not np.isfinite(residual):
            self.max_residual = float("inf")
        else:
            self.max_residual = max(self.max_residual, residual)
        if not (residual <= self.tol) and len(self.failures) < MAX_FAILURES:
            self.failures.append({**where, "residual": residual})

    def report(self, **details: Any) -> CheckReport:
        return CheckReport(
            check_name=self.name,
            max_residual=self.max_residual,
            samples_used=self.count,
            seed=self.seed,
            tolerance=self.tol,
            params=self.params,
            failures=self.failures,
            details=details,
        )


def _normalised(r: CheckReport) -> float:
    if r.tolerance > 0:
        return r.max_residual / r.tolerance
    # exact checks: any nonzero residual is an unbounded failure
    return 0.0 if r.max_residual == 0 else float("inf")


def combine(name: str, reports: list[CheckReport], tol: float | None = None) -> CheckReport:
    """Aggregate several reports; the result passes iff every part passes."""
    failures = []
    for r in reports:
        for f in r.failures:
            failures.append({"check": r.check_name, **f})
    # normalise each residual by its own tolerance so mixed tolerances aggregate honestly
    worst = max((_normalised(r) for r in reports), default=0.0)
    tol = tol if tol is not None else 1.0
    return CheckReport(
        check_name=name,
        max_residual=worst * tol,
        samples_used=sum(r.samples_used for r in reports),
        seed=reports[0].seed if reports else None,
        tolerance=tol,
        params=reports[0].params if reports else {},
        failures=failures[:MAX_FAILURES],
        details={"parts": [r.to_dict() for r in reports]},
    )


@dataclass(frozen=True)
class Sampler:
    """Seeded generator of complex spectral points in a square box.

    Points rejected by ``avoid`` are redrawn; the pole guard therefore never
    turns into a failure.
    """

    seed: int = 0
    box: float = DEFAULT_BOX
    count: int = 100
    max_redraws: int = 10_000

    def rng(self, stream: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.seed, stream])

    def _draw(self, rng: np.random.Generator) -> complex:
        re, im = rng.uniform(-self.box, self.box, size=2)
        return complex(re, im)

    def points(self, n: int | None = None, avoid: Callable[[complex], bool] | None = None, stream: int = 0) -> list[complex]:
        rng = self.rng(stream)
        n = self.count if n is None else n
        out: list[complex] = []
        redraws = 0
        while len(out) < n:
            z = self._draw(rng)
            if avoid is not None and avoid(z):
                redraws += 1
                if redraws > self.max_redraws:
                    raise RuntimeError("sampler could not find admissible points; check the pole guard and box")
                continue
            out.append(z)
        return out

    def tuples(self, n: int, width: int, avoid: Callable[..., bool] | None = None, stream: int = 0) -> list[tuple[complex, ...]]:
        rng = self.rng(stream)
        out: list[tuple[complex, ...]] = []
        redraws = 0
        while len(out) < n:
            tup = tuple(self._draw(rng) for _ in range(width))
            if avoid is not None and avoid(*tup):
                redraws += 1
                if redraws > self.max_redraws:
                    raise RuntimeError("sampler could not find admissible tuples; check the pole guard and box")
                continue
            out.append(tup)
        return out

    def iter_points(self, n: int | None = None, avoid: Callable[[complex], bool] | None = None) -> Iterator[complex]:
        yield from self.points(n, avoid)

    def with_count(self, count: int) -> "Sampler":
        return Sampler(self.seed, self.box, count, self.max_redraws)
