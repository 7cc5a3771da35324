"""Parameter switching: schemes, schedules, the switched integrator and the
attractor algebra built on top of the averaged parameter."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .ode import SystemDef, Trajectory, run_schedule

DEFAULT_H = 0.005


class FramingError(ValueError):
    """The target parameter is not strictly inside the span of the values."""


@dataclass(frozen=True)
class SwitchingScheme:
    """``[m1*p1, ..., mN*pN] @ h``: apply ``p1`` for ``m1`` steps, then ``p2``
    for ``m2`` steps and so on, repeating with period ``sum(m) * h``.

    Entry order is kept as given; it fixes the schedule.
    """

    entries: tuple[tuple[int, float], ...]
    h: float = DEFAULT_H

    def __post_init__(self):
        entries = tuple((m, float(p)) for m, p in self.entries)
        if len(entries) < 2:
            raise ValueError(f"a scheme needs N > 1 entries, got {len(entries)}")
        for m, p in entries:
            if isinstance(m, bool) or not isinstance(m, (int, np.integer)) or m < 1:
                raise ValueError(f"weight {m!r} must be a positive integer")
            if not math.isfinite(p):
                raise ValueError(f"parameter value {p!r} is not finite")
        if not (math.isfinite(self.h) and self.h > 0):
            raise ValueError(f"step size h={self.h!r} must be positive")
        object.__setattr__(self, "entries", tuple((int(m), p) for m, p in entries))
        object.__setattr__(self, "h", float(self.h))

    @classmethod
    def of(cls, weights: Sequence[int], values: Sequence[float], h: float = DEFAULT_H):
        if len(weights) != len(values):
            raise ValueError("weights and values differ in length")
        return cls(tuple(zip(weights, values)), h)

    @property
    def weights(self) -> tuple[int, ...]:
        return tuple(m for m, _ in self.entries)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(p for _, p in self.entries)

    @property
    def period_steps(self) -> int:
        return sum(self.weights)

    @property
    def period_time(self) -> float:
        return self.period_steps * self.h

    def with_h(self, h: float) -> "SwitchingScheme":
        return SwitchingScheme(self.entries, h)

    def to_json(self) -> dict:
        return {"entries": [{"m": m, "p": p} for m, p in self.entries], "h": self.h}

    @classmethod
    def from_json(cls, doc) -> "SwitchingScheme":
        if isinstance(doc, str):
            from .dsl import parse_scheme
            return parse_scheme(doc)
        try:
            entries = tuple((e["m"], e["p"]) for e in doc["entries"])
            return cls(entries, doc["h"])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed scheme document: {exc}") from None

    def __str__(self):
        from .dsl import print_scheme
        return print_scheme(self)


@dataclass(frozen=True)
class DecompositionWeights:
    alphas: tuple[float, ...]

    def __post_init__(self):
        if not self.alphas:
            raise ValueError("empty weights")
        if any(not 0 < a <= 1 for a in self.alphas):
            raise ValueError(f"weights must lie in (0, 1]: {self.alphas}")
        if abs(math.fsum(self.alphas) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1: {self.alphas}")


def _exact_average(weights, values) -> Fraction:
    total = sum(weights)
    return sum(Fraction(m) * Fraction(p) for m, p in zip(weights, values)) / total


def averaged_parameter(scheme: SwitchingScheme) -> float:
    """``sum(m_i p_i) / sum(m_i)``, computed exactly and rounded once."""
    return float(_exact_average(scheme.weights, scheme.values))


def convex_weights(scheme: SwitchingScheme) -> DecompositionWeights:
    total = scheme.period_steps
    return DecompositionWeights(tuple(float(Fraction(m, total)) for m in scheme.weights))


def framing_check(scheme: SwitchingScheme, p0: float) -> bool:
    vals = scheme.values
    return min(vals) < p0 < max(vals)


def parameter_sequence(scheme: SwitchingScheme, steps: int) -> np.ndarray:
    """Parameter applied on each of the first ``steps`` integration steps."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    period = np.repeat(np.array(scheme.values), scheme.weights)
    reps = -(-steps // period.size)
    return np.tile(period, reps)[:steps]


def random_parameter_sequence(scheme: SwitchingScheme, steps: int, seed: int) -> np.ndarray:
    """Like :func:`parameter_sequence` but each period is an independent
    seeded permutation of the scheme's multiset of values."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    rng = np.random.default_rng(seed)
    period = np.repeat(np.array(scheme.values), scheme.weights)
    reps = -(-steps // period.size)
    return np.concatenate([rng.permutation(period) for _ in range(reps)])[:steps]


def ps_integrate(system: SystemDef, scheme: SwitchingScheme, x0, steps: int) -> Trajectory:
    """Switched solution: RK4 with ``p`` following the scheme step by step."""
    params = parameter_sequence(scheme, steps + 1)
    return run_schedule(system, params, x0, scheme.h, scheme=scheme,
                        meta={"p0": averaged_parameter(scheme)})


def ps_integrate_random(system: SystemDef, scheme: SwitchingScheme, x0, steps: int,
                        rng_seed: int) -> Trajectory:
    params = random_parameter_sequence(scheme, steps + 1, rng_seed)
    return run_schedule(system, params, x0, scheme.h, scheme=scheme, seed=rng_seed,
                        meta={"p0": averaged_parameter(scheme)})


def _compositions(n_parts: int, budget: int):
    """All tuples of ``n_parts`` positive ints with sum <= budget."""
    if n_parts == 1:
        for m in range(1, budget + 1):
            yield (m,)
        return
    for m in range(1, budget - n_parts + 2):
        for rest in _compositions(n_parts - 1, budget - m):
            yield (m,) + rest


def decompose(target_p0: float, values: Sequence[float], max_total_weight: int,
              h: float = DEFAULT_H) -> list[SwitchingScheme]:
    """Every weight vector within the budget whose averaged parameter hits
    ``target_p0``, ordered by total weight then lexicographically."""
    values = [float(v) for v in values]
    if len(values) < 2:
        raise ValueError("need at least two parameter values")
    if not min(values) < target_p0 < max(values):
        raise FramingError(
            f"target {target_p0!r} is not framed by the values: need "
            f"min={min(values)!r} < p0 < max={max(values)!r}")
    if max_total_weight < len(values):
        return []
    tol = 1e-12 * max(abs(v) for v in values)
    target = Fraction(target_p0)
    found = []
    for ms in _compositions(len(values), max_total_weight):
        if abs(float(_exact_average(ms, values) - target)) <= tol:
            found.append(ms)
    found.sort(key=lambda ms: (sum(ms), ms))
    return [SwitchingScheme.of(ms, values, h) for ms in found]


# Attractor algebra.  Under the order-preserving bijection H between
# parameters and attractors, alpha (x) A := H(alpha * H^-1(A)) and
# A1 (+) A2 := H(H^-1(A1) + H^-1(A2)).  Attractors are handled through their
# parameter image H^-1(A); the combined attractor itself is recovered by
# integrating at the resulting parameter.

def parameter_image(cloud) -> float:
    """``H^-1(A)``: the constant parameter that produced the cloud."""
    prov = getattr(cloud, "provenance", None)
    p = getattr(prov, "p", None)
    if p is None or getattr(prov, "scheme", None) is not None:
        raise ValueError("attractor operands need constant-parameter provenance; "
                         "switched clouds are not valid operands")
    return float(p)


def otimes(alpha: float, image: float) -> float:
    return alpha * image


def oplus(*images: float) -> float:
    return math.fsum(images)


def attractor_combination(clouds, weights: DecompositionWeights) -> float:
    """Parameter image of ``alpha_1 (x) A_1 (+) ... (+) alpha_N (x) A_N``."""
    if len(clouds) != len(weights.alphas):
        raise ValueError(f"{len(clouds)} clouds but {len(weights.alphas)} weights")
    return oplus(*(otimes(a, parameter_image(c)) for a, c in zip(weights.alphas, clouds)))
