"""Fixed-step RK4 integration of systems ``x' = g(x) + p*B*x``."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from . import _kernels


class DivergenceError(RuntimeError):
    """Raised when a run leaves the system's divergence radius or goes non-finite.

    ``step`` is the index of the step that produced the bad state,
    ``last_state`` the last accepted state and ``trajectory`` (when available)
    the valid prefix of the run.
    """

    def __init__(self, message, step, last_state, trajectory=None):
        super().__init__(message)
        self.step = step
        self.last_state = np.asarray(last_state, dtype=float)
        self.trajectory = trajectory


@dataclass(frozen=True)
class PolyTerm:
    """``coef * prod_j x_j**exponents[j]`` contributing to ``component``."""

    component: int
    coef: float
    exponents: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class SystemDef:
    name: str
    dim: int
    terms: tuple[PolyTerm, ...]
    B: np.ndarray
    default_p: float
    p_range: tuple[float, float]
    divergence_radius: float
    default_x0: tuple[float, ...]
    description: str = ""

    def __post_init__(self):
        B = np.array(self.B, dtype=float)
        if B.shape != (self.dim, self.dim):
            raise ValueError(f"B must be {self.dim}x{self.dim}, got {B.shape}")
        B.setflags(write=False)
        object.__setattr__(self, "B", B)
        if len(self.default_x0) != self.dim:
            raise ValueError("default_x0 has wrong dimension")
        comp = np.array([t.component for t in self.terms], dtype=np.int64)
        coef = np.array([t.coef for t in self.terms], dtype=float)
        exps = np.zeros((len(self.terms), self.dim), dtype=np.int64)
        for k, t in enumerate(self.terms):
            if not 0 <= t.component < self.dim or len(t.exponents) != self.dim:
                raise ValueError(f"term {k} does not fit a {self.dim}-dimensional system")
            if any(e < 0 for e in t.exponents):
                raise ValueError(f"term {k} has a negative exponent")
            exps[k] = t.exponents
        object.__setattr__(self, "_comp", comp)
        object.__setattr__(self, "_coef", coef)
        object.__setattr__(self, "_exps", exps)

    @property
    def kernel_args(self):
        return self._comp, self._coef, self._exps, self.B

    def g(self, x) -> np.ndarray:
        """Nonlinear part of the vector field."""
        x = _as_state(self, x)
        out = np.empty(self.dim)
        _kernels.poly_eval(x, self._comp, self._coef, self._exps, out)
        return out

    def __repr__(self):
        return f"SystemDef({self.name!r}, dim={self.dim})"


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States at nodes ``n*h`` together with the parameter applied at each node.

    ``params[n]`` is the value used on the step from node ``n`` to ``n+1``;
    the final entry is the value the schedule would apply next.
    """

    system: SystemDef
    h: float
    x0: np.ndarray
    states: np.ndarray
    params: np.ndarray
    scheme: Optional[object] = None
    seed: Optional[int] = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.states.shape[0]

    @property
    def steps(self) -> int:
        return self.states.shape[0] - 1

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.states.shape[0]) * self.h

    def nodes(self) -> Iterator[tuple[int, np.ndarray, float]]:
        for n in range(len(self)):
            yield n, self.states[n], float(self.params[n])


def _as_state(system: SystemDef, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (system.dim,):
        raise ValueError(f"{system.name}: expected state of dimension {system.dim}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"non-finite state component in {x.tolist()}")
    return x


def _check_p(system: SystemDef, p: float):
    lo, hi = system.p_range
    if not lo <= p <= hi:
        warnings.warn(f"{system.name}: p={p!r} outside admissible range [{lo}, {hi}]", stacklevel=3)


def rhs(system: SystemDef, p: float, x) -> np.ndarray:
    """Evaluate ``g(x) + p*(B @ x)``."""
    x = _as_state(system, x)
    _check_p(system, p)
    gx = np.empty(system.dim)
    out = np.empty(system.dim)
    comp, coef, exps, B = system.kernel_args
    _kernels.rhs_into(x, float(p), comp, coef, exps, B, gx, out)
    return out


def rk4_step(system: SystemDef, p: float, x, h: float) -> np.ndarray:
    """One classical RK4 step with ``p`` frozen across all four stages."""
    if not h > 0:
        raise ValueError("h must be positive")
    x = _as_state(system, x)
    out = np.empty((2, system.dim))
    out[0] = x
    status, _ = _kernels.rk4_run(*system.kernel_args, np.array([float(p)]), float(h), np.inf, out)
    if status != _kernels.OK:
        raise DivergenceError(f"{system.name}: non-finite RK4 stage at step 0", 0, x)
    return out[1]


def run_schedule(system: SystemDef, params: np.ndarray, x0, h: float, *,
                 scheme=None, seed=None, meta=None) -> Trajectory:
    """Integrate ``len(params) - 1`` steps, applying ``params[n]`` on step ``n``."""
    if not h > 0:
        raise ValueError("h must be positive")
    params = np.ascontiguousarray(params, dtype=float)
    steps = params.shape[0] - 1
    if steps < 1:
        raise ValueError("steps must be >= 1")
    x0 = _as_state(system, x0)
    out = np.empty((steps + 1, system.dim))
    out[0] = x0
    status, done = _kernels.rk4_run(*system.kernel_args, params[:-1], float(h),
                                    float(system.divergence_radius), out)
    if status != _kernels.OK:
        partial = Trajectory(system, float(h), x0.copy(), out[:done + 1].copy(),
                             params[:done + 1].copy(), scheme=scheme, seed=seed,
                             meta=dict(meta or {}, status="divergent"))
        what = "non-finite state" if status == _kernels.NONFINITE else \
            f"|x| > {system.divergence_radius:g}"
        raise DivergenceError(
            f"{system.name}: {what} at step {done} (t={(done + 1) * h:g}); "
            f"last finite state {out[done].tolist()}",
            done, out[done], partial)
    return Trajectory(system, float(h), x0.copy(), out, params, scheme=scheme, seed=seed,
                      meta=dict(meta or {}))


def integrate(system: SystemDef, p: float, x0, h: float, steps: int) -> Trajectory:
    """Constant-parameter run of ``steps`` RK4 steps."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    _check_p(system, p)
    return run_schedule(system, np.full(steps + 1, float(p)), x0, h, meta={"p": float(p)})

