"""Homogeneous Hamiltonian flow of phi_eps on T*M_R and T*T^n.

For abelian groups the bi-invariant flow of a Hamiltonian H(x, xi) = phi(xi)
is a translation in the base, x(t) = x + t dphi(xi), with xi fixed. The
closed form uses the analytic gradient; `flow_rk4` integrates the vector
field with a gradient taken only from finite differences of phi_eps, so the
two paths check each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ZeroCovector
from .smoothing import (QuadratureConfig, fd_gradient, grad_smoothed_support)


@dataclass(frozen=True)
class PhasePoint:
    base: tuple
    covector: tuple
    torus: bool = False

    def __post_init__(self):
        base = np.asarray(self.base, dtype=float).reshape(-1)
        cov = np.asarray(self.covector, dtype=float).reshape(-1)
        if len(base) != len(cov):
            raise ValueError("base and covector dimensions differ")
        if not np.linalg.norm(cov) > 0:
            raise ZeroCovector("covector must be nonzero")
        if self.torus:
            base = base - np.floor(base)
        object.__setattr__(self, "base", tuple(float(b) for b in base))
        object.__setattr__(self, "covector", tuple(float(c) for c in cov))

    @property
    def x(self) -> np.ndarray:
        return np.array(self.base)

    @property
    def xi(self) -> np.ndarray:
        return np.array(self.covector)


@dataclass(frozen=True)
class FlowResult:
    endpoint: PhasePoint
    method: str
    steps: int
    eps: float
    t: float
    covector_drift: float = 0.0
    trajectory: tuple = ()


def _wrap(x: np.ndarray, torus: bool) -> np.ndarray:
    return x - np.floor(x) if torus else x


def flow_closed_form(fan, cd, eps: float, t: float, p: PhasePoint,
                     q: QuadratureConfig = QuadratureConfig(), torus: bool | None = None) -> FlowResult:
    """(x, xi) -> (x + t dphi_eps(xi), xi), reduced mod Z^n on the torus."""
    torus = p.torus if torus is None else torus
    v = grad_smoothed_support(fan, cd, eps, p.xi, q, with_fd=False).dphi_eps
    x = _wrap(p.x + t * v, torus)
    return FlowResult(PhasePoint(tuple(x), p.covector, torus), "closed_form", 0, eps, t)


def flow_rk4(fan, cd, eps: float, t: float, p: PhasePoint, steps: int = 64,
             q: QuadratureConfig = QuadratureConfig(), torus: bool | None = None,
             record: bool = False) -> FlowResult:
    """Classical RK4 on xdot = dphi_eps(xi), xidot = 0, gradients by central differences."""
    if steps < 16:
        raise ValueError("rk4 needs at least 16 steps")
    torus = p.torus if torus is None else torus
    x, xi = p.x, p.xi
    xi0 = xi.copy()
    h = t / steps
    # the field depends on xi only; evaluate it wherever the stages need it
    cache: dict[bytes, np.ndarray] = {}

    def field(xi_):
        key = xi_.tobytes()
        if key not in cache:
            cache[key] = fd_gradient(fan, cd, eps, xi_, q)
        return cache[key]

    traj = [(0.0, *x, *xi)] if record else []
    for k in range(steps):
        k1x, k1p = field(xi), np.zeros_like(xi)
        k2x, k2p = field(xi + 0.5 * h * k1p), np.zeros_like(xi)
        k3x, k3p = field(xi + 0.5 * h * k2p), np.zeros_like(xi)
        k4x, k4p = field(xi + h * k3p), np.zeros_like(xi)
        x = x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
        xi = xi + h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
        if record:
            xr = _wrap(x, torus)
            traj.append(((k + 1) * h, *xr, *xi))
    x = _wrap(x, torus)
    drift = float(np.linalg.norm(xi - xi0))
    return FlowResult(PhasePoint(tuple(x), tuple(xi), torus), "rk4", steps, eps, t, drift, tuple(traj))


def flow_front(fan, cd, eps: float, t: float, samples: Sequence[PhasePoint],
               q: QuadratureConfig = QuadratureConfig(), stderr: list | None = None) -> list[np.ndarray]:
    """Base components of the flowed samples (the front projection).

    If ``stderr`` is a list, the Monte Carlo standard error norm of the
    velocity used for each sample is appended to it.
    """
    out = []
    memo: dict[bytes, tuple] = {}
    for p in samples:
        xi = p.xi
        key = (xi / np.linalg.norm(xi)).tobytes()
        if key not in memo:
            ev = grad_smoothed_support(fan, cd, eps, xi, q, with_fd=False)
            memo[key] = (ev.dphi_eps, ev.sigma_mc)
        v, se = memo[key]
        out.append(_wrap(p.x + t * v, p.torus))
        if stderr is not None:
            stderr.append(abs(t) * se)
    return out


def trajectory_csv_rows(res: FlowResult) -> list[list[float]]:
    """Rows (s, x_1..x_n, xi_1..xi_n) of a recorded rk4 run."""
    return [list(r) for r in res.trajectory]
