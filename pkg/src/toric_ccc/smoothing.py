"""Mollifier smoothing of support functions and its gradient.

For a complete fan and Cartier data {chi_sigma}, the smoothed function is

    phi_eps(xi) = |xi| * f_eps(xi / |xi|),   f_eps = eta_eps * phi,

with eta the normalized radial bump C exp(-1/(1 - |u|^2)) on the unit ball.
Because phi is linear on each cone, every quantity is an expectation over
u ~ eta of a piecewise-linear integrand indexed by the cone containing
xi_hat - eps u:

    a_sigma  = P[xi_hat - eps u in Int sigma]
    df_eps   = sum_sigma a_sigma chi_sigma
    g_eps    = f_eps(xi_hat) - <df_eps | xi_hat>
    dphi_eps = df_eps + g_eps xi_hat

Monte Carlo draws u from eta directly (rejection from the uniform ball), in
deterministic batches keyed by (seed, dimension, batch index). A product
grid on [-1, 1]^n is available for n <= 2 as an independent quadrature.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, linalg, optimize, spatial

from .errors import FanNotComplete, ZeroCovector
from .fan import Cone, Fan

DEFAULT_SCHEDULE = (0.2, 0.1, 0.05, 0.025, 0.0125)
ROUNDING_BITS = 40
_BATCH = 1 << 15


# -- mollifier ----------------------------------------------------------------

def _bump(r2):
    r2 = np.asarray(r2, dtype=float)
    out = np.zeros_like(r2)
    inside = r2 < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    return out


@lru_cache(maxsize=None)
def _normalization(n: int) -> float:
    # integral of the unnormalized bump over the unit ball, in polar form
    if n == 0:
        return 1.0
    sphere = 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)
    radial, _ = integrate.quad(lambda r: r ** (n - 1) * math.exp(-1.0 / (1.0 - r * r)),
                               0.0, 1.0, epsabs=1e-14, epsrel=1e-13, limit=200)
    return 1.0 / (sphere * radial)


@dataclass(frozen=True)
class Mollifier:
    """Radial bump C exp(-1/(1-|u|^2)) supported on the closed unit ball of R^n."""

    dim: int
    normalization: float

    @classmethod
    def bump(cls, n: int) -> "Mollifier":
        return cls(n, _normalization(n))

    def __call__(self, u) -> np.ndarray:
        return density(self, u)


def density(m: Mollifier, u) -> np.ndarray | float:
    """eta(u); accepts one point or an (N, n) array of points."""
    u = np.asarray(u, dtype=float)
    r2 = np.sum(u * u, axis=-1)
    val = m.normalization * _bump(r2)
    return float(val) if np.ndim(val) == 0 else val


# -- quadrature ---------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureConfig:
    method: str = "monte_carlo"  # or "product_grid"
    sample_count: int = 100_000
    seed: int = 20240611
    tolerance: float = 1e-3

    def __post_init__(self):
        if self.method not in ("monte_carlo", "product_grid"):
            raise ValueError(f"unknown quadrature method {self.method!r}")
        if self.sample_count < 1:
            raise ValueError("sample_count must be positive")


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("TORIC_CCC_THREADS", "1")))
    except ValueError:
        return 1


def _mc_batch(n: int, seed: int, b: int, size: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(n, b)))
    out = np.empty((0, n))
    while len(out) < size:
        k = 2 * size
        g = rng.standard_normal((k, n))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = rng.random(k) ** (1.0 / n)
        accept = rng.random(k) < np.exp(1.0 - 1.0 / np.maximum(1.0 - r * r, 1e-300))
        out = np.vstack([out, g[accept] * r[accept, None]])
    return out[:size]


@lru_cache(maxsize=8)
def _mc_samples(n: int, count: int, seed: int) -> np.ndarray:
    nb = -(-count // _BATCH)
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        parts = list(pool.map(lambda b: _mc_batch(n, seed, b, _BATCH), range(nb)))
    u = np.vstack(parts)[:count]
    u.setflags(write=False)
    return u


@lru_cache(maxsize=8)
def _grid_samples(n: int, count: int):
    if n > 2:
        raise ValueError("product_grid quadrature is only provided for n <= 2")
    m = max(2, int(round(count ** (1.0 / n))))
    h = 2.0 / m
    axis = -1.0 + h * (np.arange(m) + 0.5)
    pts = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)
    w = density(Mollifier.bump(n), pts) * h ** n
    keep = w > 0
    pts, w = pts[keep], w[keep]
    pts.setflags(write=False)
    w.setflags(write=False)
    return pts, w


def quadrature_nodes(n: int, q: QuadratureConfig):
    """(points u, weights w) approximating integration against eta on R^n."""
    if q.method == "monte_carlo":
        u = _mc_samples(n, q.sample_count, q.seed)
        return u, None
    return _grid_samples(n, q.sample_count)


# -- cone classification -------------------------------------------------------

class _Classifier:
    """Assigns points to open maximal cones with exact integer tests."""

    def __init__(self, fan: Fan):
        if not fan.is_complete:
            raise FanNotComplete("smoothing requires a complete fan")
        self.cones = list(fan.maximal_cones)
        self.normals = [np.array(fan.facet_normals(c), dtype=np.int64) for c in self.cones]
        biggest = max((int(np.abs(a).sum(axis=1).max()) for a in self.normals if a.size), default=1)
        if biggest * 2.0 ** (ROUNDING_BITS + 2) > 2.0 ** 62:
            raise ValueError("facet normals too large for exact 64-bit classification")
        self._stacked = np.vstack(self.normals)
        self._stacked_f = self._stacked.astype(float)
        self._margin = np.abs(self._stacked).sum(axis=1) * 2.0 ** -(ROUNDING_BITS - 2)
        ends = np.cumsum([len(a) for a in self.normals])
        self._slices = [slice(e - len(a), e) for e, a in zip(ends, self.normals)]

    def __call__(self, y: np.ndarray) -> np.ndarray:
        # round to the 2^-40 grid; integer dot products are then exact
        # float dots decide the sign away from walls; rows within the
        # rounding margin are redone in exact integer arithmetic
        fdots = y @ self._stacked_f.T
        pos = fdots > 0
        near = np.nonzero((np.abs(fdots) <= self._margin).any(axis=1))[0]
        if len(near):
            yi = np.rint(y[near] * 2.0 ** ROUNDING_BITS).astype(np.int64)
            pos[near] = (yi @ self._stacked.T) > 0
        idx = np.full(len(y), -1, dtype=np.int64)
        for k, sl in enumerate(self._slices):
            cols = range(sl.start, sl.stop)
            inside = pos[:, sl.start].copy()
            for j in cols[1:]:
                inside &= pos[:, j]
            idx[inside] = k
        return idx


_classifiers: dict[int, tuple[Fan, _Classifier]] = {}


def _classifier(fan: Fan) -> _Classifier:
    hit = _classifiers.get(id(fan))
    if hit is None or hit[0] is not fan:
        hit = (fan, _Classifier(fan))
        _classifiers[id(fan)] = hit
    return hit[1]


def _chi_matrix(cd, cones: Sequence[Cone]) -> np.ndarray:
    return np.array([[float(x) for x in cd.chi[c]] for c in cones], dtype=float).reshape(len(cones), -1)


# -- core evaluation -----------------------------------------------------------

@dataclass
class SmoothingEval:
    """Everything computed at one (eps, xi)."""

    epsilon: float
    xi: np.ndarray
    f_eps: float
    df_eps: np.ndarray
    g_eps: float
    dphi_eps: np.ndarray
    weights: dict
    stderr_dphi: np.ndarray
    stderr_g: float
    stderr_f: float
    fd_dphi: Optional[np.ndarray] = None
    wall_mass: float = 0.0

    @property
    def sigma_mc(self) -> float:
        """Norm of the componentwise standard errors of dphi_eps."""
        return float(np.linalg.norm(self.stderr_dphi))


def _unit(xi) -> tuple[np.ndarray, float]:
    xi = np.asarray(xi, dtype=float).reshape(-1)
    r = float(np.linalg.norm(xi))
    if r == 0.0 or not np.isfinite(r):
        raise ZeroCovector("covector must be nonzero")
    return xi / r, r


@dataclass
class _Raw:
    weights: np.ndarray   # per cone
    f: float
    df: np.ndarray
    g: float
    dphi: np.ndarray
    se_dphi: np.ndarray
    se_g: float
    se_f: float
    se_w: np.ndarray
    wall: float


def _evaluate(fan: Fan, cd, eps: float, xi_hat: np.ndarray, q: QuadratureConfig) -> _Raw:
    if eps <= 0:
        raise ValueError("eps must be positive")
    cls = _classifier(fan)
    chi = _chi_matrix(cd, cls.cones)
    u, w = quadrature_nodes(fan.dim, q)
    y = xi_hat[None, :] - eps * u
    idx = cls(y)
    k = len(cls.cones)
    n = fan.dim
    # index -1 (a wall, measure zero) picks the appended zero row
    chis = np.take(np.vstack([chi, np.zeros((1, fan.dim))]), idx, axis=0)
    vals = np.einsum("ij,ij->i", chis, y)
    gs = vals - chis @ xi_hat
    # columns: z = chi + g xi_hat (n of them), then g, then <chi|y>
    M = np.empty((len(y), n + 2))
    M[:, :n] = chis + gs[:, None] * xi_hat[None, :]
    M[:, n] = gs
    M[:, n + 1] = vals
    if w is None:
        N = len(y)
        counts = np.bincount(idx + 1, minlength=k + 1)[1:]
        weights = counts / N
        ones = np.full(N, 1.0 / N)
        mean = ones @ M
        df = ones @ chis
        var = np.maximum(np.einsum("ij,ij->j", M, M) / N - mean * mean, 0.0) * (N / (N - 1))
        se = np.sqrt(var / N)
        se_w = np.sqrt(weights * (1 - weights) / (N - 1))
        wall = float(1.0 - counts.sum() / N)
    else:
        weights = np.bincount(idx + 1, weights=w, minlength=k + 1)[1:]
        mean = w @ M
        df = w @ chis
        se = np.zeros(n + 2)
        se_w = np.zeros(k)
        wall = float(w[idx < 0].sum())
    dphi, g, f = mean[:n], float(mean[n]), float(mean[n + 1])
    se_dphi, se_g, se_f = se[:n], float(se[n]), float(se[n + 1])
    return _Raw(weights, f, df, g, dphi, se_dphi, se_g, se_f, se_w, wall)


def region_weights(fan: Fan, cd, eps: float, xi_hat, q: QuadratureConfig = QuadratureConfig()) -> dict:
    """a_sigma = integral of eta over {u : xi_hat - eps u in Int sigma}, per maximal cone."""
    xh, r = _unit(xi_hat)
    if abs(r - 1.0) > 1e-6:
        raise ValueError("xi_hat must be a unit vector")
    raw = _evaluate(fan, cd, eps, xh, q)
    return {c: float(a) for c, a in zip(_classifier(fan).cones, raw.weights)}


def region_weights_with_error(fan: Fan, cd, eps: float, xi_hat, q: QuadratureConfig = QuadratureConfig()):
    xh, _ = _unit(xi_hat)
    raw = _evaluate(fan, cd, eps, xh, q)
    cones = _classifier(fan).cones
    return ({c: float(a) for c, a in zip(cones, raw.weights)},
            {c: float(s) for c, s in zip(cones, raw.se_w)})


def smoothed_support(fan: Fan, cd, eps: float, xi, q: QuadratureConfig = QuadratureConfig()) -> float:
    """phi_eps(xi) = |xi| f_eps(xi_hat)."""
    xh, r = _unit(xi)
    return r * _evaluate(fan, cd, eps, xh, q).f


def fd_gradient(fan: Fan, cd, eps: float, xi, q: QuadratureConfig = QuadratureConfig(),
                rel_step: float = 1e-4) -> np.ndarray:
    """Central finite differences of smoothed_support, step rel_step * |xi|."""
    xi = np.asarray(xi, dtype=float).reshape(-1)
    _, r = _unit(xi)
    h = rel_step * r
    grad = np.empty(len(xi))
    for i in range(len(xi)):
        e = np.zeros(len(xi))
        e[i] = h
        grad[i] = (smoothed_support(fan, cd, eps, xi + e, q)
                   - smoothed_support(fan, cd, eps, xi - e, q)) / (2 * h)
    return grad


def grad_smoothed_support(fan: Fan, cd, eps: float, xi, q: QuadratureConfig = QuadratureConfig(),
                          with_fd: bool = True) -> SmoothingEval:
    """Gradient of phi_eps via dphi = df(xi_hat) + g xi_hat, plus a finite-difference copy."""
    xi = np.asarray(xi, dtype=float).reshape(-1)
    xh, _ = _unit(xi)
    raw = _evaluate(fan, cd, eps, xh, q)
    cones = _classifier(fan).cones
    return SmoothingEval(
        epsilon=float(eps), xi=xi, f_eps=raw.f, df_eps=raw.df, g_eps=raw.g, dphi_eps=raw.dphi,
        weights={c: float(a) for c, a in zip(cones, raw.weights)},
        stderr_dphi=raw.se_dphi, stderr_g=raw.se_g, stderr_f=raw.se_f,
        fd_dphi=fd_gradient(fan, cd, eps, xi, q) if with_fd else None,
        wall_mass=raw.wall)


def R_constant(cd) -> float:
    """R = sum over maximal cones of |chi_sigma|."""
    return float(sum(np.linalg.norm([float(x) for x in cd.chi[s]]) for s in cd.fan.maximal_cones))


# -- limit weights (mollifier canonical chi_tau) --------------------------------

def _solid_angle_fraction(gens: np.ndarray, normals: np.ndarray, d: int) -> float:
    """Fraction of R^d (by solid angle) occupied by the pointed cone(gens)."""
    if d == 0:
        return 1.0
    if d == 1:
        return 0.5
    unit = gens / np.linalg.norm(gens, axis=1, keepdims=True)
    axis = (normals / np.linalg.norm(normals, axis=1, keepdims=True)).sum(axis=0)
    axis /= np.linalg.norm(axis)
    if d == 2:
        perp = np.array([-axis[1], axis[0]])
        ang = np.arctan2(unit @ perp, unit @ axis)
        return float((ang.max() - ang.min()) / (2 * math.pi))
    if d == 3:
        e1 = linalg.null_space(axis[None, :]).T
        plane = (unit @ e1.T) / (unit @ axis)[:, None]
        hull = spatial.ConvexHull(plane)
        ring = unit[hull.vertices]
        total = 0.0
        a = ring[0]
        for b, c in zip(ring[1:-1], ring[2:]):
            num = abs(np.dot(a, np.cross(b, c)))
            den = 1.0 + a @ b + b @ c + c @ a
            total += 2.0 * math.atan2(num, den)
        return total / (4 * math.pi)
    rng = np.random.default_rng(0)
    pts = rng.standard_normal((2_000_000, d))
    return float(np.mean(np.all(pts @ normals.T > 0, axis=1)))


def limit_weights(fan: Fan, tau) -> dict[Cone, Fraction]:
    """lambda_sigma = integral of eta over {u : <m_i|u> < 0 for the facets of sigma through tau}.

    For a radial mollifier this is the solid-angle fraction of the tangent
    cone sigma + span(tau), computed in (span tau)^perp. Values are
    rationalized and normalized to sum exactly to one over Sigma(n, tau).
    """
    tau = fan.cone(tau.rays if isinstance(tau, Cone) else tau)
    around = fan.maximal_containing(tau)
    if not around:
        return {}
    n = fan.dim
    gens_tau = np.array(fan.generators(tau), dtype=float).reshape(-1, n)
    Q = linalg.null_space(gens_tau) if len(gens_tau) else np.eye(n)
    d = Q.shape[1]
    raw = {}
    for s in around:
        gens = np.array(fan.generators(s), dtype=float) @ Q
        gens = gens[np.linalg.norm(gens, axis=1) > 1e-12]
        normals = np.array([nrm for nrm, face in fan.facet_normals_with_faces(s)
                            if set(tau.rays) <= set(face.rays)], dtype=float).reshape(-1, n) @ Q
        raw[s] = _solid_angle_fraction(gens, normals, d) if d else 1.0
    fr = {s: Fraction(v).limit_denominator(10 ** 9) for s, v in raw.items()}
    total = sum(fr.values())
    return {s: v / total for s, v in fr.items()}


# -- geometry helpers ------------------------------------------------------------

def hull_distance(points: np.ndarray, p: np.ndarray) -> float:
    """Euclidean distance from p to Conv(points), by exact projection onto faces.

    Enumerates affinely independent vertex subsets of size <= n+1 and keeps
    the projections with nonnegative barycentric coordinates.
    """
    import itertools

    P = np.asarray(points, dtype=float)
    p = np.asarray(p, dtype=float)
    k, n = P.shape
    best = min(float(np.linalg.norm(p - v)) for v in P)
    for size in range(2, min(k, n + 1) + 1):
        for sub in itertools.combinations(range(k), size):
            V = P[list(sub)]
            B = (V[1:] - V[0]).T
            if np.linalg.matrix_rank(B) < size - 1:
                continue
            coef, *_ = np.linalg.lstsq(B, p - V[0], rcond=None)
            bary = np.concatenate([[1 - coef.sum()], coef])
            if np.all(bary >= -1e-12):
                best = min(best, float(np.linalg.norm(p - V[0] - B @ coef)))
    return best


def cone_distance(gens: np.ndarray, p: np.ndarray) -> float:
    """Distance from p to the closed cone generated by the rows of gens."""
    gens = np.asarray(gens, dtype=float)
    p = np.asarray(p, dtype=float)
    if gens.size == 0:
        return float(np.linalg.norm(p))
    _, res = optimize.nnls(gens.T, p)
    return float(res)


def _span_projection(gens: np.ndarray, v: np.ndarray) -> np.ndarray:
    if gens.size == 0:
        return np.zeros_like(v)
    B = linalg.orth(gens.T)
    return B @ (B.T @ v)


def _relint_point(fan: Fan, c: Cone) -> np.ndarray:
    gens = np.array(fan.generators(c), dtype=float)
    v = (gens / np.linalg.norm(gens, axis=1, keepdims=True)).sum(axis=0)
    return v / np.linalg.norm(v)


def stabilization_threshold(fan: Fan, tau: Cone, xi_hat: np.ndarray) -> float:
    """Largest eps for which B_eps(xi_hat) only meets the maximal cones around tau."""
    best = math.inf
    for s in fan.maximal_containing(tau):
        for nrm, face in fan.facet_normals_with_faces(s):
            if set(tau.rays) <= set(face.rays):
                continue
            m = np.array(nrm, dtype=float)
            best = min(best, float(m @ xi_hat / np.linalg.norm(m)))
    return best


def _fit_rate(eps: Sequence[float], dist: Sequence[float]) -> Optional[float]:
    e = np.asarray(eps, dtype=float)
    d = np.asarray(dist, dtype=float)
    if np.any(d <= 0):
        return None
    slope, _ = np.polyfit(np.log(e), np.log(d), 1)
    return float(slope)


# -- verification reports ----------------------------------------------------------

def verify_gradient_limit(fan: Fan, cd, sigma, eps_schedule: Sequence[float] = DEFAULT_SCHEDULE,
                          q: QuadratureConfig = QuadratureConfig(), xi=None) -> dict:
    """Tabulate |dphi_eps(xi) - chi_sigma| for xi in Relint(sigma) along a schedule."""
    sigma = fan.cone(sigma.rays if isinstance(sigma, Cone) else sigma)
    if sigma.is_origin:
        raise ValueError("the origin cone has no nonzero relative-interior point")
    xh = _relint_point(fan, sigma) if xi is None else _unit(xi)[0]
    chi = np.array(cd.chi_float(sigma))
    R = R_constant(cd)
    thr = stabilization_threshold(fan, sigma, xh)
    maximal = sigma.dim == fan.dim
    rows = []
    for eps in eps_schedule:
        ev = grad_smoothed_support(fan, cd, eps, xh, q, with_fd=False)
        err = float(np.linalg.norm(ev.dphi_eps - chi))
        err_df = float(np.linalg.norm(ev.df_eps - chi))
        se = ev.sigma_mc
        se_df = float(np.linalg.norm([s for s in ev.stderr_dphi]))
        below = eps < thr
        bound = q.tolerance + 3 * se + (0.0 if maximal else eps * R)
        rows.append({"eps": eps, "quantity": err, "df_error": err_df, "bound": bound,
                     "stderr": se, "below_threshold": below,
                     "pass": (err <= bound and err_df <= q.tolerance + 3 * se_df) if below else None,
                     "provenance": {"quantity": "monte_carlo", "df_error": "monte_carlo",
                                    "bound": "fitted" if not maximal else "exact"}})
    checked = [r["pass"] for r in rows if r["pass"] is not None]
    return {"experiment": "gradient_limit",
            "params": {"cone": list(sigma.rays), "xi_hat": xh.tolist(), "threshold": thr,
                       "chi": [str(x) for x in cd.chi[sigma]], "R": R,
                       "schedule": list(eps_schedule), "quadrature": _qdict(q)},
            "rows": rows, "pass": bool(checked) and all(checked)}


def sample_cone_directions(fan: Fan, sigma: Cone, count: int, seed: int) -> list[np.ndarray]:
    """Unit vectors in sigma minus 0, spread over its nonzero faces."""
    rng = np.random.default_rng(seed)
    faces = [f for f in fan.faces(sigma) if not f.is_origin]
    out = []
    for _ in range(count):
        f = faces[rng.integers(len(faces))]
        gens = np.array(fan.generators(f), dtype=float)
        v = rng.random(len(gens)) @ gens
        if np.linalg.norm(v) == 0:
            v = gens.sum(axis=0)
        out.append(v / np.linalg.norm(v))
    return out


def limsup_distance(fan: Fan, cd, sigma: Cone, dphi: np.ndarray, xi_hat: np.ndarray) -> float:
    """Distance from (dphi, -xi_hat) to (chi_sigma, 0) + union over faces tau of tau^perp x (-tau)."""
    chi = np.array(cd.chi_float(sigma))
    best = math.inf
    for tau in fan.faces(sigma):
        if tau.is_origin:
            continue
        gens = np.array(fan.generators(tau), dtype=float)
        a = np.linalg.norm(_span_projection(gens, dphi - chi))
        b = cone_distance(gens, xi_hat)
        best = min(best, math.hypot(a, b))
    return best


def verify_limsup_containment(fan: Fan, cd, sigma, eps_schedule: Sequence[float] = DEFAULT_SCHEDULE,
                              sample_count: int = 100, q: QuadratureConfig = QuadratureConfig(),
                              seed: int = 0) -> dict:
    """Max distance of (dphi_eps(xi), -xi_hat) to the limiting set, per eps."""
    sigma = fan.cone(sigma.rays if isinstance(sigma, Cone) else sigma)
    dirs = sample_cone_directions(fan, sigma, sample_count, seed) if not sigma.is_origin else []
    rows = []
    for eps in eps_schedule:
        dmax, semax = 0.0, 0.0
        for xh in dirs:
            raw = _evaluate(fan, cd, eps, xh, q)
            dmax = max(dmax, limsup_distance(fan, cd, sigma, raw.dphi, xh))
            semax = max(semax, float(np.linalg.norm(raw.se_dphi)))
        rows.append({"eps": eps, "quantity": dmax, "stderr": semax,
                     "provenance": {"quantity": "monte_carlo"}})
    ok = True
    for prev, cur in zip(rows, rows[1:]):
        cur["bound"] = prev["quantity"] + 3 * max(prev["stderr"], cur["stderr"])
        cur["pass"] = cur["quantity"] <= cur["bound"]
        ok &= cur["pass"]
    if rows:
        rows[0]["bound"] = None
        rows[0]["pass"] = True
    rate = _fit_rate([r["eps"] for r in rows], [r["quantity"] for r in rows])
    ratios = [cur["quantity"] / prev["quantity"] if prev["quantity"] > 0 else None
              for prev, cur in zip(rows, rows[1:])]
    return {"experiment": "limsup_containment",
            "params": {"cone": list(sigma.rays), "samples": sample_count, "seed": seed,
                       "schedule": list(eps_schedule), "quadrature": _qdict(q)},
            "rows": rows, "rate": rate, "ratios": ratios,
            "provenance": {"rate": "fitted"}, "pass": bool(ok)}


def verify_uniform_bound(fan: Fan, cd, eps: float, sample_count: int = 1000,
                         q: QuadratureConfig = QuadratureConfig(), seed: int = 0) -> dict:
    """Check dist(dphi_eps(xi), Conv{chi_sigma}) <= eps R + 3 sigma_MC at random unit xi."""
    rng = np.random.default_rng(seed)
    hull = np.array([cd.chi_float(s) for s in fan.maximal_cones])
    R = R_constant(cd)
    worst_slack = -math.inf
    worst = None
    failures = 0
    gmax = 0.0
    for _ in range(sample_count):
        v = rng.standard_normal(fan.dim)
        xh = v / np.linalg.norm(v)
        raw = _evaluate(fan, cd, eps, xh, q)
        dist = hull_distance(hull, raw.dphi)
        se = float(np.linalg.norm(raw.se_dphi))
        slack = dist - eps * R
        gmax = max(gmax, abs(raw.g))
        if slack > worst_slack:
            worst_slack, worst = slack, {"xi_hat": xh.tolist(), "distance": dist, "stderr": se}
        if dist > eps * R + 3 * se + 1e-12:
            failures += 1
    row = {"eps": eps, "quantity": worst["distance"] if worst else 0.0, "bound": eps * R,
           "max_slack": worst_slack, "max_abs_g": gmax, "failures": failures,
           "pass": failures == 0,
           "provenance": {"quantity": "monte_carlo", "bound": "exact", "max_abs_g": "monte_carlo"}}
    return {"experiment": "uniform_bound",
            "params": {"eps": eps, "R": R, "samples": sample_count, "seed": seed,
                       "quadrature": _qdict(q)},
            "rows": [row], "worst": worst, "pass": failures == 0}


def _qdict(q: QuadratureConfig) -> dict:
    return {"method": q.method, "sample_count": q.sample_count, "seed": q.seed,
            "tolerance": q.tolerance}
