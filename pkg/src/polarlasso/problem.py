"""Problem instances and per-direction geometric statistics.

The posterior under study is proportional to exp(-||Ax - y||^2/2 - ||x||_1)
on R^p with p >= n.  Every direction theta on the unit sphere carries a small
set of cached statistics (l1 norm, image norm, cosine against y, and the
offset beta) that determine the radial law along the ray r -> r theta.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

# below this image norm a direction is treated as belonging to the null space
NULL_TOL = 1e-12


@dataclass(frozen=True)
class ProblemInstance:
    """Design matrix, observation, and the cached operator norm of A."""

    A: np.ndarray
    y: np.ndarray
    op_norm: float

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return self.A.shape[1]

    @property
    def y_norm(self) -> float:
        return float(np.linalg.norm(self.y))


@dataclass(frozen=True)
class DirectionStats:
    """Unit direction with the cached quantities entering the radial law.

    ``beta`` is None exactly when A theta = 0 (the offset is +infinity there);
    keeping an explicit sentinel makes the case dispatch total and keeps float
    infinities out of downstream arithmetic.
    """

    theta: np.ndarray
    A_theta: np.ndarray
    norm_A_theta: float
    l1_theta: float
    s: float
    beta: float | None


def operator_norm(A: np.ndarray, tol: float = 1e-10, max_iter: int = 20000) -> float:
    """Spectral norm of A by power iteration on A^T A."""
    A = np.asarray(A, dtype=float)
    p = A.shape[1]
    if not np.any(A):
        return 0.0
    rng = np.random.default_rng(0x5EED)
    v = rng.standard_normal(p)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = A.T @ (A @ v)
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return 0.0
        v_new = w / norm_w
        lam_new = float(v_new @ (A.T @ (A @ v_new)))
        if abs(lam_new - lam) <= tol * max(lam_new, 1.0):
            lam = lam_new
            break
        v = v_new
        lam = lam_new
    return math.sqrt(lam)


def make_problem(A: np.ndarray, y: np.ndarray | None = None) -> ProblemInstance:
    """Wrap a design matrix and observation into an instance with cached norm."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValueError("A must be a 2-d matrix")
    n, p = A.shape
    if p < n or n < 1:
        raise ValueError("need p >= n >= 1")
    if y is None:
        y = np.zeros(n)
    y = np.asarray(y, dtype=float)
    if y.shape != (n,):
        raise ValueError(f"y must have length {n}")
    return ProblemInstance(A=A, y=y, op_norm=operator_norm(A))


def gen_bernoulli_matrix(n: int, p: int, seed: int, y: np.ndarray | None = None) -> ProblemInstance:
    """Instance whose entries are i.i.d. +-1/sqrt(n), each sign with probability 1/2."""
    if p < n or n < 1:
        raise ValueError("need p >= n >= 1")
    rng = np.random.default_rng(seed)
    A = (2.0 * rng.integers(0, 2, size=(n, p)) - 1.0) / math.sqrt(n)
    return make_problem(A, y)


def direction_stats(prob: ProblemInstance, theta: np.ndarray) -> DirectionStats:
    """Cached statistics of a (not necessarily normalized) direction."""
    theta = np.asarray(theta, dtype=float)
    norm = np.linalg.norm(theta)
    if norm == 0.0:
        raise ValueError("direction must be nonzero")
    theta = theta / norm
    A_theta = prob.A @ theta
    norm_A_theta = float(np.linalg.norm(A_theta))
    l1_theta = float(np.abs(theta).sum())
    y_norm = prob.y_norm
    if norm_A_theta <= NULL_TOL:
        return DirectionStats(theta, A_theta, norm_A_theta, l1_theta, s=0.0, beta=None)
    if y_norm == 0.0:
        s = 0.0
    else:
        s = float(A_theta @ prob.y) / (norm_A_theta * y_norm)
        s = min(1.0, max(-1.0, s))
    beta = l1_theta / norm_A_theta - y_norm * s
    return DirectionStats(theta, A_theta, norm_A_theta, l1_theta, s=s, beta=beta)


def ray_energy(stats: DirectionStats, r: float, y_norm: float) -> float:
    """Negative log density along the ray: (r^2 ||A theta||^2 + 2 r ||A theta|| beta + ||y||^2)/2.

    Equals ||A(r theta) - y||^2/2 + r ||theta||_1 identically.
    """
    if stats.beta is None:
        raise ValueError("energy quadratic undefined for null directions (beta infinite)")
    na = stats.norm_A_theta
    return 0.5 * (r * r * na * na + 2.0 * r * na * stats.beta + y_norm * y_norm)


def radial_potential(stats: DirectionStats, r: float, p: int, y_norm: float) -> float:
    """Radial potential: ray energy minus the (p-1) log r volume term; r > 0."""
    if r <= 0.0:
        raise ValueError("r must be positive")
    if stats.beta is None:
        # null direction: the misfit is constant along the ray
        return 0.5 * y_norm * y_norm + r * stats.l1_theta - (p - 1) * math.log(r)
    return ray_energy(stats, r, y_norm) - (p - 1) * math.log(r)


def beta_lower_bound(prob: ProblemInstance) -> float:
    """Lower bound 1/||A|| - ||y|| holding for the offset of every direction."""
    if prob.op_norm == 0.0:
        return math.inf
    return 1.0 / prob.op_norm - prob.y_norm


def zero_lasso_sufficient(prob: ProblemInstance) -> bool:
    """True when ||y|| <= 1/||A||, which forces the l1-penalized mode to be 0."""
    return prob.y_norm * prob.op_norm <= 1.0


def sample_sphere(rng: np.random.Generator, p: int) -> np.ndarray:
    """Uniform draw from the unit sphere (normalized standard Gaussian)."""
    while True:
        v = rng.standard_normal(p)
        norm = np.linalg.norm(v)
        if norm > 0.0:
            return v / norm


def sample_sphere_batch(rng: np.random.Generator, count: int, p: int) -> np.ndarray:
    """Uniform sphere draws, one per row."""
    v = rng.standard_normal((count, p))
    norms = np.linalg.norm(v, axis=1)
    bad = norms == 0.0
    while np.any(bad):
        v[bad] = rng.standard_normal((int(bad.sum()), p))
        norms[bad] = np.linalg.norm(v[bad], axis=1)
        bad = norms == 0.0
    return v / norms[:, None]


def sample_laplace(rng: np.random.Generator, shape) -> np.ndarray:
    """Unit Laplace draws by per-coordinate inverse CDF (sign times log of uniform)."""
    u = rng.uniform(-0.5, 0.5, size=shape)
    return -np.sign(u) * np.log1p(-2.0 * np.abs(u))


def save_problem(prob: ProblemInstance, path: str, seed: int | None = None) -> None:
    """Write the instance as JSON: {n, p, A (row-major), y, seed}."""
    payload = {
        "n": prob.n,
        "p": prob.p,
        "A": [float(v) for v in prob.A.ravel(order="C")],
        "y": [float(v) for v in prob.y],
        "seed": seed,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_problem(path: str) -> ProblemInstance:
    """Read an instance from the JSON schema written by save_problem."""
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    try:
        n = int(payload["n"])
        p = int(payload["p"])
        A = np.asarray(payload["A"], dtype=float).reshape(n, p)
        y = np.asarray(payload["y"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed problem file {path}: {exc}") from exc
    return make_problem(A, y)
