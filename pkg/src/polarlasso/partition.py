"""Whole-space partition-function estimators, bounds, and concentration."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .problem import ProblemInstance, sample_laplace, sample_sphere_batch
from .radial import sweep_summaries
from .special import upper_inc_gamma_int

METHOD_POLAR = "polar_mc"
METHOD_NAIVE = "naive_mc"

# deterministic chunking of the seed stream: estimates are identical no matter
# how many workers consume the chunks
CHUNK = 8192


@dataclass(frozen=True)
class PartitionEstimate:
    z: float
    std_err: float
    n_samples: int
    method: str
    z_min: float
    z_max: float


def sphere_surface(p: int) -> float:
    """Surface area of the unit sphere in R^p: 2 pi^(p/2) / Gamma(p/2)."""
    if p < 1:
        raise ValueError("p must be positive")
    return 2.0 * math.pi ** (p / 2.0) / math.gamma(p / 2.0)


def _chunk_generators(seed_or_rng, count: int) -> list[np.random.Generator]:
    if isinstance(seed_or_rng, np.random.Generator):
        # split the generator's state deterministically
        children = seed_or_rng.bit_generator.seed_seq.spawn(count)  # type: ignore[union-attr]
        return [np.random.default_rng(c) for c in children]
    return [np.random.default_rng(c) for c in np.random.SeedSequence(seed_or_rng).spawn(count)]


def estimate_z_polar(prob: ProblemInstance, n_samples: int, rng) -> PartitionEstimate:
    """Polar Monte Carlo: |S| times the mean closed-form mass over uniform directions.

    The same sweep supplies the sample inf/sup of peak * mode feeding the
    log-concavity bounds z_min, z_max; the estimate always lies between them.
    """
    if n_samples < 1:
        raise ValueError("need n_samples >= 1")
    p = prob.p
    y_norm = prob.y_norm
    surface = sphere_surface(p)
    n_chunks = (n_samples + CHUNK - 1) // CHUNK
    gens = _chunk_generators(rng, n_chunks)
    total = 0.0
    total_sq = 0.0
    mr_min = math.inf
    mr_max = -math.inf
    left = n_samples
    for gen in gens:
        take = min(CHUNK, left)
        left -= take
        thetas = sample_sphere_batch(gen, take, p)
        mass, peak_mode = sweep_summaries(prob, thetas)
        total += float(mass.sum())
        total_sq += float((mass * mass).sum())
        mr_min = min(mr_min, float(peak_mode.min()))
        mr_max = max(mr_max, float(peak_mode.max()))
    mean = total / n_samples
    var = max(0.0, total_sq / n_samples - mean * mean)
    if n_samples > 1:
        var *= n_samples / (n_samples - 1)
    z = surface * mean
    std_err = surface * math.sqrt(var / n_samples)
    z_min = surface * mr_min / p
    if p == 1:
        z_max = math.inf  # upper log-concavity constant degenerates at p = 1
    else:
        z_max = surface * math.factorial(p - 1) * math.exp(p - 1) / (p - 1) ** p * mr_max
    return PartitionEstimate(z, std_err, n_samples, METHOD_POLAR, z_min, z_max)


def estimate_z_naive(prob: ProblemInstance, n_samples: int, rng) -> PartitionEstimate:
    """Importance sampling with the l1 prior: 2^p E[exp(-||Ax - y||^2/2)], x ~ Laplace.

    Unbiased but heavy-variance at moderate dimension; the bound fields are
    copied as infinite (no per-direction geometry is available on this route).
    """
    if n_samples < 1:
        raise ValueError("need n_samples >= 1")
    p = prob.p
    n_chunks = (n_samples + CHUNK - 1) // CHUNK
    gens = _chunk_generators(rng, n_chunks)
    total = 0.0
    total_sq = 0.0
    left = n_samples
    for gen in gens:
        take = min(CHUNK, left)
        left -= take
        x = sample_laplace(gen, (take, p))
        resid = x @ prob.A.T - prob.y
        w = np.exp(-0.5 * np.einsum("ij,ij->i", resid, resid))
        total += float(w.sum())
        total_sq += float((w * w).sum())
    mean = total / n_samples
    var = max(0.0, total_sq / n_samples - mean * mean)
    if n_samples > 1:
        var *= n_samples / (n_samples - 1)
    scale = 2.0**p
    return PartitionEstimate(
        scale * mean, scale * math.sqrt(var / n_samples), n_samples, METHOD_NAIVE, 0.0, math.inf
    )


def concentration_prob(q: float, p: int) -> float:
    """Lower bound P(q, p) = 1 - p Gamma(p, (p-1) q) e^(p-1) / (p-1)^p on the
    posterior probability of { ||x - l|| <= q r(theta) }."""
    if q <= 0:
        raise ValueError("q must be positive")
    if p < 2:
        raise ValueError("p must be at least 2")
    tail = p * upper_inc_gamma_int(p, (p - 1) * q) * math.exp(p - 1) / (p - 1) ** p
    return 1.0 - tail


def lasso_ball_volume(z: float, p: int) -> float:
    """Lebesgue volume of the unit ball of the mass seminorm: Z / p."""
    if z <= 0:
        raise ValueError("z must be positive")
    return z / p
