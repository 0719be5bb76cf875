"""Grid quadrature and Monte Carlo estimators for the mixture scale factor.

For general (grid-represented) localisation densities the scale factor
z_w = integral rho_i^(1-w) rho_j^w and its first two derivatives in w are
evaluated by midpoint-rule sums. A seeded Monte Carlo estimator of the
second derivative is provided for densities that can only be sampled.
"""

from __future__ import annotations

import math

import numpy as np

from .model import GaussianDensity, GridDensity, LocalisationDensity

MC_REJECT_FRACTION = 0.10


def _check_aligned(rho_i: GridDensity, rho_j: GridDensity) -> None:
    same = (
        rho_i.values.shape == rho_j.values.shape
        and np.allclose(rho_i.origin, rho_j.origin, rtol=0.0, atol=1e-12)
        and np.allclose(rho_i.cell_size, rho_j.cell_size, rtol=1e-12, atol=0.0)
    )
    if not same:
        raise ValueError("misaligned grids: origin, cell size and extent must match")


def _masked_log_fields(rho_i: GridDensity, rho_j: GridDensity):
    vi = rho_i.values.ravel()
    vj = rho_j.values.ravel()
    mask = (vi > 0) & (vj > 0)
    return np.log(vi[mask]), np.log(vj[mask])


def grid_z_omega(rho_i: GridDensity, rho_j: GridDensity, omega: float) -> float:
    """Midpoint-rule value of z_w. Cells where either density vanishes
    contribute nothing for w in (0, 1); endpoints integrate the endpoint
    density alone."""
    _check_aligned(rho_i, rho_j)
    vol = rho_i.cell_volume
    if omega == 0.0:
        return math.fsum(rho_i.values.ravel()) * vol
    if omega == 1.0:
        return math.fsum(rho_j.values.ravel()) * vol
    li, lj = _masked_log_fields(rho_i, rho_j)
    return math.fsum(np.exp((1.0 - omega) * li + omega * lj)) * vol


def grid_z_prime(rho_i: GridDensity, rho_j: GridDensity, omega: float) -> float:
    """First w-derivative: integral of rho_i^(1-w) rho_j^w log(rho_j/rho_i)."""
    _check_aligned(rho_i, rho_j)
    li, lj = _masked_log_fields(rho_i, rho_j)
    terms = np.exp((1.0 - omega) * li + omega * lj) * (lj - li)
    return math.fsum(terms) * rho_i.cell_volume


def grid_z_double_prime(rho_i: GridDensity, rho_j: GridDensity, omega: float) -> float:
    """Second w-derivative: same integrand with the squared log ratio."""
    _check_aligned(rho_i, rho_j)
    li, lj = _masked_log_fields(rho_i, rho_j)
    terms = np.exp((1.0 - omega) * li + omega * lj) * (lj - li) ** 2
    return math.fsum(terms) * rho_i.cell_volume


def grid_emd(rho_i: GridDensity, rho_j: GridDensity, omega: float) -> tuple[GridDensity, float]:
    """Normalized geometric mean of two aligned grids and its scale factor."""
    _check_aligned(rho_i, rho_j)
    if omega == 0.0:
        return rho_i, 1.0
    if omega == 1.0:
        return rho_j, 1.0
    vi = rho_i.values
    vj = rho_j.values
    mask = (vi > 0) & (vj > 0)
    vals = np.zeros_like(vi)
    vals[mask] = np.exp((1.0 - omega) * np.log(vi[mask]) + omega * np.log(vj[mask]))
    z = math.fsum(vals.ravel()) * rho_i.cell_volume
    if z == 0.0:
        raise ValueError("densities have disjoint support; geometric mean vanishes")
    return GridDensity(rho_i.origin, rho_i.cell_size, vals / z), z


def mc_z_double_prime(
    rho_i: LocalisationDensity,
    rho_j: LocalisationDensity,
    rho_omega: LocalisationDensity,
    z_omega: float,
    samples: int,
    rng: np.random.Generator,
) -> float:
    """Monte Carlo estimate of the second derivative of z_w.

    Draws from the fused density rho_omega and averages the squared log
    ratio, scaled by z_omega. Draws landing where either input density
    vanishes are rejected and redrawn; more than 10% rejections aborts.
    """
    if samples < 1:
        raise ValueError("sample count must be >= 1")
    vals = np.empty(samples)
    filled = 0
    rejected = 0
    while filled < samples:
        batch = rho_omega.sample(rng, samples - filled)
        di = rho_i.evaluate(batch)
        dj = rho_j.evaluate(batch)
        ok = (di > 0) & (dj > 0)
        good = int(ok.sum())
        rejected += batch.shape[0] - good
        if rejected > MC_REJECT_FRACTION * samples:
            raise ValueError(
                f"Monte Carlo rejection rate above {MC_REJECT_FRACTION:.0%}: "
                "fused density reaches beyond the support of an input"
            )
        log_ratio = np.log(dj[ok]) - np.log(di[ok])
        vals[filled : filled + good] = log_ratio**2
        filled += good
    return z_omega * float(vals.mean())


def discretize_gaussians(
    gaussians: list[GaussianDensity],
    points_per_axis: int = 201,
    extent_sigmas: float = 6.0,
) -> list[GridDensity]:
    """Aligned grid representations on a common bounding box.

    The box spans every input mean plus/minus ``extent_sigmas`` per-axis
    standard deviations, so the truncated mass is negligible at default
    settings.
    """
    if not gaussians:
        raise ValueError("need at least one Gaussian")
    dim = gaussians[0].dim
    if dim > 3:
        raise ValueError("grid discretization supports at most 3 dimensions")
    if any(g.dim != dim for g in gaussians):
        raise ValueError("Gaussian dimensions do not match")
    sig = [np.sqrt(np.diag(g.cov)) for g in gaussians]
    lo = np.min([g.mean - extent_sigmas * s for g, s in zip(gaussians, sig)], axis=0)
    hi = np.max([g.mean + extent_sigmas * s for g, s in zip(gaussians, sig)], axis=0)
    cell = (hi - lo) / points_per_axis
    axes = [lo[k] + (np.arange(points_per_axis) + 0.5) * cell[k] for k in range(dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    centers = np.column_stack([m.ravel() for m in mesh])
    shape = (points_per_axis,) * dim
    return [
        GridDensity(lo, cell, g.evaluate(centers).reshape(shape)) for g in gaussians
    ]


def grid_kld(p: GridDensity, q: GridDensity) -> float:
    """Midpoint-rule D(p||q) for aligned grids; +inf if q misses p's support."""
    _check_aligned(p, q)
    vp = p.values.ravel()
    vq = q.values.ravel()
    mask = vp > 0
    if np.any(vq[mask] == 0):
        return math.inf
    val = math.fsum(vp[mask] * (np.log(vp[mask]) - np.log(vq[mask]))) * p.cell_volume
    return max(val, 0.0)
