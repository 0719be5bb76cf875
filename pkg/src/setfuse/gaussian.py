"""Closed-form Gaussian operations for weighted geometric-mean fusion.

The weighted geometric mean of two Gaussians is itself Gaussian; its
parameters and normalizing scale factor have closed forms in terms of the
information (inverse covariance) matrices.
"""

from __future__ import annotations

import math

import numpy as np

from .model import GaussianDensity


def _inverse(cov: np.ndarray) -> np.ndarray:
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise ValueError("covariance is singular or not positive definite") from exc
    inv = np.linalg.solve(chol.T, np.linalg.solve(chol, np.eye(cov.shape[0])))
    return 0.5 * (inv + inv.T)


def _check_pair(rho_i: GaussianDensity, rho_j: GaussianDensity) -> None:
    if rho_i.dim != rho_j.dim:
        raise ValueError("Gaussian dimensions do not match")


def emd_params(rho_i: GaussianDensity, rho_j: GaussianDensity, omega: float) -> GaussianDensity:
    """Mean and covariance of the normalized geometric mean rho_i^(1-w) rho_j^w.

    The covariance combines the information matrices linearly,
    C_w = ((1-w) C_i^-1 + w C_j^-1)^-1, and the mean combines the
    information-weighted means.
    """
    _check_pair(rho_i, rho_j)
    if not 0.0 <= omega <= 1.0:
        raise ValueError("omega must lie in [0, 1]")
    if omega == 0.0:
        return rho_i
    if omega == 1.0:
        return rho_j
    info_i = _inverse(rho_i.cov)
    info_j = _inverse(rho_j.cov)
    info_w = (1.0 - omega) * info_i + omega * info_j
    cov_w = _inverse(info_w)
    mean_w = cov_w @ ((1.0 - omega) * info_i @ rho_i.mean + omega * info_j @ rho_j.mean)
    return GaussianDensity(mean_w, cov_w)


def emd_log_scale(rho_i: GaussianDensity, rho_j: GaussianDensity, omega: float) -> float:
    """log of the scale factor z_w = integral of rho_i^(1-w) rho_j^w.

    Always <= 0; zero exactly when the inputs coincide or w is an endpoint.
    """
    _check_pair(rho_i, rho_j)
    if not 0.0 <= omega <= 1.0:
        raise ValueError("omega must lie in [0, 1]")
    if omega == 0.0 or omega == 1.0:
        return 0.0
    info_i = _inverse(rho_i.cov)
    info_j = _inverse(rho_j.cov)
    info_w = (1.0 - omega) * info_i + omega * info_j
    cov_w = _inverse(info_w)
    mean_w = cov_w @ ((1.0 - omega) * info_i @ rho_i.mean + omega * info_j @ rho_j.mean)
    quad = (
        (1.0 - omega) * rho_i.mean @ info_i @ rho_i.mean
        + omega * rho_j.mean @ info_j @ rho_j.mean
        - mean_w @ info_w @ mean_w
    )
    log_det = (
        (1.0 - omega) * np.linalg.slogdet(info_i)[1]
        + omega * np.linalg.slogdet(info_j)[1]
        + np.linalg.slogdet(cov_w)[1]
    )
    # Hoelder guarantees z <= 1; clip roundoff that lands above
    return min(0.5 * log_det - 0.5 * quad, 0.0)


def emd_scale(rho_i: GaussianDensity, rho_j: GaussianDensity, omega: float) -> float:
    return math.exp(emd_log_scale(rho_i, rho_j, omega))


def kld(p: GaussianDensity, q: GaussianDensity) -> float:
    """D(p||q) between Gaussians, in nats."""
    _check_pair(p, q)
    info_q = _inverse(q.cov)
    delta = p.mean - q.mean
    val = 0.5 * (
        np.linalg.slogdet(q.cov)[1]
        - np.linalg.slogdet(p.cov)[1]
        + np.trace(info_q @ p.cov)
        + delta @ info_q @ delta
        - p.dim
    )
    return max(float(val), 0.0)


def make_rotated_covariance(kappa: float, det_sigma: float, phi: float) -> np.ndarray:
    """2-D covariance with condition number kappa, determinant det_sigma,
    major axis rotated by phi radians."""
    if kappa < 1.0:
        raise ValueError("condition number must be >= 1")
    if det_sigma <= 0.0:
        raise ValueError("determinant must be positive")
    var1 = math.sqrt(det_sigma * kappa)
    var2 = math.sqrt(det_sigma / kappa)
    c, s = math.cos(phi), math.sin(phi)
    rot = np.array([[c, -s], [s, c]])
    return rot @ np.diag([var1, var2]) @ rot.T


def sample(rho: GaussianDensity, count: int, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. draws from rho, shape (count, d)."""
    return rho.sample(rng, count)
