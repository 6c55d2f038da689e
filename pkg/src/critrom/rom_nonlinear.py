"""Projection ROM through a nonlinear reduction map.

A :class:`ReductionMap` bundles an encode/decode pair between the full flux
space and a small latent space.  For the autoencoder maps the decoder is
nonlinear, so each inner step linearises it around the current latent state:
the finite-difference Jacobian ``C`` plays the role the POD basis plays in
the linear model, and the reduced correction system ``(C^T A C + reg I)
d_alpha = C^T s - C^T A phi`` is solved directly.  The outer power
iterations are shared with the full model.

Scaling lives inside the maps: ``encode`` expects physical flux and
``decode`` returns physical flux, so the reduced algebra runs in physical
units throughout.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .autoencoder import TrainedAutoencoder
from .hfm import initial_flux, power_method
from .numerics import gaussian_elimination
from .pod_rom import PodBasis

JACOBIAN_EPSILON = 1e-6
REGULARIZATION_SCALE = 1e-8
INNER_ALPHA_TOL = 1e-8
INNER_MAX_ITERS = 100


@dataclass
class ReductionMap:
    """encode: flux -> latent; decode: latent -> flux (physical units)."""

    kind: str  # "pod" | "ae" | "svd_ae"
    encode: Callable
    decode: Callable
    latent_dim: int
    basis: Optional[np.ndarray] = None  # R for pod / svd_ae kinds


def pod_map(basis):
    """Linear map from a POD basis; encode/decode are R^T and R."""
    r = basis.basis if isinstance(basis, PodBasis) else np.asarray(basis)
    return ReductionMap(
        kind="pod",
        encode=lambda flux: r.T @ flux,
        decode=lambda alpha: r @ alpha,
        latent_dim=r.shape[1],
        basis=r,
    )


def ae_map(model: TrainedAutoencoder):
    """Autoencoder map; the model's scaler wraps both directions."""
    scaler = model.scaler

    def encode(flux):
        return model.encode(scaler.scale(flux))

    def decode(latent):
        return scaler.unscale(model.decode(latent))

    return ReductionMap(
        kind="ae", encode=encode, decode=decode, latent_dim=model.spec.latent_dim
    )


def compose_svd_ae(basis, model: TrainedAutoencoder):
    """Two-stage reduction: project onto R, then autoencode the coefficients.

    ``encode = AE_enc(scale(R^T phi))`` and ``decode = R unscale(AE_dec(alpha))``,
    so every decoded flux (and hence every Jacobian column) lies in span(R).
    """
    r = basis.basis if isinstance(basis, PodBasis) else np.asarray(basis)
    if r.shape[1] != model.spec.layer_sizes[0]:
        raise ValueError(
            f"network expects {model.spec.layer_sizes[0]} inputs, basis has {r.shape[1]} columns"
        )
    scaler = model.scaler

    def encode(flux):
        return model.encode(scaler.scale(r.T @ flux))

    def decode(latent):
        return r @ scaler.unscale(model.decode(latent))

    return ReductionMap(
        kind="svd_ae", encode=encode, decode=decode, latent_dim=model.spec.latent_dim,
        basis=r,
    )


@dataclass
class LinearizedMap:
    """One-sided finite-difference Jacobian of the decoder at an anchor."""

    c: np.ndarray  # (N, P)
    anchor_latent: np.ndarray
    anchor_flux: np.ndarray
    epsilon: float


def linearize_decoder(rmap, anchor, epsilon=JACOBIAN_EPSILON):
    """Column-by-column forward differences; P+1 decoder evaluations.

    The probes are batched into one decoder call, which evaluates each
    column independently.
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    anchor = np.asarray(anchor, dtype=np.float64)
    p = anchor.shape[0]
    if p != rmap.latent_dim:
        raise ValueError(f"anchor length {p} != latent dimension {rmap.latent_dim}")
    probes = np.tile(anchor[:, None], (1, p + 1))
    probes[:, 1:] += epsilon * np.eye(p)
    outputs = np.asarray(rmap.decode(probes), dtype=np.float64)
    if not np.all(np.isfinite(outputs)):
        raise ValueError("decoder produced non-finite values during linearisation")
    anchor_flux = outputs[:, 0]
    c = (outputs[:, 1:] - anchor_flux[:, None]) / epsilon
    return LinearizedMap(c=c, anchor_latent=anchor.copy(), anchor_flux=anchor_flux,
                         epsilon=epsilon)


@dataclass
class InnerDiagnostics:
    iterations: int
    converged: bool
    last_step_norm: float


def ae_inner_iterations(system, rmap, flux, lam, epsilon=JACOBIAN_EPSILON,
                        reg_scale=REGULARIZATION_SCALE, reg_abs=None,
                        alpha_tol=INNER_ALPHA_TOL, max_inner=INNER_MAX_ITERS):
    """Inner flux solve against the frozen outer source.

    Relinearises the decoder every iteration and takes the regularized
    Newton-like step; stops when the latent update drops below ``alpha_tol``
    or at the iteration cap (the outer loop proceeds either way).  The
    regularisation is relative to the largest diagonal entry of ``C^T A C``
    unless ``reg_abs`` pins an absolute value.
    """
    source = lam * system.b_diag * flux
    alpha = np.asarray(rmap.encode(flux), dtype=np.float64).copy()
    phi = np.asarray(flux, dtype=np.float64).copy()
    iterations = 0
    converged = False
    step_norm = np.inf
    while iterations < max_inner:
        lin = linearize_decoder(rmap, alpha, epsilon=epsilon)
        c = lin.c
        ac = system.a.matmat(c)
        reduced = c.T @ ac
        reg = reg_abs if reg_abs is not None else reg_scale * float(np.max(np.diag(reduced)))
        reduced[np.diag_indices_from(reduced)] += reg
        rhs = c.T @ source - c.T @ system.a.matvec(phi)
        d_alpha = gaussian_elimination(reduced, rhs)
        alpha += d_alpha
        phi = phi + c @ d_alpha
        iterations += 1
        step_norm = float(np.abs(d_alpha).max())
        if step_norm < alpha_tol:
            converged = True
            break
    return phi, InnerDiagnostics(
        iterations=iterations, converged=converged, last_step_norm=step_norm
    )


def solve_ae_rom(system, rmap, flux_guess=None, lambda_guess=1.0,
                 epsilon=JACOBIAN_EPSILON, reg_scale=REGULARIZATION_SCALE,
                 reg_abs=None, alpha_tol=INNER_ALPHA_TOL,
                 max_inner=INNER_MAX_ITERS, **outer_opts):
    """Outer power iterations with the linearised-decoder inner solver.

    The default initial flux is the flat unit-fission-source guess passed
    through decode(encode(.)) so the starting point is representable by the
    map.  The returned solution carries per-outer inner-iteration counts and
    the inner non-convergence tally in ``inner_stats``.
    """
    if flux_guess is None:
        flat = initial_flux(system)
        flux_guess = np.asarray(rmap.decode(rmap.encode(flat)), dtype=np.float64)

    inner_iters = []
    nonconverged = 0

    def inner(sys_, flux, lam):
        phi, diag = ae_inner_iterations(
            sys_, rmap, flux, lam, epsilon=epsilon, reg_scale=reg_scale,
            reg_abs=reg_abs, alpha_tol=alpha_tol, max_inner=max_inner,
        )
        inner_iters.append(diag.iterations)
        nonlocal nonconverged
        if not diag.converged:
            nonconverged += 1
        return phi

    solution = power_method(system, flux_guess, lambda_guess, inner, **outer_opts)
    solution.inner_stats = {
        "inner_iterations": inner_iters,
        "inner_nonconverged": nonconverged,
    }
    return solution
