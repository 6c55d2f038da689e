"""POD-Galerkin reduced-order model.

The truncated snapshot basis R (orthonormal columns) defines the reduced
variables ``alpha = R^T phi``.  Projecting the assembled operators gives the
P-by-P generalized eigenvalue problem ``(R^T A R) alpha = lambda (R^T B R)
alpha``, solved with the same outer power iterations as the full model; the
inner step is a single direct solve of the projected system against the
frozen outer source.
"""

import json
import os
from dataclasses import dataclass

import numpy as np

from . import matio
from .hfm import initial_flux, power_method
from .numerics import capture_fraction, gaussian_elimination, truncate_basis


@dataclass
class PodBasis:
    basis: np.ndarray  # (N, P), orthonormal columns
    singular_values: np.ndarray  # retained sigma, length P
    capture_fraction: float

    @property
    def p(self):
        return self.basis.shape[1]


def build_pod_basis(svd, fraction=None, count=None):
    """Truncate a snapshot SVD into a basis, recording the captured energy."""
    r = truncate_basis(svd, fraction=fraction, count=count)
    p = r.shape[1]
    return PodBasis(
        basis=r,
        singular_values=svd.singular_values[:p].copy(),
        capture_fraction=capture_fraction(svd.singular_values, p),
    )


def project(basis, flux):
    """alpha = R^T phi."""
    r = basis.basis if isinstance(basis, PodBasis) else basis
    flux = np.asarray(flux, dtype=np.float64)
    if flux.shape[0] != r.shape[0]:
        raise ValueError(f"flux length {flux.shape[0]} != basis rows {r.shape[0]}")
    return r.T @ flux


def reconstruct(basis, alpha):
    """phi = R alpha."""
    r = basis.basis if isinstance(basis, PodBasis) else basis
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.shape[0] != r.shape[1]:
        raise ValueError(f"alpha length {alpha.shape[0]} != basis columns {r.shape[1]}")
    return r @ alpha


def reduce_system(system, basis):
    """Projected operators (R^T A R, R^T B R) via banded products."""
    r = basis.basis if isinstance(basis, PodBasis) else basis
    if r.shape[0] != system.n_dof:
        raise ValueError(f"basis rows {r.shape[0]} != system dof {system.n_dof}")
    ar = r.T @ system.a.matmat(r)
    br = r.T @ (system.b_diag[:, None] * r)
    return ar, br


def pod_inner_iteration(system, basis, flux, lam, reduced_a=None):
    """One projected source solve: alpha from (R^T A R) alpha = lam R^T B phi."""
    r = basis.basis if isinstance(basis, PodBasis) else basis
    if reduced_a is None:
        reduced_a, _ = reduce_system(system, r)
    source = lam * (r.T @ (system.b_diag * flux))
    alpha = gaussian_elimination(reduced_a, source)
    return r @ alpha


def solve_pod_rom(system, basis, flux_guess=None, lambda_guess=1.0, **outer_opts):
    """Outer power iterations with the projected inner solve.

    The default initial flux is the flat unit-fission-source guess projected
    into the span of the basis.
    """
    r = basis.basis if isinstance(basis, PodBasis) else basis
    reduced_a, _ = reduce_system(system, r)
    if flux_guess is None:
        flat = initial_flux(system)
        flux_guess = r @ (r.T @ flat)

    def inner(sys_, flux, lam):
        return pod_inner_iteration(sys_, r, flux, lam, reduced_a=reduced_a)

    return power_method(system, flux_guess, lambda_guess, inner, **outer_opts)


# ---------------------------------------------------------------------------
# persistence

def save_basis(path_prefix, basis):
    """Basis matrix in binary form plus a JSON sidecar with the metadata."""
    matio.save_matrix(path_prefix + ".bin", basis.basis)
    sidecar = {
        "p": basis.p,
        "capture_fraction": basis.capture_fraction,
        "singular_values": [float(s) for s in basis.singular_values],
    }
    with open(path_prefix + ".json", "w") as fh:
        json.dump(sidecar, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_basis(path_prefix):
    r = matio.load_matrix(path_prefix + ".bin")
    with open(path_prefix + ".json") as fh:
        sidecar = json.load(fh)
    return PodBasis(
        basis=r,
        singular_values=np.asarray(sidecar["singular_values"], dtype=np.float64),
        capture_fraction=float(sidecar["capture_fraction"]),
    )
