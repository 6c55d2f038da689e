"""High-fidelity model: operator assembly and the power method.

The one-group balance over the cell grid discretises into a generalized
eigenvalue problem ``A phi = lambda B phi`` where ``A`` carries diffusion
between neighbouring cells plus absorption and ``B`` is the diagonal fission
operator.  ``A`` is stored by stencil bands (3-point in 1D, 5-point in 2D);
boundary faces are decoupled by giving the ghost layer a large negative
diffusion coefficient so that ``max(D_ghost + D_interior, 0) = 0``, and bare
surfaces additionally add ``1/(2*dx)`` (or ``1/(2*dy)``) to the absorption
of the adjacent interior cells.

The dominant eigenpair is found by power iteration: each outer step solves
``A phi_new = lambda B phi_old`` with forward backward Gauss-Seidel,
normalises to a unit fission source and updates the eigenvalue from the
one-vector moments of ``A`` and ``B``.
"""

import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import kernels, matio
from .core_model import BARE, build_material_field
from .numerics import GaussSeidelResult

LARGE_NEGATIVE_D = -1e30

OUTER_K_TOL = 1e-8
OUTER_MAX_ITERS = 1000
INNER_GS_TOL = 1e-10
INNER_GS_MAX_SWEEPS = 10000


@dataclass
class StencilMatrix:
    """Symmetric banded matrix; ``bands[b, i]`` couples row i to i+offsets[b]."""

    n: int
    diag: np.ndarray
    offsets: np.ndarray  # int64
    bands: np.ndarray  # (n_offsets, n)

    def matvec(self, x):
        out = np.empty_like(x)
        kernels.stencil_matvec(self.diag, self.offsets, self.bands, x, out)
        return out

    def matmat(self, r):
        """A @ R for a dense block R, using shifted-band products."""
        out = self.diag[:, None] * r
        n = self.n
        for b in range(self.offsets.shape[0]):
            off = int(self.offsets[b])
            if off > 0:
                out[: n - off] += self.bands[b, : n - off, None] * r[off:]
            else:
                out[-off:] += self.bands[b, -off:, None] * r[: n + off]
        return out

    def to_dense(self):
        a = np.diag(self.diag)
        n = self.n
        for b in range(self.offsets.shape[0]):
            off = int(self.offsets[b])
            for i in range(max(0, -off), min(n, n - off)):
                a[i, i + off] = self.bands[b, i]
        return a

    def gauss_seidel(self, rhs, x0=None, tol=INNER_GS_TOL, max_sweeps=INNER_GS_MAX_SWEEPS):
        """Forward backward Gauss-Seidel sweeps to a relative residual."""
        if np.any(self.diag == 0.0):
            raise ValueError("Gauss-Seidel requires nonzero diagonal entries")
        rhs = np.asarray(rhs, dtype=np.float64)
        x = np.zeros_like(rhs) if x0 is None else np.array(x0, dtype=np.float64)
        threshold = tol * float(np.abs(rhs).max(initial=0.0))
        sweeps = 0
        converged = False
        while sweeps < max_sweeps:
            kernels.gs_banded_sweep(self.diag, self.offsets, self.bands, rhs, x)
            sweeps += 1
            if float(np.abs(self.matvec(x) - rhs).max(initial=0.0)) <= threshold:
                converged = True
                break
        return GaussSeidelResult(x=x, converged=converged, sweeps=sweeps)


@dataclass
class DiscreteSystem:
    """Assembled operators over the interior cells."""

    a: StencilMatrix
    b_diag: np.ndarray
    n_dof: int
    geom: object


@dataclass
class CriticalitySolution:
    flux: np.ndarray
    lam: float
    history: np.ndarray  # k_eff per outer iteration, first entry = guess
    converged: bool
    outer_iters: int
    inner_stats: dict = field(default_factory=dict)

    @property
    def k_eff(self):
        return 1.0 / self.lam


def assemble(mat_field, geom):
    """Banded transport operator and diagonal fission operator for a field."""
    if mat_field.sigma_a.shape != (geom.n_cells,):
        raise ValueError("material field does not cover the interior grid")
    if geom.dims == 1:
        return _assemble_1d(mat_field, geom)
    return _assemble_2d(mat_field, geom)


def _face_couplings(d_padded_lo, d_padded_hi, spacing):
    return 0.5 * np.maximum(d_padded_lo + d_padded_hi, 0.0) / spacing**2


def _assemble_1d(mat_field, geom):
    nx, dx = geom.nx, geom.dx
    dpad = np.full(nx + 2, LARGE_NEGATIVE_D)
    dpad[1:-1] = mat_field.d
    cw = _face_couplings(dpad[:-2], dpad[1:-1], dx)
    ce = _face_couplings(dpad[2:], dpad[1:-1], dx)
    sigma_eff = mat_field.sigma_a.copy()
    if geom.boundary["left"] == BARE:
        sigma_eff[0] += 1.0 / (2.0 * dx)
    if geom.boundary["right"] == BARE:
        sigma_eff[-1] += 1.0 / (2.0 * dx)
    diag = cw + ce + sigma_eff
    offsets = np.array([-1, 1], dtype=np.int64)
    bands = np.vstack([-cw, -ce])
    a = StencilMatrix(n=nx, diag=diag, offsets=offsets, bands=np.ascontiguousarray(bands))
    return DiscreteSystem(a=a, b_diag=mat_field.nu * mat_field.sigma_f, n_dof=nx, geom=geom)


def _assemble_2d(mat_field, geom):
    nx, ny, dx, dy = geom.nx, geom.ny, geom.dx, geom.dy
    dpad = np.full((ny + 2, nx + 2), LARGE_NEGATIVE_D)
    dpad[1:-1, 1:-1] = mat_field.d.reshape(ny, nx)
    inner = dpad[1:-1, 1:-1]
    cw = _face_couplings(dpad[1:-1, :-2], inner, dx)
    ce = _face_couplings(dpad[1:-1, 2:], inner, dx)
    cs = _face_couplings(dpad[:-2, 1:-1], inner, dy)
    cn = _face_couplings(dpad[2:, 1:-1], inner, dy)
    sigma_eff = mat_field.sigma_a.reshape(ny, nx).copy()
    if geom.boundary["left"] == BARE:
        sigma_eff[:, 0] += 1.0 / (2.0 * dx)
    if geom.boundary["right"] == BARE:
        sigma_eff[:, -1] += 1.0 / (2.0 * dx)
    if geom.boundary["bottom"] == BARE:
        sigma_eff[0, :] += 1.0 / (2.0 * dy)
    if geom.boundary["top"] == BARE:
        sigma_eff[-1, :] += 1.0 / (2.0 * dy)
    diag = (cw + ce + cs + cn + sigma_eff).ravel()
    offsets = np.array([-nx, -1, 1, nx], dtype=np.int64)
    bands = np.vstack([-cs.ravel(), -cw.ravel(), -ce.ravel(), -cn.ravel()])
    a = StencilMatrix(
        n=nx * ny, diag=diag, offsets=offsets, bands=np.ascontiguousarray(bands)
    )
    return DiscreteSystem(
        a=a, b_diag=mat_field.nu * mat_field.sigma_f, n_dof=nx * ny, geom=geom
    )


def fission_source(system, flux):
    """One-vector fission moment ``b^T B flux``."""
    return float(system.b_diag @ flux)


def make_hfm_inner(gs_tol=INNER_GS_TOL, gs_max_sweeps=INNER_GS_MAX_SWEEPS):
    """Inner solver for the full system: Gauss-Seidel on A phi = lam B phi_old."""

    def inner(system, flux, lam):
        rhs = lam * system.b_diag * flux
        result = system.a.gauss_seidel(rhs, x0=flux, tol=gs_tol, max_sweeps=gs_max_sweeps)
        return result.x

    return inner


def power_method(system, flux_guess, lambda_guess, inner, k_tol=OUTER_K_TOL,
                 max_outer=OUTER_MAX_ITERS):
    """Outer power iterations with unit-fission-source normalisation.

    Stops when successive k_eff values differ by less than ``k_tol`` or the
    iteration cap is reached (``converged`` records which).
    """
    flux = np.asarray(flux_guess, dtype=np.float64).copy()
    if flux.shape != (system.n_dof,):
        raise ValueError(f"flux guess shape {flux.shape} != ({system.n_dof},)")
    if not np.any(flux):
        raise ValueError("flux guess must be nonzero")
    lam = float(lambda_guess)
    if lam <= 0.0:
        raise ValueError("lambda guess must be positive")

    history = [1.0 / lam]
    converged = False
    outer = 0
    while outer < max_outer:
        flux = inner(system, flux, lam)
        source = fission_source(system, flux)
        if source <= 0.0:
            raise ValueError("fission source vanished: no fissile material in the system")
        flux = flux / source
        lam = float(np.sum(system.a.matvec(flux)) / (system.b_diag @ flux))
        history.append(1.0 / lam)
        outer += 1
        if abs(history[-1] - history[-2]) < k_tol:
            converged = True
            break
    return CriticalitySolution(
        flux=flux,
        lam=lam,
        history=np.array(history),
        converged=converged,
        outer_iters=outer,
    )


def initial_flux(system):
    """Flat flux scaled to a unit fission source."""
    flux = np.ones(system.n_dof)
    source = fission_source(system, flux)
    if source <= 0.0:
        raise ValueError("fission source vanished: no fissile material in the system")
    return flux / source


def solve_case(case, config, k_tol=OUTER_K_TOL, max_outer=OUTER_MAX_ITERS,
               gs_tol=INNER_GS_TOL, gs_max_sweeps=INNER_GS_MAX_SWEEPS):
    """Assemble and solve one rod configuration of a case."""
    mat_field = build_material_field(case.geometry, case.materials, config)
    system = assemble(mat_field, case.geometry)
    return power_method(
        system,
        initial_flux(system),
        1.0,
        make_hfm_inner(gs_tol=gs_tol, gs_max_sweeps=gs_max_sweeps),
        k_tol=k_tol,
        max_outer=max_outer,
    )


def assemble_for(case, config):
    """Assembled system for one rod configuration (shared by the ROMs)."""
    mat_field = build_material_field(case.geometry, case.materials, config)
    return assemble(mat_field, case.geometry)


# ---------------------------------------------------------------------------
# snapshot persistence

SNAPSHOT_MATRIX = "snapshots.bin"
SNAPSHOT_INDEX = "snapshots.jsonl"


def save_snapshots(out_dir, fluxes, records):
    """Flux columns in the binary matrix format plus a JSON-lines index."""
    os.makedirs(out_dir, exist_ok=True)
    matio.save_matrix(os.path.join(out_dir, SNAPSHOT_MATRIX), fluxes)
    with open(os.path.join(out_dir, SNAPSHOT_INDEX), "w") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def load_snapshots(out_dir):
    fluxes = matio.load_matrix(os.path.join(out_dir, SNAPSHOT_MATRIX))
    records = []
    with open(os.path.join(out_dir, SNAPSHOT_INDEX)) as fh:
        for line in fh:
            if line.strip():
                records.append(json.loads(line))
    return fluxes, records
