"""Reactor geometry, materials and control-rod homogenisation.

A case is a regular 1D or 2D cell grid, a material table, and a set of
control-rod regions.  Rod regions hold a mixture of an absorber and a base
material; the mixture is parameterised per region by an insertion fraction
``z`` in [0, 1].  Mixing weights come from averaging the reciprocals of the
absorption cross-sections, which prevents the strong absorber from
dominating the homogenised region, and the resulting mixing coefficient
``r`` is applied as a convex combination of all cross-sections.

Two cases are built in (``slab1d`` and ``core2d``); custom cases load from
an INI-style config file with the same fields.
"""

import configparser
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

BARE = "bare"
REFLECTIVE = "reflective"
_BOUNDARY_KINDS = (BARE, REFLECTIVE)


@dataclass(frozen=True)
class CrossSectionSet:
    """Macroscopic cross-sections (1/cm) and neutrons per fission."""

    sigma_a: float
    sigma_s: float
    sigma_f: float
    nu: float = 1.0

    def __post_init__(self):
        for name in ("sigma_a", "sigma_s", "sigma_f", "nu"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class RodRegion:
    """Footprint of one control-rod region and the materials it mixes."""

    cells: np.ndarray  # interior cell indices
    base: str  # material occupying the region when withdrawn
    rod: str = "control_rod"


@dataclass
class Geometry:
    """Regular interior cell grid; cell index = j * nx + i (x fastest)."""

    dims: int
    nx: int
    ny: int
    dx: float
    dy: float
    region_of_cell: np.ndarray  # material-name index per interior cell
    region_names: list
    rod_regions: list
    boundary: dict  # edge -> "bare" | "reflective"

    def __post_init__(self):
        n = self.n_cells
        if self.region_of_cell.shape != (n,):
            raise ConfigurationError("region_of_cell does not cover the interior grid")
        edges = ("left", "right") if self.dims == 1 else ("left", "right", "bottom", "top")
        for edge in edges:
            if self.boundary.get(edge) not in _BOUNDARY_KINDS:
                raise ConfigurationError(f"boundary[{edge!r}] must be one of {_BOUNDARY_KINDS}")
        seen = np.zeros(n, dtype=bool)
        for region in self.rod_regions:
            cells = region.cells
            if cells.size == 0 or cells.min() < 0 or cells.max() >= n:
                raise ConfigurationError("rod region footprint outside the interior grid")
            if seen[cells].any():
                raise ConfigurationError("rod region footprints overlap")
            seen[cells] = True

    @property
    def n_cells(self):
        return self.nx * self.ny

    def cell_centers(self):
        """Centers as (n_cells,) in 1D or (n_cells, 2) in 2D."""
        cx = (np.arange(self.nx) + 0.5) * self.dx
        if self.dims == 1:
            return cx
        cy = (np.arange(self.ny) + 0.5) * self.dy
        xg, yg = np.meshgrid(cx, cy)
        return np.column_stack([xg.ravel(), yg.ravel()])


@dataclass(frozen=True)
class RodConfig:
    """Insertion fraction per rod region, each in [0, 1]."""

    z: np.ndarray

    def __post_init__(self):
        z = np.atleast_1d(np.asarray(self.z, dtype=np.float64))
        object.__setattr__(self, "z", z)
        if z.size and (z.min() < 0.0 or z.max() > 1.0):
            raise ValueError("insertion fractions must lie in [0, 1]")


@dataclass
class MaterialField:
    """Per-interior-cell cross-sections and diffusion coefficient."""

    sigma_a: np.ndarray
    sigma_s: np.ndarray
    sigma_f: np.ndarray
    nu: np.ndarray
    d: np.ndarray


@dataclass
class CaseDefinition:
    name: str
    geometry: Geometry
    materials: dict = field(default_factory=dict)


def mixing_coefficient(z, sigma_a_base, sigma_a_cr):
    """Mixing coefficient from the reciprocal-averaged absorption rule.

    ``1/sigma_hom = z/sigma_cr + (1-z)/sigma_base`` rearranges to
    ``r = z*sigma_base / (z*sigma_base + (1-z)*sigma_cr)``.
    """
    if not 0.0 <= z <= 1.0:
        raise ValueError(f"insertion fraction must lie in [0, 1], got {z}")
    if sigma_a_base <= 0.0 or sigma_a_cr <= 0.0:
        raise ValueError("absorption cross-sections must be positive for mixing")
    return z * sigma_a_base / (z * sigma_a_base + (1.0 - z) * sigma_a_cr)


def homogenize(r, cr, base):
    """Convex combination of rod and base cross-sections with weight ``r``."""
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"mixing coefficient must lie in [0, 1], got {r}")
    return CrossSectionSet(
        sigma_a=r * cr.sigma_a + (1.0 - r) * base.sigma_a,
        sigma_s=r * cr.sigma_s + (1.0 - r) * base.sigma_s,
        sigma_f=r * cr.sigma_f + (1.0 - r) * base.sigma_f,
        nu=r * cr.nu + (1.0 - r) * base.nu,
    )


def diffusion_coefficient(xs):
    """D = 1 / (3 (sigma_a + sigma_s)), in cm."""
    total = xs.sigma_a + xs.sigma_s
    if total <= 0.0:
        raise ValueError("sigma_a + sigma_s must be positive")
    return 1.0 / (3.0 * total)


def build_material_field(geom, materials, config):
    """Per-cell material data for a rod configuration.

    Non-rod cells carry their region's material unchanged; each rod-region
    cell carries the homogenised mixture for that region's insertion
    fraction.  ``config`` may be a :class:`RodConfig` or a plain sequence.
    """
    if not isinstance(config, RodConfig):
        config = RodConfig(np.asarray(config, dtype=np.float64))
    if config.z.shape != (len(geom.rod_regions),):
        raise ValueError(
            f"expected {len(geom.rod_regions)} insertion fractions, got {config.z.shape}"
        )
    for name in geom.region_names:
        if name not in materials:
            raise ConfigurationError(f"material {name!r} is not defined")

    n = geom.n_cells
    arrays = {key: np.empty(n) for key in ("sigma_a", "sigma_s", "sigma_f", "nu")}
    for idx, name in enumerate(geom.region_names):
        xs = materials[name]
        mask = geom.region_of_cell == idx
        for key in arrays:
            arrays[key][mask] = getattr(xs, key)

    for region, z in zip(geom.rod_regions, config.z):
        for name in (region.base, region.rod):
            if name not in materials:
                raise ConfigurationError(f"material {name!r} is not defined")
        base = materials[region.base]
        cr = materials[region.rod]
        r = mixing_coefficient(z, base.sigma_a, cr.sigma_a)
        mixed = homogenize(r, cr, base)
        for key in arrays:
            arrays[key][region.cells] = getattr(mixed, key)

    d = 1.0 / (3.0 * (arrays["sigma_a"] + arrays["sigma_s"]))
    return MaterialField(d=d, **arrays)


# ---------------------------------------------------------------------------
# grid construction helpers

def _cells_in_extent(geom, x0, x1, y0=None, y1=None):
    centers = geom.cell_centers()
    if geom.dims == 1:
        mask = (centers >= x0) & (centers <= x1)
    else:
        mask = (
            (centers[:, 0] >= x0)
            & (centers[:, 0] <= x1)
            & (centers[:, 1] >= y0)
            & (centers[:, 1] <= y1)
        )
    return np.flatnonzero(mask)


def _build_case(name, dims, lengths, cells, background, materials, regions, rods, boundary):
    nx, ny = cells
    lx, ly = lengths
    geom = Geometry(
        dims=dims,
        nx=nx,
        ny=ny,
        dx=lx / nx,
        dy=(ly / ny) if dims == 2 else 0.0,
        region_of_cell=np.zeros(nx * ny, dtype=np.int64),
        region_names=[background],
        rod_regions=[],
        boundary=boundary,
    )
    for material_name, extent in regions:
        if material_name not in geom.region_names:
            geom.region_names.append(material_name)
        idx = geom.region_names.index(material_name)
        geom.region_of_cell[_cells_in_extent(geom, *extent)] = idx
    rod_regions = []
    for base_name, extent in rods:
        cells_k = _cells_in_extent(geom, *extent)
        if cells_k.size == 0:
            raise ConfigurationError(f"rod region extent {extent} covers no cells")
        rod_regions.append(RodRegion(cells=cells_k, base=base_name))
        if base_name not in geom.region_names:
            geom.region_names.append(base_name)
        geom.region_of_cell[cells_k] = geom.region_names.index(base_name)
    geom.rod_regions = rod_regions
    geom.__post_init__()
    return CaseDefinition(name=name, geometry=geom, materials=materials)


def slab1d_case(nx=100, boundary=None):
    """10 cm slab: fuel background, two absorber regions near each end."""
    materials = {
        "fuel": CrossSectionSet(0.45, 2.0, 0.5),
        "control_rod": CrossSectionSet(0.9, 2.0, 0.0),
    }
    bc = {"left": BARE, "right": BARE}
    bc.update(boundary or {})
    return _build_case(
        name="slab1d",
        dims=1,
        lengths=(10.0, 0.0),
        cells=(nx, 1),
        background="fuel",
        materials=materials,
        regions=[],
        rods=[("fuel", (2.2, 2.5)), ("fuel", (7.5, 7.8))],
        boundary=bc,
    )


def core2d_case(nx=90, ny=None, boundary=None):
    """90 cm square core: fuel block in a graphite reflector, four water
    channels holding the control rods."""
    ny = nx if ny is None else ny
    materials = {
        "fuel": CrossSectionSet(0.075, 0.53, 0.79),
        "water": CrossSectionSet(0.01, 0.89, 0.0),
        "control_rod": CrossSectionSet(0.38, 0.2, 0.0),
        "graphite": CrossSectionSet(0.15, 0.5, 0.0),
    }
    bc = {"left": BARE, "right": BARE, "bottom": BARE, "top": BARE}
    bc.update(boundary or {})
    rod_centers = [(25.0, 35.0), (55.0, 35.0), (25.0, 65.0), (55.0, 65.0)]
    rods = [
        ("water", (cx - 5.0, cx + 5.0, cy - 5.0, cy + 5.0)) for cx, cy in rod_centers
    ]
    return _build_case(
        name="core2d",
        dims=2,
        lengths=(90.0, 90.0),
        cells=(nx, ny),
        background="graphite",
        materials=materials,
        regions=[("fuel", (10.0, 80.0, 10.0, 80.0))],
        rods=rods,
        boundary=bc,
    )


_PRESETS = {"slab1d": slab1d_case, "core2d": core2d_case}


def get_case(name, nx=None, **kwargs):
    """Built-in case by name, or a config file by path."""
    if name in _PRESETS:
        if nx is not None:
            kwargs["nx"] = nx
        return _PRESETS[name](**kwargs)
    return load_case(name)


def load_case(path):
    """Case from an INI-style config file.

    Sections: ``[case]`` (dims, lengths, cell counts, background material,
    per-edge boundary), one ``[material.NAME]`` per material, optional
    ``[region.*]`` painted rectangles applied in order, and ``[rod.*]``
    control-rod regions with their base material.
    """
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigurationError(f"cannot read case file {path}")
    if "case" not in parser:
        raise ConfigurationError(f"{path}: missing [case] section")
    case = parser["case"]
    try:
        dims = case.getint("dims")
        lx = case.getfloat("length_x")
        nx = case.getint("cells_x")
        ly = case.getfloat("length_y", 0.0)
        ny = case.getint("cells_y", 1)
        background = case.get("background")
        name = case.get("name", "custom")
    except (ValueError, TypeError) as exc:
        raise ConfigurationError(f"{path}: bad [case] section: {exc}") from exc
    if dims not in (1, 2):
        raise ConfigurationError(f"{path}: dims must be 1 or 2")
    if background is None:
        raise ConfigurationError(f"{path}: background material is required")

    edges = ("left", "right") if dims == 1 else ("left", "right", "bottom", "top")
    boundary = {}
    for edge in edges:
        boundary[edge] = case.get(f"boundary_{edge}", BARE).strip()

    materials = {}
    regions = []
    rods = []
    for section in parser.sections():
        if section.startswith("material."):
            mat = parser[section]
            materials[section.split(".", 1)[1]] = CrossSectionSet(
                sigma_a=mat.getfloat("sigma_a"),
                sigma_s=mat.getfloat("sigma_s"),
                sigma_f=mat.getfloat("sigma_f"),
                nu=mat.getfloat("nu", 1.0),
            )
        elif section.startswith("region.") or section.startswith("rod."):
            sec = parser[section]
            extent = tuple(float(v) for v in sec.get("x", "").split())
            if dims == 2:
                extent += tuple(float(v) for v in sec.get("y", "").split())
            want = 2 if dims == 1 else 4
            if len(extent) != want:
                raise ConfigurationError(f"{path}: [{section}] needs {want} extent values")
            if section.startswith("region."):
                regions.append((sec.get("material"), extent))
            else:
                rods.append((sec.get("base"), extent))

    return _build_case(
        name=name,
        dims=dims,
        lengths=(lx, ly),
        cells=(nx, ny),
        background=background,
        materials=materials,
        regions=regions,
        rods=rods,
        boundary=boundary,
    )
