"""Molecular descriptor catalogue.

Every descriptor is a deterministic function of the heavy-atom graph:
constitutional counts, degree-based connectivity indices, distance-matrix
statistics, ring statistics, and simple electronic proxies built from
element tables. The catalogue is versioned; checkpoints and caches embed
the version string so stale artifacts are detected instead of silently
reused.

Failures inside one calculator (for example a missing atomic mass) are
encoded as NaN in that slot rather than aborting the whole vector.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import partial
from multiprocessing import Pool

import numpy as np

from .elements import ATOMIC_MASS, ELECTRONEGATIVITY, HALOGENS
from .molparse import AROMATIC, DOUBLE, SINGLE, TRIPLE, MolecularGraph, distance_matrix

logger = logging.getLogger(__name__)

CATALOGUE_VERSION = "1"

MISSING = float("nan")


def is_missing(value: float) -> bool:
    return math.isnan(value)


class _MolContext:
    """Shared intermediates for one molecule, computed lazily."""

    def __init__(self, mol: MolecularGraph):
        self.mol = mol
        self._degrees: list[int] | None = None
        self._dist: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.mol.atoms)

    @property
    def degrees(self) -> list[int]:
        if self._degrees is None:
            self._degrees = [self.mol.degree(i) for i in range(self.n)]
        return self._degrees

    @property
    def dist(self) -> np.ndarray:
        if self._dist is None:
            self._dist = distance_matrix(self.mol)
        return self._dist

    @property
    def eccentricities(self) -> np.ndarray:
        return self.dist.max(axis=1)

    def edge_degrees(self):
        """(du, dv) for every bond."""
        d = self.degrees
        return [(d[b.a], d[b.b]) for b in self.mol.bonds]


# -- named indices (public API) ------------------------------------------


def wiener_index(mol: MolecularGraph) -> float:
    """Sum of topological distances over all unordered atom pairs."""
    d = distance_matrix(mol)
    return float(d.sum()) / 2.0


def abc_index(mol: MolecularGraph) -> float:
    """Atom-bond connectivity index: sum of sqrt((du+dv-2)/(du*dv)) over bonds."""
    ctx = _MolContext(mol)
    return float(sum(
        math.sqrt((du + dv - 2) / (du * dv)) for du, dv in ctx.edge_degrees()
    ))


def zagreb_indices(mol: MolecularGraph) -> tuple[float, float]:
    """First (sum of squared degrees) and second (sum of edge degree
    products) Zagreb indices."""
    ctx = _MolContext(mol)
    m1 = float(sum(d * d for d in ctx.degrees))
    m2 = float(sum(du * dv for du, dv in ctx.edge_degrees()))
    return m1, m2


def randic_index(mol: MolecularGraph) -> float:
    """Randic connectivity index: sum of 1/sqrt(du*dv) over bonds."""
    ctx = _MolContext(mol)
    return float(sum(1.0 / math.sqrt(du * dv) for du, dv in ctx.edge_degrees()))


def eccentric_connectivity_index(mol: MolecularGraph) -> float:
    """Sum over atoms of degree times eccentricity."""
    ctx = _MolContext(mol)
    ecc = ctx.eccentricities
    return float(sum(d * int(e) for d, e in zip(ctx.degrees, ecc)))


def constitutional_counts(mol: MolecularGraph) -> dict[str, float]:
    """Atom, bond, ring, hydrogen, and mass bookkeeping for one molecule."""
    ctx = _MolContext(mol)
    return {
        name: _CALCULATORS[name](ctx)
        for name in _CONSTITUTIONAL
    }


# -- calculator implementations ------------------------------------------


def _molecular_weight(ctx: _MolContext) -> float:
    total = 0.0
    for atom in ctx.mol.atoms:
        mass = ATOMIC_MASS.get(atom.element)
        if mass is None:
            raise KeyError(f"no atomic mass for element {atom.element!r}")
        total += mass + atom.total_h * ATOMIC_MASS["H"]
    return total


def _bond_order_count(ctx: _MolContext, order: str) -> float:
    return float(sum(1 for b in ctx.mol.bonds if b.order == order))


def _degree_count(ctx: _MolContext, degree: int) -> float:
    return float(sum(1 for d in ctx.degrees if d == degree))


def _element_count(ctx: _MolContext, symbols: frozenset[str] | set[str]) -> float:
    return float(sum(1 for a in ctx.mol.atoms if a.element in symbols))


def _mean_degree(ctx: _MolContext) -> float:
    return 2.0 * len(ctx.mol.bonds) / ctx.n


def _edge_sum(ctx: _MolContext, term) -> float:
    return float(sum(term(du, dv) for du, dv in ctx.edge_degrees()))


def _wiener(ctx: _MolContext) -> float:
    return float(ctx.dist.sum()) / 2.0


def _mean_distance(ctx: _MolContext) -> float:
    pairs = ctx.n * (ctx.n - 1) / 2
    if pairs == 0:
        return 0.0
    return _wiener(ctx) / pairs


def _wiener_polarity(ctx: _MolContext) -> float:
    d = ctx.dist
    return float((np.triu(d == 3).sum()))


def _harary(ctx: _MolContext) -> float:
    d = ctx.dist.astype(float)
    upper = d[np.triu_indices(ctx.n, k=1)]
    return float((1.0 / upper[upper > 0]).sum()) if upper.size else 0.0


def _balaban_j(ctx: _MolContext) -> float:
    """Distance-sum connectivity index J = m/(mu+1) * sum 1/sqrt(Su*Sv)."""
    m = len(ctx.mol.bonds)
    if m == 0:
        return 0.0
    mu = m - ctx.n + 1
    row_sums = ctx.dist.sum(axis=1).astype(float)
    total = sum(
        1.0 / math.sqrt(row_sums[b.a] * row_sums[b.b]) for b in ctx.mol.bonds
    )
    return float(m / (mu + 1.0) * total)


def _schultz(ctx: _MolContext) -> float:
    """Degree-weighted distance sum over unordered pairs: (du+dv)*dist."""
    deg = np.asarray(ctx.degrees, dtype=float)
    d = ctx.dist.astype(float)
    pair_weight = deg[:, None] + deg[None, :]
    return float((pair_weight * d).sum() / 2.0)


def _gutman(ctx: _MolContext) -> float:
    """Degree-product-weighted distance sum over unordered pairs."""
    deg = np.asarray(ctx.degrees, dtype=float)
    d = ctx.dist.astype(float)
    pair_weight = deg[:, None] * deg[None, :]
    return float((pair_weight * d).sum() / 2.0)


def _terminal_wiener(ctx: _MolContext) -> float:
    terminals = [i for i, d in enumerate(ctx.degrees) if d == 1]
    if len(terminals) < 2:
        return 0.0
    d = ctx.dist
    return float(sum(
        int(d[a, b]) for i, a in enumerate(terminals) for b in terminals[i + 1:]
    ))


def _ring_atoms(ctx: _MolContext) -> float:
    return float(len({i for ring in ctx.mol.rings for i in ring}))


def _ring_sizes(ctx: _MolContext) -> list[int]:
    return [len(ring) for ring in ctx.mol.rings]


def _fused_ring_bonds(ctx: _MolContext) -> float:
    counts: dict[tuple[int, int], int] = {}
    for ring in ctx.mol.rings:
        for i, a in enumerate(ring):
            b = ring[(i + 1) % len(ring)]
            key = (a, b) if a < b else (b, a)
            counts[key] = counts.get(key, 0) + 1
    return float(sum(1 for c in counts.values() if c > 1))


def _electronegativities(ctx: _MolContext) -> list[float]:
    values = []
    for atom in ctx.mol.atoms:
        en = ELECTRONEGATIVITY.get(atom.element)
        if en is None:
            raise KeyError(f"no electronegativity for element {atom.element!r}")
        values.append(en)
    return values


def _mean_atomic_mass(ctx: _MolContext) -> float:
    total_atoms = ctx.n + sum(a.total_h for a in ctx.mol.atoms)
    return _molecular_weight(ctx) / total_atoms


_CONSTITUTIONAL = (
    "heavy_atoms",
    "bonds",
    "rings",
    "aromatic_atoms",
    "aromatic_bonds",
    "heteroatoms",
    "total_hydrogens",
    "molecular_weight",
)

_CALCULATORS: dict[str, object] = {
    # constitutional
    "heavy_atoms": lambda ctx: float(ctx.n),
    "bonds": lambda ctx: float(len(ctx.mol.bonds)),
    "rings": lambda ctx: float(len(ctx.mol.rings)),
    "aromatic_atoms": lambda ctx: float(sum(a.is_aromatic for a in ctx.mol.atoms)),
    "aromatic_bonds": lambda ctx: _bond_order_count(ctx, AROMATIC),
    "heteroatoms": lambda ctx: float(
        sum(1 for a in ctx.mol.atoms if a.element != "C")),
    "total_hydrogens": lambda ctx: float(ctx.mol.total_hydrogens()),
    "molecular_weight": _molecular_weight,
    "carbon_count": lambda ctx: _element_count(ctx, {"C"}),
    "nitrogen_count": lambda ctx: _element_count(ctx, {"N"}),
    "oxygen_count": lambda ctx: _element_count(ctx, {"O"}),
    "sulfur_count": lambda ctx: _element_count(ctx, {"S"}),
    "halogen_count": lambda ctx: _element_count(ctx, HALOGENS),
    "degree_1_atoms": lambda ctx: _degree_count(ctx, 1),
    "degree_2_atoms": lambda ctx: _degree_count(ctx, 2),
    "degree_3_atoms": lambda ctx: _degree_count(ctx, 3),
    "degree_4_atoms": lambda ctx: _degree_count(ctx, 4),
    "single_bonds": lambda ctx: _bond_order_count(ctx, SINGLE),
    "double_bonds": lambda ctx: _bond_order_count(ctx, DOUBLE),
    "triple_bonds": lambda ctx: _bond_order_count(ctx, TRIPLE),
    # degree-based indices
    "mean_degree": _mean_degree,
    "zagreb_m1": lambda ctx: float(sum(d * d for d in ctx.degrees)),
    "zagreb_m2": lambda ctx: _edge_sum(ctx, lambda du, dv: du * dv),
    "randic": lambda ctx: _edge_sum(ctx, lambda du, dv: 1.0 / math.sqrt(du * dv)),
    "abc": lambda ctx: _edge_sum(
        ctx, lambda du, dv: math.sqrt((du + dv - 2) / (du * dv))),
    "harmonic": lambda ctx: _edge_sum(ctx, lambda du, dv: 2.0 / (du + dv)),
    "geometric_arithmetic": lambda ctx: _edge_sum(
        ctx, lambda du, dv: 2.0 * math.sqrt(du * dv) / (du + dv)),
    "sum_connectivity": lambda ctx: _edge_sum(
        ctx, lambda du, dv: 1.0 / math.sqrt(du + dv)),
    "hyper_zagreb": lambda ctx: _edge_sum(ctx, lambda du, dv: (du + dv) ** 2),
    "forgotten": lambda ctx: float(sum(d ** 3 for d in ctx.degrees)),
    "modified_zagreb": lambda ctx: _edge_sum(ctx, lambda du, dv: 1.0 / (du * dv)),
    "reciprocal_randic": lambda ctx: _edge_sum(
        ctx, lambda du, dv: math.sqrt(du * dv)),
    "albertson": lambda ctx: _edge_sum(ctx, lambda du, dv: abs(du - dv)),
    "platt": lambda ctx: _edge_sum(ctx, lambda du, dv: du + dv - 2),
    # distance-based indices
    "wiener": _wiener,
    "mean_distance": _mean_distance,
    "diameter": lambda ctx: float(ctx.dist.max()),
    "radius": lambda ctx: float(ctx.eccentricities.min()),
    "total_eccentricity": lambda ctx: float(ctx.eccentricities.sum()),
    "mean_eccentricity": lambda ctx: float(ctx.eccentricities.mean()),
    "eccentric_connectivity": lambda ctx: float(
        sum(d * int(e) for d, e in zip(ctx.degrees, ctx.eccentricities))),
    "wiener_polarity": _wiener_polarity,
    "harary": _harary,
    "balaban_j": _balaban_j,
    "schultz": _schultz,
    "gutman": _gutman,
    "terminal_wiener": _terminal_wiener,
    # ring statistics
    "ring_atoms": _ring_atoms,
    "ring_atom_fraction": lambda ctx: _ring_atoms(ctx) / ctx.n,
    "largest_ring": lambda ctx: float(max(_ring_sizes(ctx), default=0)),
    "smallest_ring": lambda ctx: float(min(_ring_sizes(ctx), default=0)),
    "mean_ring_size": lambda ctx: (
        float(np.mean(_ring_sizes(ctx))) if ctx.mol.rings else 0.0),
    "fused_ring_bonds": _fused_ring_bonds,
    # electronic proxies
    "heteroatom_fraction": lambda ctx: float(
        sum(1 for a in ctx.mol.atoms if a.element != "C")) / ctx.n,
    "aromatic_atom_fraction": lambda ctx: float(
        sum(a.is_aromatic for a in ctx.mol.atoms)) / ctx.n,
    "halogen_fraction": lambda ctx: _element_count(ctx, HALOGENS) / ctx.n,
    "mean_atomic_mass": _mean_atomic_mass,
    "total_electronegativity": lambda ctx: float(sum(_electronegativities(ctx))),
    "mean_electronegativity": lambda ctx: float(np.mean(_electronegativities(ctx))),
    "electronegativity_range": lambda ctx: (
        float(max(_electronegativities(ctx)) - min(_electronegativities(ctx)))),
    "polar_atom_count": lambda ctx: _element_count(ctx, {"N", "O"}),
}

ALL_DESCRIPTORS: tuple[str, ...] = tuple(_CALCULATORS)

_CORE = (
    "heavy_atoms", "bonds", "rings", "aromatic_atoms", "heteroatoms",
    "total_hydrogens", "molecular_weight", "mean_degree", "zagreb_m1",
    "zagreb_m2", "randic", "abc", "wiener", "mean_distance", "diameter",
    "eccentric_connectivity",
)


@dataclass(frozen=True)
class DescriptorSet:
    """A named, ordered selection from the descriptor catalogue."""

    name: str
    descriptors: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.descriptors)


DESCRIPTOR_SETS: dict[str, DescriptorSet] = {
    "all": DescriptorSet("all", ALL_DESCRIPTORS),
    "core": DescriptorSet("core", _CORE),
}


def get_descriptor_set(name: str) -> DescriptorSet:
    try:
        return DESCRIPTOR_SETS[name]
    except KeyError:
        known = ", ".join(sorted(DESCRIPTOR_SETS))
        raise KeyError(f"unknown descriptor set {name!r} (known: {known})") from None


@dataclass
class DescriptorMatrix:
    """Row-per-molecule descriptor values with their column names."""

    columns: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[1] != len(self.columns):
            raise ValueError("descriptor matrix shape does not match column names")


def compute_all(mol: MolecularGraph,
                descriptor_set: DescriptorSet | str = "all") -> np.ndarray:
    """Descriptor vector for one standardized molecule.

    The result is aligned with the set's descriptor order. A calculator
    that fails contributes NaN; everything else is unaffected.

    Raises:
        ValueError: if the molecule is disconnected (standardize first).
    """
    if isinstance(descriptor_set, str):
        descriptor_set = get_descriptor_set(descriptor_set)
    if len(mol.atoms) == 0:
        raise ValueError("cannot featurize an empty molecule")
    seen = set()
    stack = [0]
    adj = mol.adjacency()
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen.add(node)
        stack.extend(b.other(node) for b in adj[node])
    if len(seen) != len(mol.atoms):
        raise ValueError(
            "descriptors are defined on connected graphs; standardize the molecule first")
    ctx = _MolContext(mol)
    out = np.empty(len(descriptor_set), dtype=np.float64)
    for i, name in enumerate(descriptor_set.descriptors):
        try:
            out[i] = _CALCULATORS[name](ctx)
        except Exception as exc:  # per-calculator isolation
            logger.debug("descriptor %s failed on %r: %s", name, mol.source_smiles, exc)
            out[i] = MISSING
    return out


def compute_matrix(mols, descriptor_set: DescriptorSet | str = "all",
                   n_workers: int = 1) -> DescriptorMatrix:
    """Descriptor matrix for a sequence of molecules, row order preserved.

    With ``n_workers > 1`` molecules are distributed over a process pool;
    results are gathered by input index so the output is identical to the
    serial path.
    """
    if isinstance(descriptor_set, str):
        descriptor_set = get_descriptor_set(descriptor_set)
    mols = list(mols)
    if n_workers > 1 and len(mols) > 1:
        with Pool(processes=n_workers) as pool:
            rows = pool.map(partial(compute_all, descriptor_set=descriptor_set), mols)
    else:
        rows = [compute_all(mol, descriptor_set) for mol in mols]
    values = np.vstack(rows) if rows else np.empty((0, len(descriptor_set)))
    return DescriptorMatrix(descriptor_set.descriptors, values)
