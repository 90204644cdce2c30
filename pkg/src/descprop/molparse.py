"""SMILES parsing into molecular graphs.

The reader covers the slice of SMILES that shows up in property-prediction
CSV files: organic-subset atoms, bracket atoms with charge and explicit
hydrogen counts, branches, ring-bond digits (including ``%nn``), the bond
symbols ``- = # :``, dot-separated fragments, and lowercase aromatic
notation. Stereo markers (``/``, ``\\``, ``@``) and isotope labels are
accepted and discarded; wedge-level geometry plays no role in the
descriptors computed downstream.

Aromaticity is handled with a deliberately simple model:

* atoms written in lowercase are aromatic by declaration and must sit in
  a ring;
* a ring written in uppercase Kekule form is promoted to aromatic when
  every ring atom can contribute to the pi system (a double bond into the
  ring system, or a lone pair on N/O/S/P) and the contributions sum to
  4n + 2.

That is adequate for benzenoid chemistry and common heteroaromatics; it
makes no attempt at toolkit-grade perception of exotic systems.

Hydrogen counts are implicit for organic-subset atoms (filled up to the
smallest tabulated valence) and explicit-only for bracket atoms, as in
standard SMILES. Any atom whose bond orders cannot be reconciled with a
tabulated valence is a parse error rather than a silent acceptance.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

import numpy as np

from .elements import ORGANIC_SUBSET, AROMATIC_ORGANIC, VALENCES, allowed_valences
from .errors import SmilesParseError

logger = logging.getLogger(__name__)

SINGLE = "single"
DOUBLE = "double"
TRIPLE = "triple"
AROMATIC = "aromatic"

_BOND_SYMBOLS = {"-": SINGLE, "=": DOUBLE, "#": TRIPLE, ":": AROMATIC}
BOND_ORDER_VALUE = {SINGLE: 1, DOUBLE: 2, TRIPLE: 3, AROMATIC: 1.5}

_BRACKET_RE = re.compile(
    r"^(?P<isotope>\d+)?"
    r"(?P<element>[A-Z][a-z]?|[a-z]{1,2})"
    r"(?P<stereo>@{1,2})?"
    r"(?P<hcount>H\d*)?"
    r"(?P<charge>\+\d+|-\d+|\++|-+)?"
    r"(?::(?P<cls>\d+))?$"
)


@dataclass
class Atom:
    """One heavy atom of a molecular graph."""

    element: str
    index: int
    formal_charge: int = 0
    is_aromatic: bool = False
    explicit_h: int = 0
    implicit_h: int = 0
    from_bracket: bool = False

    @property
    def total_h(self) -> int:
        return self.explicit_h + self.implicit_h


@dataclass
class Bond:
    """An edge between two atom indices."""

    a: int
    b: int
    order: str

    def key(self) -> tuple[int, int]:
        return (self.a, self.b) if self.a < self.b else (self.b, self.a)

    def other(self, idx: int) -> int:
        return self.b if idx == self.a else self.a


@dataclass
class MolecularGraph:
    """Parsed molecule: atoms, bonds, perceived rings, source text."""

    atoms: list[Atom]
    bonds: list[Bond]
    rings: list[tuple[int, ...]] = field(default_factory=list)
    source_smiles: str = ""

    def __post_init__(self):
        self._adjacency: list[list[Bond]] | None = None

    def adjacency(self) -> list[list[Bond]]:
        """Bond lists indexed by atom, built lazily and cached."""
        if self._adjacency is None or len(self._adjacency) != len(self.atoms):
            adj: list[list[Bond]] = [[] for _ in self.atoms]
            for bond in self.bonds:
                adj[bond.a].append(bond)
                adj[bond.b].append(bond)
            self._adjacency = adj
        return self._adjacency

    def degree(self, idx: int) -> int:
        return len(self.adjacency()[idx])

    def neighbors(self, idx: int) -> list[int]:
        return [bond.other(idx) for bond in self.adjacency()[idx]]

    def ring_membership(self) -> list[int]:
        """Number of perceived rings each atom belongs to."""
        counts = [0] * len(self.atoms)
        for ring in self.rings:
            for idx in ring:
                counts[idx] += 1
        return counts

    def total_hydrogens(self) -> int:
        return sum(a.total_h for a in self.atoms)


def _tokenize_error(smiles: str, pos: int, message: str) -> SmilesParseError:
    return SmilesParseError(message, smiles=smiles, position=pos)


class _Parser:
    """Single-pass SMILES scanner building an atom/bond list."""

    def __init__(self, smiles: str):
        self.smiles = smiles
        self.atoms: list[Atom] = []
        self.bonds: list[Bond] = []
        self.bond_keys: set[tuple[int, int]] = set()
        self.prev: int | None = None
        self.pending_bond: str | None = None
        self.pending_explicit: bool = False
        self.branch_stack: list[int | None] = []
        # ring number -> (atom index, bond symbol or None)
        self.open_rings: dict[int, tuple[int, str | None]] = {}

    def parse(self) -> MolecularGraph:
        smiles = self.smiles
        if not smiles or not smiles.strip():
            raise SmilesParseError("empty SMILES string", smiles=smiles)
        i = 0
        n = len(smiles)
        while i < n:
            ch = smiles[i]
            if ch == "[":
                end = smiles.find("]", i)
                if end < 0:
                    raise _tokenize_error(smiles, i, "unterminated bracket atom")
                self._add_bracket_atom(smiles[i + 1:end], i)
                i = end + 1
            elif ch.isalpha():
                if smiles[i:i + 2] in ("Cl", "Br"):
                    self._add_organic_atom(smiles[i:i + 2], i)
                    i += 2
                elif ch in ORGANIC_SUBSET:
                    self._add_organic_atom(ch, i)
                    i += 1
                elif ch in AROMATIC_ORGANIC:
                    self._add_organic_atom(ch, i)
                    i += 1
                else:
                    raise _tokenize_error(smiles, i, f"unknown element token {ch!r}")
            elif ch in _BOND_SYMBOLS:
                if self.pending_bond is not None:
                    raise _tokenize_error(smiles, i, "two bond symbols in a row")
                if self.prev is None:
                    raise _tokenize_error(smiles, i, "bond symbol with no preceding atom")
                self.pending_bond = _BOND_SYMBOLS[ch]
                self.pending_explicit = True
                i += 1
            elif ch in "/\\":
                # stereo bond decorations: read as plain single bonds
                i += 1
            elif ch.isdigit():
                self._ring_bond(int(ch), i)
                i += 1
            elif ch == "%":
                if i + 2 >= n or not smiles[i + 1:i + 3].isdigit():
                    raise _tokenize_error(smiles, i, "malformed %nn ring number")
                self._ring_bond(int(smiles[i + 1:i + 3]), i)
                i += 3
            elif ch == "(":
                if self.prev is None:
                    raise _tokenize_error(smiles, i, "branch opened before any atom")
                if self.pending_bond is not None:
                    raise _tokenize_error(smiles, i, "bond symbol before branch opening")
                self.branch_stack.append(self.prev)
                i += 1
            elif ch == ")":
                if not self.branch_stack:
                    raise _tokenize_error(smiles, i, "unbalanced closing parenthesis")
                if self.pending_bond is not None:
                    raise _tokenize_error(smiles, i, "dangling bond symbol before ')'")
                self.prev = self.branch_stack.pop()
                i += 1
            elif ch == ".":
                if self.pending_bond is not None:
                    raise _tokenize_error(smiles, i, "bond symbol before fragment dot")
                self.prev = None
                i += 1
            elif ch.isspace():
                raise _tokenize_error(smiles, i, "whitespace inside SMILES")
            else:
                raise _tokenize_error(smiles, i, f"unexpected character {ch!r}")
        if self.branch_stack:
            raise SmilesParseError("unbalanced opening parenthesis", smiles=smiles)
        if self.open_rings:
            nums = ", ".join(str(k) for k in sorted(self.open_rings))
            raise SmilesParseError(f"unclosed ring bond number(s): {nums}", smiles=smiles)
        if self.pending_bond is not None:
            raise SmilesParseError("dangling bond symbol at end of string", smiles=smiles)
        if not self.atoms:
            raise SmilesParseError("no atoms found", smiles=smiles)
        return MolecularGraph(self.atoms, self.bonds, source_smiles=self.smiles)

    # -- atom handling -------------------------------------------------

    def _add_organic_atom(self, symbol: str, pos: int):
        aromatic = symbol[0].islower()
        element = symbol.capitalize() if aromatic else symbol
        if element not in ORGANIC_SUBSET:
            raise _tokenize_error(self.smiles, pos, f"unknown element token {symbol!r}")
        atom = Atom(element=element, index=len(self.atoms), is_aromatic=aromatic)
        self._attach(atom, pos)

    def _add_bracket_atom(self, body: str, pos: int):
        match = _BRACKET_RE.match(body)
        if not match:
            raise _tokenize_error(self.smiles, pos, f"malformed bracket atom [{body}]")
        raw = match.group("element")
        aromatic = raw[0].islower()
        element = raw.capitalize() if aromatic else raw
        if aromatic and raw not in AROMATIC_ORGANIC:
            raise _tokenize_error(self.smiles, pos, f"unsupported aromatic element {raw!r}")
        if element == "H":
            raise _tokenize_error(
                self.smiles, pos,
                "standalone [H] atoms are unsupported; fold hydrogens into [XHn] counts",
            )
        if element not in VALENCES:
            raise _tokenize_error(self.smiles, pos, f"unknown element token {raw!r}")
        hcount = match.group("hcount")
        explicit_h = 0
        if hcount is not None:
            explicit_h = int(hcount[1:]) if len(hcount) > 1 else 1
        charge_text = match.group("charge")
        charge = 0
        if charge_text:
            if charge_text in ("+", "-") or charge_text[0] * len(charge_text) == charge_text:
                charge = len(charge_text) * (1 if charge_text[0] == "+" else -1)
            else:
                charge = int(charge_text)
        atom = Atom(
            element=element,
            index=len(self.atoms),
            formal_charge=charge,
            is_aromatic=aromatic,
            explicit_h=explicit_h,
            from_bracket=True,
        )
        self._attach(atom, pos)

    def _attach(self, atom: Atom, pos: int):
        self.atoms.append(atom)
        if self.prev is not None:
            order = self.pending_bond
            explicit = self.pending_explicit
            if order is None:
                prev_atom = self.atoms[self.prev]
                order = AROMATIC if (prev_atom.is_aromatic and atom.is_aromatic) else SINGLE
            self._add_bond(self.prev, atom.index, order, pos, explicit=explicit)
        self.pending_bond = None
        self.pending_explicit = False
        self.prev = atom.index

    def _add_bond(self, a: int, b: int, order: str, pos: int, explicit: bool):
        if a == b:
            raise _tokenize_error(self.smiles, pos, "atom bonded to itself")
        key = (a, b) if a < b else (b, a)
        if key in self.bond_keys:
            raise _tokenize_error(self.smiles, pos, "duplicate bond between the same atoms")
        if order == AROMATIC and explicit:
            if not (self.atoms[a].is_aromatic and self.atoms[b].is_aromatic):
                raise _tokenize_error(
                    self.smiles, pos, "':' bond requires aromatic atoms on both ends")
        self.bond_keys.add(key)
        self.bonds.append(Bond(a, b, order))

    # -- ring bonds ----------------------------------------------------

    def _ring_bond(self, number: int, pos: int):
        if self.prev is None:
            raise _tokenize_error(self.smiles, pos, "ring bond digit before any atom")
        symbol = self.pending_bond
        self.pending_bond = None
        self.pending_explicit = False
        if number in self.open_rings:
            start, start_symbol = self.open_rings.pop(number)
            if start_symbol is not None and symbol is not None and start_symbol != symbol:
                raise _tokenize_error(self.smiles, pos, "conflicting ring bond orders")
            order = start_symbol if start_symbol is not None else symbol
            explicit = order is not None
            if order is None:
                a, b = self.atoms[start], self.atoms[self.prev]
                order = AROMATIC if (a.is_aromatic and b.is_aromatic) else SINGLE
            self._add_bond(start, self.prev, order, pos, explicit=explicit)
        else:
            self.open_rings[number] = (self.prev, symbol)


# -- ring perception ----------------------------------------------------


def _connected_components(n_atoms: int, bonds: list[Bond]) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(n_atoms)]
    for bond in bonds:
        adj[bond.a].append(bond.b)
        adj[bond.b].append(bond.a)
    seen = [False] * n_atoms
    components = []
    for start in range(n_atoms):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        comp = []
        while stack:
            node = stack.pop()
            comp.append(node)
            for nb in adj[node]:
                if not seen[nb]:
                    seen[nb] = True
                    stack.append(nb)
        components.append(sorted(comp))
    return components


def _shortest_cycle_through(bond: Bond, adj: list[list[Bond]],
                            n_atoms: int) -> list[int] | None:
    """Vertices of a shortest cycle containing ``bond``, via BFS avoiding it."""
    source, target = bond.a, bond.b
    parent = [-1] * n_atoms
    seen = [False] * n_atoms
    seen[source] = True
    queue = [source]
    while queue:
        nxt = []
        for node in queue:
            for edge in adj[node]:
                if edge is bond:
                    continue
                nb = edge.other(node)
                if not seen[nb]:
                    seen[nb] = True
                    parent[nb] = node
                    nxt.append(nb)
        queue = nxt
        if seen[target]:
            break
    if not seen[target]:
        return None
    path = [target]
    while path[-1] != source:
        path.append(parent[path[-1]])
    return path


def perceive_rings(n_atoms: int, bonds: list[Bond]) -> list[tuple[int, ...]]:
    """A smallest set of smallest rings.

    Candidate cycles are the shortest cycles through each bond; rings are
    accepted smallest-first while linearly independent in the edge space
    over GF(2), until the cyclomatic number of the graph is reached.
    """
    adj: list[list[Bond]] = [[] for _ in range(n_atoms)]
    for bond in bonds:
        adj[bond.a].append(bond)
        adj[bond.b].append(bond)
    n_components = len(_connected_components(n_atoms, bonds))
    cyclomatic = len(bonds) - n_atoms + n_components
    if cyclomatic <= 0:
        return []
    edge_index = {bond.key(): i for i, bond in enumerate(bonds)}

    candidates = []
    for bond in bonds:
        cycle = _shortest_cycle_through(bond, adj, n_atoms)
        if cycle is None:
            continue
        mask = 0
        ok = True
        for i, a in enumerate(cycle):
            b = cycle[(i + 1) % len(cycle)]
            key = (a, b) if a < b else (b, a)
            idx = edge_index.get(key)
            if idx is None:
                ok = False
                break
            mask |= 1 << idx
        if ok:
            candidates.append((len(cycle), tuple(sorted(cycle)), mask, tuple(cycle)))
    candidates.sort(key=lambda item: (item[0], item[1]))

    basis: dict[int, int] = {}  # highest set bit -> reduced vector

    def independent(mask: int) -> bool:
        cur = mask
        while cur:
            high = cur.bit_length() - 1
            if high not in basis:
                basis[high] = cur
                return True
            cur ^= basis[high]
        return False

    rings: list[tuple[int, ...]] = []
    seen_rings: set[tuple[int, ...]] = set()
    for _, sorted_atoms, mask, cycle in candidates:
        if sorted_atoms in seen_rings:
            continue
        if independent(mask):
            rings.append(cycle)
            seen_rings.add(sorted_atoms)
            if len(rings) == cyclomatic:
                break
    return rings


# -- aromaticity and hydrogen assignment ---------------------------------


def _pi_preferences(atom: Atom) -> tuple[int, ...]:
    """Plausible pi-electron donations for an aromatic atom, best first.

    Carbon family members donate one electron; N and P donate one when
    bare (pyridine-like) but two when carrying hydrogen or substituents in
    a three-valent arrangement (pyrrole-like); O and S donate a lone pair.
    """
    if atom.element in ("O", "S"):
        return (0,)
    return (1, 0)


def _assign_hydrogens(mol: MolecularGraph, smiles: str):
    """Fill implicit hydrogen counts and enforce valence rules."""
    order_sums = [0.0] * len(mol.atoms)
    aromatic_degree = [0] * len(mol.atoms)
    for bond in mol.bonds:
        value = BOND_ORDER_VALUE[bond.order]
        if bond.order == AROMATIC:
            aromatic_degree[bond.a] += 1
            aromatic_degree[bond.b] += 1
            order_sums[bond.a] += 1
            order_sums[bond.b] += 1
        else:
            order_sums[bond.a] += value
            order_sums[bond.b] += value

    for atom in mol.atoms:
        base = allowed_valences(atom.element, atom.formal_charge)
        if not base:
            raise SmilesParseError(
                f"no tabulated valence for {atom.element} with charge {atom.formal_charge}",
                smiles=smiles)
        connections = order_sums[atom.index]
        if atom.is_aromatic:
            pi_options = _pi_preferences(atom)
        else:
            pi_options = (0,)
        if atom.from_bracket:
            # bracket atoms carry exactly the hydrogens they were written with
            total_options = [connections + pi + atom.explicit_h for pi in pi_options]
            if not any(abs(total - v) < 1e-9 for total in total_options for v in base):
                raise SmilesParseError(
                    f"valence violation on [{atom.element}] "
                    f"(bonds plus hydrogens do not match an allowed valence)",
                    smiles=smiles)
            atom.implicit_h = 0
        elif atom.is_aromatic:
            # aromatic atoms fill only to the lowest valence; anything that
            # would need a hypervalent form is rejected
            implicit = None
            for pi in pi_options:
                h = base[0] - (connections + pi)
                if h >= -1e-9:
                    implicit = int(round(h))
                    break
            if implicit is None:
                raise SmilesParseError(
                    f"valence violation on aromatic {atom.element.lower()} "
                    f"(bond orders exceed the allowed valence)",
                    smiles=smiles)
            atom.implicit_h = implicit
        else:
            fills = [v for v in base if v >= connections - 1e-9]
            if not fills:
                raise SmilesParseError(
                    f"valence violation on {atom.element} "
                    f"(bond orders exceed every allowed valence)",
                    smiles=smiles)
            atom.implicit_h = int(round(fills[0] - connections))


def _ring_pi_count(mol: MolecularGraph, ring: tuple[int, ...],
                   ring_atom_set: set[int]) -> int | None:
    """Pi electrons a ring would hold, or None if any member is ineligible."""
    total = 0
    for idx in ring:
        atom = mol.atoms[idx]
        if atom.is_aromatic:
            if atom.element in ("O", "S"):
                total += 2
            elif atom.element in ("N", "P") and (atom.explicit_h > 0 or mol.degree(idx) == 3):
                total += 2
            else:
                total += 1
            continue
        double_partners = [
            bond.other(idx)
            for bond in mol.adjacency()[idx]
            if bond.order == DOUBLE
        ]
        if double_partners:
            if any(p in ring_atom_set for p in double_partners):
                total += 1
            else:
                return None  # exocyclic double bond pulls the atom out of the pi system
        else:
            if atom.element in ("N", "O", "S", "P") and atom.formal_charge <= 0:
                total += 2
            else:
                return None
    return total


def _perceive_aromaticity(mol: MolecularGraph, smiles: str):
    """Promote Kekule rings satisfying the 4n+2 count to aromatic."""
    ring_atom_set = {idx for ring in mol.rings for idx in ring}
    changed = True
    while changed:
        changed = False
        for ring in mol.rings:
            if all(mol.atoms[i].is_aromatic for i in ring):
                continue
            count = _ring_pi_count(mol, ring, ring_atom_set)
            if count is None or count < 2 or (count - 2) % 4 != 0:
                continue
            ring_set = set(ring)
            for idx in ring:
                mol.atoms[idx].is_aromatic = True
            for bond in mol.bonds:
                if bond.a in ring_set and bond.b in ring_set:
                    pair = {bond.a, bond.b}
                    consecutive = any(
                        {ring[i], ring[(i + 1) % len(ring)]} == pair
                        for i in range(len(ring))
                    )
                    if consecutive:
                        bond.order = AROMATIC
            changed = True
    mol._adjacency = None


def _finalize(mol: MolecularGraph) -> MolecularGraph:
    smiles = mol.source_smiles
    mol.rings = perceive_rings(len(mol.atoms), mol.bonds)
    ring_bond_keys = set()
    for ring in mol.rings:
        for i, a in enumerate(ring):
            b = ring[(i + 1) % len(ring)]
            ring_bond_keys.add((a, b) if a < b else (b, a))
    # also count bonds inside any cycle (a bond between two ring atoms on
    # the same cycle is recorded above; anything else aromatic-but-acyclic
    # gets demoted to a single bond, which makes unbracketed biphenyl work)
    for bond in mol.bonds:
        if bond.order == AROMATIC and bond.key() not in ring_bond_keys:
            bond.order = SINGLE
    in_ring = [False] * len(mol.atoms)
    for ring in mol.rings:
        for idx in ring:
            in_ring[idx] = True
    for atom in mol.atoms:
        if atom.is_aromatic and not in_ring[atom.index]:
            raise SmilesParseError(
                f"aromatic atom {atom.element.lower()} outside any ring", smiles=smiles)
    mol._adjacency = None
    _assign_hydrogens(mol, smiles)
    _perceive_aromaticity(mol, smiles)
    return mol


def parse_smiles(smiles: str) -> MolecularGraph:
    """Parse a SMILES string into a :class:`MolecularGraph`.

    Raises:
        SmilesParseError: on malformed syntax, unknown elements, unclosed
            rings, unbalanced branches, or valence violations.
    """
    mol = _Parser(smiles).parse()
    return _finalize(mol)


def standardize(mol: MolecularGraph) -> MolecularGraph:
    """Reduce a molecule to its largest covalent fragment.

    Multi-fragment inputs (salts, solvates) keep the fragment with the
    most atoms; ties go to the fragment whose sorted element sequence is
    lexicographically first, then to the earliest-written fragment. Atoms
    are reindexed consecutively in their original order.
    """
    components = _connected_components(len(mol.atoms), mol.bonds)
    if len(components) == 1:
        return mol
    def fragment_key(comp: list[int]):
        elements = tuple(sorted(mol.atoms[i].element for i in comp))
        return (-len(comp), elements, comp[0])
    keep = min(components, key=fragment_key)
    index_map = {old: new for new, old in enumerate(keep)}
    atoms = []
    for old in keep:
        src = mol.atoms[old]
        atoms.append(Atom(
            element=src.element,
            index=index_map[old],
            formal_charge=src.formal_charge,
            is_aromatic=src.is_aromatic,
            explicit_h=src.explicit_h,
            implicit_h=src.implicit_h,
            from_bracket=src.from_bracket,
        ))
    bonds = [
        Bond(index_map[b.a], index_map[b.b], b.order)
        for b in mol.bonds
        if b.a in index_map and b.b in index_map
    ]
    kept = MolecularGraph(atoms, bonds, source_smiles=mol.source_smiles)
    kept.rings = perceive_rings(len(atoms), bonds)
    return kept


def distance_matrix(mol: MolecularGraph) -> np.ndarray:
    """All-pairs topological distances over the heavy-atom graph via BFS.

    Raises:
        ValueError: if the graph is disconnected (standardize first).
    """
    n = len(mol.atoms)
    adj = [mol.neighbors(i) for i in range(n)]
    dist = np.full((n, n), -1, dtype=np.int64)
    for start in range(n):
        dist[start, start] = 0
        queue = [start]
        level = 0
        while queue:
            level += 1
            nxt = []
            for node in queue:
                for nb in adj[node]:
                    if dist[start, nb] < 0:
                        dist[start, nb] = level
                        nxt.append(nb)
            queue = nxt
    if (dist < 0).any():
        raise ValueError(
            "distance matrix undefined for a disconnected graph; "
            "standardize the molecule first")
    return dist


def molecular_formula(mol: MolecularGraph) -> str:
    """Hill-order formula string (C, H, then other elements alphabetically)."""
    counts: dict[str, int] = {}
    hydrogens = 0
    for atom in mol.atoms:
        counts[atom.element] = counts.get(atom.element, 0) + 1
        hydrogens += atom.total_h
    parts = []
    def append(symbol: str, count: int):
        if count == 1:
            parts.append(symbol)
        elif count > 1:
            parts.append(f"{symbol}{count}")
    if "C" in counts:
        append("C", counts.pop("C"))
        append("H", hydrogens)
        hydrogens = 0
    elif hydrogens:
        counts["H"] = counts.get("H", 0) + hydrogens
        hydrogens = 0
    for symbol in sorted(counts):
        append(symbol, counts[symbol])
    return "".join(parts)
