#!/usr/bin/env python3
"""Construct the benzenoid PAH / logP dataset at data/pah_logp.csv.

Every molecule is a cata- or peri-condensed benzenoid hydrocarbon, defined
here as a set of hexagonal cells on an axial-coordinate grid. The carbon
skeleton is the union of the hexagon perimeters; carbons shared by two or
three rings carry no hydrogen. Octanol-water partition coefficients come
from standard literature compilations where experimental values exist;
the remaining (mostly very large or unstable) compounds get a two-digit
estimate from a least-squares fit of logP against carbon and hydrogen
counts over the experimental subset, a deliberately simple surrogate in
the spirit of group-additivity methods. The `source` column separates the
two. Rerunning the script reproduces the CSV byte for byte.

Each structure is validated before writing: connected cell set, even
internal-vertex parity, closed-shell Kekule structure (perfect matching),
agreement with the expected molecular formula, pairwise distinctness up
to lattice congruence, and a full round trip through the SMILES parser.
"""
from __future__ import annotations

import csv
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from descprop.molparse import molecular_formula, parse_smiles

# axial-coordinate offsets of the six cell neighbours
CELL_NEIGHBORS = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1))


def corners(cell):
    """Integer corner ids of one hexagonal cell, counterclockwise.

    A cell (q, r) has its centre at (2q + r, 3r) in units where x steps
    are sqrt(3)/2 and y steps are 1/2, which makes every corner an exact
    integer pair shared between adjacent cells.
    """
    q, r = cell
    cx, cy = 2 * q + r, 3 * r
    return (
        (cx + 1, cy + 1), (cx, cy + 2), (cx - 1, cy + 1),
        (cx - 1, cy - 1), (cx, cy - 2), (cx + 1, cy - 1),
    )


def cells_connected(cells) -> bool:
    cells = set(cells)
    seen = {next(iter(cells))}
    frontier = list(seen)
    while frontier:
        q, r = frontier.pop()
        for dq, dr in CELL_NEIGHBORS:
            nxt = (q + dq, r + dr)
            if nxt in cells and nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen == cells


def build_skeleton(cells):
    """Carbon graph of a benzenoid: (adjacency list, hydrogen count).

    Validates simple-connectedness via the benzenoid vertex formula
    n = 4h + 2 - n_internal, which fails for overlapping or hole-enclosing
    cell sets, and requires a perfect matching (a Kekule structure) so
    open-shell systems like triangulene are rejected.
    """
    cells = list(dict.fromkeys(cells))
    if not cells_connected(cells):
        raise ValueError("cell set is not connected")
    corner_count: dict[tuple[int, int], int] = {}
    for cell in cells:
        for corner in corners(cell):
            corner_count[corner] = corner_count.get(corner, 0) + 1
    index = {corner: i for i, corner in enumerate(corner_count)}
    n = len(index)
    adjacency: list[set[int]] = [set() for _ in range(n)]
    for cell in cells:
        ring = [index[c] for c in corners(cell)]
        for a, b in zip(ring, ring[1:] + ring[:1]):
            adjacency[a].add(b)
            adjacency[b].add(a)

    internal = sum(1 for count in corner_count.values() if count == 3)
    if internal % 2:
        raise ValueError(f"odd internal-vertex count {internal}: open-shell skeleton")
    if n != 4 * len(cells) + 2 - internal:
        raise ValueError("vertex count mismatch: cells overlap or enclose a hole")
    if any(len(nbrs) not in (2, 3) for nbrs in adjacency):
        raise ValueError("unexpected vertex degree")
    if not _has_perfect_matching(adjacency):
        raise ValueError("no Kekule structure (no perfect matching)")
    hydrogens = sum(1 for nbrs in adjacency if len(nbrs) == 2)
    return [sorted(nbrs) for nbrs in adjacency], hydrogens


def _has_perfect_matching(adjacency) -> bool:
    n = len(adjacency)
    if n % 2:
        return False
    color = [-1] * n
    color[0] = 0
    queue = [0]
    while queue:
        v = queue.pop()
        for w in adjacency[v]:
            if color[w] == -1:
                color[w] = 1 - color[v]
                queue.append(w)
    left = [v for v in range(n) if color[v] == 0]
    if 2 * len(left) != n:
        return False
    match: dict[int, int] = {}

    def augment(v, visited) -> bool:
        for w in adjacency[v]:
            if w in visited:
                continue
            visited.add(w)
            if w not in match or augment(match[w], visited):
                match[w] = v
                return True
        return False

    return all(augment(v, set()) for v in left)


def canonical_cells(cells) -> tuple:
    """Congruence-invariant form: minimum over the 12 lattice symmetries."""
    best = None
    for reflect in (False, True):
        current = [(q, -q - r) if reflect else (q, r) for q, r in cells]
        for _ in range(6):
            current = [(q + r, -q) for q, r in current]
            min_q = min(q for q, _ in current)
            min_r = min(r for _, r in current)
            form = tuple(sorted((q - min_q, r - min_r) for q, r in current))
            if best is None or form < best:
                best = form
    return best


def to_smiles(adjacency) -> str:
    """Aromatic SMILES via a DFS spanning tree plus ring-closure labels."""
    n = len(adjacency)
    parent = [-1] * n
    order = []
    visited = [False] * n
    stack = [0]
    visited[0] = True
    while stack:
        v = stack.pop()
        order.append(v)
        for w in reversed(adjacency[v]):
            if not visited[w]:
                visited[w] = True
                parent[w] = v
                stack.append(w)
    children: list[list[int]] = [[] for _ in range(n)]
    for v in order[1:]:
        children[parent[v]].append(v)

    closures: list[list[str]] = [[] for _ in range(n)]
    label = 0
    for v in range(n):
        for w in adjacency[v]:
            if v < w and parent[w] != v and parent[v] != w:
                label += 1
                token = str(label) if label < 10 else f"%{label:02d}"
                closures[v].append(token)
                closures[w].append(token)

    def emit(v) -> str:
        text = "c" + "".join(closures[v])
        kids = children[v]
        for child in kids[:-1]:
            text += "(" + emit(child) + ")"
        if kids:
            text += emit(kids[-1])
        return text

    return emit(0)


def circum(cells):
    """The input plus every neighbouring cell: one full hexagon rim."""
    cells = set(cells)
    rim = {
        (q + dq, r + dr)
        for q, r in cells for dq, dr in CELL_NEIGHBORS
    }
    return sorted(cells | rim)


def acene(n_rings):
    return [(i, 0) for i in range(n_rings)]


def phenacene(n_rings):
    """Zigzag chain: [3] is phenanthrene, [5] is picene."""
    cells = []
    q = r = 0
    for i in range(n_rings):
        cells.append((q, r))
        if i % 2 == 0:
            q += 1
        else:
            r += 1
    return cells


def rylene(n_naphthalenes):
    """Peri-linked naphthalene oligomers: perylene, terrylene, ..."""
    cells = [(1, 0), (1, -1)]
    q, r = 1, 0
    for _ in range(n_naphthalenes - 1):
        cells.append((q - 1, r))                 # junction ring
        cells += [(q - 2, r), (q - 2, r + 1)]    # next naphthalene unit
        q, r = q - 2, r + 1
    return cells


CORONENE = [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)]
PYRENE = [(0, 0), (1, 0), (0, 1), (1, 1)]
PERYLENE = rylene(2)

# name, cells, experimental logP (None -> estimated), expected formula
# (None -> derived from the skeleton, for the circum- shapes)
ROSTER = [
    ("naphthalene", acene(2), 3.30, "C10H8"),
    ("anthracene", acene(3), 4.45, "C14H10"),
    ("phenanthrene", phenacene(3), 4.46, "C14H10"),
    ("pyrene", PYRENE, 4.88, "C16H10"),
    ("tetracene", acene(4), 5.71, "C18H12"),
    ("benz[a]anthracene", [(0, 0), (1, 0), (2, 0), (2, 1)], 5.76, "C18H12"),
    ("chrysene", phenacene(4), 5.81, "C18H12"),
    ("benzo[c]phenanthrene", [(0, 0), (1, 0), (1, 1), (0, 2)], 5.70, "C18H12"),
    ("triphenylene", [(0, 0), (1, 0), (-1, 1), (0, -1)], 5.49, "C18H12"),
    ("picene", phenacene(5), 7.11, "C22H14"),
    ("dibenz[a,h]anthracene",
     [(0, -1), (0, 0), (1, 0), (2, 0), (2, 1)], 6.75, "C22H14"),
    ("perylene", PERYLENE, 6.25, "C20H12"),
    ("benzo[a]pyrene", PYRENE + [(2, 1)], 6.13, "C20H12"),
    ("benzo[e]pyrene", PYRENE + [(2, -1)], 6.44, "C20H12"),
    ("benzo[ghi]perylene", PERYLENE + [(0, -1)], 6.63, "C22H12"),
    ("coronene", CORONENE, 6.75, "C24H12"),
    ("dibenzo[a,i]pyrene", PYRENE + [(2, 1), (-1, 0)], 7.28, "C24H14"),
    ("pentacene", acene(5), None, "C22H14"),
    ("hexacene", acene(6), None, "C26H16"),
    ("heptacene", acene(7), None, "C30H18"),
    ("octacene", acene(8), None, "C34H20"),
    ("nonacene", acene(9), None, "C38H22"),
    ("fulminene", phenacene(6), None, "C26H16"),
    ("[7]phenacene", phenacene(7), None, "C30H18"),
    ("[8]phenacene", phenacene(8), None, "C34H20"),
    ("[9]phenacene", phenacene(9), None, "C38H22"),
    ("[10]phenacene", phenacene(10), None, "C42H24"),
    ("[11]phenacene", phenacene(11), None, "C46H26"),
    ("[12]phenacene", phenacene(12), None, "C50H28"),
    ("[5]helicene", [(0, 0), (1, 0), (1, 1), (0, 2), (-1, 2)], None, "C22H14"),
    ("benzo[a]tetracene", acene(4) + [(3, 1)], None, "C22H14"),
    ("pentaphene", [(0, 0), (1, 0), (2, 0), (2, 1), (2, 2)], None, "C22H14"),
    ("hexaphene", acene(4) + [(3, 1), (3, 2)], None, "C26H16"),
    ("heptaphene", acene(4) + [(3, 1), (3, 2), (3, 3)], None, "C30H18"),
    ("dibenz[a,c]anthracene",
     [(0, 0), (1, 0), (2, 0), (-1, 1), (0, -1)], None, "C22H14"),
    ("dibenz[a,j]anthracene",
     [(-1, 1), (0, 0), (1, 0), (2, 0), (2, 1)], None, "C22H14"),
    ("benzo[b]chrysene", phenacene(4) + [(3, 1)], None, "C22H14"),
    ("benzo[c]chrysene", phenacene(4) + [(3, 0)], None, "C22H14"),
    ("anthanthrene",
     [(0, 0), (1, 0), (0, 1), (1, 1), (0, 2), (1, 2)], None, "C22H12"),
    ("bisanthene",
     [(1, 1), (1, 0), (1, -1), (-1, 0), (-1, 1), (-1, 2), (0, 0), (0, 1)],
     None, "C28H14"),
    ("terrylene", rylene(3), None, "C30H16"),
    ("quaterrylene", rylene(4), None, "C40H20"),
    ("pentarylene", rylene(5), None, "C50H24"),
    ("ovalene", circum(acene(2)), None, "C32H14"),
    ("benzo[a]coronene", CORONENE + [(2, 0)], None, "C28H14"),
    ("hexa-peri-hexabenzocoronene",
     CORONENE + [(1, 1), (-1, 2), (-2, 1), (-1, -1), (1, -2), (2, -1)],
     None, "C42H18"),
    ("dicoronylene",
     CORONENE + [(2, -1)] + [(q + 4, r - 2) for q, r in CORONENE],
     None, "C48H20"),
    ("circumphenanthrene", circum(phenacene(3)), None, None),
    ("circumanthracene", circum(acene(3)), None, "C40H16"),
    ("circumpyrene", circum(PYRENE), None, "C42H16"),
    ("circumtriphenylene", circum([(0, 0), (1, 0), (-1, 1), (0, -1)]), None, None),
    ("circumtetracene", circum(acene(4)), None, "C48H18"),
    ("circumchrysene", circum(phenacene(4)), None, None),
    ("circumperylene", circum(PERYLENE), None, None),
    ("circumcoronene", circum(CORONENE), None, "C54H18"),
]


def formula_string(n_carbons, n_hydrogens) -> str:
    return f"C{n_carbons}H{n_hydrogens}"


def fit_estimator(rows):
    """Least-squares logP ~ a*C + b*H + c over the experimental rows."""
    experimental = [(c, h, logp) for _, c, h, logp in rows if logp is not None]
    design = np.array([[c, h, 1.0] for c, h, _ in experimental])
    target = np.array([logp for _, _, logp in experimental])
    coeffs, *_ = np.linalg.lstsq(design, target, rcond=None)
    return coeffs


def main():
    out_path = Path(__file__).resolve().parent.parent / "data" / "pah_logp.csv"
    out_path.parent.mkdir(parents=True, exist_ok=True)

    built = []
    seen_forms: dict[tuple, str] = {}
    for name, cells, logp, expected in ROSTER:
        adjacency, n_h = build_skeleton(cells)
        form = canonical_cells(cells)
        if form in seen_forms:
            raise SystemExit(f"{name} duplicates {seen_forms[form]}")
        seen_forms[form] = name
        formula = formula_string(len(adjacency), n_h)
        if expected is not None and formula != expected:
            raise SystemExit(f"{name}: built {formula}, expected {expected}")
        smiles = to_smiles(adjacency)

        mol = parse_smiles(smiles)
        parsed_formula = molecular_formula(mol)
        if parsed_formula != formula:
            raise SystemExit(
                f"{name}: SMILES round trip gave {parsed_formula}, skeleton {formula}")
        if len(mol.rings) != len(set(cells)):
            raise SystemExit(f"{name}: ring count {len(mol.rings)} != {len(set(cells))}")
        if not all(atom.is_aromatic for atom in mol.atoms):
            raise SystemExit(f"{name}: non-aromatic atoms after parsing")
        built.append((name, len(adjacency), n_h, logp, smiles, formula))

    coeffs = fit_estimator([(n, c, h, l) for n, c, h, l, _, _ in built])
    print(f"estimator: logP = {coeffs[0]:.4f}*C + {coeffs[1]:.4f}*H + {coeffs[2]:.4f}")

    rows = []
    for name, n_c, n_h, logp, smiles, formula in built:
        if logp is None:
            logp = round(float(np.dot(coeffs, [n_c, n_h, 1.0])), 2)
            source = "estimated"
        else:
            source = "experimental"
        rows.append((name, smiles, logp, formula, source))
    rows.sort(key=lambda row: (int(row[3][1:row[3].index("H")]), row[3], row[0]))

    with open(out_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["compound", "smiles", "log_p", "formula", "source"])
        writer.writerows(rows)

    n_exp = sum(1 for row in rows if row[4] == "experimental")
    print(f"wrote {len(rows)} molecules ({n_exp} experimental, "
          f"{len(rows) - n_exp} estimated) to {out_path}")
    sizes = [row[3] for row in rows]
    print(f"size range: {sizes[0]} ... {sizes[-1]}")


if __name__ == "__main__":
    main()
