"""Element reference data: masses, valences, electronegativities.

The tables cover the elements this toolkit is expected to meet in organic
property datasets. Anything absent is treated as unknown and rejected at
parse time; descriptor code treats a missing mass or electronegativity as
a per-descriptor failure, not a crash.
"""
from __future__ import annotations

# Standard atomic weights, rounded to three decimals.
ATOMIC_MASS: dict[str, float] = {
    "H": 1.008,
    "Li": 6.94,
    "B": 10.811,
    "C": 12.011,
    "N": 14.007,
    "O": 15.999,
    "F": 18.998,
    "Na": 22.990,
    "Mg": 24.305,
    "Al": 26.982,
    "Si": 28.086,
    "P": 30.974,
    "S": 32.06,
    "Cl": 35.453,
    "K": 39.098,
    "Ca": 40.078,
    "Zn": 65.38,
    "As": 74.922,
    "Se": 78.971,
    "Br": 79.904,
    "Sn": 118.71,
    "I": 126.904,
}

# Pauling electronegativities.
ELECTRONEGATIVITY: dict[str, float] = {
    "H": 2.20,
    "Li": 0.98,
    "B": 2.04,
    "C": 2.55,
    "N": 3.04,
    "O": 3.44,
    "F": 3.98,
    "Na": 0.93,
    "Mg": 1.31,
    "Al": 1.61,
    "Si": 1.90,
    "P": 2.19,
    "S": 2.58,
    "Cl": 3.16,
    "K": 0.82,
    "Ca": 1.00,
    "Zn": 1.65,
    "As": 2.18,
    "Se": 2.55,
    "Br": 2.96,
    "Sn": 1.96,
    "I": 2.66,
}

# Allowed total valences (sum of bond orders plus hydrogens) per element,
# in increasing order. Hydrogen filling always targets the smallest value
# that fits.
VALENCES: dict[str, tuple[int, ...]] = {
    "H": (1,),
    "Li": (1,),
    "B": (3,),
    "C": (4,),
    "N": (3, 5),
    "O": (2,),
    "F": (1,),
    "Na": (1,),
    "Mg": (2,),
    "Al": (3,),
    "Si": (4,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "Cl": (1,),
    "K": (1,),
    "Ca": (2,),
    "Zn": (2,),
    "As": (3, 5),
    "Se": (2, 4, 6),
    "Br": (1,),
    "Sn": (4,),
    "I": (1,),
}

# Periodic group, used only to decide how formal charge shifts the
# allowed valences.
_GROUP: dict[str, int] = {
    "H": 1, "Li": 1, "Na": 1, "K": 1,
    "Mg": 2, "Ca": 2,
    "Zn": 12,
    "B": 13, "Al": 13,
    "C": 14, "Si": 14, "Sn": 14,
    "N": 15, "P": 15, "As": 15,
    "O": 16, "S": 16, "Se": 16,
    "F": 17, "Cl": 17, "Br": 17, "I": 17,
}

# Elements writable without brackets, and their aromatic (lowercase) forms.
ORGANIC_SUBSET = frozenset({"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"})
AROMATIC_ORGANIC = frozenset({"b", "c", "n", "o", "p", "s"})

HALOGENS = frozenset({"F", "Cl", "Br", "I"})


def allowed_valences(element: str, charge: int) -> tuple[int, ...]:
    """Valences an atom of ``element`` with formal ``charge`` may carry.

    A unit of charge shifts each tabulated valence by one: cations of
    electron-rich elements (N+, O+) gain a bond, anions (O-, S-) lose one,
    and the electron-poor side of the table behaves the other way round
    (B- gains a bond). Carbon loses a bond in either direction. Results
    that would go negative are discarded.
    """
    base = VALENCES.get(element)
    if base is None:
        return ()
    if charge == 0:
        return base
    group = _GROUP.get(element, 15)
    if group == 14:
        shifted = [v - abs(charge) for v in base]
    elif group < 14:
        shifted = [v - charge for v in base]
    else:
        shifted = [v + charge for v in base]
    return tuple(v for v in shifted if v >= 0)
