"""Honeycomb lattice geometry with typed links and ordered plaquettes.

Indexing
--------
Unit cells sit on an Lx x Ly grid, ``col`` in [0, Lx) and ``row`` in [0, Ly).
Each cell holds one A and one B site::

    index = 2 * (row * Lx + col) + s,    s = 0 for A, 1 for B

Links (A site always stored first)::

    z-link:  A(col, row)   -- B(col, row)
    x-link:  A(col+1, row) -- B(col, row)
    y-link:  A(col, row+1) -- B(col, row)

Plaquette with reference cell (col, row) walks the hexagon starting at the
A site of that cell::

    1 A(col, row) -> 2 B(col, row) -> 3 A(col+1, row)
      -> 4 B(col+1, row-1) -> 5 A(col+1, row-1) -> 6 B(col, row-1)

Drawn with rows increasing downward this walk is counterclockwise. The link
leaving the hexagon at positions 1..6 has type x, y, z, x, y, z, which is the
Pauli pattern of W_p.
"""

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from models.errors import GeometryError, LatticeSizeError, PlaquetteLookupError


class Sublattice(str, Enum):
    A = "A"
    B = "B"


class LinkType(str, Enum):
    X = "x"
    Y = "y"
    Z = "z"


class Boundary(str, Enum):
    TORUS = "torus"
    OPEN = "open"


# position in the hexagon -> type of the link leaving it
PLAQUETTE_PATTERN = (LinkType.X, LinkType.Y, LinkType.Z, LinkType.X, LinkType.Y, LinkType.Z)


def site_index(row: int, col: int, sublattice: Sublattice, Lx: int) -> int:
    """Dense 0-based site index (cell-major, sublattice-minor)"""
    return 2 * (row * Lx + col) + (0 if sublattice == Sublattice.A else 1)


@dataclass(frozen=True)
class Site:
    cell: Tuple[int, int]  # (row, col)
    sublattice: Sublattice
    index: int


@dataclass(frozen=True)
class Bond:
    endpoints: Tuple[Site, Site]
    link_type: LinkType
    index: int

    @property
    def pair(self) -> Tuple[int, int]:
        """Site indices (A site, B site)"""
        return self.endpoints[0].index, self.endpoints[1].index


@dataclass(frozen=True)
class Plaquette:
    label: int
    sites: Tuple[Site, ...]
    bonds: Tuple[int, ...]  # bonds[k] joins sites[k] and sites[(k + 1) % 6]
    cell: Tuple[int, int]


@dataclass(frozen=True)
class HoneycombLattice:
    Lx: int
    Ly: int
    boundary: Boundary
    sites: Tuple[Site, ...]
    bonds: Tuple[Bond, ...]
    plaquettes: Tuple[Plaquette, ...]
    _bond_lookup: Dict[frozenset, int] = field(init=False, repr=False, compare=False)
    _bond_plaquettes: Dict[int, Tuple[int, ...]] = field(init=False, repr=False, compare=False)
    _site_bonds: Dict[int, Dict[LinkType, int]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lookup = {}
        site_bonds: Dict[int, Dict[LinkType, int]] = {s.index: {} for s in self.sites}
        for bond in self.bonds:
            i, j = bond.pair
            lookup[frozenset((i, j))] = bond.index
            site_bonds[i][bond.link_type] = bond.index
            site_bonds[j][bond.link_type] = bond.index
        owners: Dict[int, List[int]] = {b.index: [] for b in self.bonds}
        for plaquette in self.plaquettes:
            for b in plaquette.bonds:
                owners[b].append(plaquette.label)
        object.__setattr__(self, "_bond_lookup", lookup)
        object.__setattr__(self, "_site_bonds", site_bonds)
        object.__setattr__(self, "_bond_plaquettes", {k: tuple(v) for k, v in owners.items()})

    @property
    def num_sites(self) -> int:
        return len(self.sites)

    @property
    def num_plaquettes(self) -> int:
        return len(self.plaquettes)

    @property
    def is_torus(self) -> bool:
        return self.boundary == Boundary.TORUS

    def site(self, index: int) -> Site:
        """Site by dense index"""
        if not 0 <= index < len(self.sites):
            raise GeometryError("unknown_site", index, len(self.sites))
        return self.sites[index]

    def plaquette(self, label: int) -> Plaquette:
        """Plaquette by label"""
        if not 0 <= label < len(self.plaquettes):
            raise PlaquetteLookupError("unknown_plaquette", label, len(self.plaquettes))
        return self.plaquettes[label]

    def bond_between(self, i: int, j: int) -> Optional[Bond]:
        """Bond joining sites i and j, or None"""
        index = self._bond_lookup.get(frozenset((i, j)))
        return None if index is None else self.bonds[index]

    def bond_at(self, site: int, link_type: LinkType) -> Optional[Bond]:
        """The link of the given type touching a site (None at an open edge)"""
        index = self._site_bonds[self.site(site).index].get(LinkType(link_type))
        return None if index is None else self.bonds[index]

    def neighbor(self, site: int, link_type: LinkType) -> Optional[int]:
        """Site reached from `site` along its link of the given type"""
        bond = self.bond_at(site, link_type)
        if bond is None:
            return None
        i, j = bond.pair
        return j if i == site else i

    def plaquettes_of_bond(self, bond_index: int) -> Tuple[int, ...]:
        """Labels of the plaquettes bordered by a bond (two in the bulk)"""
        return self._bond_plaquettes[bond_index]

    def plaquette_neighbors(self, label: int) -> List[Tuple[int, int]]:
        """(neighbor plaquette, shared bond) pairs, sorted by neighbor label then bond"""
        pairs = set()
        for b in self.plaquette(label).bonds:
            for other in self._bond_plaquettes[b]:
                if other != label:
                    pairs.add((other, b))
        return sorted(pairs)

    def find_plaquette(self, site_indices: Sequence[int]) -> Plaquette:
        """Plaquette whose boundary is exactly this closed walk of six sites"""
        walk = list(site_indices)
        if len(walk) != 6 or len(set(walk)) != 6:
            raise GeometryError("bad_hexagon", walk)
        for k in range(6):
            if self.bond_between(walk[k], walk[(k + 1) % 6]) is None:
                raise GeometryError("bad_hexagon", walk)
        for plaquette in self.plaquettes:
            if {s.index for s in plaquette.sites} == set(walk):
                return plaquette
        raise GeometryError("bad_hexagon", walk)

    def dual_path(self, start: int, stop: int) -> List[int]:
        """Bonds crossed by the shortest dual-lattice path from plaquette start to stop"""
        return self._dual_search(start, lambda p: p == stop)

    def dual_path_to_edge(self, start: int) -> List[int]:
        """Bonds crossed on the shortest dual path from a plaquette out through an open edge"""
        edge_bonds = [b.index for b in self.bonds if len(self._bond_plaquettes[b.index]) == 1]
        if not edge_bonds:
            raise GeometryError("bad_hexagon", [start])
        path = self._dual_search(start, lambda p: any(
            len(self._bond_plaquettes[b]) == 1 for b in self.plaquette(p).bonds))
        end = self.plaquettes[start].label
        for b in path:
            end = next(q for q in self._bond_plaquettes[b] if q != end)
        exit_bond = min(b for b in self.plaquette(end).bonds if len(self._bond_plaquettes[b]) == 1)
        return path + [exit_bond]

    def _dual_search(self, start: int, is_goal) -> List[int]:
        # breadth-first over plaquettes; neighbors visited by ascending label
        self.plaquette(start)
        previous = {start: None}
        queue = deque([start])
        while queue:
            p = queue.popleft()
            if is_goal(p):
                path = []
                while previous[p] is not None:
                    p, bond = previous[p]
                    path.append(bond)
                return path[::-1]
            for q, bond in self.plaquette_neighbors(p):
                if q not in previous:
                    previous[q] = (p, bond)
                    queue.append(q)
        raise GeometryError("bad_hexagon", [start])

    def to_dict(self) -> dict:
        """JSON-ready description (extents, boundary, typed bond list, plaquette walks)"""
        return {
            "Lx": self.Lx,
            "Ly": self.Ly,
            "boundary": self.boundary.value,
            "num_sites": self.num_sites,
            "indexing": "index = 2*(row*Lx + col) + (0 for A, 1 for B)",
            "sites": [
                {"index": s.index, "row": s.cell[0], "col": s.cell[1], "sublattice": s.sublattice.value}
                for s in self.sites
            ],
            "bonds": [
                {"index": b.index, "sites": list(b.pair), "type": b.link_type.value}
                for b in self.bonds
            ],
            "plaquettes": [
                {"label": p.label, "cell": list(p.cell), "sites": [s.index for s in p.sites]}
                for p in self.plaquettes
            ],
        }


def build_lattice(Lx: int, Ly: int, boundary=Boundary.TORUS) -> HoneycombLattice:
    """Build a honeycomb lattice of Lx x Ly unit cells"""
    boundary = Boundary(boundary)
    if boundary == Boundary.TORUS and (Lx < 2 or Ly < 2):
        raise LatticeSizeError("lattice_too_small", Lx, Ly)
    if Lx < 1 or Ly < 1:
        raise LatticeSizeError("open_too_small", Lx, Ly)
    torus = boundary == Boundary.TORUS

    sites = []
    for row in range(Ly):
        for col in range(Lx):
            for sub in (Sublattice.A, Sublattice.B):
                sites.append(Site(cell=(row, col), sublattice=sub, index=site_index(row, col, sub, Lx)))

    def at(row: int, col: int, sub: Sublattice) -> Optional[Site]:
        if torus:
            row, col = row % Ly, col % Lx
        elif not (0 <= row < Ly and 0 <= col < Lx):
            return None
        return sites[site_index(row, col, sub, Lx)]

    bonds: List[Bond] = []
    lookup: Dict[frozenset, int] = {}

    def add(a: Optional[Site], b: Optional[Site], link: LinkType):
        if a is None or b is None:
            return
        lookup[frozenset((a.index, b.index))] = len(bonds)
        bonds.append(Bond(endpoints=(a, b), link_type=link, index=len(bonds)))

    for row in range(Ly):
        for col in range(Lx):
            b_site = at(row, col, Sublattice.B)
            add(at(row, col, Sublattice.A), b_site, LinkType.Z)
            add(at(row, col + 1, Sublattice.A), b_site, LinkType.X)
            add(at(row + 1, col, Sublattice.A), b_site, LinkType.Y)

    plaquettes: List[Plaquette] = []
    for row in range(Ly):
        for col in range(Lx):
            walk = [
                at(row, col, Sublattice.A),
                at(row, col, Sublattice.B),
                at(row, col + 1, Sublattice.A),
                at(row - 1, col + 1, Sublattice.B),
                at(row - 1, col + 1, Sublattice.A),
                at(row - 1, col, Sublattice.B),
            ]
            if any(s is None for s in walk):
                continue
            edges = tuple(lookup[frozenset((walk[k].index, walk[(k + 1) % 6].index))] for k in range(6))
            plaquettes.append(Plaquette(label=len(plaquettes), sites=tuple(walk), bonds=edges, cell=(row, col)))

    return HoneycombLattice(
        Lx=Lx, Ly=Ly, boundary=boundary,
        sites=tuple(sites), bonds=tuple(bonds), plaquettes=tuple(plaquettes),
    )


def plaquette_sites(lattice: HoneycombLattice, p: int) -> List[Site]:
    """Six sites of plaquette p in the 1..6 order of the W_p pattern"""
    return list(lattice.plaquette(p).sites)


def bonds_of_type(lattice: HoneycombLattice, link_type) -> List[Bond]:
    """All bonds of one link type, in bond-index order"""
    link_type = LinkType(link_type)
    return [b for b in lattice.bonds if b.link_type == link_type]
