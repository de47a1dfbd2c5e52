"""Fractal and control lattice generators.

Gaskets and the pyramid are vertex graphs of iterated triangle/tetrahedron
subdivision with exact integer coordinates (triangular / tetrahedral basis),
so coincident vertices merge by exact equality.  Vicsek fractals, Sierpinski
carpets, the square lattice and the 1D chain are cell graphs: vertices are
retained cells, edges connect orthogonally adjacent cells.

All distances are chemical (shortest-path hop counts).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class Family(Enum):
    CHAIN = "chain"
    SQUARE = "square"
    GASKET_B2 = "gasket_b2"
    GASKET_B3 = "gasket_b3"
    PYRAMID_B2 = "pyramid_b2"
    VICSEK = "vicsek"
    CARPET = "carpet"


class GraphBuildError(ValueError):
    pass


@dataclass(frozen=True)
class FamilySpec:
    """Which lattice to build.

    ``side`` is used by CHAIN and SQUARE (number of sites along one edge).
    ``m_side``/``n_removed`` parametrize carpets: the unit cell is subdivided
    into m_side x m_side subcells and a centered square hole of n_removed
    subcells is cut out, e.g. the (9,1) carpet is m_side=3, n_removed=1 and
    the (16,4) carpet is m_side=4, n_removed=4.
    """

    family: Family
    generation: int = 0
    side: int | None = None
    m_side: int | None = None
    n_removed: int | None = None

    def validate(self):
        if self.generation < 0:
            raise GraphBuildError("generation must be non-negative")
        if self.family in (Family.CHAIN, Family.SQUARE):
            if self.side is None or self.side < 2:
                raise GraphBuildError(f"{self.family.value} needs side >= 2")
        if self.family is Family.CARPET:
            m, n = self.m_side, self.n_removed
            if m is None or n is None:
                raise GraphBuildError("carpet needs m_side and n_removed")
            h = int(round(np.sqrt(n)))
            if h * h != n:
                raise GraphBuildError("carpet hole must be a square number of subcells")
            # hole strictly interior and centered in the m x m subdivision
            if h < 1 or h > m - 2 or (m - h) % 2 != 0:
                raise GraphBuildError("carpet hole must be centered and strictly interior")

    @property
    def hole_side(self) -> int:
        return int(round(np.sqrt(self.n_removed)))

    def label(self) -> str:
        if self.family is Family.CARPET:
            return f"carpet({self.m_side ** 2},{self.n_removed})"
        return self.family.value


@dataclass
class Graph:
    """Immutable lattice graph with tagged outer boundary.

    ``boundary`` holds one ordered site-id path per tagged outer side/arm;
    consecutive entries are graph neighbors and the position index along a
    path equals the chemical distance from its first site.  ``outer_sites``
    is the set of outer-boundary sites used for bulk thresholding; for the
    pyramid it is the union of the six tagged outer edges, since the outer
    faces coincide with the fractal itself.
    """

    spec: FamilySpec
    coords: np.ndarray            # (n_sites, dim) int
    adjacency: list[np.ndarray]   # per-site sorted neighbor ids
    boundary: list[np.ndarray]    # ordered outer paths
    outer_sites: np.ndarray       # sorted ids of all outer-boundary sites

    @property
    def n_sites(self) -> int:
        return self.coords.shape[0]

    @property
    def degree(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency])

    def edges(self):
        """Yield each undirected edge once as (i, j) with i < j."""
        for i, nbrs in enumerate(self.adjacency):
            for j in nbrs:
                if i < j:
                    yield i, int(j)


# -- construction -----------------------------------------------------------

_VICSEK_KEEP = ((1, 1), (0, 1), (2, 1), (1, 0), (1, 2))


def _simplex_cells(spec: FamilySpec):
    """Corner coordinates of the retained unit simplices after g subdivisions."""
    g = spec.generation
    if spec.family is Family.PYRAMID_B2:
        cells = [(0, 0, 0, 2 ** g)]
        for _ in range(g):
            new = []
            for a, b, c, s in cells:
                h = s // 2
                new += [(a, b, c, h), (a + h, b, c, h), (a, b + h, c, h), (a, b, c + h, h)]
            cells = new
        return cells
    b = 2 if spec.family is Family.GASKET_B2 else 3
    cells = [(0, 0, b ** g)]
    for _ in range(g):
        new = []
        for a, c, s in cells:
            h = s // b
            if b == 2:
                offs = ((0, 0), (h, 0), (0, h))
            else:
                # keep the six upward triangles of the 9-fold subdivision
                offs = ((0, 0), (h, 0), (2 * h, 0), (0, h), (h, h), (0, 2 * h))
            new += [(a + dx, c + dy, h) for dx, dy in offs]
        cells = new
    return cells


def _grid_cells(spec: FamilySpec):
    g = spec.generation
    if spec.family is Family.CHAIN:
        return [(i,) for i in range(spec.side)]
    if spec.family is Family.SQUARE:
        return [(x, y) for x in range(spec.side) for y in range(spec.side)]
    if spec.family is Family.VICSEK:
        cells = {(0, 0)}
        for _ in range(g):
            cells = {(3 * x + dx, 3 * y + dy) for x, y in cells for dx, dy in _VICSEK_KEEP}
        return sorted(cells)
    # carpet
    m, h = spec.m_side, spec.hole_side
    lo, hi = (m - h) // 2, (m + h) // 2
    keep = [(i, j) for i in range(m) for j in range(m)
            if not (lo <= i < hi and lo <= j < hi)]
    cells = {(0, 0)}
    for _ in range(g):
        cells = {(m * x + dx, m * y + dy) for x, y in cells for dx, dy in keep}
    return sorted(cells)


def _vertex_graph(spec: FamilySpec):
    """Merge simplex corners into a vertex graph (gaskets, pyramid)."""
    cells = _simplex_cells(spec)
    edges = set()
    if spec.family is Family.PYRAMID_B2:
        for a, b, c, _s in cells:
            corners = ((a, b, c), (a + 1, b, c), (a, b + 1, c), (a, b, c + 1))
            for i in range(4):
                for j in range(i + 1, 4):
                    edges.add((corners[i], corners[j]))
    else:
        for a, c, _s in cells:
            corners = ((a, c), (a + 1, c), (a, c + 1))
            edges.update(((corners[0], corners[1]), (corners[0], corners[2]),
                          (corners[1], corners[2])))
    verts = sorted({v for e in edges for v in e})
    index = {v: i for i, v in enumerate(verts)}
    adj = [set() for _ in verts]
    for u, v in edges:
        iu, iv = index[u], index[v]
        adj[iu].add(iv)
        adj[iv].add(iu)
    return np.array(verts, dtype=np.int64), [np.array(sorted(a), dtype=np.int64) for a in adj], index


def _cell_graph(spec: FamilySpec):
    cells = _grid_cells(spec)
    index = {c: i for i, c in enumerate(cells)}
    dim = len(cells[0])
    adj = []
    for c in cells:
        nbrs = []
        for d in range(dim):
            for step in (-1, 1):
                other = tuple(x + step if k == d else x for k, x in enumerate(c))
                if other in index:
                    nbrs.append(index[other])
        adj.append(np.array(sorted(nbrs), dtype=np.int64))
    return np.array(cells, dtype=np.int64), adj, index


def _tag_boundary(spec: FamilySpec, coords, index):
    """Ordered outer paths plus the full outer-site set, per family."""
    fam = spec.family

    def path(pts):
        return np.array([index[p] for p in pts], dtype=np.int64)

    if fam is Family.CHAIN:
        n = spec.side
        paths = [path([(i,) for i in range(n)])]
        outer = {index[(0,)], index[(n - 1,)]}
    elif fam in (Family.SQUARE, Family.CARPET):
        top = int(coords.max())
        xs = sorted({int(x) for x, y in coords if y == 0})
        ys = sorted({int(y) for x, y in coords if x == 0})
        paths = [
            path([(x, 0) for x in xs]),
            path([(0, y) for y in ys]),
            path([(x, top) for x in xs]),
            path([(top, y) for y in ys]),
        ]
        outer = {index[(x, y)] for x, y in map(tuple, coords)
                 if x in (0, top) or y in (0, top)}
    elif fam in (Family.GASKET_B2, Family.GASKET_B3):
        b = 2 if fam is Family.GASKET_B2 else 3
        side = b ** spec.generation
        paths = [
            path([(a, 0) for a in range(side + 1)]),
            path([(0, c) for c in range(side + 1)]),
            path([(a, side - a) for a in range(side + 1)]),
        ]
        outer = set(np.concatenate(paths).tolist())
    elif fam is Family.PYRAMID_B2:
        side = 2 ** spec.generation
        rng = range(side + 1)
        paths = [
            path([(a, 0, 0) for a in rng]),
            path([(0, b, 0) for b in rng]),
            path([(0, 0, c) for c in rng]),
            path([(a, side - a, 0) for a in rng]),
            path([(a, 0, side - a) for a in rng]),
            path([(0, b, side - b) for b in rng]),
        ]
        # outer faces would swallow nearly every site (the gasket surface is
        # the fractal itself), so bulk thresholding keys off the 6 outer edges
        outer = set(np.concatenate(paths).tolist())
    elif fam is Family.VICSEK:
        mid = (3 ** spec.generation - 1) // 2
        xs = sorted({int(x) for x, y in coords if y == mid})
        ys = sorted({int(y) for x, y in coords if x == mid})
        paths = [path([(x, mid) for x in xs]), path([(mid, y) for y in ys])]
        top = int(coords.max())
        outer = {index[(x, y)] for x, y in map(tuple, coords)
                 if x in (0, top) or y in (0, top)}
    else:  # pragma: no cover
        raise GraphBuildError(f"unknown family {fam}")
    return paths, np.array(sorted(outer), dtype=np.int64)


def build_graph(spec: FamilySpec, size_cap: int = 500_000) -> Graph:
    """Deterministically build the lattice described by ``spec``.

    Raises GraphBuildError on invalid parameters or if the site count would
    exceed ``size_cap``.
    """
    spec.validate()
    n_expected = expected_sites(spec)
    if n_expected is not None and n_expected > size_cap:
        raise GraphBuildError(f"{n_expected} sites exceeds cap {size_cap}")
    if spec.family in (Family.GASKET_B2, Family.GASKET_B3, Family.PYRAMID_B2):
        coords, adj, index = _vertex_graph(spec)
    else:
        coords, adj, index = _cell_graph(spec)
    if len(coords) > size_cap:
        raise GraphBuildError(f"{len(coords)} sites exceeds cap {size_cap}")
    paths, outer = _tag_boundary(spec, coords, index)
    return Graph(spec=spec, coords=coords, adjacency=adj, boundary=paths,
                 outer_sites=outer)


def expected_sites(spec: FamilySpec) -> int | None:
    """Closed-form site count, where the family recursion gives one."""
    g = spec.generation
    fam = spec.family
    if fam is Family.CHAIN:
        return spec.side
    if fam is Family.SQUARE:
        return spec.side ** 2
    if fam is Family.GASKET_B2:
        return 3 * (3 ** g + 1) // 2
    if fam is Family.GASKET_B3:
        return (7 * 6 ** g + 8) // 5
    if fam is Family.PYRAMID_B2:
        return 2 * (4 ** g + 1)
    if fam is Family.VICSEK:
        return 5 ** g
    if fam is Family.CARPET:
        return (spec.m_side ** 2 - spec.n_removed) ** g
    return None


# -- chemical distance ------------------------------------------------------

@dataclass
class DistanceField:
    source: int
    dist: np.ndarray


def _bfs(adjacency, sources) -> np.ndarray:
    dist = np.full(len(adjacency), -1, dtype=np.int64)
    q = deque()
    for s in sources:
        dist[s] = 0
        q.append(s)
    while q:
        u = q.popleft()
        du = dist[u] + 1
        for v in adjacency[u]:
            if dist[v] < 0:
                dist[v] = du
                q.append(v)
    return dist


def chemical_distances(graph: Graph, source: int) -> DistanceField:
    """Exact shortest-path hop counts from ``source`` to every site."""
    if not 0 <= source < graph.n_sites:
        raise ValueError(f"source {source} out of range")
    return DistanceField(source=source, dist=_bfs(graph.adjacency, [source]))


def boundary_path(graph: Graph, anchor: int) -> np.ndarray:
    """One tagged outer path, reordered to start at ``anchor``.

    ``anchor`` must be an endpoint of a tagged boundary path (a corner or
    arm tip); position index along the returned path equals the chemical
    distance from the anchor.
    """
    for p in graph.boundary:
        if p[0] == anchor:
            return p
        if p[-1] == anchor:
            return p[::-1]
    raise ValueError(f"site {anchor} is not a boundary-path endpoint")


def bulk_sites(graph: Graph, r_bulk: int) -> np.ndarray:
    """Sites whose chemical distance to the outer boundary exceeds r_bulk.

    May be empty; callers must handle that.
    """
    if r_bulk < 0:
        raise ValueError("r_bulk must be non-negative")
    d = _bfs(graph.adjacency, graph.outer_sites)
    return np.flatnonzero(d > r_bulk)


# -- benchmark exponents ----------------------------------------------------

@dataclass(frozen=True)
class FractalDimensions:
    d_f: float
    d_w: float
    d_s: float
    beta: float | None  # None for the marginal 2D case


_DIMENSION_TABLE = {
    Family.CHAIN: FractalDimensions(1.00, 2.00, 1.00, 1.00),
    Family.SQUARE: FractalDimensions(2.00, 2.00, 2.00, None),
    Family.GASKET_B2: FractalDimensions(1.58, 2.32, 1.36, 0.74),
    Family.GASKET_B3: FractalDimensions(1.63, 2.32, 1.40, 0.69),
    Family.PYRAMID_B2: FractalDimensions(2.00, 2.58, 1.55, 0.58),
    Family.VICSEK: FractalDimensions(1.46, 2.46, 1.19, 1.00),
    (Family.CARPET, 3): FractalDimensions(1.89, 2.10, 1.80, 0.20),
    (Family.CARPET, 4): FractalDimensions(1.79, 2.16, 1.66, 0.37),
}


def table_dimensions(spec: FamilySpec) -> FractalDimensions:
    """Benchmark (d_f, d_w, d_s, beta) for the given family."""
    key = (Family.CARPET, spec.m_side) if spec.family is Family.CARPET else spec.family
    try:
        return _DIMENSION_TABLE[key]
    except KeyError:
        raise ValueError(f"no benchmark exponents for {spec.label()}") from None


# -- export -----------------------------------------------------------------

def export_edge_list(graph: Graph, edge_path, coord_path):
    """Write the edge list and companion coordinates file."""
    with open(edge_path, "w") as f:
        f.write(f"# {graph.spec.label()} {graph.spec.generation} {graph.n_sites}\n")
        for i, j in graph.edges():
            f.write(f"{i} {j}\n")
    with open(coord_path, "w") as f:
        for i, c in enumerate(graph.coords):
            f.write(f"{i} " + " ".join(str(int(x)) for x in c) + "\n")
