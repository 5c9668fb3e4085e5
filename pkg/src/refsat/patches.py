"""Refined vertex patches: catalog, interior-edge traversal, extensions.

Geometry lives on the 4x4 reference grid [0, 4]^2 with the distinguished
vertex at (2, 2). A cell (cx, cy) is the unit square [cx, cx+1] x [cy, cy+1];
a GridEdge is a horizontal edge ("H", x, y) = [x, x+1] x {y} or a vertical
edge ("V", x, y) = {x} x [y, y+1]. The sides of a cell are named e1..e4
counterclockwise from the rightmost: e1 right, e2 top, e3 left, e4 bottom.

The interior edges of the full grid carry a fixed enumeration 1..24 along
anti-diagonal bands (see canonical_numbering). Each patch traverses its own
interior edges in increasing inherited number; the owner of an edge is the
square above it (horizontal edges) or to its left (vertical edges), so the
edge is always the owner's bottom or right side. At step i the local
Dirichlet sides of the owner are those covered by not-yet-traversed interior
edges or by clamped patch-boundary edges; every such set matches one of five
situations (a)-(e), each of which admits an explicit bounded zero-extension
built from reflections and at most one linear decay factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import NamedTuple

import numpy as np
import scipy.linalg
from numpy.polynomial import legendre as npleg

__all__ = [
    "GridEdge",
    "RefinedPatch",
    "Traversal",
    "TraversalStep",
    "LocalDirichletInfo",
    "TraversalViolation",
    "TraversalReport",
    "Extension",
    "SITUATIONS",
    "cell_sides",
    "owner_square",
    "interior_edges_of",
    "boundary_edges_of",
    "canonical_numbering",
    "orient_patch",
    "inverse_orientation",
    "patch_catalog",
    "interior_edge_traversal",
    "local_dirichlet_edges",
    "verify_traversal_lemma",
    "extension_operator",
    "side_trace",
    "h1_seminorm_squared",
    "random_admissible",
    "measured_extension_ratio",
]

SITUATIONS = ("a", "b", "c", "d", "e")
SIDE_NAMES = ("e1", "e2", "e3", "e4")

GRID_CELLS = frozenset((x, y) for x in range(4) for y in range(4))


class GridEdge(NamedTuple):
    orientation: str  # "H" or "V"
    x: int
    y: int


def cell_sides(cell: tuple[int, int]) -> dict[str, GridEdge]:
    cx, cy = cell
    return {
        "e1": GridEdge("V", cx + 1, cy),
        "e2": GridEdge("H", cx, cy + 1),
        "e3": GridEdge("V", cx, cy),
        "e4": GridEdge("H", cx, cy),
    }


def edge_neighbors(edge: GridEdge) -> tuple[tuple[int, int], tuple[int, int]]:
    """The two cells an edge would separate: (above, below) or (right, left)."""
    if edge.orientation == "H":
        return (edge.x, edge.y), (edge.x, edge.y - 1)
    return (edge.x, edge.y), (edge.x - 1, edge.y)


def owner_square(edge: GridEdge) -> tuple[int, int]:
    """The square above a horizontal edge, or left of a vertical one."""
    if edge.orientation == "H":
        return (edge.x, edge.y)
    return (edge.x - 1, edge.y)


def interior_edges_of(cells: frozenset) -> frozenset[GridEdge]:
    out = set()
    for cell in cells:
        for edge in cell_sides(cell).values():
            a, b = edge_neighbors(edge)
            if a in cells and b in cells:
                out.add(edge)
    return frozenset(out)


def boundary_edges_of(cells: frozenset) -> frozenset[GridEdge]:
    out = set()
    for cell in cells:
        for edge in cell_sides(cell).values():
            a, b = edge_neighbors(edge)
            if (a in cells) != (b in cells):
                out.add(edge)
    return frozenset(out)


def _band(edge: GridEdge) -> float:
    # anti-diagonal sweep coordinate; the +1/2 interleaves V edges between
    # the H bands so that a square's top/left sides always land strictly
    # after its bottom/right sides
    if edge.orientation == "H":
        return float(edge.y - edge.x)
    return edge.y - edge.x + 0.5


@lru_cache(maxsize=1)
def canonical_numbering() -> dict[GridEdge, int]:
    """Numbers 1..24 for the interior edges of the full grid.

    Edges are sorted by (band, -x): bottom-right anti-diagonal band first,
    right to left within a band. Patch edges inherit these numbers.
    """
    edges = sorted(interior_edges_of(GRID_CELLS), key=lambda e: (_band(e), -e.x))
    return {edge: k for k, edge in enumerate(edges, start=1)}


_CENTER_CELLS = frozenset({(1, 1), (1, 2), (2, 1), (2, 2)})


@dataclass(frozen=True)
class RefinedPatch:
    """One catalogued refined patch around the vertex (2, 2)."""

    id: int
    vertex_kind: str  # "interior" or "boundary"
    cells: frozenset
    ext_dirichlet: frozenset

    def __post_init__(self) -> None:
        if self.vertex_kind not in ("interior", "boundary"):
            raise ValueError(f"unknown vertex kind {self.vertex_kind!r}")
        if not self.cells or not self.cells <= GRID_CELLS:
            raise ValueError(f"patch {self.id}: cells must be a nonempty grid subset")
        boundary = boundary_edges_of(self.cells)
        if not self.ext_dirichlet <= boundary:
            raise ValueError(
                f"patch {self.id}: clamped edges must lie on the patch boundary"
            )
        interior_vertex = _CENTER_CELLS <= self.cells
        if interior_vertex != (self.vertex_kind == "interior"):
            raise ValueError(
                f"patch {self.id}: vertex kind does not match the cell geometry"
            )
        if self.vertex_kind == "interior" and self.ext_dirichlet:
            raise ValueError(
                f"patch {self.id}: interior-vertex patches have no clamped edges"
            )
        if self.vertex_kind == "boundary" and not self.ext_dirichlet:
            raise ValueError(
                f"patch {self.id}: boundary-vertex patches need clamped edges"
            )

    @property
    def interior_edges(self) -> frozenset[GridEdge]:
        return interior_edges_of(self.cells)

    @property
    def boundary_edges(self) -> frozenset[GridEdge]:
        return boundary_edges_of(self.cells)

    @property
    def ext_neumann(self) -> frozenset[GridEdge]:
        return self.boundary_edges - self.ext_dirichlet

    @property
    def n_steps(self) -> int:
        return len(self.interior_edges)


class TraversalStep(NamedTuple):
    index: int  # 1-based step position within this patch
    number: int  # inherited grid number 1..24
    edge: GridEdge
    owner: tuple[int, int]


@dataclass(frozen=True)
class Traversal:
    patch_id: int
    steps: tuple[TraversalStep, ...]

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class LocalDirichletInfo:
    """Classification of one traversal step.

    ``dirichlet_sides`` are the owner's sides covered by later interior
    edges or clamped boundary edges; ``situation`` is one of "a".."e", or
    None exactly when the set is empty at the final step of an
    interior-vertex patch (the traversal cannot continue there).
    """

    step: int
    edge: GridEdge
    owner: tuple[int, int]
    dirichlet_sides: frozenset[str]
    ext_neumann_sides: frozenset[str]
    situation: str | None


# ----------------------------------------------------------- orientations


def _transform_point(t: int, point: tuple[float, float]) -> tuple[float, float]:
    x, y = point[0] - 2.0, point[1] - 2.0
    if t & 4:
        x = -x
    for _ in range(t & 3):
        x, y = -y, x
    return (x + 2.0, y + 2.0)


def _transform_edge(t: int, edge: GridEdge) -> GridEdge:
    if edge.orientation == "H":
        p0, p1 = (edge.x, edge.y), (edge.x + 1, edge.y)
    else:
        p0, p1 = (edge.x, edge.y), (edge.x, edge.y + 1)
    (x0, y0), (x1, y1) = sorted((_transform_point(t, p0), _transform_point(t, p1)))
    if y0 == y1:
        return GridEdge("H", int(round(x0)), int(round(y0)))
    return GridEdge("V", int(round(x0)), int(round(y0)))


def _transform_cell(t: int, cell: tuple[int, int]) -> tuple[int, int]:
    corners = [
        _transform_point(t, (cell[0] + dx, cell[1] + dy))
        for dx in (0, 1)
        for dy in (0, 1)
    ]
    return (
        int(round(min(p[0] for p in corners))),
        int(round(min(p[1] for p in corners))),
    )


def orient_patch(patch: RefinedPatch, orientation: int) -> RefinedPatch:
    """Apply one of the 8 dihedral transforms about the vertex (2, 2).

    Orientations 0..3 are counterclockwise quarter turns, 4..7 the same
    after mirroring x.
    """
    if not 0 <= orientation <= 7:
        raise ValueError(f"orientation must be 0..7, got {orientation}")
    return RefinedPatch(
        id=patch.id,
        vertex_kind=patch.vertex_kind,
        cells=frozenset(_transform_cell(orientation, c) for c in patch.cells),
        ext_dirichlet=frozenset(
            _transform_edge(orientation, e) for e in patch.ext_dirichlet
        ),
    )


@lru_cache(maxsize=1)
def _inverse_table() -> dict[int, int]:
    probes = [(0.0, 0.0), (1.0, 3.0), (4.0, 1.0)]
    table = {}
    for t in range(8):
        for u in range(8):
            if all(
                _transform_point(u, _transform_point(t, p)) == p for p in probes
            ):
                table[t] = u
                break
    return table


def inverse_orientation(orientation: int) -> int:
    return _inverse_table()[orientation]


# ---------------------------------------------------------------- catalog


def _parse_catalog(text: str) -> dict[int, RefinedPatch]:
    patches: dict[int, RefinedPatch] = {}
    current: dict | None = None

    def flush():
        if current is None:
            return
        patch = RefinedPatch(
            id=current["id"],
            vertex_kind=current["kind"],
            cells=frozenset(current["cells"]),
            ext_dirichlet=frozenset(current["dirichlet"]),
        )
        if patch.id in patches:
            raise ValueError(f"duplicate patch id {patch.id}")
        patches[patch.id] = patch

    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] == "patch":
            flush()
            current = {"id": int(fields[1]), "kind": fields[2], "cells": [],
                       "dirichlet": []}
        elif fields[0] == "cells":
            if current is None:
                raise ValueError("cells line before any patch line")
            for token in fields[1:]:
                cx, cy = token.split(",")
                current["cells"].append((int(cx), int(cy)))
        elif fields[0] == "dirichlet":
            if current is None:
                raise ValueError("dirichlet line before any patch line")
            rest = fields[1:]
            if len(rest) % 3 != 0:
                raise ValueError(f"malformed dirichlet line: {line!r}")
            for j in range(0, len(rest), 3):
                current["dirichlet"].append(
                    GridEdge(rest[j], int(rest[j + 1]), int(rest[j + 2]))
                )
        else:
            raise ValueError(f"unrecognized catalog line: {line!r}")
    flush()
    return patches


def patch_catalog(path: str | None = None) -> dict[int, RefinedPatch]:
    """Load the patch catalog, keyed by id 1..13.

    Without a path the packaged data file is used and the result is cached.
    """
    if path is None:
        return _default_catalog()
    with open(path, encoding="utf-8") as handle:
        return _parse_catalog(handle.read())


@lru_cache(maxsize=1)
def _default_catalog() -> dict[int, RefinedPatch]:
    text = (
        resources.files("refsat").joinpath("data/patch_catalog.txt").read_text()
    )
    return _parse_catalog(text)


# -------------------------------------------------------------- traversal


def interior_edge_traversal(
    patch: RefinedPatch, numbering: dict[GridEdge, int] | None = None
) -> Traversal:
    """Traverse the patch's interior edges in increasing inherited number."""
    if numbering is None:
        numbering = canonical_numbering()
    edges = sorted(patch.interior_edges, key=lambda e: numbering[e])
    steps = tuple(
        TraversalStep(index=i, number=numbering[edge], edge=edge,
                      owner=owner_square(edge))
        for i, edge in enumerate(edges, start=1)
    )
    return Traversal(patch_id=patch.id, steps=steps)


def _classify(
    dirichlet: frozenset[str], ext_neumann: frozenset[str], self_side: str
) -> str | None:
    """Match the local Dirichlet pattern to one of the five situations.

    Exact patterns first; if none fits, free (Neumann) sides may stand in
    for clamped ones, in which case the admissible widened pattern is fixed
    by which side of the owner the traversed edge is (bottom or right).
    """
    if dirichlet == frozenset({"e1", "e2", "e3"}):
        return "a"
    if dirichlet == frozenset({"e2", "e3", "e4"}):
        return "b"
    if dirichlet == frozenset({"e2", "e3"}):
        return "c"
    if dirichlet == frozenset({"e2"}) and "e3" in ext_neumann:
        return "d"
    if dirichlet == frozenset({"e3"}) and "e2" in ext_neumann:
        return "e"
    covered = dirichlet | ext_neumann
    if dirichlet and self_side == "e4" and {"e1", "e2", "e3"} <= covered:
        return "a"
    if dirichlet and self_side == "e1" and {"e2", "e3", "e4"} <= covered:
        return "b"
    return None


def _step_info(
    patch: RefinedPatch,
    step: TraversalStep,
    numbering: dict[GridEdge, int],
) -> LocalDirichletInfo:
    interior = patch.interior_edges
    sides = cell_sides(step.owner)
    dirichlet = set()
    neumann = set()
    self_side = None
    for name, edge in sides.items():
        if edge == step.edge:
            self_side = name
        elif edge in patch.ext_dirichlet:
            dirichlet.add(name)
        elif edge in interior and numbering[edge] > step.number:
            dirichlet.add(name)
        elif edge in patch.ext_neumann:
            neumann.add(name)
    situation = _classify(frozenset(dirichlet), frozenset(neumann), self_side)
    return LocalDirichletInfo(
        step=step.index,
        edge=step.edge,
        owner=step.owner,
        dirichlet_sides=frozenset(dirichlet),
        ext_neumann_sides=frozenset(neumann),
        situation=situation,
    )


def local_dirichlet_edges(
    patch: RefinedPatch,
    i: int,
    numbering: dict[GridEdge, int] | None = None,
) -> LocalDirichletInfo:
    """Local Dirichlet sides and situation label of traversal step i.

    Valid steps are 1 <= i <= n-1, plus i = n for boundary-vertex patches.
    Calling with i = n on an interior-vertex patch does not raise: it
    returns the empty set with situation None, the signal that the
    traversal cannot be continued past the last edge.
    """
    if numbering is None:
        numbering = canonical_numbering()
    traversal = interior_edge_traversal(patch, numbering)
    n = len(traversal)
    if not 1 <= i <= n:
        raise ValueError(f"step must be in 1..{n}, got {i}")
    return _step_info(patch, traversal.steps[i - 1], numbering)


# ------------------------------------------------- zero-extension witnesses

_IDENT = {"e1": "e1", "e2": "e2", "e3": "e3", "e4": "e4"}
_MIR_R = {"e1": "e3", "e2": "e2", "e3": "e1", "e4": "e4"}  # reflect across e1
_MIR_D = {"e1": "e1", "e2": "e4", "e3": "e3", "e4": "e2"}  # reflect across e4
_MIR_RD = {"e1": "e3", "e2": "e4", "e3": "e1", "e4": "e2"}

#: witness layouts for legitimate zero-extensions: each maps square offsets
#: to (source-side map, decayed sides). The plain reflections come first,
#: then the decayed variants; the two-square decay layouts arise when the
#: decayed column or row already kills the outer trace.
_LAYOUTS: dict[str, dict[tuple[int, int], tuple[dict, frozenset]]] = {
    "down": {(0, 0): (_IDENT, frozenset()), (0, -1): (_MIR_D, frozenset())},
    "right": {(0, 0): (_IDENT, frozenset()), (1, 0): (_MIR_R, frozenset())},
    "right_down": {
        (0, 0): (_IDENT, frozenset()),
        (1, 0): (_MIR_R, frozenset()),
        (0, -1): (_MIR_D, frozenset()),
        (1, -1): (_MIR_RD, frozenset()),
    },
    "right_decay_down": {
        (0, 0): (_IDENT, frozenset()),
        (1, 0): (_MIR_R, frozenset({"e1"})),
        (0, -1): (_MIR_D, frozenset()),
        (1, -1): (_MIR_RD, frozenset({"e1"})),
    },
    "down_decay_right": {
        (0, 0): (_IDENT, frozenset()),
        (0, -1): (_MIR_D, frozenset({"e4"})),
        (1, 0): (_MIR_R, frozenset()),
        (1, -1): (_MIR_RD, frozenset({"e4"})),
    },
    "right_decay": {
        (0, 0): (_IDENT, frozenset()),
        (1, 0): (_MIR_R, frozenset({"e1"})),
    },
    "down_decay": {
        (0, 0): (_IDENT, frozenset()),
        (0, -1): (_MIR_D, frozenset({"e4"})),
    },
}


def _layout_valid(
    name: str,
    owner: tuple[int, int],
    dirichlet_sides: frozenset[str],
    patch: RefinedPatch,
    later: frozenset[GridEdge],
    current: GridEdge,
) -> bool:
    """Zero-extension legitimacy of one witness layout at one step.

    The extension carries v's side traces around by reflection, killed where
    a decay factor applies. It is legitimate iff the trace vanishes on every
    inner-boundary edge of the occupied squares (so the zero-extension stays
    conforming) and on every clamped or not-yet-traversed edge inside them,
    the traversed edge itself excepted.
    """
    squares = {}
    for offset, payload in _LAYOUTS[name].items():
        square = (owner[0] + offset[0], owner[1] + offset[1])
        if square in patch.cells:
            squares[square] = payload
    if owner not in squares:
        return False
    interior = patch.interior_edges
    for square, (sources, decayed) in squares.items():
        for side, edge in cell_sides(square).items():
            if edge == current:
                continue
            zero = side in decayed or sources[side] in dirichlet_sides
            a, b = edge_neighbors(edge)
            other = b if a == square else a
            if other in squares:
                if (edge in later or edge in patch.ext_dirichlet) and not zero:
                    return False
                continue
            if edge in interior or edge in patch.ext_dirichlet:
                if not zero:
                    return False
    return True


def _extension_witness(
    owner: tuple[int, int],
    dirichlet_sides: frozenset[str],
    patch: RefinedPatch,
    later: frozenset[GridEdge],
    current: GridEdge,
) -> str | None:
    for name in _LAYOUTS:
        if _layout_valid(name, owner, dirichlet_sides, patch, later, current):
            return name
    return None


# ------------------------------------------------------------ verification


@dataclass(frozen=True)
class TraversalViolation:
    patch_id: int
    orientation: int
    step: int
    edge: GridEdge | None
    reason: str


@dataclass(frozen=True)
class TraversalReport:
    patch_id: int
    passed: bool
    violations: tuple[TraversalViolation, ...]
    situation_counts: tuple[tuple[str, int], ...]

    def counts_dict(self) -> dict[str, int]:
        return dict(self.situation_counts)


def _check_steps(
    patch: RefinedPatch,
    numbering: dict[GridEdge, int],
    patch_id: int,
    orientation: int,
) -> tuple[list[TraversalViolation], dict[str, int]]:
    violations: list[TraversalViolation] = []
    counts: dict[str, int] = {}
    traversal = interior_edge_traversal(patch, numbering)
    n = len(traversal)
    rows: dict[int, int] = {}
    cols: dict[int, int] = {}
    for cx, cy in patch.cells:
        rows[cy] = min(rows.get(cy, cx), cx)
        cols[cx] = max(cols.get(cx, cy), cy)

    def bad(step, edge, reason):
        violations.append(
            TraversalViolation(
                patch_id=patch_id, orientation=orientation, step=step,
                edge=edge, reason=reason,
            )
        )

    for step in traversal.steps:
        info = _step_info(patch, step, numbering)
        last = step.index == n
        if patch.vertex_kind == "interior" and last:
            if info.dirichlet_sides:
                bad(step.index, step.edge,
                    "final step of an interior-vertex patch must see an "
                    "empty local Dirichlet set")
            continue
        if not info.dirichlet_sides:
            bad(step.index, step.edge, "empty local Dirichlet set")
            continue
        if info.situation is None:
            bad(step.index, step.edge,
                f"no situation matches sides {sorted(info.dirichlet_sides)}")
            continue
        counts[info.situation] = counts.get(info.situation, 0) + 1
        if info.situation in ("d", "e"):
            ox, oy = step.owner
            if rows[oy] != ox and cols[ox] != oy:
                bad(step.index, step.edge,
                    "decay situation away from its row start or column top")
        # separation: the owner's top and left sides must still be
        # untraversed whenever they are interior edges
        sides = cell_sides(step.owner)
        for side in ("e2", "e3"):
            edge = sides[side]
            if edge in patch.interior_edges and numbering[edge] < step.number:
                bad(step.index, step.edge,
                    f"owner side {side} was traversed earlier, breaking "
                    "the above/left separation")
        later = frozenset(
            e for e in patch.interior_edges if numbering[e] > step.number
        )
        witness = _extension_witness(
            step.owner, info.dirichlet_sides, patch, later, step.edge
        )
        if witness is None:
            bad(step.index, step.edge, "no admissible zero-extension layout")
    return violations, counts


def verify_traversal_lemma(
    patch: RefinedPatch, numbering: dict[GridEdge, int] | None = None
) -> TraversalReport:
    """Machine check of the traversal classification over all 8 orientations.

    Each oriented copy is mapped back to the canonical frame (the traversal
    is only ever computed there) and every valid step must classify into a
    situation with an admissible zero-extension witness. The report carries
    one violation record per failed check, tagged with patch, orientation
    and step.
    """
    if numbering is None:
        numbering = canonical_numbering()
    violations: list[TraversalViolation] = []
    counts: dict[str, int] = {}
    for orientation in range(8):
        oriented = orient_patch(patch, orientation)
        restored = orient_patch(oriented, inverse_orientation(orientation))
        if restored != patch:
            violations.append(
                TraversalViolation(
                    patch_id=patch.id, orientation=orientation, step=0,
                    edge=None, reason="orientation round trip failed",
                )
            )
            continue
        step_violations, step_counts = _check_steps(
            restored, numbering, patch.id, orientation
        )
        violations.extend(step_violations)
        for key, value in step_counts.items():
            counts[key] = counts.get(key, 0) + value
    return TraversalReport(
        patch_id=patch.id,
        passed=not violations,
        violations=tuple(violations),
        situation_counts=tuple(sorted(counts.items())),
    )


# ------------------------------------------------------ extension operators

#: sides of v that must carry zero trace before extending
PRE_ZERO_SIDES = {
    "a": ("e1", "e2", "e3"),
    "b": ("e2", "e3", "e4"),
    "c": ("e2", "e3"),
    "d": ("e2",),
    "e": ("e3",),
}

#: outer sides of the extended configuration that must come out clamped;
#: keys are (offset, side-of-that-piece)
_POST_ZERO: dict[str, tuple[tuple[tuple[int, int], str], ...]] = {
    "a": (((0, 0), "e1"), ((0, 0), "e2"), ((0, 0), "e3"),
          ((0, -1), "e1"), ((0, -1), "e3"), ((0, -1), "e4")),
    "b": (((0, 0), "e2"), ((0, 0), "e3"), ((0, 0), "e4"),
          ((1, 0), "e1"), ((1, 0), "e2"), ((1, 0), "e4")),
    "c": (((0, 0), "e2"), ((0, 0), "e3"), ((1, 0), "e1"), ((1, 0), "e2"),
          ((0, -1), "e3"), ((0, -1), "e4"), ((1, -1), "e1"), ((1, -1), "e4")),
    "d": (((0, 0), "e2"), ((1, 0), "e2"), ((1, 0), "e1"),
          ((0, -1), "e4"), ((1, -1), "e4"), ((1, -1), "e1")),
    "e": (((0, 0), "e3"), ((0, -1), "e3"), ((0, -1), "e4"),
          ((1, 0), "e1"), ((1, -1), "e1"), ((1, -1), "e4")),
}

#: interfaces inside each configuration: (offset_a, side_a, offset_b, side_b)
_SEAMS: dict[str, tuple[tuple, ...]] = {
    "a": (((0, 0), "e4", (0, -1), "e2"),),
    "b": (((0, 0), "e1", (1, 0), "e3"),),
    "c": (
        ((0, 0), "e1", (1, 0), "e3"),
        ((0, 0), "e4", (0, -1), "e2"),
        ((1, 0), "e4", (1, -1), "e2"),
        ((0, -1), "e1", (1, -1), "e3"),
    ),
    "d": (
        ((0, 0), "e1", (1, 0), "e3"),
        ((0, 0), "e4", (0, -1), "e2"),
        ((1, 0), "e4", (1, -1), "e2"),
        ((0, -1), "e1", (1, -1), "e3"),
    ),
    "e": (
        ((0, 0), "e1", (1, 0), "e3"),
        ((0, 0), "e4", (0, -1), "e2"),
        ((1, 0), "e4", (1, -1), "e2"),
        ((0, -1), "e1", (1, -1), "e3"),
    ),
}


@dataclass(frozen=True)
class Extension:
    """Piecewise polynomial extension on unit squares around the original.

    ``pieces`` maps square offsets (in whole squares; (0, 0) is the original)
    to plain Legendre coefficient matrices in that square's own [-1, 1]^2
    coordinates. The gradient seminorm is invariant under the affine map to
    any congruent square, so the squared seminorm of the extension is simply
    the sum over pieces.
    """

    situation: str
    degree: int
    pieces: dict[tuple[int, int], np.ndarray]

    def seminorm_squared(self) -> float:
        return sum(h1_seminorm_squared(c) for c in self.pieces.values())

    @property
    def restriction(self) -> np.ndarray:
        return self.pieces[(0, 0)]


def _mirror_x(c: np.ndarray) -> np.ndarray:
    out = c.copy()
    out[1::2, :] *= -1.0
    return out


def _mirror_y(c: np.ndarray) -> np.ndarray:
    out = c.copy()
    out[:, 1::2] *= -1.0
    return out


def _decay(c: np.ndarray, axis: int, weight: np.ndarray) -> np.ndarray:
    """Multiply by a linear weight along one axis (degree grows by one)."""
    moved = c if axis == 0 else c.T
    out = np.zeros((moved.shape[0] + 1, moved.shape[1]))
    for j in range(moved.shape[1]):
        prod = npleg.legmul(weight, moved[:, j])
        out[: prod.size, j] = prod
    return out if axis == 0 else out.T


def side_trace(coeffs: np.ndarray, side: str) -> np.ndarray:
    """Trace on one side of the square as 1d Legendre coefficients.

    Endpoint evaluation of a Legendre series is a signed coefficient sum, so
    this is exact.
    """
    c = np.asarray(coeffs, dtype=float)
    if side == "e1":
        return c.sum(axis=0)
    if side == "e3":
        signs = (-1.0) ** np.arange(c.shape[0])
        return signs @ c
    if side == "e2":
        return c.sum(axis=1)
    if side == "e4":
        signs = (-1.0) ** np.arange(c.shape[1])
        return c @ signs
    raise ValueError(f"unknown side {side!r}")


def h1_seminorm_squared(coeffs: np.ndarray) -> float:
    """Squared gradient seminorm of a plain Legendre coefficient matrix."""
    c = np.asarray(coeffs, dtype=float)
    norms = lambda n: 2.0 / (2.0 * np.arange(n) + 1.0)  # noqa: E731
    total = 0.0
    if c.shape[0] > 1:
        dx = npleg.legder(c, axis=0)
        total += np.einsum(
            "ij,i,j->", dx * dx, norms(dx.shape[0]), norms(dx.shape[1])
        )
    if c.shape[1] > 1:
        dy = npleg.legder(c, axis=1)
        total += np.einsum(
            "ij,i,j->", dy * dy, norms(dy.shape[0]), norms(dy.shape[1])
        )
    return float(total)


def extension_operator(
    situation: str, coeffs: np.ndarray, degree: int | None = None
) -> Extension:
    """Extend v beyond its square by the situation's reflection construction.

    ``coeffs`` is the plain Legendre coefficient matrix of v on [-1, 1]^2.
    The input must satisfy the situation's zero-trace preconditions. The
    result restricts to v on the original square, vanishes on the clamped
    outer sides of the configuration, and raises the coordinate degree by at
    most one (only the decay situations raise it at all).
    """
    if situation not in SITUATIONS:
        raise ValueError(f"situation must be one of {SITUATIONS}, got {situation!r}")
    c = np.atleast_2d(np.asarray(coeffs, dtype=float))
    if degree is not None:
        if c.shape[0] > degree + 1 or c.shape[1] > degree + 1:
            raise ValueError(
                f"coefficients of shape {c.shape} exceed degree {degree}"
            )
        padded = np.zeros((degree + 1, degree + 1))
        padded[: c.shape[0], : c.shape[1]] = c
        c = padded
    scale = max(1.0, float(np.max(np.abs(c))) if c.size else 1.0)
    for side in PRE_ZERO_SIDES[situation]:
        if np.max(np.abs(side_trace(c, side)), initial=0.0) > 1e-12 * scale:
            raise ValueError(
                f"situation {situation} needs zero trace on side {side}"
            )
    if situation == "a":
        pieces = {(0, 0): c, (0, -1): _mirror_y(c)}
    elif situation == "b":
        pieces = {(0, 0): c, (1, 0): _mirror_x(c)}
    elif situation == "c":
        mx = _mirror_x(c)
        pieces = {(0, 0): c, (1, 0): mx, (0, -1): _mirror_y(c),
                  (1, -1): _mirror_y(mx)}
    elif situation == "d":
        # weight 1 at the seam (local x = -1 of the right square), 0 outside
        decayed = _decay(_mirror_x(c), axis=0, weight=np.array([0.5, -0.5]))
        pieces = {(0, 0): c, (1, 0): decayed, (0, -1): _mirror_y(c),
                  (1, -1): _mirror_y(decayed)}
    else:
        decayed = _decay(_mirror_y(c), axis=1, weight=np.array([0.5, 0.5]))
        pieces = {(0, 0): c, (0, -1): decayed, (1, 0): _mirror_x(c),
                  (1, -1): _mirror_x(decayed)}
    return Extension(
        situation=situation,
        degree=max(c.shape) - 1,
        pieces={k: v for k, v in pieces.items()},
    )


def extension_interface_checks(ext: Extension) -> tuple[float, float]:
    """Max seam mismatch and max clamped-side trace of an extension.

    Both are coefficient-space sup norms; conforming extensions keep them at
    rounding level.
    """
    seam_err = 0.0
    for off_a, side_a, off_b, side_b in _SEAMS[ext.situation]:
        ta = side_trace(ext.pieces[off_a], side_a)
        tb = side_trace(ext.pieces[off_b], side_b)
        width = max(ta.size, tb.size)
        pa = np.zeros(width)
        pa[: ta.size] = ta
        pb = np.zeros(width)
        pb[: tb.size] = tb
        seam_err = max(seam_err, float(np.max(np.abs(pa - pb), initial=0.0)))
    clamp_err = 0.0
    for offset, side in _POST_ZERO[ext.situation]:
        tr = side_trace(ext.pieces[offset], side)
        clamp_err = max(clamp_err, float(np.max(np.abs(tr), initial=0.0)))
    return seam_err, clamp_err


def _endpoint_nullspace(degree: int, zero_at_minus1: bool, zero_at_plus1: bool):
    rows = []
    k = np.arange(degree + 1)
    if zero_at_plus1:
        rows.append(np.ones(degree + 1))
    if zero_at_minus1:
        rows.append((-1.0) ** k)
    if not rows:
        return np.eye(degree + 1)
    return scipy.linalg.null_space(np.array(rows))


def random_admissible(
    situation: str, degree: int, rng: np.random.Generator
) -> np.ndarray:
    """Random coefficient matrix satisfying the situation's preconditions."""
    zero = PRE_ZERO_SIDES[situation]
    bx = _endpoint_nullspace(degree, "e3" in zero, "e1" in zero)
    by = _endpoint_nullspace(degree, "e4" in zero, "e2" in zero)
    for _ in range(100):
        g = rng.standard_normal((bx.shape[1], by.shape[1]))
        c = bx @ g @ by.T
        if h1_seminorm_squared(c) > 1e-12:
            return c
    raise RuntimeError("failed to draw a nonzero admissible polynomial")


def measured_extension_ratio(
    situation: str, degree: int, samples: int, seed: int = 0
) -> float:
    """Largest observed seminorm ratio |Ev| / |v| over random admissible v."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        c = random_admissible(situation, degree, rng)
        ext = extension_operator(situation, c)
        ratio = np.sqrt(ext.seminorm_squared() / h1_seminorm_squared(c))
        worst = max(worst, float(ratio))
    return worst
