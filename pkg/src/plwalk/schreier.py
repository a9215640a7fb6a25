"""The Schreier graph on the dyadic rationals: neighbors, labeled balls,
vertex classes, ray/skeleton decomposition and 2-adic end addressing.

Vertices are dyadic values, not indices; the graph is infinite and is
generated on demand.  Balls are materialized only for export and for
truncated-chain solves.  Multi-edges and self-loops are kept (they carry
walk probability), but DOT output merges parallel edges visually.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .dyadic import Dyadic, ZERO
from .plmaps import OutOfDomain, PLMap, generator

__all__ = [
    "K_LABELS",
    "VertexClass",
    "classify_vertex",
    "neighbors",
    "labeled_neighbors",
    "LabeledBall",
    "ball",
    "RayKind",
    "RayMembership",
    "ray_membership",
    "skeleton_end_address",
    "grey_parent",
    "EndKind",
    "EndAddress",
    "export_dot",
    "export_csv",
    "ResourceLimit",
]

#: generating set with display labels; lowercase = inverse.
K_LABELS = tuple((s, generator(s)) for s in ("A", "a", "B", "b"))


class ResourceLimit(RuntimeError):
    pass


class VertexClass(enum.Enum):
    BLACK = "black"  # gamma <= 0
    GREY = "grey"  # 0 < gamma < 1
    WHITE = "white"  # gamma >= 1


def classify_vertex(gamma: Dyadic) -> VertexClass:
    if gamma <= ZERO:
        return VertexClass.BLACK
    if gamma < Dyadic(1):
        return VertexClass.GREY
    return VertexClass.WHITE


def neighbors(gamma: Dyadic, gens=None) -> list[tuple[PLMap, Dyadic]]:
    """Images of gamma under each generator; duplicates kept (multi-edges
    carry walk probability)."""
    if gens is None:
        gens = [g for _, g in K_LABELS]
    return [(g, g(gamma)) for g in gens]


def labeled_neighbors(gamma: Dyadic, labeled_gens=K_LABELS):
    return [(label, g(gamma)) for label, g in labeled_gens]


@dataclass(frozen=True)
class LabeledBall:
    center: Dyadic
    radius: int
    vertices: frozenset
    edges: tuple  # (source, label, target), one per generator application


def ball(center: Dyadic, radius: int, labeled_gens=K_LABELS, max_vertices: int = 200_000) -> LabeledBall:
    """Breadth-first ball of the given radius around a vertex."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    seen = {center}
    frontier = [center]
    edges = []
    for _ in range(radius):
        nxt = []
        for v in frontier:
            for label, w in labeled_neighbors(v, labeled_gens):
                edges.append((v, label, w))
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
                    if len(seen) > max_vertices:
                        raise ResourceLimit(f"ball exceeds {max_vertices} vertices")
        frontier = nxt
    return LabeledBall(center, radius, frozenset(seen), tuple(edges))


class RayKind(enum.Enum):
    SKELETON = "skeleton"
    NEG_RAY = "neg-ray"
    POS_RAY = "pos-ray"


@dataclass(frozen=True)
class RayMembership:
    kind: RayKind
    attachment: Dyadic | None = None


def ray_membership(gamma: Dyadic) -> RayMembership:
    """Locate a vertex: interior of a negative/positive ray (with its
    attachment point on the skeleton) or skeleton vertex.  The vertex 1 is
    the attachment of both a negative and a positive ray but is itself a
    skeleton vertex, as is everything in (0, 2)."""
    if gamma <= ZERO:
        # attachment gamma + k in (0, 1]
        return RayMembership(RayKind.NEG_RAY, gamma - (gamma.ceil() - 1))
    if gamma >= Dyadic(2):
        # attachment gamma - k in [1, 2)
        return RayMembership(RayKind.POS_RAY, gamma - (gamma.floor() - 1))
    return RayMembership(RayKind.SKELETON)


def skeleton_end_address(gamma: Dyadic) -> int:
    """Odd numerator of a grey vertex; its binary digits above bit 0 are the
    branch choices of the geodesic from 1/2 in the grey binary tree."""
    if not ZERO < gamma < Dyadic(1):
        raise OutOfDomain(f"{gamma} is not a grey vertex")
    return gamma.num


def grey_parent(gamma: Dyadic) -> tuple[int, Dyadic]:
    """Invert one downward branching: returns (branch bit, parent vertex)."""
    if not ZERO < gamma < Dyadic(1) or gamma == Dyadic(1, 1):
        raise OutOfDomain(f"{gamma} has no grey parent")
    doubled = gamma.mul_pow2(1)
    if doubled < Dyadic(1):
        return 0, doubled
    return 1, doubled - 1


class EndKind(enum.Enum):
    SKELETON = "Skeleton"
    NEG_RAY = "NegRay"
    POS_RAY = "PosRay"
    UNDECIDED = "Undecided"


@dataclass(frozen=True)
class EndAddress:
    """Classified limit end of a trajectory.

    Skeleton ends carry the stabilized low bits of the odd numerator (an odd
    prefix of the 2-adic address); ray ends carry the attachment vertex.
    """

    kind: EndKind
    prefix: int | None = None
    bits_known: int | None = None
    attachment: Dyadic | None = None

    def payload(self) -> str:
        if self.kind is EndKind.SKELETON:
            return f"{self.prefix}:{self.bits_known}"
        if self.kind is EndKind.UNDECIDED:
            return ""
        return str(self.attachment)


UNDECIDED = EndAddress(EndKind.UNDECIDED)


# -- exports ----------------------------------------------------------------


def _sorted_vertices(b: LabeledBall):
    return sorted(b.vertices)


def export_csv(b: LabeledBall) -> str:
    """Edge list: one row per generator application, dyadic text format."""
    lines = ["source,label,target"]
    for src, label, dst in sorted(b.edges, key=lambda e: (e[0], e[1], e[2])):
        lines.append(f"{src},{label},{dst}")
    return "\n".join(lines) + "\n"


def export_dot(b: LabeledBall) -> str:
    """DOT document, vertices colored by class, parallel edges merged."""
    fill = {VertexClass.BLACK: "gray25", VertexClass.GREY: "gray70", VertexClass.WHITE: "white"}
    lines = ["digraph schreier_ball {", "  node [style=filled];"]
    ids = {v: f"v{i}" for i, v in enumerate(_sorted_vertices(b))}
    for v, vid in ids.items():
        cls = classify_vertex(v)
        lines.append(f'  {vid} [label="{v}", fillcolor={fill[cls]}];')
    merged: dict[tuple, list[str]] = {}
    for src, label, dst in b.edges:
        # render only the uppercase orientation of each labeled edge
        if label.islower():
            src, dst, label = dst, src, label.upper()
        merged.setdefault((src, dst), []).append(label)
    for (src, dst), labels in sorted(merged.items()):
        lab = ",".join(sorted(set(labels)))
        lines.append(f'  {ids[src]} -> {ids[dst]} [label="{lab}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
