"""Pattern library: named detectors with dependency ordering and ablation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..trace.model import BUILTIN_EVENT_UIDS
from ..detector.ast import DetectorProgram
from ..detector.parser import parse_detector


class CycleError(ValueError):
    def __init__(self, cycle: list[str]):
        super().__init__(f"dependency cycle among detectors: {' -> '.join(cycle)}")
        self.cycle = cycle


@dataclass(frozen=True)
class PatternDetector:
    uid: str
    label: str
    description: str
    program: DetectorProgram
    origin: str = "guided"  # guided | automatic

    @property
    def parameters_schema(self) -> dict[str, str]:
        return self.program.params_schema

    @property
    def depends_on(self) -> tuple[str, ...]:
        return self.program.depends_on


@dataclass(frozen=True)
class PatternLibrary:
    detectors: tuple[PatternDetector, ...] = field(default=())

    def __post_init__(self):
        seen = set()
        for det in self.detectors:
            if det.uid in seen:
                raise ValueError(f"duplicate detector uid {det.uid!r}")
            if not det.label:
                raise ValueError(f"detector {det.uid!r} has an empty label")
            seen.add(det.uid)

    def __len__(self) -> int:
        return len(self.detectors)

    def __iter__(self):
        return iter(self.detectors)

    def uids(self) -> list[str]:
        return [d.uid for d in self.detectors]

    def get(self, uid: str) -> PatternDetector:
        for det in self.detectors:
            if det.uid == uid:
                return det
        raise KeyError(f"unknown detector uid {uid!r}")

    def with_detector(self, det: PatternDetector) -> "PatternLibrary":
        return PatternLibrary(self.detectors + (det,))

    def resolve_dependency(self, identifier: str) -> str | None:
        """Map an event identifier (uid or label, labels case-insensitive) to
        a library uid; None for built-ins and unknown identifiers."""
        if identifier in BUILTIN_EVENT_UIDS:
            return None
        for det in self.detectors:
            if det.uid == identifier or det.label.lower() == identifier.lower():
                return det.uid
        return None

    def dependency_edges(self) -> dict[str, set[str]]:
        """uid -> set of library uids it depends on."""
        edges: dict[str, set[str]] = {}
        for det in self.detectors:
            deps = set()
            for ident in det.depends_on:
                resolved = self.resolve_dependency(ident)
                if resolved is not None and resolved != det.uid:
                    deps.add(resolved)
            edges[det.uid] = deps
        return edges


def resolve_order(library: PatternLibrary) -> list[str]:
    """Topological order over the dependency graph, lexicographic tie-break."""
    edges = library.dependency_edges()
    remaining = dict(edges)
    order: list[str] = []
    while remaining:
        ready = sorted(uid for uid, deps in remaining.items() if not deps)
        if not ready:
            cycle = _find_cycle(remaining)
            raise CycleError(cycle)
        for uid in ready:
            order.append(uid)
            del remaining[uid]
        for deps in remaining.values():
            deps.difference_update(ready)
    return order


def _find_cycle(edges: dict[str, set[str]]) -> list[str]:
    start = sorted(edges)[0]
    seen = [start]
    node = start
    while True:
        node = sorted(edges[node] & set(edges))[0]
        if node in seen:
            return seen[seen.index(node):] + [node]
        seen.append(node)


def ablate(library: PatternLibrary, uid: str) -> PatternLibrary:
    """Remove a detector and the transitive closure of its dependents."""
    library.get(uid)
    edges = library.dependency_edges()
    removed = {uid}
    changed = True
    while changed:
        changed = False
        for det_uid, deps in edges.items():
            if det_uid not in removed and deps & removed:
                removed.add(det_uid)
                changed = True
    return PatternLibrary(tuple(d for d in library.detectors if d.uid not in removed))


# --- JSON persistence --------------------------------------------------------


def library_to_json(library: PatternLibrary) -> str:
    items = [
        {
            "uid": det.uid,
            "label": det.label,
            "description": det.description,
            "origin": det.origin,
            "source": det.program.source,
            "parameters_schema": det.parameters_schema,
            "depends_on": list(det.depends_on),
        }
        for det in library.detectors
    ]
    return json.dumps(items, indent=2, sort_keys=True) + "\n"


def library_from_json(document: str | bytes) -> PatternLibrary:
    items = json.loads(document)
    detectors = []
    for item in items:
        program = parse_detector(item["source"])
        detectors.append(
            PatternDetector(
                uid=item["uid"],
                label=item["label"],
                description=item.get("description", ""),
                program=program,
                origin=item.get("origin", "guided"),
            )
        )
    return PatternLibrary(tuple(detectors))
