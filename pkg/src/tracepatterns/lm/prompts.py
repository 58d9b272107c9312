"""Prompt templates and assembly.

Templates are fixed files with {{ slot }} placeholders; assembly is pure
string substitution so prompts are byte-reproducible for golden tests.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

from ..annotate.library import PatternLibrary
from ..detector.ast import PRIMITIVES, QUANTIFIERS
from ..trace.model import SceneObject

_SLOT_RE = re.compile(r"\{\{\s*(\w+)\s*\}\}")


class MissingSlotError(KeyError):
    pass


def load_template(name: str) -> str:
    return resources.files("tracepatterns.lm").joinpath(
        f"templates/{name}.txt").read_text(encoding="utf-8")


def render(template: str, **slots: str) -> str:
    def sub(match: re.Match) -> str:
        key = match.group(1)
        if key not in slots:
            raise MissingSlotError(f"prompt slot {{{{ {key} }}}} not provided")
        return str(slots[key])

    return _SLOT_RE.sub(sub, template)


def detector_grammar_text() -> str:
    """Compact grammar card inlined into the evolution prompt."""
    signals = ", ".join(f"{name}({', '.join(sig)})" for name, (sig, _) in
                        sorted(PRIMITIVES.items()))
    return (
        "program: DETECT <name> PARAMS {key: type, ...} WHERE <expr> EMIT {key: expr, ...}\n"
        "expr: and/or/not, comparisons (< <= > >= == !=), arithmetic (+ - * /),\n"
        "      numbers, strings, true/false, parentheses\n"
        f"signals and operators: {signals}\n"
        f"quantifiers: {', '.join(QUANTIFIERS)}(binding, filter, body) with filters\n"
        "      any/dynamic/static/red/green/blue/black/circle/bar/jar/standingsticks\n"
        "durations and windows are normalized times in [0, 1]; event_active uids are\n"
        "string literals; EMIT keys must be declared in PARAMS."
    )


def library_summary(library: PatternLibrary) -> str:
    if not len(library):
        return "(library is empty; only built-in events are available)"
    lines = []
    for det in library:
        schema = ", ".join(f"{k}: {t}" for k, t in det.parameters_schema.items()) or "none"
        lines.append(f"- uid: {det.uid} | label: {det.label} | params: {schema}\n"
                     f"  {det.description}")
    return "\n".join(lines)


def library_table(library: PatternLibrary) -> str:
    if not len(library):
        return "(empty)"
    return "\n".join(f"{det.uid} | {det.label} | {det.description}" for det in library)


def scene_summary(scene: list[SceneObject]) -> str:
    lines = []
    for obj in sorted(scene, key=lambda o: o.id):
        center = obj.center()
        kind = "static" if obj.static else "dynamic"
        lines.append(
            f"- {obj.description}: {kind} {obj.color} {obj.type} at "
            f"({center.x:.1f}, {center.y:.1f})")
    return "\n".join(lines)


def build_reward_prompt(goal: str, library: PatternLibrary,
                        scene: list[SceneObject]) -> str:
    return render(
        load_template("reward_prompt"),
        goal=goal,
        dsl_guide=load_template("dsl_guide").rstrip("\n"),
        library_summary=library_summary(library),
        scene_summary=scene_summary(scene),
    )


def build_label_prompt(library: PatternLibrary, reasoning_snippets: list[str],
                       k: int, abstract_guidance: str = "") -> str:
    return render(
        load_template("label_prompt"),
        trace_spec=load_template("trace_spec").rstrip("\n"),
        library_table=library_table(library),
        rl_thinks="\n---\n".join(reasoning_snippets) or "(none)",
        abstract_guidance=abstract_guidance,
        K=str(k),
    )


def build_detector_prompt(label: str, description: str, parent_code: str,
                          library: PatternLibrary, errors: str = "",
                          extra_constraints: str = "") -> str:
    formattings = []
    formattings.append('CollisionStart / CollisionEnd: {"a_id": int, "b_id": int, '
                       '"contact_points": list}')
    formattings.append('TaskComplete: {"success": bool}')
    for det in library:
        schema = ", ".join(f'"{k}": {t}' for k, t in det.parameters_schema.items())
        formattings.append(f"{det.uid} ({det.label}): {{{schema}}}")
    return render(
        load_template("detector_prompt"),
        label=label,
        description=description,
        trace_spec=load_template("trace_spec").rstrip("\n"),
        grammar=detector_grammar_text(),
        formattings="\n".join(formattings),
        extra_constraints=extra_constraints or "- (no extra constraints)",
        parent_code=parent_code,
        errors=errors or "(none)",
    )


@dataclass(frozen=True)
class MutationRequest:
    """A unit of work for a backend: one of the three prompt kinds."""

    kind: str  # detector-evolution | reward-synthesis | label-suggestion
    slots: dict[str, Any] = field(default_factory=dict)
    retry_budget: int = 3


def assemble_prompt(request: MutationRequest) -> str:
    if request.kind == "reward-synthesis":
        return build_reward_prompt(**request.slots)
    if request.kind == "label-suggestion":
        return build_label_prompt(**request.slots)
    if request.kind == "detector-evolution":
        return build_detector_prompt(**request.slots)
    raise ValueError(f"unknown request kind {request.kind!r}")
