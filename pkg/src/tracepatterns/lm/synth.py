"""LM-backed synthesis flows: reward programs with automatic repair, label
proposals, and the detector-evolution mutator."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..annotate.library import PatternLibrary
from ..detector.ast import DetectorProgram
from ..reward.ast import RewardNode
from ..reward.eval import EvalContext, RewardValidationError, validate_program
from ..reward.parser import RewardParseError, parse_reward
from ..trace.model import SceneObject, Trace
from .extract import ExtractionError, extract_code, extract_detector
from .prompts import build_detector_prompt, build_label_prompt, build_reward_prompt


class SynthesisError(RuntimeError):
    def __init__(self, message: str, error_chain: list[str]):
        super().__init__(message + "".join(f"\n  attempt {i+1}: {e}"
                                           for i, e in enumerate(error_chain)))
        self.error_chain = error_chain


REPAIR_TEMPLATE = """The previous DSL program failed. Produce a corrected program.

Previous candidate:
```dsl
{candidate}
```

Interpreter error:
{error}

Respond again with ONLY the corrected DSL inside ```dsl fences."""


def synthesize_reward(goal: str, library: PatternLibrary, scene: list[SceneObject],
                      backend, retry_limit: int = 3,
                      validation_trace: Trace | None = None
                      ) -> tuple[RewardNode, list[str]]:
    """Prompt for a reward program; on parse/validation failure re-prompt
    with the candidate and the structured error. Returns the parsed program
    and the error chain (one entry per repair round)."""
    base_prompt = build_reward_prompt(goal, library, scene)
    prompt = base_prompt
    errors: list[str] = []
    for _ in range(retry_limit + 1):
        response = backend.complete(prompt)
        candidate = ""
        try:
            candidate = extract_code(response, "dsl")
            program = parse_reward(candidate)
            if validation_trace is not None:
                ctx = EvalContext.build(validation_trace, library)
                validate_program(program, ctx)
            return program, errors
        except (ExtractionError, RewardParseError, RewardValidationError) as exc:
            errors.append(str(exc))
            prompt = base_prompt + "\n\n" + REPAIR_TEMPLATE.format(
                candidate=candidate or "(no dsl fence found)", error=exc)
    raise SynthesisError(
        f"reward synthesis failed after {retry_limit + 1} attempts", errors)


def propose_labels(library: PatternLibrary, reasoning_snippets: list[str], k: int,
                   backend, retry_limit: int = 2,
                   abstract_guidance: str = "") -> list[tuple[str, str, str]]:
    """Ask for k new (label, description, reason) triples; drops items whose
    label duplicates an existing one case-insensitively."""
    if k < 1:
        raise ValueError("k must be >= 1")
    prompt = build_label_prompt(library, reasoning_snippets, k, abstract_guidance)
    errors: list[str] = []
    existing = {det.label.lower() for det in library}
    for _ in range(retry_limit + 1):
        response = backend.complete(prompt)
        try:
            try:
                text = extract_code(response, "json")
            except ExtractionError:
                text = response
            items = json.loads(text)
            if not isinstance(items, list):
                raise ValueError("expected a JSON array")
            out = []
            for item in items:
                label = str(item.get("label", "")).strip()
                description = str(item.get("description", "")).strip()
                reason = str(item.get("reason", "")).strip()
                if not label or not description or not reason:
                    raise ValueError(f"item missing label/description/reason: {item!r}")
                if label.lower() in existing:
                    continue
                out.append((label, description, reason))
            return out
        except (ValueError, json.JSONDecodeError) as exc:
            errors.append(str(exc))
    raise SynthesisError(
        f"label proposal failed after {retry_limit + 1} attempts", errors)


@dataclass
class LMDetectorMutator:
    """Mutator interface for funsearch backed by a chat model.

    Keeps the last error per prompt round and feeds it into the next
    request, mirroring the repair loop. Not deterministic unless the backend
    is (the mock backend is)."""

    backend: object
    label: str
    description: str
    library: PatternLibrary = field(default_factory=PatternLibrary)
    last_error: str = ""
    serial_only: bool = True  # one in-flight call at a time

    def __call__(self, parents: list[DetectorProgram], seed: int) -> str:
        parent_code = "\n\n".join(p.source for p in parents)
        prompt = build_detector_prompt(
            self.label, self.description, parent_code, self.library,
            errors=self.last_error)
        try:
            response = self.backend.complete(prompt)
            source, _schema = extract_detector(response)
            self.last_error = ""
            return source
        except ExtractionError as exc:
            self.last_error = str(exc)
            # Unusable response: echo the best parent so the iteration is a
            # no-op rather than a crash; funsearch charges the budget either way.
            return parents[0].source
