"""Offline mock backend: canned responses replayed in order."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


class TranscriptExhaustedError(RuntimeError):
    pass


@dataclass
class MockBackend:
    responses: list[str]
    prompts: list[str] = field(default_factory=list)
    cursor: int = 0

    @classmethod
    def from_file(cls, path: str) -> "MockBackend":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        if isinstance(doc, list):
            responses = doc
        else:
            responses = doc["responses"]
        return cls(responses=list(responses))

    def complete(self, prompt: str) -> str:
        self.prompts.append(prompt)
        if self.cursor >= len(self.responses):
            raise TranscriptExhaustedError(
                f"mock transcript exhausted after {len(self.responses)} responses")
        text = self.responses[self.cursor]
        self.cursor += 1
        return text
