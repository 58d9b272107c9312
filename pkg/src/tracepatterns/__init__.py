"""Pattern discovery from 2D rigid-body simulation traces.

Subpackages:
    trace     -- trace schema, JSON I/O, validation, fast per-trace indexing
    sim       -- deterministic rigid-body simulator and scene templates
    detector  -- DetectorScript: the sandboxed pattern-detector language
    annotate  -- pattern library management and trace annotation
    evolve    -- fitness evaluation and island-model program search
    reward    -- reward DSL parser and evaluators
    qa        -- deterministic Q&A oracle over traces
    lm        -- chat-completion bridge (HTTP + offline mock) and prompts
"""

__version__ = "0.1.0"
