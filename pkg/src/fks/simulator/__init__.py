"""Interactive prototype execution: sessions, compiled tables, wire service."""

from .ir import compile_model, interpret_table_step, load_ir_network
from .session import (
    BranchPrompt,
    ModelRejected,
    SessionDelta,
    SimSession,
    Stimulus,
    create_session,
)

__all__ = [
    "BranchPrompt",
    "ModelRejected",
    "SessionDelta",
    "SimSession",
    "Stimulus",
    "compile_model",
    "create_session",
    "interpret_table_step",
    "load_ir_network",
]
