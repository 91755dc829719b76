"""Timed-stream modeling toolkit.

Parses textual system models (datatypes, component networks, state
machines, event traces), gives them a common timed-stream semantics,
checks cross-view consistency, verifies refinement relations by bounded
exhaustive enumeration, and executes models as interactive prototypes.
"""

__version__ = "0.1.0"
