"""Textual model language: parser, canonical printer, wellformedness.

One document per `.fks` file: datatype definitions, component interfaces,
automata (state transition diagrams), networks (system structure), event
traces and trace expressions, and refinement claims. Render with
`print_model`; `parse_model(print_model(doc))` reproduces the document
exactly.
"""

from .ast import (
    AutomatonDecl,
    ComponentDecl,
    EndpointRef,
    ModelDocument,
    NetworkDecl,
    NodeDecl,
    TraceDecl,
    TraceSpecDecl,
    VarDef,
    WireDecl,
)
from .elaborate import Corpus, load_corpus
from .parser import Diagnostic, ParseReport, parse_model
from .printer import print_model
from .wellformed import check_wellformedness

__all__ = [
    "AutomatonDecl",
    "ComponentDecl",
    "Corpus",
    "Diagnostic",
    "EndpointRef",
    "ModelDocument",
    "NetworkDecl",
    "NodeDecl",
    "ParseReport",
    "TraceDecl",
    "TraceSpecDecl",
    "VarDef",
    "WireDecl",
    "check_wellformedness",
    "load_corpus",
    "parse_model",
    "print_model",
]
