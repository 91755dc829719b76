"""Tokenizer for the model language. `--` starts a comment to end of line."""

from __future__ import annotations

from dataclasses import dataclass

KEYWORDS = frozenset({
    "datatype", "component", "automaton", "network", "trace", "tracespec",
    "refinement", "import", "end", "in", "out", "var", "state", "initial",
    "trans", "node", "wire", "event", "kind", "abstract", "concrete",
    "horizon", "slack", "domain", "policy", "repr", "abst", "for", "when",
    "if", "emit", "set", "int", "enum", "record", "true", "false",
    "and", "or", "not", "div", "mod",
})

SYMBOLS = (
    "->", "..", "==", "!=", "<=", ">=",
    "=", ":", ",", ".", "?", "!", "@", "(", ")", "{", "}",
    "+", "-", "*", "<", ">",
)


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "keyword" | "int" | "string" | symbol text | "eof"
    text: str
    line: int
    col: int

    def describe(self) -> str:
        return "end of input" if self.kind == "eof" else repr(self.text)


class LexError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == '"':
            start_col = col
            j = i + 1
            while j < n and text[j] not in '"\n':
                j += 1
            if j >= n or text[j] != '"':
                raise LexError("unterminated string", line, start_col)
            tokens.append(Token("string", text[i + 1:j], line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        if c.isdigit():
            start_col = col
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("int", text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            start_col = col
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "keyword" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, line, start_col))
            col += j - i
            i = j
            continue
        for sym in SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token(sym, sym, line, col))
                col += len(sym)
                i += len(sym)
                break
        else:
            raise LexError(f"unexpected character {c!r}", line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens
