"""Just enough s-expression reading to pull objects/init/goal out of PDDL."""

from __future__ import annotations


def tokenize(text: str) -> list[str]:
    stripped = "\n".join(line.split(";", 1)[0] for line in text.splitlines())
    tokens: list[str] = []
    word: list[str] = []
    for ch in stripped:
        if ch in "()":
            if word:
                tokens.append("".join(word))
                word = []
            tokens.append(ch)
        elif ch.isspace():
            if word:
                tokens.append("".join(word))
                word = []
        else:
            word.append(ch.lower())
    if word:
        tokens.append("".join(word))
    return tokens


def parse(text: str):
    """First s-expression in the text as nested lists of lowercase strings."""
    tokens = tokenize(text)
    tree, pos = _read(tokens, 0)
    del pos
    return tree


def _read(tokens: list[str], pos: int):
    if pos >= len(tokens):
        raise ValueError("unexpected end of input")
    if tokens[pos] != "(":
        return tokens[pos], pos + 1
    pos += 1
    items = []
    while pos < len(tokens) and tokens[pos] != ")":
        item, pos = _read(tokens, pos)
        items.append(item)
    if pos >= len(tokens):
        raise ValueError("unbalanced parentheses")
    return items, pos + 1


def sections(tree, keyword: str):
    """Top-level sections of a (define ...) form starting with ``keyword``."""
    for node in tree:
        if isinstance(node, list) and node and node[0] == keyword:
            yield node
