"""Minimal s-expression reader and writer shared by the textual formats.

Atoms are any run of characters other than whitespace and parentheses;
integers are decoded to ``int``. Both directions are iterative so that very
long right-nested ``seq`` chains do not exhaust the Python stack.
"""

import re

_TOKEN = re.compile(r"\s*(?:(;[^\n]*)|(\()|(\))|([^\s()]+))")


class SexprError(ValueError):
    pass


def tokenize(text):
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip() == "":
                return
            raise SexprError(f"unexpected character at offset {pos}")
        pos = m.end()
        comment, lp, rp, atom = m.groups()
        if comment is not None:
            continue
        if lp:
            yield "("
        elif rp:
            yield ")"
        elif atom is not None:
            yield atom


def _atom(tok):
    if tok.isdigit():
        return int(tok)
    return tok


def read_all(text):
    """Parse every top-level form in ``text``."""
    stack = [[]]
    for tok in tokenize(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise SexprError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(_atom(tok))
    if len(stack) != 1:
        raise SexprError("unbalanced '('")
    return stack[0]


def read(text):
    forms = read_all(text)
    if len(forms) != 1:
        raise SexprError(f"expected one form, found {len(forms)}")
    return forms[0]


def dumps(form):
    out = []
    # Work items are either a form to emit or a literal string.
    work = [form]
    while work:
        item = work.pop()
        if isinstance(item, _Lit):
            out.append(item.s)
        elif isinstance(item, list):
            out.append("(")
            work.append(_Lit(")"))
            for i in range(len(item) - 1, -1, -1):
                work.append(item[i])
                if i:
                    work.append(_Lit(" "))
        else:
            out.append(str(item))
    return "".join(out)


class _Lit:
    __slots__ = ("s",)

    def __init__(self, s):
        self.s = s
