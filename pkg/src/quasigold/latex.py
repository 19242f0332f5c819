"""Minimal LaTeX-to-Unicode cleanup for BibTeX field values.

Only brace stripping and a fixed accent/symbol table are handled. Any other
control sequence is left verbatim together with its braced argument.
"""
from __future__ import annotations

import re
import unicodedata

# accent command -> combining character
_ACCENTS = {
    "'": "\u0301",
    "`": "\u0300",
    "^": "\u0302",
    '"': "\u0308",
    "~": "\u0303",
    "=": "\u0304",
    ".": "\u0307",
    "c": "\u0327",
    "v": "\u030c",
    "u": "\u0306",
    "H": "\u030b",
    "r": "\u030a",
    "k": "\u0328",
    "d": "\u0323",
    "b": "\u0331",
}

_SYMBOLS = {
    "ss": "ß",
    "o": "ø",
    "O": "Ø",
    "aa": "å",
    "AA": "Å",
    "ae": "æ",
    "AE": "Æ",
    "oe": "œ",
    "OE": "Œ",
    "l": "ł",
    "L": "Ł",
    "i": "ı",
    "j": "ȷ",
}

_ESCAPES = {"\\&": "&", "\\%": "%", "\\_": "_", "\\#": "#", "\\$": "$", "\\{": "\x00", "\\}": "\x01"}

# \'e  \'{e}  {\'e}  \'\i  \c{c}  \v s
_SYMBOL_ACCENT_RE = re.compile(
    r"""\\(['`^"~=.])\s*(?:\{\s*(\\[ij]|[A-Za-z])\s*\}|(\\[ij](?![A-Za-z])|[A-Za-z]))"""
)
_LETTER_ACCENT_RE = re.compile(r"\\([cvuHrkdb])(?:\s*\{\s*(\\[ij]|[A-Za-z])\s*\}|\s+([A-Za-z]))")
_SYMBOL_RE = re.compile(r"\\(ss|aa|AA|ae|AE|oe|OE|o|O|l|L|i|j)(?![A-Za-z])(?:\{\})?\s?")
_COMMAND_BEFORE_BRACE_RE = re.compile(r"\\[A-Za-z]+\s*$")


def _accent(match: re.Match[str]) -> str:
    combining = _ACCENTS[match.group(1)]
    base = match.group(2) or match.group(3)
    if base in ("\\i", "\\j"):
        base = base[1]
    return unicodedata.normalize("NFC", base + combining)


def _strip_braces(text: str) -> str:
    out: list[str] = []
    keep_stack: list[bool] = []
    for i, ch in enumerate(text):
        if ch == "{":
            keep = bool(_COMMAND_BEFORE_BRACE_RE.search(text[max(0, i - 40) : i]))
            keep_stack.append(keep)
            if keep:
                out.append(ch)
        elif ch == "}":
            if keep_stack and keep_stack.pop():
                out.append(ch)
        else:
            out.append(ch)
    return "".join(out)


def latex_to_unicode(value: str) -> str:
    """Convert accents and escapes to Unicode, drop grouping braces, collapse spaces.

    >>> latex_to_unicode("Soft{w}are")
    'Software'
    >>> latex_to_unicode(r"M{\\\"u}ller")
    'Müller'
    """
    text = value
    for src, dst in _ESCAPES.items():
        text = text.replace(src, dst)
    text = _SYMBOL_ACCENT_RE.sub(_accent, text)
    text = _LETTER_ACCENT_RE.sub(_accent, text)
    text = _SYMBOL_RE.sub(lambda m: _SYMBOLS[m.group(1)], text)
    text = _strip_braces(text)
    text = text.replace("~", " ").replace("\x00", "{").replace("\x01", "}")
    return " ".join(text.split())
