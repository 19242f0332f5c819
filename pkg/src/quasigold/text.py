"""Text normalization shared by record identity, deduplication and phrase search."""
from __future__ import annotations

import re
import unicodedata

_TOKEN_RE = re.compile(r"[^\W_]+")
_WS_RE = re.compile(r"\s+")


def normalize_title(title: str) -> str:
    """Case-fold, replace punctuation with spaces and collapse whitespace.

    >>> normalize_title("Software  Testing:   A Review")
    'software testing a review'
    """
    text = unicodedata.normalize("NFC", title).casefold()
    text = "".join(ch if ch.isalnum() or ch.isspace() else " " for ch in text)
    return _WS_RE.sub(" ", text).strip()


def tokenize(text: str | None) -> tuple[str, ...]:
    """Split text into case-folded alphanumeric tokens.

    Hyphens, underscores and every other non-alphanumeric character act as
    separators, so ``"model-based"`` yields ``("model", "based")``.
    """
    if not text:
        return ()
    return tuple(_TOKEN_RE.findall(unicodedata.normalize("NFC", text).casefold()))


def contains_sequence(haystack: tuple[str, ...], needle: tuple[str, ...]) -> bool:
    n = len(needle)
    if n == 0 or n > len(haystack):
        return False
    first = needle[0]
    for i in range(len(haystack) - n + 1):
        if haystack[i] == first and haystack[i : i + n] == needle:
            return True
    return False


def surname(author: str) -> str:
    """Best-effort surname of an author string, normalized for comparison.

    ``"Smith, A."`` and ``"A. Smith"`` both give ``"smith"``.
    """
    author = author.strip()
    if not author:
        return ""
    if "," in author:
        part = author.split(",", 1)[0]
    else:
        part = author.split()[-1]
    return normalize_title(part)
