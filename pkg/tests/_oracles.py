"""Random generators and brute-force reference implementations used by the tests.

The oracles here are written independently of the package code: query truth
values come from compiling the AST into a Python boolean expression, phrase
presence from a naive sliding-window scan, and Venn regions from direct
membership enumeration.
"""
from __future__ import annotations

import itertools
import random
import re
import string
from collections import Counter

from quasigold.query import And, Not, Or, Phrase, Scope, Scoped
from quasigold.records import BibRecord

# Every phrase uses its own tokens, so one phrase can never occur inside another.
PHRASE_POOL = (
    "alpha beta",
    "gamma",
    "delta epsilon zeta",
    "eta theta",
    "iota",
    "kappa lambda",
    "mu nu",
    "xi omicron pi",
)
FILLER = ("lorem", "ipsum", "dolor", "sit", "amet", "consectetur")


# --------------------------------------------------------------------------
# Query ASTs
# --------------------------------------------------------------------------


def random_ast(rng: random.Random, max_depth: int = 4, max_phrases: int = 6):
    """AST with at most ``max_depth`` operator levels and ``max_phrases`` leaves."""
    phrases = rng.sample(PHRASE_POOL, rng.randint(1, max_phrases))
    budget = list(phrases)

    def build(depth: int):
        if depth >= max_depth or len(budget) <= 1 or rng.random() < 0.25:
            return Phrase(budget.pop() if budget else rng.choice(phrases))
        kind = rng.choice(("and", "or", "not"))
        if kind == "not":
            return Not(build(depth + 1))
        n = rng.randint(2, min(3, max(2, len(budget))))
        kids = tuple(build(depth + 1) for _ in range(n))
        return And(kids) if kind == "and" else Or(kids)

    return build(0)


def ast_phrases(node) -> set[str]:
    if isinstance(node, Phrase):
        return {node.text}
    if isinstance(node, (Not, Scoped)):
        return ast_phrases(node.child)
    return set().union(*(ast_phrases(c) for c in node.children))


def compile_ast(node, names: dict[str, str]) -> str:
    """Python boolean expression over variables named in ``names``."""
    if isinstance(node, Phrase):
        return names[node.text]
    if isinstance(node, Not):
        return f"(not {compile_ast(node.child, names)})"
    if isinstance(node, Scoped):
        return compile_ast(node.child, names)
    joiner = " and " if isinstance(node, And) else " or "
    return "(" + joiner.join(compile_ast(c, names) for c in node.children) + ")"


def truth_table(node):
    """Yield (assignment, expected) for every assignment of the AST's phrases."""
    phrases = sorted(ast_phrases(node))
    names = {p: f"v{i}" for i, p in enumerate(phrases)}
    code = compile(compile_ast(node, names), "<ast>", "eval")
    for values in itertools.product((False, True), repeat=len(phrases)):
        env = {names[p]: v for p, v in zip(phrases, values)}
        yield dict(zip(phrases, values)), bool(eval(code, {}, env))


def record_for(rng: random.Random, assignment: dict[str, bool], scope: Scope, uid: str) -> BibRecord:
    """Record containing exactly the phrases assigned True within ``scope``.

    Absent phrases may still leave traces that must not count: a phrase
    outside the searched fields, its tokens reversed, or its tokens split
    between title and abstract.
    """
    title = [rng.choice(FILLER)]
    abstract = [rng.choice(FILLER)]
    keywords: list[str] = []
    for phrase, present in assignment.items():
        tokens = phrase.split()
        if present:
            where = 0 if scope is Scope.TITLE else rng.randrange(3)
            target = (title, abstract, keywords)[where]
            if where == 2:
                keywords.append(phrase.upper() if rng.random() < 0.3 else phrase)
            else:
                target.extend(tokens + [rng.choice(FILLER)])
        else:
            decoy = rng.randrange(4)
            if decoy == 1 and len(tokens) > 1:
                title.extend(reversed(tokens))
            elif decoy == 2 and len(tokens) > 1:
                title.append(tokens[0])
                abstract.insert(0, tokens[-1])
            elif decoy == 3 and scope is Scope.TITLE:
                abstract.extend(tokens)
    return BibRecord(
        record_id=uid,
        title=" ".join(title),
        abstract=" ".join(abstract),
        keywords=tuple(dict.fromkeys(keywords)),
        year=2020,
    )


def naive_contains(text: str, phrase: str) -> bool:
    toks = re.findall(r"[^\W_]+", text.casefold())
    want = re.findall(r"[^\W_]+", phrase.casefold())
    return any(toks[i : i + len(want)] == want for i in range(len(toks) - len(want) + 1))


# --------------------------------------------------------------------------
# Overlap
# --------------------------------------------------------------------------


def brute_force_regions(families: dict[str, set[str]]) -> Counter:
    universe = set().union(*families.values())
    return Counter(frozenset(n for n, s in families.items() if rid in s) for rid in universe)


# --------------------------------------------------------------------------
# Records for dedup
# --------------------------------------------------------------------------

TITLE_WORDS = ("test", "quality", "review", "mapping", "software", "code", "study", "metrics", "smells", "suite")
SURNAMES = ("Novak", "Okafor", "Lindqvist", "Moreau", "Tanaka", "Silva")


def perturb_title(rng: random.Random, title: str) -> str:
    choice = rng.randrange(4)
    if choice == 0:
        return title.upper()
    if choice == 1:
        return title + rng.choice((".", "?", " :", "!"))
    if choice == 2:
        return title.replace(" ", "  ", 1)
    return title


def random_record_set(rng: random.Random, max_records: int = 30) -> list[BibRecord]:
    """Records drawn from a small title pool so that duplicates are common."""
    pool = [" ".join(rng.sample(TITLE_WORDS, rng.randint(3, 7))) for _ in range(rng.randint(2, 10))]
    out = []
    for i in range(rng.randint(1, max_records)):
        title = perturb_title(rng, rng.choice(pool))
        author = rng.choice(SURNAMES)
        out.append(
            BibRecord(
                record_id=f"r{i:03d}",
                title=title,
                authors=(f"{author}, {rng.choice(string.ascii_uppercase)}.",),
                year=rng.choice((None, 2015, 2016)),
                venue=rng.choice((None, "ICST", "IST")),
                keywords=tuple(rng.sample(("a", "b", "c"), rng.randint(0, 2))),
                source_databases=frozenset(rng.sample(("Scopus", "ACM", "IEEE"), rng.randint(1, 2))),
            )
        )
    return out
