"""Defined terms with synonyms, definition sources, and element allocations.

annotate() marks defined-term spans in statement text for report underlining;
find_undefined() flags identifier-shaped tokens that lack a definition.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import DuplicateIdError, UnknownIdError
from .textscan import tokenize

_WORD_CHARS = re.compile(r"[A-Za-z0-9_]")
# lower-to-upper case change inside a token, e.g. FlightComputer
_INTERCAP = re.compile(r"[a-z][A-Z]")
_LEADING_PUNCT = "\"'([{<"


@dataclass
class GlossaryTerm:
    term: str
    synonyms: tuple[str, ...] = ()
    definition: str = ""
    source: str = ""
    allocations: tuple[str, ...] = ()


@dataclass
class Glossary:
    case_insensitive: bool = False
    _terms: dict[str, GlossaryTerm] = field(default_factory=dict)

    def add_term(self, term: GlossaryTerm) -> None:
        names = {term.term, *term.synonyms}
        for existing in self._terms.values():
            taken = {existing.term, *existing.synonyms}
            clash = names & taken
            if clash:
                raise DuplicateIdError(
                    f"glossary name(s) {sorted(clash)} already used by term {existing.term!r}")
        if len(names) != 1 + len(term.synonyms):
            raise DuplicateIdError(f"term {term.term!r} collides with its own synonyms")
        self._terms[term.term] = term

    def terms(self) -> list[GlossaryTerm]:
        return sorted(self._terms.values(), key=lambda t: t.term)

    def get(self, term: str) -> GlossaryTerm:
        try:
            return self._terms[term]
        except KeyError:
            raise UnknownIdError(f"unknown glossary term {term!r}") from None

    def __len__(self) -> int:
        return len(self._terms)

    def resolve(self, name: str) -> GlossaryTerm | None:
        """Look up a term by its own name or any synonym."""
        fold = (lambda s: s.lower()) if self.case_insensitive else (lambda s: s)
        wanted = fold(name)
        for term in self._terms.values():
            if fold(term.term) == wanted:
                return term
            if any(fold(s) == wanted for s in term.synonyms):
                return term
        return None


def _word_bounded(text: str, start: int, end: int) -> bool:
    if start > 0 and _WORD_CHARS.match(text[start - 1]):
        return False
    if end < len(text) and _WORD_CHARS.match(text[end]):
        return False
    return True


def annotate(text: str, glossary: Glossary) -> list[tuple[int, int, str]]:
    """Longest-match, word-bounded, non-overlapping term spans.

    Synonym hits annotate to their canonical term name.
    """
    haystack = text.lower() if glossary.case_insensitive else text
    candidates: list[tuple[int, int, str]] = []
    for term in glossary.terms():
        for name in (term.term, *term.synonyms):
            needle = name.lower() if glossary.case_insensitive else name
            if not needle:
                continue
            pos = haystack.find(needle)
            while pos != -1:
                end = pos + len(needle)
                if _word_bounded(text, pos, end):
                    candidates.append((pos, end, term.term))
                pos = haystack.find(needle, pos + 1)
    # leftmost first; longer span wins at equal starts; term name breaks ties
    candidates.sort(key=lambda c: (c[0], -(c[1] - c[0]), c[2]))
    spans: list[tuple[int, int, str]] = []
    cursor = 0
    for start, end, name in candidates:
        if start >= cursor:
            spans.append((start, end, name))
            cursor = end
    return spans


def find_undefined(text: str, glossary: Glossary,
                   element_names: frozenset[str] | set[str] = frozenset()) -> list[str]:
    """Identifier-shaped tokens with no definition, in first-appearance order.

    A candidate contains an underscore or an interior lower-to-upper case
    change; known glossary names and model element names are excluded.
    """
    defined: set[str] = set(element_names)
    for term in glossary.terms():
        defined.add(term.term)
        defined.update(term.synonyms)
    if glossary.case_insensitive:
        defined = {d.lower() for d in defined}

    seen: set[str] = set()
    out: list[str] = []
    for token in tokenize(text):
        word = token.text.lstrip(_LEADING_PUNCT)
        if "_" not in word and not _INTERCAP.search(word):
            continue
        key = word.lower() if glossary.case_insensitive else word
        if key in defined or word in seen:
            continue
        seen.add(word)
        out.append(word)
    return out


def usage_counts(texts: dict[str, str], glossary: Glossary) -> dict[str, int]:
    """Term -> number of annotated occurrences across the given texts."""
    counts = {term.term: 0 for term in glossary.terms()}
    for text in texts.values():
        for _, _, name in annotate(text, glossary):
            counts[name] += 1
    return counts


def reconcile_allocations(model) -> list[tuple[str, str, str]]:
    """Report slot bindings that bypass a term's declared allocations.

    Returns (term, element_id, status) rows where status is 'unallocated'
    for bindings on slots whose text names the term but whose element is
    absent from the term's allocation set. Duplication between glossary
    allocations and slot bindings is reported, never auto-merged.
    """
    rows: list[tuple[str, str, str]] = []
    for expr in model.expressions():
        stmt = expr.statement
        if stmt is None:
            continue
        for slot in stmt.slots().values():
            if slot is None or slot.binding is None:
                continue
            term = model.glossary.resolve(slot.text)
            if term is not None and slot.binding not in term.allocations:
                rows.append((term.term, slot.binding, "unallocated"))
    return sorted(set(rows))
