"""Decompose "shall" statements into pattern slots; render slots back to text.

Detection is positional, not grammatical: a leading condition keyword with a
comma before "shall" selects the five-slot form; a trailing "under <condition>"
after the constraint selects the Carson form; anything else is the three-slot
form. The token after "shall" is taken as the action head. No marker is ever
guessed: a missing mandatory region raises EmptySlot instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .errors import EmptySlotError, MissingMandatorySlotError, NoShallKeywordError
from .model import MANDATORY_SLOTS, SLOT_FIELDS, SlotValue, StructuredStatement
from .textscan import Token, tokenize

if TYPE_CHECKING:
    from .catalog import Catalog
    from .glossary import Glossary

ARTICLES = ("The", "the", "A", "An")

Span = tuple[int, int]


@dataclass
class ParseDiagnostics:
    matched_pattern: str | None = None
    shall_count: int = 0
    unconsumed: list[Span] = field(default_factory=list)
    slot_spans: dict[str, Span] = field(default_factory=dict)
    # (start, end, label) for articles, commas, 'shall', 'under', final period
    connective_spans: list[tuple[int, int, str]] = field(default_factory=list)


def _marker_sequences(lexicon: tuple[str, ...]) -> list[tuple[str, ...]]:
    seqs = [tuple(m.lower().split()) for m in lexicon if m.strip()]
    seqs.sort(key=len, reverse=True)
    return seqs


def _find_marker(tokens: list[Token], start: int,
                 sequences: list[tuple[str, ...]]) -> tuple[int, int] | None:
    """First (index, length-in-tokens) marker match at or after start."""
    lower = [t.text.lower() for t in tokens]
    for k in range(start, len(tokens)):
        for seq in sequences:
            if k + len(seq) <= len(tokens) and tuple(lower[k:k + len(seq)]) == seq:
                return k, len(seq)
    return None


def _span_of(tokens: list[Token], first: int, last: int) -> Span:
    return tokens[first].start, tokens[last].end


def _bind(slot_text: str, glossary: Glossary | None) -> str | None:
    if glossary is None:
        return None
    term = glossary.resolve(slot_text)
    if term is not None and len(term.allocations) == 1:
        return term.allocations[0]
    return None


def _uncovered(text: str, covered: list[Span]) -> list[Span]:
    mask = bytearray(len(text))
    for start, end in covered:
        for i in range(max(start, 0), min(end, len(text))):
            mask[i] = 1
    out: list[Span] = []
    run_start: int | None = None
    for i, ch in enumerate(text):
        if not mask[i] and not ch.isspace():
            if run_start is None:
                run_start = i
        else:
            if run_start is not None:
                out.append((run_start, i))
                run_start = None
    if run_start is not None:
        out.append((run_start, len(text)))
    return out


def parse_statement(text: str, glossary: Glossary | None = None,
                    catalog: Catalog | None = None
                    ) -> tuple[StructuredStatement, ParseDiagnostics]:
    if catalog is None:
        from .catalog import default_catalog
        catalog = default_catalog()

    tokens = tokenize(text)
    shall_idxs = [i for i, t in enumerate(tokens) if t.text.lower() == "shall"]
    diag = ParseDiagnostics(shall_count=len(shall_idxs))
    if not shall_idxs:
        raise NoShallKeywordError(f"no 'shall' keyword in {text!r}")
    shall = shall_idxs[0]

    connectives: list[tuple[int, int, str]] = []
    slot_spans: dict[str, Span] = {}

    # five-slot form: leading condition keyword, comma before the first shall
    iso2 = False
    region_start = 0
    cond_lexicon = catalog.patterns["Iso2"].connective_words["SR1"]
    cond_words = {w.lower() for w in cond_lexicon}
    if tokens and tokens[0].text.lower() in cond_words:
        comma_pos = text.find(",")
        if 0 <= comma_pos < tokens[shall].start:
            cond_last = -1
            for i in range(shall):
                if tokens[i].end <= comma_pos:
                    cond_last = i
            if cond_last >= 0:
                iso2 = True
                slot_spans["SR1"] = _span_of(tokens, 0, cond_last)
                connectives.append((comma_pos, comma_pos + 1, ","))
                region_start = cond_last + 1

    # subject region, one leading article stripped
    if region_start < shall and tokens[region_start].text in ARTICLES:
        art = tokens[region_start]
        connectives.append((art.start, art.end, "article"))
        region_start += 1
    if region_start >= shall:
        raise EmptySlotError("SR2")
    slot_spans["SR2"] = _span_of(tokens, region_start, shall - 1)
    connectives.append((tokens[shall].start, tokens[shall].end, "shall"))

    action = shall + 1
    if action >= len(tokens):
        raise EmptySlotError("SR3")

    scan_pattern = "Iso2" if iso2 else "Iso1"
    sequences = _marker_sequences(catalog.patterns[scan_pattern].connective_words["SR5"])
    found = _find_marker(tokens, action + 1, sequences)
    if found is None:
        raise EmptySlotError("SR5")
    marker, marker_len = found

    pattern: str
    if iso2:
        pattern = "Iso2"
        if marker == action + 1:
            raise EmptySlotError("SR4")
        slot_spans["SR3"] = _span_of(tokens, action, action)
        slot_spans["SR4"] = _span_of(tokens, action + 1, marker - 1)
        slot_spans["SR5"] = _span_of(tokens, marker, len(tokens) - 1)
    else:
        carson_words = {w.lower() for w in catalog.patterns["Carson"].connective_words["SR1"]}
        trailing = None
        for u in range(marker + marker_len, len(tokens) - 1):
            if tokens[u].text.lower() in carson_words:
                trailing = u
        if trailing is not None:
            pattern = "Carson"
            slot_spans["SR3"] = _span_of(tokens, action, marker - 1)
            slot_spans["SR5"] = _span_of(tokens, marker, trailing - 1)
            kw = tokens[trailing]
            connectives.append((kw.start, kw.end, kw.text.lower()))
            slot_spans["SR1"] = _span_of(tokens, trailing + 1, len(tokens) - 1)
        else:
            pattern = "Iso1"
            slot_spans["SR3"] = _span_of(tokens, action, marker - 1)
            slot_spans["SR5"] = _span_of(tokens, marker, len(tokens) - 1)

    stripped = text.rstrip()
    if stripped.endswith("."):
        connectives.append((len(stripped) - 1, len(stripped), "."))

    diag.matched_pattern = pattern
    diag.slot_spans = {key: slot_spans[key] for key in catalog.patterns[pattern].slot_order}
    diag.connective_spans = sorted(connectives)
    covered = list(slot_spans.values()) + [(s, e) for s, e, _ in connectives]
    diag.unconsumed = _uncovered(text, covered)

    values: dict[str, SlotValue | None] = {}
    for key, span in slot_spans.items():
        fragment = text[span[0]:span[1]]
        values[SLOT_FIELDS[key]] = SlotValue(fragment, _bind(fragment, glossary))
    statement = StructuredStatement(pattern=pattern, **values)
    return statement, diag


_TEMPLATES = {
    "Iso2": "{SR1}, the {SR2} shall {SR3} {SR4} {SR5}.",
    "Iso1": "The {SR2} shall {SR3} {SR5}.",
    "Carson": "The {SR2} shall {SR3} {SR5} under {SR1}.",
}


def render_statement(statement: StructuredStatement) -> str:
    """Derived text from slots; the statement's pattern picks the template."""
    parts: dict[str, str] = {}
    for key in MANDATORY_SLOTS[statement.pattern]:
        slot = statement.slot(key)
        if slot is None or not slot.text:
            raise MissingMandatorySlotError(key, statement.pattern)
        parts[key] = slot.text
    return _TEMPLATES[statement.pattern].format_map(parts)


def count_shall(text: str) -> int:
    """Word-bounded 'shall' occurrences; used by the singularity heuristic."""
    return sum(1 for t in tokenize(text) if t.text.lower() == "shall")
