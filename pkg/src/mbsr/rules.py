"""Automated writing-rule checkers and verdict rollup.

Four rules run as code: R1 (the text decomposes into a pattern with one
'shall'), R2 (a passive-voice heuristic), R10 (configured filler phrases),
R16 ('shall not'). A fifth check, the TBX placeholder scan, is not a
numbered rule; it reports under the reserved node id "TBX". Every other
catalog rule is manual and produces no finding.

Verdicts persist as Satisfy/Violate links from the requirement to the rule
node, plus one rolled-up link per individual characteristic that at least
one automated rule contributes to. Re-applying identical verdicts keeps the
existing links, ids included.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .catalog import TBX_ID, Applicability, Automation, Catalog, RuleDef, ValueKind
from .errors import MbsrError, NoShallKeywordError
from .model import ExpressionKind, LinkKind, Model, RequirementExpression, TraceLink
from .parser import count_shall, parse_statement
from .textscan import tokenize

_BE_VERBS = frozenset({"be", "is", "are", "was", "were", "been"})
TBX_RE = re.compile(r"\bTB[CDRN]\b")
_PARTICIPLE_WINDOW = 3
_AGENT_WINDOW = 3


class Verdict(Enum):
    SATISFY = "Satisfy"
    VIOLATE = "Violate"

    @property
    def link_kind(self) -> LinkKind:
        return LinkKind.SATISFY if self is Verdict.SATISFY else LinkKind.VIOLATE


@dataclass(frozen=True)
class RuleFinding:
    rule_id: str
    expression_id: str
    verdict: Verdict
    message: str
    span: tuple[int, int] | None = None


def _check_r1(text: str, catalog: Catalog, rule: RuleDef) -> tuple[Verdict, str, tuple[int, int] | None]:
    try:
        parse_statement(text, None, catalog)
    except NoShallKeywordError:
        return Verdict.VIOLATE, "no 'shall' keyword", None
    except MbsrError as exc:
        return Verdict.VIOLATE, f"does not decompose into a pattern ({exc})", None
    n = count_shall(text)
    if n != 1:
        shalls = [t for t in tokenize(text) if t.text.lower() == "shall"]
        extra = shalls[1]
        return (Verdict.VIOLATE, f"{n} 'shall' keywords, statement is not singular",
                (extra.start, extra.end))
    return Verdict.SATISFY, "decomposes into a pattern with a single 'shall'", None


def _check_r2(text: str, catalog: Catalog, rule: RuleDef) -> tuple[Verdict, str, tuple[int, int] | None]:
    irregular = {w.lower() for w in rule.params.get("participles", ())}
    tokens = tokenize(text)
    lower = [t.text.lower() for t in tokens]
    for i, word in enumerate(lower):
        if word not in _BE_VERBS:
            continue
        for j in range(i + 1, min(i + 1 + _PARTICIPLE_WINDOW, len(tokens))):
            cand = lower[j]
            if not (cand.endswith("ed") or cand in irregular):
                continue
            for k in range(j + 1, min(j + 1 + _AGENT_WINDOW, len(tokens))):
                if lower[k] == "by":
                    phrase = text[tokens[i].start:tokens[k].end]
                    return (Verdict.VIOLATE, f"passive construction {phrase!r}",
                            (tokens[i].start, tokens[k].end))
    return Verdict.SATISFY, "no passive construction found", None


def _check_r10(text: str, catalog: Catalog, rule: RuleDef) -> tuple[Verdict, str, tuple[int, int] | None]:
    for phrase in rule.params.get("phrases", ()):
        match = re.search(r"\b" + re.escape(phrase) + r"\b", text, re.IGNORECASE)
        if match:
            return (Verdict.VIOLATE, f"superfluous phrase {match.group(0)!r}",
                    match.span())
    return Verdict.SATISFY, "no superfluous phrase found", None


def _check_r16(text: str, catalog: Catalog, rule: RuleDef) -> tuple[Verdict, str, tuple[int, int] | None]:
    match = re.search(r"\bshall\s+not\b", text, re.IGNORECASE)
    if match:
        return (Verdict.VIOLATE, "'shall not' states what must not happen; "
                "state the required behavior instead", match.span())
    return Verdict.SATISFY, "no 'shall not' found", None


_CHECKERS = {
    "R1": _check_r1,
    "R2": _check_r2,
    "R10": _check_r10,
    "R16": _check_r16,
}


def check_text(text: str, catalog: Catalog, expression_id: str = "") -> list[RuleFinding]:
    """Findings for one statement text: enabled automated rules, then TBX."""
    findings: list[RuleFinding] = []
    for rule_id, checker in _CHECKERS.items():
        rule = catalog.rules[rule_id]
        if rule.automation != Automation.AUTOMATED or not rule.enabled:
            continue
        verdict, message, span = checker(text, catalog, rule)
        findings.append(RuleFinding(rule_id, expression_id, verdict, message, span))
    match = TBX_RE.search(text)
    if match:
        findings.append(RuleFinding(TBX_ID, expression_id, Verdict.VIOLATE,
                                    f"unresolved placeholder {match.group(0)!r}",
                                    match.span()))
    else:
        findings.append(RuleFinding(TBX_ID, expression_id, Verdict.SATISFY,
                                    "no TBC/TBD/TBR/TBN placeholder", None))
    return findings


def check_expression(model: Model, expr: RequirementExpression) -> list[RuleFinding]:
    """Findings for a stored requirement; TBX also scans text attributes."""
    findings = check_text(expr.text, model.catalog, expr.id)
    tbx_index = next(i for i, f in enumerate(findings) if f.rule_id == TBX_ID)
    if findings[tbx_index].verdict is Verdict.SATISFY:
        for key in sorted(expr.attributes):
            value = expr.attributes[key]
            if value.kind != ValueKind.TEXT:
                continue
            match = TBX_RE.search(str(value.value))
            if match:
                findings[tbx_index] = RuleFinding(
                    TBX_ID, expr.id, Verdict.VIOLATE,
                    f"unresolved placeholder {match.group(0)!r} in attribute {key}",
                    None)
                break
    return findings


def check_scope(model: Model, scope_id: str | None = None) -> list[RuleFinding]:
    """Findings for every non-set requirement in scope, in id order."""
    findings: list[RuleFinding] = []
    exprs = model.scope_expressions(scope_id)
    for expr in sorted(exprs, key=lambda e: e.id):
        if expr.is_set or expr.kind != ExpressionKind.REQUIREMENT:
            continue
        findings.extend(check_expression(model, expr))
    return findings


def rollup(catalog: Catalog, verdicts: dict[str, Verdict]) -> dict[str, Verdict]:
    """Per-characteristic verdicts implied by per-rule verdicts.

    A characteristic gets Satisfy only when every enabled automated rule
    that contributes to it satisfied; characteristics no automated rule
    contributes to stay unevaluated and are absent from the result.
    """
    out: dict[str, Verdict] = {}
    for char in catalog.characteristics_for(Applicability.INDIVIDUAL):
        contributing = [r for r in catalog.rules.values()
                        if r.automation == Automation.AUTOMATED and r.enabled
                        and char.characteristic_id in r.contributes_to]
        if not contributing:
            continue
        ok = all(verdicts.get(r.rule_id) is Verdict.SATISFY for r in contributing)
        out[char.characteristic_id] = Verdict.SATISFY if ok else Verdict.VIOLATE
    return out


def apply_verdicts(model: Model, findings: list[RuleFinding]) -> int:
    """Persist findings as links to rule and characteristic nodes.

    For each checked expression the desired link set is computed, existing
    identical links are kept, stale ones removed, missing ones added.
    Returns the number of links added or removed.
    """
    by_expr: dict[str, dict[str, Verdict]] = {}
    for finding in findings:
        if not finding.expression_id:
            continue
        by_expr.setdefault(finding.expression_id, {})[finding.rule_id] = finding.verdict

    changed = 0
    for expr_id in sorted(by_expr):
        desired = dict(by_expr[expr_id])
        rule_only = {k: v for k, v in desired.items() if k in model.catalog.rules}
        desired.update(rollup(model.catalog, rule_only))

        existing = [link for link in model.links_from(expr_id)
                    if link.kind in (LinkKind.SATISFY, LinkKind.VIOLATE)
                    and model.catalog.is_graph_node(link.target_id)]
        for link in existing:
            want = desired.get(link.target_id)
            if want is not None and want.link_kind == link.kind:
                del desired[link.target_id]
            else:
                model.remove_link(link.link_id)
                changed += 1
        for node_id in sorted(desired):
            model.store_link(TraceLink(model.next_link_id(), desired[node_id].link_kind,
                                       expr_id, node_id))
            changed += 1
    return changed


def verdict_map(findings: list[RuleFinding]) -> dict[str, dict[str, Verdict]]:
    """expression id -> rule/TBX node id -> verdict, for report rendering."""
    out: dict[str, dict[str, Verdict]] = {}
    for finding in findings:
        out.setdefault(finding.expression_id, {})[finding.rule_id] = finding.verdict
    return out
