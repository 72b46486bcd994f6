"""Line-oriented block file reader and writer.

The on-disk shape shared by corpus files and catalog overrides: UTF-8 text,
LF line endings, `[kind ident]` headers, `key = value` body lines, `<<<`/`>>>`
fences for multi-line values, `#` comment lines, and a blank line closing each
block. This module only tokenizes; meaning is assigned by the callers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import CorpusSyntaxError, CorpusValidationError

_HEADER_RE = re.compile(r"^\[([a-z]+) ([^\]\s]+)\]$")

FENCE_OPEN = "<<<"
FENCE_CLOSE = ">>>"


@dataclass
class Block:
    kind: str
    ident: str
    line: int                                   # 1-based line of the header
    fields: dict[str, str] = field(default_factory=dict)
    field_lines: dict[str, int] = field(default_factory=dict)


def parse_blocks(text: str) -> list[Block]:
    """Tokenize block-file text; raises CorpusSyntaxError with a line number."""
    blocks: list[Block] = []
    current: Block | None = None
    fence_key: str | None = None
    fence_lines: list[str] = []
    fence_start = 0

    lines = text.split("\n")
    for lineno, raw in enumerate(lines, start=1):
        line = raw[:-1] if raw.endswith("\r") else raw

        if fence_key is not None:
            if line == FENCE_CLOSE:
                assert current is not None
                current.fields[fence_key] = "\n".join(fence_lines)
                current.field_lines[fence_key] = fence_start
                fence_key = None
                fence_lines = []
            else:
                fence_lines.append(line)
            continue

        stripped = line.strip()
        if not stripped:
            current = None
            continue
        if stripped.startswith("#"):
            continue

        if stripped.startswith("["):
            m = _HEADER_RE.match(stripped)
            if not m:
                raise CorpusSyntaxError(f"malformed block header: {stripped!r}", lineno)
            if current is not None:
                raise CorpusSyntaxError("block header without preceding blank line", lineno)
            current = Block(kind=m.group(1), ident=m.group(2), line=lineno)
            blocks.append(current)
            continue

        if current is None:
            raise CorpusSyntaxError(f"body line outside any block: {stripped!r}", lineno)
        if "=" not in line:
            raise CorpusSyntaxError(f"expected 'key = value': {stripped!r}", lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise CorpusSyntaxError("empty key", lineno)
        if key in current.fields:
            raise CorpusSyntaxError(f"duplicate key {key!r} in block [{current.kind} {current.ident}]", lineno)
        if value == FENCE_OPEN:
            fence_key = key
            fence_start = lineno
            fence_lines = []
        else:
            current.fields[key] = value
            current.field_lines[key] = lineno
    if fence_key is not None:
        raise CorpusSyntaxError(f"unterminated fence for key {fence_key!r}", fence_start)
    return blocks


def _write_value(out: list[str], key: str, value: str) -> None:
    needs_fence = "\n" in value or value != value.strip() or value == FENCE_OPEN
    if needs_fence:
        for vline in value.split("\n"):
            if vline == FENCE_CLOSE:
                raise CorpusValidationError(
                    f"value of {key!r} contains a fence terminator line and cannot be serialized")
        out.append(f"{key} = {FENCE_OPEN}")
        out.extend(value.split("\n"))
        out.append(FENCE_CLOSE)
    else:
        out.append(f"{key} = {value}" if value else f"{key} =")


def render_blocks(blocks: list[Block]) -> str:
    """Serialize blocks in the given order; fields keep their dict order."""
    out: list[str] = []
    for block in blocks:
        if out:
            out.append("")
        out.append(f"[{block.kind} {block.ident}]")
        for key, value in block.fields.items():
            _write_value(out, key, value)
    out.append("")
    return "\n".join(out)
