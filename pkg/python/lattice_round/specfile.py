"""
Distribution spec files.

A spec is a single UTF-8 JSON document::

    {"q": 3, "pmf": [{"k": 0, "p": "1/3"}, {"k": 1, "p": "2/3"}]}

Probabilities are exact "a/b" strings (a bare integer string such as "1" is
accepted too). Syntax and shape problems raise SpecFormatError with the
offending field and, where it can be located, the line. Well-formed specs
whose numbers break the distribution invariants raise
InvalidDistributionError from make_distribution.
"""

import json
import re
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Union

from .errors import SpecFormatError
from .lattice import LatticeDistribution, make_distribution

_RATIONAL = re.compile(r"^\s*[+-]?\d+(\s*/\s*\d+)?\s*$")
_PMF_ARRAY = re.compile(r'"pmf"\s*:\s*\[')


def _line_of(text: str, pos: int) -> int:
    return text.count("\n", 0, pos) + 1


def _entry_lines(text: str) -> List[int]:
    """Line on which each pmf entry starts; shorter than the entry list if the scan gets lost."""
    match = _PMF_ARRAY.search(text)
    if match is None:
        return []
    decoder = json.JSONDecoder()
    pos = match.end()
    lines: List[int] = []
    try:
        while True:
            while pos < len(text) and text[pos] in " \t\r\n,":
                pos += 1
            if pos >= len(text) or text[pos] == "]":
                return lines
            lines.append(_line_of(text, pos))
            _, pos = decoder.raw_decode(text, pos)
    except ValueError:
        return lines


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _parse_probability(raw, field: str, line: Optional[int]) -> Fraction:
    if not isinstance(raw, str):
        raise SpecFormatError(f"probability must be an 'a/b' string, got {raw!r}", field=field, line=line)
    if not _RATIONAL.match(raw):
        raise SpecFormatError(f"'{raw}' is not a rational of the form a/b", field=field, line=line)
    try:
        return Fraction(raw.replace(" ", ""))
    except ZeroDivisionError:
        raise SpecFormatError(f"'{raw}' has a zero denominator", field=field, line=line) from None


def parse_spec(text: str) -> LatticeDistribution:
    """Parses a spec document into a validated LatticeDistribution."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecFormatError(f"invalid JSON: {exc.msg} (column {exc.colno})", line=exc.lineno) from None

    if not isinstance(doc, dict):
        raise SpecFormatError("top level must be an object with 'q' and 'pmf'", line=1)
    if "q" not in doc:
        raise SpecFormatError("missing required field", field="q")
    if not _is_int(doc["q"]):
        raise SpecFormatError(f"must be an integer, got {doc['q']!r}", field="q")
    if "pmf" not in doc:
        raise SpecFormatError("missing required field", field="pmf")
    pmf = doc["pmf"]
    if not isinstance(pmf, list):
        raise SpecFormatError("must be an array of {k, p} objects", field="pmf")

    lines = _entry_lines(text)
    entries = []
    for i, entry in enumerate(pmf):
        line = lines[i] if i < len(lines) else None
        where = f"pmf[{i}]"
        if not isinstance(entry, dict):
            raise SpecFormatError("entry must be an object with 'k' and 'p'", field=where, line=line)
        for key in ("k", "p"):
            if key not in entry:
                raise SpecFormatError("missing required field", field=f"{where}.{key}", line=line)
        if not _is_int(entry["k"]):
            raise SpecFormatError(f"must be an integer, got {entry['k']!r}", field=f"{where}.k", line=line)
        entries.append((entry["k"], _parse_probability(entry["p"], f"{where}.p", line)))

    return make_distribution(doc["q"], entries)


def load_spec(path: Union[str, Path]) -> LatticeDistribution:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise SpecFormatError(f"{path} is not valid UTF-8: {exc.reason}") from None
    return parse_spec(text)


def dump_spec(d: LatticeDistribution, indent: Optional[int] = 2) -> str:
    """
    Canonical form: entries sorted by k, probabilities as reduced "a/b"
    strings. ``parse_spec(dump_spec(d)) == d`` exactly.
    """
    doc = {"q": d.q, "pmf": [{"k": k, "p": str(p)} for k, p in d.items()]}
    return json.dumps(doc, indent=indent)
