"""Plain-text orbit catalogs.

One orbit per line, whitespace separated::

    name  x  e  i  Omega  omega

``x`` is the semimajor axis (``keplerian``) or the pericenter distance
(``cometary``), in au; angles are in degrees.  Blank lines and lines
starting with ``#`` are skipped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal

from .errors import DomainError, ParseError
from .orbits import KeplerianElements

Convention = Literal["keplerian", "cometary"]


@dataclass
class Catalog:
    entries: list[KeplerianElements] = field(default_factory=list)
    source: str = ""
    convention: Convention = "cometary"

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def names(self) -> list[str]:
        return [el.name for el in self.entries]

    def get(self, name: str) -> KeplerianElements:
        for el in self.entries:
            if el.name == name:
                return el
        raise KeyError(name)


def parse_line(line: str, convention: Convention = "cometary", lineno: int | None = None) -> KeplerianElements:
    parts = line.split()
    if len(parts) != 6:
        raise ParseError(f"expected 6 fields (name x e i Omega omega), got {len(parts)}", lineno)
    name = parts[0]
    try:
        x, e, inc, node, peri = (float(v) for v in parts[1:])
    except ValueError as exc:
        raise ParseError(f"non-numeric field: {exc}", lineno) from None
    if not all(math.isfinite(v) for v in (x, e, inc, node, peri)):
        raise ParseError("non-finite field", lineno)
    if not 0.0 <= e < 1.0:
        raise DomainError(f"line {lineno}: eccentricity {e} outside [0, 1)" if lineno else
                          f"eccentricity {e} outside [0, 1)")
    if x <= 0.0:
        raise DomainError(f"line {lineno}: distance {x} must be positive" if lineno else
                          f"distance {x} must be positive")
    if convention == "cometary":
        return KeplerianElements.from_cometary(x, e, inc, node, peri, name=name, degrees=True)
    if convention == "keplerian":
        return KeplerianElements.from_keplerian(x, e, inc, node, peri, name=name, degrees=True)
    raise ValueError(f"unknown convention {convention!r}")


def parse_lines(lines: Iterable[str], convention: Convention = "cometary", source: str = "") -> Catalog:
    entries = []
    seen = set()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        el = parse_line(line, convention, lineno)
        if el.name in seen:
            raise ParseError(f"duplicate name {el.name!r}", lineno)
        seen.add(el.name)
        entries.append(el)
    return Catalog(entries, source, convention)


def parse_catalog(path: str | Path, convention: Convention = "cometary") -> Catalog:
    path = Path(path)
    with path.open() as fh:
        return parse_lines(fh, convention, str(path))


def format_entry(el: KeplerianElements, convention: Convention = "cometary") -> str:
    x = el.q if convention == "cometary" else el.a
    ang = (math.degrees(v) for v in (el.inc, el.raan, el.argp))
    return " ".join([el.name or "orbit", f"{x:.12g}", f"{el.e:.12g}", *(f"{v:.12g}" for v in ang)])


def write_catalog(path: str | Path, entries: Iterable[KeplerianElements], convention: Convention = "cometary"):
    lines = [f"# name {'q' if convention == 'cometary' else 'a'} e i Omega omega (au, deg)"]
    lines += [format_entry(el, convention) for el in entries]
    Path(path).write_text("\n".join(lines) + "\n")
