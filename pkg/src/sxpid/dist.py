"""Discrete joint distributions over a target and n sources.

This module is the single probability oracle for the rest of the package.
Probabilities of compound events (unions/intersections of cylinder events)
are always computed by scanning the support set and testing membership,
never by inclusion-exclusion over floats, so no cancellation error can
reach the logarithms taken downstream.

Masses are kept as `fractions.Fraction` whenever they were given exactly
(file input, builtin generators) and as floats otherwise. Zero-mass
realizations are dropped at construction time: pointwise quantities are
only ever evaluated at support points, which guarantees every event
containing the realization has positive mass.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence, Union

Mass = Union[Fraction, float]

DEFAULT_NORMALIZATION_TOLERANCE = 1e-9

#: Reports carry exact rationals only while denominators stay representable.
MAX_EXACT_DENOMINATOR = 2**64


class DistributionError(ValueError):
    """Invalid distribution data (negative mass, bad symbol, sum != 1, ...)."""


class DistributionFormatError(DistributionError):
    """Unparseable input; message carries the row/field location."""


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite alphabet; symbols are labels, indices are positions."""

    name: str
    symbols: tuple[str, ...]

    def __post_init__(self):
        if not self.symbols:
            raise DistributionError(f"alphabet {self.name!r}: no symbols")
        if len(set(self.symbols)) != len(self.symbols):
            raise DistributionError(f"alphabet {self.name!r}: duplicate symbols")

    def __len__(self) -> int:
        return len(self.symbols)

    def index(self, symbol: str) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise DistributionError(
                f"symbol {symbol!r} not in alphabet {self.name!r}"
            ) from None

    def label(self, index: int) -> str:
        return self.symbols[index]


@dataclass(frozen=True, order=True)
class Realization:
    """One full outcome: target symbol index plus one index per source."""

    t: int
    s: tuple[int, ...]


@dataclass(frozen=True)
class CylinderEvent:
    """Partial assignment of source positions (and optionally the target).

    ``sources`` maps 0-based source position -> required symbol index. An
    event with no constraints matches everything and has probability 1.
    """

    sources: tuple[tuple[int, int], ...] = ()
    target: int | None = None

    def __post_init__(self):
        positions = [pos for pos, _ in self.sources]
        if len(set(positions)) != len(positions):
            raise DistributionError("cylinder event constrains a position twice")
        object.__setattr__(self, "sources", tuple(sorted(self.sources)))

    @classmethod
    def from_realization(cls, r: Realization, collection: Iterable[int],
                         with_target: bool = False) -> "CylinderEvent":
        """Event {S_i = r.s[i] for i in collection}, 0-based positions."""
        return cls(sources=tuple((i, r.s[i]) for i in collection),
                   target=r.t if with_target else None)

    def matches(self, r: Realization) -> bool:
        if self.target is not None and r.t != self.target:
            return False
        return all(r.s[pos] == sym for pos, sym in self.sources)


def _sum_masses(masses: Iterable[Mass]) -> Mass:
    items = list(masses)
    if any(isinstance(m, float) for m in items):
        return math.fsum(items)
    return sum(items, Fraction(0))


@dataclass(frozen=True)
class JointDistribution:
    """Validated joint pmf over target x sources, immutable after build.

    Construction validates nonnegativity, normalization within
    ``normalization_tolerance``, index bounds, and uniqueness of support
    points; zero masses are dropped. Instances are safe for concurrent
    reads from any number of workers.
    """

    target_alphabet: Alphabet
    source_alphabets: tuple[Alphabet, ...]
    support: tuple[Realization, ...]
    masses: tuple[Mass, ...]
    normalization_tolerance: float = DEFAULT_NORMALIZATION_TOLERANCE

    def __post_init__(self):
        seen = set()
        for r, m in zip(self.support, self.masses):
            if (isinstance(m, float) and m < 0) or (not isinstance(m, float) and m < 0):
                raise DistributionError(f"negative mass {m} at {r}")
            if len(r.s) != len(self.source_alphabets):
                raise DistributionError(f"realization {r} has wrong arity")
            if not 0 <= r.t < len(self.target_alphabet):
                raise DistributionError(f"target index out of range at {r}")
            for i, (si, alph) in enumerate(zip(r.s, self.source_alphabets)):
                if not 0 <= si < len(alph):
                    raise DistributionError(f"source {i + 1} index out of range at {r}")
            if r in seen:
                raise DistributionError(f"duplicate realization {r}")
            seen.add(r)
        total = _sum_masses(self.masses)
        if abs(float(total) - 1.0) > self.normalization_tolerance:
            raise DistributionError(
                f"masses sum to {float(total)!r}, outside tolerance "
                f"{self.normalization_tolerance}"
            )

    @classmethod
    def from_points(cls, target_alphabet: Alphabet,
                    source_alphabets: Sequence[Alphabet],
                    points: Iterable[tuple[Realization, Mass]],
                    normalization_tolerance: float = DEFAULT_NORMALIZATION_TOLERANCE,
                    ) -> "JointDistribution":
        """Build from (realization, mass) pairs, dropping zero masses."""
        kept = sorted((r, m) for r, m in points if m != 0)
        return cls(
            target_alphabet=target_alphabet,
            source_alphabets=tuple(source_alphabets),
            support=tuple(r for r, _ in kept),
            masses=tuple(m for _, m in kept),
            normalization_tolerance=normalization_tolerance,
        )

    @property
    def n_sources(self) -> int:
        return len(self.source_alphabets)

    @cached_property
    def _lookup(self) -> dict[Realization, Mass]:
        return dict(zip(self.support, self.masses))

    @cached_property
    def exact(self) -> bool:
        """True when every mass is a Fraction with a representable denominator."""
        return all(isinstance(m, Fraction) and m.denominator <= MAX_EXACT_DENOMINATOR
                   for m in self.masses)

    def mass(self, r: Realization) -> Mass:
        zero = Fraction(0) if self.exact else 0.0
        return self._lookup.get(r, zero)

    def mass_where(self, predicate: Callable[[Realization], bool]) -> Mass:
        """Total mass of support points satisfying ``predicate``."""
        return _sum_masses(m for r, m in zip(self.support, self.masses)
                           if predicate(r))

    def total_mass(self) -> Mass:
        return _sum_masses(self.masses)


def event_probability(d: JointDistribution, events: Sequence[CylinderEvent],
                      mode: str = "union") -> Mass:
    """Probability of the union or intersection of cylinder events.

    Evaluated as an exact sum of pmf masses over the support (one scan,
    no inclusion-exclusion), so De Morgan identities hold to machine
    precision and exactly for rational masses.
    """
    if not events:
        raise DistributionError("event list must be nonempty")
    for ev in events:
        if ev.target is not None and not 0 <= ev.target < len(d.target_alphabet):
            raise DistributionError("event target index out of range")
        for pos, sym in ev.sources:
            if not 0 <= pos < d.n_sources:
                raise DistributionError(f"event constrains unknown source {pos}")
            if not 0 <= sym < len(d.source_alphabets[pos]):
                raise DistributionError(f"event symbol index {sym} out of range")
    if mode == "union":
        return d.mass_where(lambda r: any(ev.matches(r) for ev in events))
    if mode == "intersection":
        return d.mass_where(lambda r: all(ev.matches(r) for ev in events))
    raise DistributionError(f"unknown mode {mode!r}")


def marginal(d: JointDistribution, keep: Iterable[Union[str, int]]) -> JointDistribution:
    """Sum out everything not in ``keep``.

    ``keep`` contains the string ``"t"`` for the target and/or 1-based
    source indices. If the target is dropped, the first kept source takes
    the target slot of the returned distribution (a distribution needs a
    target variable; the choice is positional and documented here).
    """
    keep = list(keep)
    if not keep:
        raise DistributionError("keep set must be nonempty")
    keep_target = "t" in keep
    src_positions = sorted(k - 1 for k in keep if k != "t")
    for pos in src_positions:
        if not 0 <= pos < d.n_sources:
            raise DistributionError(f"source index {pos + 1} out of range")

    acc: dict[tuple[int, ...], Mass] = {}
    for r, m in zip(d.support, d.masses):
        key = ((r.t,) if keep_target else ()) + tuple(r.s[i] for i in src_positions)
        acc[key] = acc.get(key, Fraction(0) if isinstance(m, Fraction) else 0.0) + m

    kept_alphabets = ([d.target_alphabet] if keep_target else []) + \
        [d.source_alphabets[i] for i in src_positions]
    target_alphabet, *source_alphabets = kept_alphabets
    points = [(Realization(t=key[0], s=key[1:]), m) for key, m in acc.items()]
    return JointDistribution.from_points(
        target_alphabet, source_alphabets, points,
        normalization_tolerance=d.normalization_tolerance)


# ---------------------------------------------------------------------------
# I/O. CSV header is t,s1,...,sn,p with one support point per row; JSON
# declares alphabets explicitly. Masses are written as exact decimal strings
# (or num/den) so both formats round-trip bit-exactly for rational masses.
# ---------------------------------------------------------------------------

def _parse_mass(text: str, where: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise DistributionFormatError(f"{where}: cannot parse mass {text!r}") from None


def _format_mass(m: Mass) -> str:
    if isinstance(m, float):
        return repr(m)
    den = m.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den == 1:  # terminating decimal
        k = max(twos, fives)
        scaled = m.numerator * 10**k // m.denominator
        if k == 0:
            return str(scaled)
        digits = str(scaled).rjust(k + 1, "0")
        return f"{digits[:-k]}.{digits[-k:]}"
    return f"{m.numerator}/{m.denominator}"


def _as_text(source: Union[bytes, str, io.IOBase]) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, bytes) else data


def load_distribution(source: Union[bytes, str, io.IOBase], format: str,
                      normalization_tolerance: float = DEFAULT_NORMALIZATION_TOLERANCE,
                      ) -> JointDistribution:
    """Parse a CSV or JSON distribution; errors carry row/field locations."""
    text = _as_text(source)
    if format == "csv":
        return _load_csv(text, normalization_tolerance)
    if format == "json":
        return _load_json(text, normalization_tolerance)
    raise DistributionFormatError(f"unknown format {format!r}")


def _load_csv(text: str, tol: float) -> JointDistribution:
    rows = list(csv.reader(io.StringIO(text)))
    rows = [row for row in rows if row and any(cell.strip() for cell in row)]
    if not rows:
        raise DistributionFormatError("row 1: empty input")
    header = [h.strip() for h in rows[0]]
    if len(header) < 3 or header[0] != "t" or header[-1] != "p":
        raise DistributionFormatError(f"row 1: header must be t,s1,...,sn,p, got {header}")
    n = len(header) - 2
    if header[1:-1] != [f"s{i}" for i in range(1, n + 1)]:
        raise DistributionFormatError(f"row 1: header must be t,s1,...,sn,p, got {header}")

    # Alphabets are inferred column-wise, symbols in order of first appearance.
    t_syms: list[str] = []
    s_syms: list[list[str]] = [[] for _ in range(n)]
    parsed: list[tuple[str, tuple[str, ...], Fraction]] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != n + 2:
            raise DistributionFormatError(f"row {lineno}: expected {n + 2} fields, got {len(row)}")
        t, *s, p = (cell.strip() for cell in row)
        mass = _parse_mass(p, f"row {lineno}, field p")
        if mass < 0:
            raise DistributionFormatError(f"row {lineno}, field p: negative mass {p}")
        if t not in t_syms:
            t_syms.append(t)
        for i, si in enumerate(s):
            if si not in s_syms[i]:
                s_syms[i].append(si)
        parsed.append((t, tuple(s), mass))

    target = Alphabet("t", tuple(t_syms))
    sources = tuple(Alphabet(f"s{i + 1}", tuple(syms)) for i, syms in enumerate(s_syms))
    seen: set[Realization] = set()
    points = []
    for lineno, (t, s, mass) in enumerate(parsed, start=2):
        r = Realization(t=target.index(t), s=tuple(a.index(x) for a, x in zip(sources, s)))
        if r in seen:
            raise DistributionFormatError(f"row {lineno}: duplicate realization")
        seen.add(r)
        points.append((r, mass))
    try:
        return JointDistribution.from_points(target, sources, points,
                                             normalization_tolerance=tol)
    except DistributionError as exc:
        raise DistributionError(f"csv input: {exc}") from None


def _load_json(text: str, tol: float) -> JointDistribution:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DistributionFormatError(f"json: {exc}") from None

    def alphabet(obj: Mapping, where: str) -> Alphabet:
        try:
            return Alphabet(str(obj["name"]), tuple(str(x) for x in obj["symbols"]))
        except (KeyError, TypeError):
            raise DistributionFormatError(f"{where}: need name and symbols") from None

    try:
        target = alphabet(doc["target_alphabet"], "target_alphabet")
        sources = tuple(alphabet(a, f"source_alphabets[{i}]")
                        for i, a in enumerate(doc["source_alphabets"]))
        entries = doc["support"]
    except (KeyError, TypeError):
        raise DistributionFormatError(
            "json: need target_alphabet, source_alphabets, support") from None

    seen: set[Realization] = set()
    points = []
    for i, entry in enumerate(entries):
        where = f"support[{i}]"
        try:
            t, s, p = entry["t"], entry["s"], entry["p"]
        except (KeyError, TypeError):
            raise DistributionFormatError(f"{where}: need t, s, p") from None
        if len(s) != len(sources):
            raise DistributionFormatError(f"{where}: expected {len(sources)} sources")
        mass = _parse_mass(str(p), f"{where}, field p")
        if mass < 0:
            raise DistributionFormatError(f"{where}, field p: negative mass")
        r = Realization(t=target.index(str(t)),
                        s=tuple(a.index(str(x)) for a, x in zip(sources, s)))
        if r in seen:
            raise DistributionFormatError(f"{where}: duplicate realization")
        seen.add(r)
        points.append((r, mass))
    return JointDistribution.from_points(target, sources, points,
                                         normalization_tolerance=tol)


def dump_csv(d: JointDistribution) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["t"] + [f"s{i}" for i in range(1, d.n_sources + 1)] + ["p"])
    for r, m in zip(d.support, d.masses):
        writer.writerow([d.target_alphabet.label(r.t)]
                        + [a.label(si) for a, si in zip(d.source_alphabets, r.s)]
                        + [_format_mass(m)])
    return out.getvalue()


def dump_json(d: JointDistribution) -> str:
    doc = {
        "target_alphabet": {"name": d.target_alphabet.name,
                            "symbols": list(d.target_alphabet.symbols)},
        "source_alphabets": [{"name": a.name, "symbols": list(a.symbols)}
                             for a in d.source_alphabets],
        "support": [
            {"t": d.target_alphabet.label(r.t),
             "s": [a.label(si) for a, si in zip(d.source_alphabets, r.s)],
             "p": _format_mass(m)}
            for r, m in zip(d.support, d.masses)
        ],
    }
    return json.dumps(doc, indent=2)
