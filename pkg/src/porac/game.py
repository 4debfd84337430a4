"""Classical d-PORAC: parity classes, deterministic strategies, exact bounds.

Input strings are pairs ``(x1, x2)`` of dits.  The string index order used
throughout is ``x1 * d + x2``, i.e. 00, 01, ..., (d-1)(d-1).  All success
probabilities are :class:`fractions.Fraction` values.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Dits = tuple[int, int]

# d=3 is 3**9 encodings; d=4 is 4**16 and needs an explicit opt-in.
MAX_FAST_D = 3
MAX_LONG_D = 4


class SearchTooLarge(ValueError):
    """Raised when an exhaustive search would run for an unreasonable time."""


def _check_d(d: int) -> None:
    if not isinstance(d, int) or d < 2:
        raise ValueError(f"alphabet size d must be an integer >= 2, got {d!r}")


def strings(d: int) -> list[Dits]:
    """All d**2 input strings in index order."""
    _check_d(d)
    return [(a, b) for a in range(d) for b in range(d)]


def string_label(x: Dits) -> str:
    return f"{x[0]}{x[1]}"


def parity(x: Dits, d: int) -> int:
    return (x[0] + x[1]) % d


@dataclass(frozen=True)
class PartitionTable:
    """The d parity classes; ``classes[l]`` lists members in increasing x1."""

    d: int
    classes: tuple[tuple[Dits, ...], ...]

    def class_of(self, x: Dits) -> int:
        return parity(x, self.d)

    def labels(self, l: int) -> list[str]:
        return [string_label(x) for x in self.classes[l]]


def parity_partitions(d: int) -> PartitionTable:
    """Split the d**2 strings into the classes ``P_l = {x : x1 + x2 = l mod d}``."""
    _check_d(d)
    classes = tuple(tuple((a, (l - a) % d) for a in range(d)) for l in range(d))
    return PartitionTable(d, classes)


@dataclass(frozen=True)
class ClassicalStrategy:
    """Deterministic encoding plus one decoding table per index y.

    ``encoding[i]`` is the symbol sent for the i-th string (index order).
    ``decodings[y-1][j]`` is the guess for x_y on receiving symbol j.
    """

    d: int
    encoding: tuple[int, ...]
    decodings: tuple[tuple[int, ...], tuple[int, ...]]

    def __post_init__(self):
        _check_d(self.d)
        if len(self.encoding) != self.d**2:
            raise ValueError(f"encoding must list {self.d**2} symbols, got {len(self.encoding)}")
        if min(self.encoding) < 0:
            raise ValueError("symbols must be non-negative")
        if len(self.decodings) != 2:
            raise ValueError("need exactly two decoding tables")
        for y, table in enumerate(self.decodings, start=1):
            missing = [j for j in self.used_symbols() if j >= len(table)]
            if missing:
                raise ValueError(f"decoding {y} is not defined for symbols {missing}")
            if any(not 0 <= b < self.d for b in table):
                raise ValueError(f"decoding {y} guesses outside 0..{self.d - 1}")

    def used_symbols(self) -> list[int]:
        return sorted(set(self.encoding))

    def encode(self, x: Dits) -> int:
        return self.encoding[x[0] * self.d + x[1]]

    def decode(self, y: int, symbol: int) -> int:
        return self.decodings[y - 1][symbol]

    def to_text(self) -> str:
        lines = [
            f"d={self.d}",
            "encode: " + " ".join(map(str, self.encoding)),
            "decode1: " + " ".join(map(str, self.decodings[0])),
            "decode2: " + " ".join(map(str, self.decodings[1])),
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ClassicalStrategy":
        fields = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("d="):
                fields["d"] = line[2:]
                continue
            key, sep, rest = line.partition(":")
            if not sep:
                raise ValueError(f"malformed strategy line: {raw!r}")
            fields[key.strip()] = rest
        try:
            d = int(fields["d"])
            enc = tuple(int(s) for s in fields["encode"].split())
            dec1 = tuple(int(s) for s in fields["decode1"].split())
            dec2 = tuple(int(s) for s in fields["decode2"].split())
        except KeyError as exc:
            raise ValueError(f"strategy text is missing field {exc}") from None
        return cls(d, enc, (dec1, dec2))


def symbol_classes(encoding: Sequence[int], d: int) -> dict[int, list[Dits]]:
    """Preimage of each used symbol."""
    out: dict[int, list[Dits]] = {}
    for x, s in zip(strings(d), encoding):
        out.setdefault(s, []).append(x)
    return out


def _leaks(encoding: Sequence[int], d: int) -> bool:
    counts: dict[int, list[int]] = {}
    for i, s in enumerate(encoding):
        row = counts.get(s)
        if row is None:
            row = counts[s] = [0] * d
        row[(i // d + i % d) % d] += 1
    return any(min(row) != max(row) for row in counts.values())


def leaks_parity(strategy: ClassicalStrategy | Sequence[int], d: int) -> bool:
    """True if some symbol reveals information about x1 + x2 mod d.

    A symbol is safe exactly when its preimage meets every parity class in
    the same number of strings.  Accepts a strategy or a bare encoding.
    """
    _check_d(d)
    encoding = strategy.encoding if isinstance(strategy, ClassicalStrategy) else tuple(strategy)
    if len(encoding) != d * d:
        raise ValueError(f"encoding must list {d * d} symbols")
    return _leaks(encoding, d)


def strategy_success(strategy: ClassicalStrategy, d: int | None = None) -> Fraction:
    """Exact average success ``(1 / 2d^2) * #{(y, x) : guess == x_y}``."""
    d = strategy.d if d is None else d
    if d != strategy.d:
        raise ValueError(f"strategy is for d={strategy.d}, not d={d}")
    hits = 0
    for x in strings(d):
        s = strategy.encode(x)
        hits += (strategy.decode(1, s) == x[0]) + (strategy.decode(2, s) == x[1])
    return Fraction(hits, 2 * d * d)


def _majority_tables(encoding: Sequence[int], d: int) -> tuple[tuple[int, ...], tuple[int, ...], int]:
    n_sym = max(encoding) + 1
    # counts[y][j][b] = #{x with symbol j and x_y == b}
    counts = [[[0] * d for _ in range(n_sym)] for _ in range(2)]
    for i, s in enumerate(encoding):
        counts[0][s][i // d] += 1
        counts[1][s][i % d] += 1
    tables = []
    hits = 0
    for y in range(2):
        table = []
        for row in counts[y]:
            best = max(row)
            table.append(row.index(best))  # index() gives the smallest b on ties
            hits += best
        tables.append(tuple(table))
    return tables[0], tables[1], hits


def optimal_decoding_for(encoding: Sequence[int], d: int) -> ClassicalStrategy:
    """Best decodings for a fixed encoding, by majority vote per symbol.

    Ties go to the smallest guess.  Symbols in ``0..max(encoding)`` that are
    never sent decode to 0.
    """
    _check_d(d)
    encoding = tuple(encoding)
    if len(encoding) != d * d:
        raise ValueError(f"encoding must list {d * d} symbols")
    dec1, dec2, _ = _majority_tables(encoding, d)
    return ClassicalStrategy(d, encoding, (dec1, dec2))


def search_space_size(d: int, n_symbols: int | None = None) -> int:
    return (d if n_symbols is None else n_symbols) ** (d * d)


def _counter_to_encoding(c: int, d: int, n_sym: int) -> tuple[int, ...]:
    # most significant digit is string 00
    digits = [0] * (d * d)
    for i in range(d * d - 1, -1, -1):
        c, digits[i] = divmod(c, n_sym)
    return tuple(digits)


def _scan(args) -> tuple[int, int]:
    """Best (hits, counter) over counters [start, stop); first counter wins ties."""
    d, n_sym, start, stop, parity_oblivious = args
    best_hits, best_c = -1, -1
    enc = list(_counter_to_encoding(start, d, n_sym))
    n = d * d
    for c in range(start, stop):
        if c != start:
            # increment the base-n_sym counter in place
            i = n - 1
            while enc[i] == n_sym - 1:
                enc[i] = 0
                i -= 1
            enc[i] += 1
        if parity_oblivious and _leaks(enc, d):
            continue
        hits = _majority_tables(enc, d)[2]
        if hits > best_hits:
            best_hits, best_c = hits, c
    return best_hits, best_c


def _chunks(total: int, n: int) -> list[tuple[int, int]]:
    step = -(-total // n)
    return [(a, min(a + step, total)) for a in range(0, total, step)]


def classical_optimum(
    d: int,
    parity_oblivious: bool = True,
    *,
    allow_long: bool = False,
    n_symbols: int | None = None,
    workers: int = 1,
    chunks: int | None = None,
) -> tuple[Fraction, ClassicalStrategy]:
    """Exhaustive optimum over deterministic strategies, with a witness.

    Every encoding onto at most ``n_symbols`` symbols (default ``d``) is
    enumerated as a base-``n_symbols`` counter over the strings in index
    order and completed with :func:`optimal_decoding_for`.  With
    ``parity_oblivious`` set, encodings failing :func:`leaks_parity` are
    skipped.  Restricting to ``d`` symbols loses nothing in the
    parity-oblivious case, since any encoding with more used symbols has a
    class smaller than d and therefore leaks.

    The counter range is cut into ``chunks`` contiguous pieces (default
    ``4 * workers``) that may run in separate processes; the reduction keeps
    the smallest counter among maximisers, so the result does not depend on
    ``workers``.

    Raises
    ------
    SearchTooLarge
        For ``d > 3`` without ``allow_long``, and for ``d > 4`` always.
    """
    _check_d(d)
    n_sym = d if n_symbols is None else n_symbols
    if n_sym < 1:
        raise ValueError("n_symbols must be >= 1")
    size = search_space_size(d, n_sym)
    if d > MAX_LONG_D or (d > MAX_FAST_D and not allow_long):
        hint = " (not supported)" if d > MAX_LONG_D else " and needs the long-running opt-in"
        raise SearchTooLarge(f"exhaustive search for d={d} covers {size:,} encodings{hint}")
    workers = max(1, workers)
    pieces = _chunks(size, chunks or 4 * workers)
    jobs = [(d, n_sym, a, b, parity_oblivious) for a, b in pieces]
    if workers == 1:
        results = [_scan(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan, jobs))
    found = [r for r in results if r[1] >= 0]
    # max hits, then smallest counter
    hits, counter = max(found, key=lambda r: (r[0], -r[1]))
    best = optimal_decoding_for(_counter_to_encoding(counter, d, n_sym), d)
    return Fraction(hits, 2 * d * d), best


def brute_force_classical_bound(
    d: int, parity_oblivious: bool = True, *, allow_long: bool = False, workers: int = 1
) -> Fraction:
    """Optimal classical success probability by exhaustive enumeration."""
    return classical_optimum(d, parity_oblivious, allow_long=allow_long, workers=workers)[0]


def noncontextual_bound(d: int) -> Fraction:
    """``(1 + 1/d) / 2``: the classical optimum and the noncontextual ceiling."""
    _check_d(d)
    return Fraction(d + 1, 2 * d)


def relabel_symbols(strategy: ClassicalStrategy, perm: Sequence[int]) -> ClassicalStrategy:
    """Rename symbol j to ``perm[j]`` and permute the decoding tables to match."""
    n = len(perm)
    if sorted(perm) != list(range(n)) or max(strategy.encoding) >= n:
        raise ValueError("perm must be a permutation covering every symbol")
    enc = tuple(perm[s] for s in strategy.encoding)
    decs = []
    for table in strategy.decodings:
        new = [0] * n
        for j in range(n):
            new[perm[j]] = table[j] if j < len(table) else 0
        decs.append(tuple(new))
    return ClassicalStrategy(strategy.d, enc, (decs[0], decs[1]))


def iter_decodings(n_symbols: int, d: int) -> Iterable[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Every pair of decoding tables over ``n_symbols`` symbols (small cases only)."""
    tables = list(itertools.product(range(d), repeat=n_symbols))
    return itertools.product(tables, tables)
