"""Newton forward-difference series of arbitrary integer sequences.

A sequence ``y`` expands about an anchor ``m`` as

    y(n) = sum_k  D^k y(m) * C(n - m, k),

where ``D`` is the forward difference ``D y(n) = y(n+1) - y(n)``.  The
expansion is exact for polynomial sequences once the truncation order
reaches the degree; then the reconstruction is independent of the anchor
(its partial difference in ``m`` vanishes identically).

A sequence oracle here is any deterministic callable from int to a scalar.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

from .scalars import as_scalar
from .seqalg import int_binom

#: default truncation order when the caller has no better information
DEFAULT_ORDER = 8

SequenceOracle = Callable[[int], object]


@dataclass(frozen=True)
class DifferenceTable:
    """Anchor ``m`` plus the ladder ``D^k y(m)`` for ``k = 0..K``."""

    anchor: int
    values: Tuple[object, ...]

    def __post_init__(self):
        if len(self.values) < 1:
            raise ValueError("a difference table needs at least the k=0 entry")

    @property
    def order(self) -> int:
        return len(self.values) - 1


def difference_table(y: SequenceOracle, m: int,
                     K: int = DEFAULT_ORDER) -> DifferenceTable:
    """Table of D^k y(m), k = 0..K, via the binomial sum

    D^k y(m) = sum_{j=0..k} (-1)^(k-j) C(k,j) y(m+j).
    """
    if K < 0:
        raise ValueError("truncation order must be >= 0")
    ys = [y(m + j) for j in range(K + 1)]
    vals = []
    for k in range(K + 1):
        total = None
        for j in range(k + 1):
            w = int_binom(k, j) * (1 if (k - j) % 2 == 0 else -1)
            v = ys[j] * w
            total = v if total is None else total + v
        vals.append(total if total is not None else as_scalar(0))
    return DifferenceTable(m, tuple(vals))


def difference_table_recursive(y: SequenceOracle, m: int,
                               K: int = DEFAULT_ORDER) -> DifferenceTable:
    """Same table by repeated differencing; cross-check for the binomial sum."""
    row = [y(m + j) for j in range(K + 1)]
    vals = [row[0]]
    for _ in range(K):
        row = [row[j + 1] - row[j] for j in range(len(row) - 1)]
        vals.append(row[0])
    return DifferenceTable(m, tuple(vals))


def newton_reconstruct(table: DifferenceTable, n: int):
    """sum_k D^k y(m) C(n-m, k); exact for polynomials of degree <= K."""
    total = None
    for k, a in enumerate(table.values):
        w = int_binom(n - table.anchor, k)
        if w:
            v = a * w
            total = v if total is None else total + v
    return as_scalar(0) if total is None else total


def partial_delta_m(y: SequenceOracle, m: int, n: int,
                    K: int = DEFAULT_ORDER):
    """Difference of the truncated reconstruction in the anchor:

    reconstruction about ``m+1`` minus reconstruction about ``m``,
    both evaluated at ``n``.  Zero for polynomial sequences with K >= degree.
    """
    up = newton_reconstruct(difference_table(y, m + 1, K), n)
    lo = newton_reconstruct(difference_table(y, m, K), n)
    return up - lo


def renorm_consistency_ladder(table0: DifferenceTable,
                              tables_k: Sequence[DifferenceTable]) -> List[object]:
    """Residuals of the natural ladder relations between collected series.

    Entry ``k`` (1-based) is ``Y_k(m) - D^k Y_0(m)``: the value of the k-th
    collected series at the anchor minus the k-th difference of the zeroth.
    All zero exactly when the collection is self-consistent.
    """
    r = len(tables_k)
    if table0.order < r:
        raise ValueError("zeroth table too short for the requested ladder")
    out = []
    for k, tk in enumerate(tables_k, start=1):
        if tk.anchor != table0.anchor:
            raise ValueError("all tables must share one anchor")
        out.append(tk.values[0] - table0.values[k])
    return out
