"""Small GF(2) linear algebra on int bitsets."""

from __future__ import annotations


def echelon(rows):
    """Row-reduce a list of bitmask rows; returns (basis, pivots)."""
    basis = []
    pivots = []
    for row in rows:
        for b, p in zip(basis, pivots):
            if (row >> p) & 1:
                row ^= b
        if row:
            p = row.bit_length() - 1
            # back-substitute to keep the basis reduced
            for i, (b2, p2) in enumerate(zip(basis, pivots)):
                if (b2 >> p) & 1:
                    basis[i] = b2 ^ row
            basis.append(row)
            pivots.append(p)
    return basis, pivots


def reduce_vector(vec, basis, pivots):
    for b, p in zip(basis, pivots):
        if (vec >> p) & 1:
            vec ^= b
    return vec


def in_span(vec, basis, pivots) -> bool:
    return reduce_vector(vec, basis, pivots) == 0


def nullspace(rows, n_cols):
    """Basis of the right nullspace of the system rows * x = 0."""
    basis, pivots = echelon(list(rows))
    pivot_set = set(pivots)
    free_cols = [c for c in range(n_cols) if c not in pivot_set]
    out = []
    for fc in free_cols:
        vec = 1 << fc
        # solve pivot variables in terms of the free one
        for b, p in zip(basis, pivots):
            if (b >> fc) & 1:
                vec |= 1 << p
        out.append(vec)
    return out


def rank(rows) -> int:
    return len(echelon(list(rows))[0])
