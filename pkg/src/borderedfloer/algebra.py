"""Exact arithmetic in the torus algebra, with two-boundary side tags.

The algebra is 8-dimensional over F2: idempotents i0, i1 and six strictly
lower-triangular elements r1, r2, r3, r12, r23, r123.  A second copy used on
the other boundary of a bimodule carries tokens s1 .. s123; the two copies
never multiply against each other.
"""

from __future__ import annotations

from dataclasses import dataclass

RHO = "rho"
SIGMA = "sigma"

# name -> (left idempotent, right idempotent), idempotent names side-free
_IDEM = {
    "i0": ("i0", "i0"),
    "i1": ("i1", "i1"),
    "1": ("i0", "i1"),
    "2": ("i1", "i0"),
    "3": ("i0", "i1"),
    "12": ("i0", "i0"),
    "23": ("i1", "i1"),
    "123": ("i0", "i1"),
}

# the only nonzero products among non-idempotent basis elements
_PRODUCTS = {
    ("1", "2"): "12",
    ("2", "3"): "23",
    ("1", "23"): "123",
    ("12", "3"): "123",
}

_SIDE_PREFIX = {RHO: "r", SIGMA: "s"}


class SideMismatch(Exception):
    """Raised when elements of different boundary sides are multiplied."""


@dataclass(frozen=True)
class AlgebraElement:
    """A basis element of one copy of the torus algebra."""

    side: str
    name: str  # "i0", "i1", "1", "2", "3", "12", "23", "123"

    def __post_init__(self):
        if self.side not in (RHO, SIGMA):
            raise ValueError(f"bad side {self.side!r}")
        if self.name not in _IDEM:
            raise ValueError(f"bad algebra element {self.name!r}")

    @property
    def is_idempotent(self) -> bool:
        return self.name in ("i0", "i1")

    @property
    def left(self) -> str:
        return _IDEM[self.name][0]

    @property
    def right(self) -> str:
        return _IDEM[self.name][1]

    def token(self) -> str:
        """Serialization token: i0/i1 for idempotents, r1/s1 style otherwise."""
        if self.is_idempotent:
            return self.name
        return _SIDE_PREFIX[self.side] + self.name

    def __repr__(self):
        return self.token() if self.side == RHO else self.token() + "'"


def element(token: str, side: str = RHO) -> AlgebraElement:
    """Build an element from a token like "r12", "s3", "i0" or bare "12"."""
    if token in ("i0", "i1"):
        return AlgebraElement(side, token)
    if token[0] == "r":
        return AlgebraElement(RHO, token[1:])
    if token[0] == "s":
        return AlgebraElement(SIGMA, token[1:])
    return AlgebraElement(side, token)


def idempotent(which: str, side: str = RHO) -> AlgebraElement:
    return AlgebraElement(side, which)


def multiply(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement | None:
    """Product in the torus algebra; None encodes zero."""
    if a.side != b.side:
        raise SideMismatch(f"cannot multiply {a!r} by {b!r}")
    if a.is_idempotent:
        return b if b.left == a.name else None
    if b.is_idempotent:
        return a if a.right == b.name else None
    if a.right != b.left:
        return None
    prod = _PRODUCTS.get((a.name, b.name))
    return AlgebraElement(a.side, prod) if prod is not None else None


def compose_word(word) -> AlgebraElement | None:
    """Fold multiply over a nonempty sequence of same side elements."""
    word = list(word)
    if not word:
        raise ValueError("empty coefficient word")
    acc = word[0]
    for nxt in word[1:]:
        if acc is None:
            return None
        acc = multiply(acc, nxt)
    return acc


def word_is_composable(word) -> bool:
    """Consecutive letters satisfy R(a) = L(b); products may still vanish."""
    word = list(word)
    return all(a.right == b.left for a, b in zip(word, word[1:]))


def basis(side: str = RHO):
    """All 8 basis elements of one copy."""
    return [AlgebraElement(side, n) for n in _IDEM]


def nonidempotent_basis(side: str = RHO):
    return [AlgebraElement(side, n) for n in _IDEM if n not in ("i0", "i1")]
