"""Type D, type A and type DD structures as finitely presented labeled digraphs.

Generators are opaque strings with idempotent tags; arrows / operations carry
torus-algebra coefficients.  All coefficient arithmetic is over F2, so arrow
multisets collapse identical pairs on canonicalization.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .algebra import (
    RHO,
    SIGMA,
    AlgebraElement,
    compose_word,
    idempotent,
    multiply,
    word_is_composable,
)


class StructureError(Exception):
    """Malformed structure tables: dangling names, side or idempotent abuse."""


def _mod2(items):
    """Collapse an iterable to the elements appearing an odd number of times."""
    out = []
    for item, count in Counter(items).items():
        if count % 2:
            out.append(item)
    return out


@dataclass
class TypeD:
    """Left type D structure over the rho-side torus algebra.

    arrows: list of (src, dst, coefficient); an idempotent coefficient is an
    unlabeled edge (only present pre-reduction).
    """

    generators: dict  # name -> "i0" | "i1"
    arrows: list = field(default_factory=list)
    kind = "typeD"

    def check_wellformed(self):
        for src, dst, coef in self.arrows:
            if src not in self.generators or dst not in self.generators:
                raise StructureError(f"dangling arrow endpoint {src}->{dst}")
            if coef.side != RHO:
                raise StructureError(f"type D arrow with {coef.side} coefficient")
            if coef.left != self.generators[src] or coef.right != self.generators[dst]:
                raise StructureError(
                    f"idempotent mismatch on arrow {src} -> {dst} ({coef.token()})"
                )

    def canonicalize(self):
        self.arrows = sorted(
            _mod2((s, d, c) for s, d, c in self.arrows),
            key=lambda a: (a[0], a[1], a[2].token()),
        )
        return self

    def copy(self) -> "TypeD":
        return TypeD(dict(self.generators), list(self.arrows))

    def arrows_from(self, src):
        return [a for a in self.arrows if a[0] == src]

    def validate(self) -> list:
        """Structure-equation violations ((src, dst, coef-token) triples)."""
        self.check_wellformed()
        paths = defaultdict(list)
        by_src = defaultdict(list)
        for a in self.arrows:
            by_src[a[0]].append(a)
        for src, dst1, c1 in self.arrows:
            for _, dst2, c2 in by_src[dst1]:
                prod = multiply(c1, c2)
                if prod is not None:
                    paths[(src, dst2, prod.token())].append(dst1)
        return sorted(key for key, mids in paths.items() if len(mids) % 2)


@dataclass
class TypeA:
    """Right A-infinity module over the sigma-side torus algebra.

    operations: list of (src, word, dst) with word a tuple of non-idempotent
    sigma elements; m(src, word) = dst.  families: (src, prefix, repeat,
    suffix, dst) meaning m(src, prefix + repeat*k + suffix) = dst for k >= 0.
    """

    generators: dict
    operations: list = field(default_factory=list)
    families: list = field(default_factory=list)
    kind = "typeA"

    def check_wellformed(self):
        for src, word, dst in self.operations:
            self._check_entry(src, word, dst)
        for src, prefix, repeat, suffix, dst in self.families:
            self._check_entry(src, tuple(prefix) + (repeat,) + tuple(suffix), dst)

    def _check_entry(self, src, word, dst):
        if src not in self.generators or dst not in self.generators:
            raise StructureError(f"dangling operation endpoint {src}->{dst}")
        if not word:
            raise StructureError("empty operation word (m1 is fixed to zero)")
        for letter in word:
            if letter.side != SIGMA or letter.is_idempotent:
                raise StructureError(f"bad operation letter {letter!r}")
        if not word_is_composable(word):
            raise StructureError(f"non-composable word on {src}->{dst}")
        if word[0].left != self.generators[src] or word[-1].right != self.generators[dst]:
            raise StructureError(f"idempotent mismatch on m({src}, ...) = {dst}")

    def canonicalize(self):
        self.operations = sorted(
            _mod2((s, tuple(w), d) for s, w, d in self.operations),
            key=lambda e: (e[0], tuple(x.token() for x in e[1]), e[2]),
        )
        self.families = sorted(
            self.families,
            key=lambda f: (
                f[0],
                tuple(x.token() for x in f[1]),
                f[2].token(),
                tuple(x.token() for x in f[3]),
                f[4],
            ),
        )
        return self

    def copy(self) -> "TypeA":
        return TypeA(dict(self.generators), list(self.operations), list(self.families))

    def op_map(self):
        """dict (src, word) -> list of dst for the finite operations."""
        table = defaultdict(list)
        for src, word, dst in self.operations:
            table[(src, tuple(l.token() for l in word))].append(dst)
        return table

    def expand_families(self, bound: int) -> "TypeA":
        """Instantiate every family for total word length <= bound."""
        out = self.copy()
        out.families = []
        for src, prefix, repeat, suffix, dst in self.families:
            k = 0
            while len(prefix) + k + len(suffix) <= bound:
                word = tuple(prefix) + (repeat,) * k + tuple(suffix)
                if word:
                    out.operations.append((src, word, dst))
                k += 1
        return out.canonicalize()

    def max_word_length(self) -> int:
        return max((len(w) for _, w, _ in self.operations), default=0)

    def validate(self, expansion_bound: int | None = None) -> list:
        """A-infinity relation violations up to the given word-length bound.

        Families must already be expanded (or a bound given to expand to).
        Only composable words matter: idempotent bookkeeping kills every term
        of a relation whose word breaks composability.
        """
        self.check_wellformed()
        mod = self if not self.families else self.expand_families(
            expansion_bound if expansion_bound is not None else self.max_word_length()
        )
        bound = expansion_bound if expansion_bound is not None else mod.max_word_length()
        table = defaultdict(list)
        for src, word, dst in mod.operations:
            table[(src, word)].append(dst)

        def apply(src, word):
            return _mod2(table.get((src, tuple(word)), ()))

        violations = []
        for src in sorted(mod.generators):
            for word in _composable_words(mod.generators[src], bound):
                acc = Counter()
                n = len(word)
                # splits: m(m(src, w[:i]), w[i:]), 1 <= i <= n-1
                for i in range(1, n):
                    for mid in apply(src, word[:i]):
                        for dst in apply(mid, word[i:]):
                            acc[dst] += 1
                # products of adjacent letters
                for i in range(n - 1):
                    prod = multiply(word[i], word[i + 1])
                    if prod is None or prod.is_idempotent:
                        continue
                    merged = word[:i] + (prod,) + word[i + 2 :]
                    for dst in apply(src, merged):
                        acc[dst] += 1
                bad = sorted(d for d, c in acc.items() if c % 2)
                if bad:
                    violations.append(
                        (src, tuple(l.token() for l in word), tuple(bad))
                    )
        return violations


def _composable_words(start_idem: str, bound: int):
    """All composable non-idempotent sigma words of length 2..bound from start_idem."""
    from .algebra import nonidempotent_basis

    letters = nonidempotent_basis(SIGMA)
    stack = [((l,), l.right) for l in letters if l.left == start_idem]
    while stack:
        word, right = stack.pop()
        if len(word) >= 2:
            yield word
        if len(word) < bound:
            for l in letters:
                if l.left == right:
                    stack.append((word + (l,), l.right))


@dataclass
class TypeDD:
    """Type DD bimodule over (rho-side, sigma-side) torus algebras."""

    generators: dict  # name -> (rho idem, sigma idem)
    arrows: list = field(default_factory=list)  # (src, dst, rho coef, sigma coef)
    kind = "typeDD"

    def check_wellformed(self):
        for src, dst, rc, sc in self.arrows:
            if src not in self.generators or dst not in self.generators:
                raise StructureError(f"dangling arrow endpoint {src}->{dst}")
            if rc.side != RHO or sc.side != SIGMA:
                raise StructureError(f"side mismatch on ddarrow {src}->{dst}")
            ri, si = self.generators[src]
            rj, sj = self.generators[dst]
            if rc.left != ri or rc.right != rj or sc.left != si or sc.right != sj:
                raise StructureError(
                    f"idempotent mismatch on ddarrow {src} -> {dst} "
                    f"({rc.token()},{sc.token()})"
                )

    def canonicalize(self):
        self.arrows = sorted(
            _mod2((s, d, rc, sc) for s, d, rc, sc in self.arrows),
            key=lambda a: (a[0], a[1], a[2].token(), a[3].token()),
        )
        return self

    def copy(self) -> "TypeDD":
        return TypeDD(dict(self.generators), list(self.arrows))

    def validate(self) -> list:
        """DD structure-equation violations, products taken side-wise."""
        self.check_wellformed()
        paths = defaultdict(int)
        by_src = defaultdict(list)
        for a in self.arrows:
            by_src[a[0]].append(a)
        for src, dst1, rc1, sc1 in self.arrows:
            for _, dst2, rc2, sc2 in by_src[dst1]:
                rp = multiply(rc1, rc2)
                sp = multiply(sc1, sc2)
                if rp is not None and sp is not None:
                    paths[(src, dst2, rp.token(), sp.token())] += 1
        return sorted(key for key, count in paths.items() if count % 2)

    def is_bounded(self) -> bool:
        """Boundedness is acyclicity of the arrow digraph on generators."""
        adj = defaultdict(set)
        for src, dst, _, _ in self.arrows:
            adj[src].add(dst)
        state = {}  # 0 visiting, 1 done

        def dfs(node):
            state[node] = 0
            for nxt in adj[node]:
                c = state.get(nxt)
                if c == 0:
                    return False
                if c is None and not dfs(nxt):
                    return False
            state[node] = 1
            return True

        return all(dfs(g) for g in self.generators if g not in state)

    def sigma_arrows_from(self, src):
        return [a for a in self.arrows if a[0] == src and not a[3].is_idempotent]


def required_expansion_bound(a: TypeA, dd: TypeDD) -> int:
    """Longest composable sigma word realizable along arrows of dd.

    Only arrows with non-idempotent sigma coefficients extend a word; a
    pure-rho arrow never pairs with a longer type A operation.
    """
    if not dd.is_bounded():
        raise StructureError("unbounded type DD structure: box tensor may not terminate")
    adj = defaultdict(list)
    for src, dst, _, sc in dd.arrows:
        if not sc.is_idempotent:
            adj[src].append(dst)
    memo = {}

    def longest(node):
        if node in memo:
            return memo[node]
        memo[node] = best = 1 + max((longest(n) for n in adj[node]), default=0)
        return best

    return max((longest(g) for g in dd.generators if adj[g]), default=0)


def unit_arrow(gens: dict, src: str, dst: str, token: str, side=RHO):
    """Helper building a coefficient for (src, dst); '1' means idempotent."""
    from .algebra import element

    if token == "1":
        which = gens[src] if not isinstance(gens[src], tuple) else gens[src][0]
        return idempotent(which, side)
    return element(token, side)
