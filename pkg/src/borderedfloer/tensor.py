"""Box tensor products: type A against type DD, and type A against type D.

Tensor generators pair a type A generator with a DD generator carrying the
same sigma idempotent.  The differential collects, for every path of arrows
whose sigma coefficients are all non-idempotent and spell an operation word
of the A-side module, the path's rho-coefficient product; a single pure-rho
arrow passes through with the A-side generator unchanged (the idempotent
action m2(x, iota) = x).
"""

from __future__ import annotations

from collections import defaultdict

from .algebra import RHO, multiply
from .structures import (
    StructureError,
    TypeA,
    TypeD,
    TypeDD,
    required_expansion_bound,
)


def tensor_name(left: str, right: str) -> str:
    return f"{left}*{right}"


def box_tensor_A_DD(a: TypeA, dd: TypeDD, side: str = "sigma") -> TypeD:
    """CFA boxtensor CFDD along the sigma boundary, a type D over the rho side."""
    if side != "sigma":
        raise StructureError("only sigma-side pairing is supported")
    dd.check_wellformed()
    bound = required_expansion_bound(a, dd)  # also enforces boundedness
    mod = a.expand_families(bound) if a.families else a
    mod.check_wellformed()

    ops = defaultdict(list)  # (src gen, word tokens) -> [dst]
    for src, word, dst in mod.operations:
        ops[(src, tuple(l.token() for l in word))].append(dst)
    max_len = mod.max_word_length()

    gens = {}
    for x, xi in mod.generators.items():
        for g, (ri, si) in dd.generators.items():
            if si == xi:
                gens[tensor_name(x, g)] = ri

    sigma_adj = defaultdict(list)
    pure_rho = defaultdict(list)
    for src, dst, rc, sc in dd.arrows:
        if sc.is_idempotent:
            pure_rho[src].append((dst, rc))
        else:
            sigma_adj[src].append((dst, rc, sc))

    arrows = []
    for x, xi in mod.generators.items():
        for g, (ri, si) in dd.generators.items():
            if si != xi:
                continue
            name = tensor_name(x, g)
            for dst, rc in pure_rho[g]:
                arrows.append((name, tensor_name(x, dst), rc))
            # depth-first over sigma-labeled paths, lexicographic for
            # reproducible logs; mod-2 collapse makes order irrelevant
            stack = [(g, (), None)]
            while stack:
                node, word, rho_prod = stack.pop()
                for dst, rc, sc in sorted(
                    sigma_adj[node], key=lambda t: (t[0], t[1].token(), t[2].token())
                ):
                    prod = rc if rho_prod is None else multiply(rho_prod, rc)
                    if prod is None:
                        continue
                    new_word = word + (sc.token(),)
                    for x2 in ops.get((x, new_word), ()):
                        arrows.append((name, tensor_name(x2, dst), prod))
                    if len(new_word) < max_len:
                        stack.append((dst, new_word, prod))

    out = TypeD(gens, arrows).canonicalize()
    violations = out.validate()
    if violations:
        raise StructureError(f"box tensor output fails structure equation: {violations[:4]}")
    return out


def concatenate_edges(raw: TypeD) -> TypeD:
    """Canonical form: duplicate arrows cancelled mod 2, names stabilized."""
    return raw.copy().canonicalize()


class F2Complex:
    """A chain complex over F2 presented by generators and boundary entries."""

    def __init__(self, generators, boundary):
        self.generators = sorted(generators)
        self.boundary = boundary  # list of (src, dst), mod-2 collapsed

    def homology_rank(self) -> int:
        index = {g: i for i, g in enumerate(self.generators)}
        rows = defaultdict(int)
        for src, dst in self.boundary:
            rows[src] ^= 1 << index[dst]
        mat = [v for v in rows.values() if v]
        rank = 0
        basis = []
        for row in mat:
            for b in basis:
                row = min(row, row ^ b)
            if row:
                basis.append(row)
                basis.sort(reverse=True)
                rank += 1
        return len(self.generators) - 2 * rank


def box_tensor_A_D(a: TypeA, d: TypeD) -> F2Complex:
    """Pairing-theorem complex CFA boxtensor CFD over F2.

    Operation words on the A side are matched against rho-labeled paths in d
    letter-for-letter (s_i against r_i).  At least one factor must be bounded:
    path length is capped by the A side's longest operation word, so a finite
    operation list always terminates; families need d itself to be bounded.
    """
    d.check_wellformed()
    mod = a
    if a.families and _is_acyclic(d):
        mod = a.expand_families(_longest_labeled_path(d))
    mod.check_wellformed()

    ops = defaultdict(list)
    for src, word, dst in mod.operations:
        ops[(src, tuple(l.name for l in word))].append(dst)
    matcher = _WordMatcher(mod)

    gens = []
    for x, xi in mod.generators.items():
        for g, gi in d.generators.items():
            if gi == xi:
                gens.append(tensor_name(x, g))

    adj = defaultdict(list)
    for src, dst, coef in d.arrows:
        if coef.is_idempotent:
            raise StructureError("pairing requires a reduced type D (no unlabeled edges)")
        adj[src].append((dst, coef))

    entries = []
    for x, xi in mod.generators.items():
        for g, gi in d.generators.items():
            if gi != xi:
                continue
            name = tensor_name(x, g)
            # prefix-directed search; a repeated (node, matcher-state) on the
            # current path would mean infinitely many matching operations
            stack = [(g, (), frozenset())]
            while stack:
                node, word, visited = stack.pop()
                for dst, coef in adj[node]:
                    new_word = word + (coef.name,)
                    for x2 in ops.get((x, new_word), ()):
                        entries.append((name, tensor_name(x2, dst)))
                    for fam_dst, k in matcher.family_matches(x, new_word):
                        entries.append((name, tensor_name(fam_dst, dst)))
                    if matcher.extensible(x, new_word):
                        state = (dst, matcher.state_key(x, new_word))
                        if state in visited:
                            raise StructureError("both tensor factors unbounded")
                        stack.append((dst, new_word, visited | {state}))

    collapsed = []
    seen = defaultdict(int)
    for e in entries:
        seen[e] += 1
    for e, count in sorted(seen.items()):
        if count % 2:
            collapsed.append(e)
    return F2Complex(gens, collapsed)


class _WordMatcher:
    """Prefix bookkeeping for finite operation words plus parametric families."""

    def __init__(self, mod: TypeA):
        self.prefixes = defaultdict(set)  # src -> set of proper word prefixes
        for src, word, _ in mod.operations:
            toks = tuple(l.name for l in word)
            for i in range(1, len(toks)):
                self.prefixes[src].add(toks[:i])
        # families keyed by source: (prefix tokens, repeat token, suffix tokens, dst)
        self.families = defaultdict(list)
        for src, prefix, repeat, suffix, dst in mod.families:
            self.families[src].append(
                (
                    tuple(l.name for l in prefix),
                    repeat.name,
                    tuple(l.name for l in suffix),
                    dst,
                )
            )

    @staticmethod
    def _family_state(pattern, word):
        """None if word cannot grow into pattern; else a finite progress tag."""
        prefix, repeat, suffix, _ = pattern
        i = 0
        while i < len(word) and i < len(prefix):
            if word[i] != prefix[i]:
                return None
            i += 1
        if i < len(prefix):
            return ("prefix", i) if i == len(word) else None
        rest = word[len(prefix):]
        while rest and rest[0] == repeat:
            rest = rest[1:]
        if not rest:
            return ("repeat",)
        if len(rest) <= len(suffix) and rest == suffix[: len(rest)]:
            return ("suffix", len(rest)) if len(rest) < len(suffix) else ("done",)
        return None

    def family_matches(self, src, word):
        out = []
        for pattern in self.families.get(src, ()):
            prefix, repeat, suffix, dst = pattern
            state = self._family_state(pattern, word)
            if state == ("done",) or (state == ("repeat",) and not suffix):
                k = len(word) - len(prefix) - len(suffix)
                if k >= 0:
                    out.append((dst, k))
        return out

    def extensible(self, src, word) -> bool:
        if word in self.prefixes.get(src, ()):
            return True
        for pattern in self.families.get(src, ()):
            state = self._family_state(pattern, word)
            if state is not None and state != ("done",):
                return True
        return False

    def state_key(self, src, word):
        finite = tuple(sorted(p for p in self.prefixes.get(src, ()) if p == word))
        fam = tuple(
            self._family_state(p, word) for p in self.families.get(src, ())
        )
        return (word if finite else None, fam)


def _is_acyclic(d: TypeD) -> bool:
    adj = defaultdict(set)
    for src, dst, _ in d.arrows:
        adj[src].add(dst)
    state = {}

    def dfs(node):
        state[node] = 0
        for nxt in adj[node]:
            c = state.get(nxt)
            if c == 0 or (c is None and not dfs(nxt)):
                return False
        state[node] = 1
        return True

    return all(dfs(g) for g in d.generators if g not in state)


def _longest_labeled_path(d: TypeD) -> int:
    adj = defaultdict(list)
    for src, dst, _ in d.arrows:
        adj[src].append(dst)
    memo = {}

    def longest(node):
        if node in memo:
            return memo[node]
        memo[node] = best = 1 + max((longest(n) for n in adj[node]), default=0)
        return best

    return max((longest(g) for g in d.generators if adj[g]), default=0)
