"""Reduction of type D structures by cancelling idempotent-labeled edges.

Cancelling an unlabeled edge (v2, v1) removes both generators; every in-edge
(a, v1, Dj) composes with every out-edge (v2, b, Di) to a new edge
(a, b, Dj*Di) when the product is nonzero.  Each step removes two generators,
so reduction terminates, and it preserves the structure equation.
"""

from __future__ import annotations

from collections import defaultdict

from .algebra import multiply
from .structures import StructureError, TypeD


def idempotent_edges(d: TypeD):
    return sorted((s, t) for s, t, c in d.arrows if c.is_idempotent)


def cancel_edge(d: TypeD, edge) -> TypeD:
    """Cancel one unlabeled edge (v2, v1); returns a new, smaller TypeD."""
    v2, v1 = edge
    if v2 == v1:
        raise StructureError(f"idempotent self-loop at {v2}: corrupt structure")
    matching = [a for a in d.arrows if a[0] == v2 and a[1] == v1 and a[2].is_idempotent]
    if not matching:
        raise StructureError(f"no idempotent edge {v2} -> {v1}")

    dead = {v1, v2}
    in_v1 = [(s, c) for s, t, c in d.arrows if t == v1 and s not in dead]
    out_v2 = [(t, c) for s, t, c in d.arrows if s == v2 and t not in dead]

    arrows = [a for a in d.arrows if a[0] not in dead and a[1] not in dead]
    for src, cj in in_v1:
        for dst, ci in out_v2:
            prod = multiply(cj, ci)
            if prod is not None:
                arrows.append((src, dst, prod))

    gens = {g: i for g, i in d.generators.items() if g not in dead}
    return TypeD(gens, arrows).canonicalize()


def reduce_type_d(d: TypeD, edge_order=None, tidy: bool = True) -> TypeD:
    """Cancel unlabeled edges until none remain, then tidy the basis.

    Default order takes the lexicographically least (src, dst) edge each
    round; reduction is confluent up to isomorphism, the fixed order only
    pins golden outputs.  The tidy pass applies arrow-count-decreasing
    changes of basis, which splits direct summands entangled by the
    cancellation bookkeeping.
    """
    cur = d.copy().canonicalize()
    while True:
        edges = idempotent_edges(cur)
        if not edges:
            break
        for s, t in edges:
            if s == t:
                raise StructureError(f"idempotent self-loop at {s}: corrupt structure")
        pick = edge_order(edges) if edge_order else edges[0]
        cur = cancel_edge(cur, pick)
    return tidy_basis(cur) if tidy else cur


def transvect(d: TypeD, y: str, z: str, coef) -> TypeD:
    """Change of basis y -> y + coef (x) z; other generators unchanged."""
    if y == z:
        raise StructureError("transvection needs distinct generators")
    if coef.left != d.generators[y] or coef.right != d.generators[z]:
        raise StructureError("transvection coefficient idempotent mismatch")
    arrows = list(d.arrows)
    for src, dst, a in d.arrows:
        if dst == y:
            prod = multiply(a, coef)
            if prod is not None:
                arrows.append((src, z, prod))
        if src == z:
            prod = multiply(coef, a)
            if prod is not None:
                arrows.append((y, dst, prod))
    # second-order corrections for arrows both out of z and into y
    for src, dst, a in d.arrows:
        if src == z and dst == y:
            prod = multiply(coef, a)
            prod = multiply(prod, coef) if prod is not None else None
            if prod is not None:
                arrows.append((y, z, prod))
    return TypeD(dict(d.generators), arrows).canonicalize()


def _transvection_candidates(d: TypeD):
    """Moves likely to cancel arrows: pairs sharing an in-source or out-target."""
    from .algebra import basis

    seen = set()
    by_src = defaultdict(list)
    by_dst = defaultdict(list)
    for src, dst, a in d.arrows:
        by_src[src].append((dst, a))
        by_dst[dst].append((src, a))
    coefs = basis()
    for src, outs in by_src.items():
        for y, a1 in outs:
            for z, a2 in outs:
                if y == z:
                    continue
                for c in coefs:
                    if (
                        c.left == d.generators[y]
                        and c.right == d.generators[z]
                        and multiply(a1, c) == a2
                    ):
                        seen.add((y, z, c))
    for dst, ins in by_dst.items():
        for y, a1 in ins:
            for z, a2 in ins:
                if y == z:
                    continue
                for c in coefs:
                    if (
                        c.left == d.generators[y]
                        and c.right == d.generators[z]
                        and multiply(c, a2) == a1
                    ):
                        seen.add((y, z, c))
    return seen


def _component_count(d: TypeD) -> int:
    adj = defaultdict(set)
    for s, t, _ in d.arrows:
        adj[s].add(t)
        adj[t].add(s)
    seen, comps = set(), 0
    for g in d.generators:
        if g in seen:
            continue
        comps += 1
        stack = [g]
        seen.add(g)
        while stack:
            n = stack.pop()
            for nx in adj[n]:
                if nx not in seen:
                    seen.add(nx)
                    stack.append(nx)
    return comps


def _score(d: TypeD):
    return (len(d.arrows), -_component_count(d))


def tidy_basis(d: TypeD, max_states: int = 4000) -> TypeD:
    """Arrow-minimizing changes of basis (normal form after reduce).

    Best-first search over transvections; neutral moves are explored with a
    bounded frontier since disentangling a summand can take a chain of
    arrow-count-preserving steps before the count drops.
    """
    import heapq

    start = d.copy().canonicalize()
    best = start
    best_score = _score(start)
    seen = set()
    counter = 0
    heap = [(best_score, 0, start)]
    while heap and len(seen) < max_states:
        score, _, cur = heapq.heappop(heap)
        key = tuple((s, t, c.token()) for s, t, c in cur.arrows)
        if key in seen:
            continue
        seen.add(key)
        if score < best_score:
            best_score, best = score, cur
        for y, z, c in sorted(
            _transvection_candidates(cur), key=lambda m: (m[0], m[1], m[2].token())
        ):
            trial = transvect(cur, y, z, c)
            tscore = _score(trial)
            if tscore[0] <= score[0]:  # never walk uphill in arrow count
                counter += 1
                heapq.heappush(heap, (tscore, counter, trial))
    return best


def _refined_keys(d: TypeD, rounds: int = 3):
    """Iteratively refined degree/label signatures for isomorphism pruning."""
    outs = defaultdict(list)
    ins = defaultdict(list)
    for s, t, c in d.arrows:
        outs[s].append((c.token(), t))
        ins[t].append((c.token(), s))
    key = {g: (d.generators[g],) for g in d.generators}
    for _ in range(rounds):
        key = {
            g: (
                key[g],
                tuple(sorted((tok, key[t]) for tok, t in outs[g])),
                tuple(sorted((tok, key[s]) for tok, s in ins[g])),
            )
            for g in d.generators
        }
    return key


def isomorphic(d1: TypeD, d2: TypeD):
    """Label-preserving digraph isomorphism; returns (bool, mapping or None)."""
    d1 = d1.copy().canonicalize()
    d2 = d2.copy().canonicalize()
    if len(d1.generators) != len(d2.generators) or len(d1.arrows) != len(d2.arrows):
        return False, None

    rk1, rk2 = _refined_keys(d1), _refined_keys(d2)
    if sorted(rk1.values()) != sorted(rk2.values()):
        return False, None

    arrows1 = defaultdict(set)
    arrows2 = defaultdict(set)
    for s, t, c in d1.arrows:
        arrows1[s].add((t, c.token()))
    for s, t, c in d2.arrows:
        arrows2[s].add((t, c.token()))

    order = sorted(d1.generators, key=lambda g: (len([1 for v in rk1.values() if v == rk1[g]]), g))
    candidates = {
        g: sorted(h for h in d2.generators if rk2[h] == rk1[g]) for g in order
    }

    mapping = {}
    used = set()

    def consistent(g, h):
        for (t, tok) in arrows1[g]:
            if t in mapping and (mapping[t], tok) not in arrows2[h]:
                return False
        for s, t, c in d1.arrows:
            if t == g and s in mapping and (h, c.token()) not in arrows2[mapping[s]]:
                return False
        return True

    def backtrack(i):
        if i == len(order):
            return True
        g = order[i]
        for h in candidates[g]:
            if h in used or not consistent(g, h):
                continue
            mapping[g] = h
            used.add(h)
            if backtrack(i + 1):
                return True
            del mapping[g]
            used.discard(h)
        return False

    if backtrack(0):
        # final sanity: arrow multisets correspond exactly
        image = sorted(
            (mapping[s], mapping[t], c.token()) for s, t, c in d1.arrows
        )
        target = sorted((s, t, c.token()) for s, t, c in d2.arrows)
        if image == target:
            return True, dict(mapping)
        return False, None
    return False, None
