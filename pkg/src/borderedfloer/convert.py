"""Translations between knot Floer complexes and bordered structures.

All knots and complements carry framing 0.  A 0-framed complement's type D
structure encodes each differential entry of the reduced knot Floer complex
as a chain of iota_1 generators:

    vertical   x -> V^l y :  x --r1--> k1,  k_{i+1} --r23--> k_i,  y --r123--> k_l
    horizontal x -> U^l y :  x --r3--> l1,  l_i --r23--> l_{i+1},  l_l --r2--> y

plus one unstable chain joining the vertical homology generator xi0 to the
horizontal homology generator eta0: a single r12 arrow when tau = 0, a
vertical-shaped chain of length 2*tau for tau > 0 and a horizontal-shaped
chain of length -2*tau for tau < 0.
"""

from __future__ import annotations

from collections import defaultdict

from .algebra import RHO, SIGMA, element, idempotent
from .cfk import CFKComplex, FULL_UV, MOD_UV, CFKError
from .structures import StructureError, TypeA, TypeD


class ConversionError(Exception):
    pass


def _f2_homology_generator(c: CFKComplex, direction: str):
    """Basis generator spanning the rank-1 homology of one arrow direction.

    direction "v": entries with vexp > 0 (and uexp == 0); "h": the mirror.
    Returns the generator name, or None if the homology is not spanned by a
    single basis element.
    """
    gens = sorted(c.generators)
    index = {g: i for i, g in enumerate(gens)}
    rows = {}
    for g in gens:
        vec = 0
        for src, dst, u, v in c.diff:
            if src != g:
                continue
            if (direction == "v" and v > 0 and u == 0) or (
                direction == "h" and u > 0 and v == 0
            ):
                vec ^= 1 << index[dst]
        rows[g] = vec
    image_basis = []
    for vec in rows.values():
        for b in image_basis:
            vec = min(vec, vec ^ b)
        if vec:
            image_basis.append(vec)
            image_basis.sort(reverse=True)
    rank = len(image_basis)
    if len(gens) - 2 * rank != 1:
        return None
    for g in gens:
        if rows[g]:
            continue  # not a cycle
        vec = 1 << index[g]
        for b in image_basis:
            vec = min(vec, vec ^ b)
        if vec:
            return g
    return None


def cfk_to_cfd(c: CFKComplex, tau: int = 0) -> TypeD:
    """Type D structure of the 0-framed complement (reduced CFK input)."""
    if c.ring != MOD_UV:
        raise ConversionError("cfk_to_cfd expects a complex over F[U,V]/(UV)")
    if c.validate():
        raise ConversionError("input complex fails validation")
    gens = {g: "i0" for g in c.generators}
    arrows = []
    r = lambda t: element(t, RHO)

    def vertical(x, y, length, tag):
        chain = [f"{tag}{i}" for i in range(1, length + 1)]
        for k in chain:
            gens[k] = "i1"
        arrows.append((x, chain[0], r("r1")))
        for i in range(length - 1):
            arrows.append((chain[i + 1], chain[i], r("r23")))
        arrows.append((y, chain[-1], r("r123")))

    def horizontal(x, y, length, tag):
        chain = [f"{tag}{i}" for i in range(1, length + 1)]
        for k in chain:
            gens[k] = "i1"
        arrows.append((x, chain[0], r("r3")))
        for i in range(length - 1):
            arrows.append((chain[i], chain[i + 1], r("r23")))
        arrows.append((chain[-1], y, r("r2")))

    for src, dst, u, v in sorted(c.diff):
        if u and v:
            raise ConversionError("mixed monomial entry in modUV complex")
        if v:
            vertical(src, dst, v, f"v.{src}.{dst}.")
        else:
            horizontal(src, dst, u, f"h.{src}.{dst}.")

    xi0 = _f2_homology_generator(c, "v")
    eta0 = _f2_homology_generator(c, "h")
    if xi0 is None or eta0 is None:
        raise ConversionError("complex is not reduced to a basis with tower generators")
    if tau == 0:
        arrows.append((xi0, eta0, r("r12")))
    elif tau > 0:
        vertical(xi0, eta0, 2 * tau, "u.")
    else:
        horizontal(xi0, eta0, -2 * tau, "u.")

    out = TypeD(gens, arrows).canonicalize()
    violations = out.validate()
    if violations:
        raise ConversionError(f"output fails structure equation: {violations[:4]}")
    return out


def _decode_chains(d: TypeD):
    """Split iota_1 generators of a reduced type D into labeled chains.

    Returns (chains, r12_arrows); a chain is (kind, x, y, [nodes]) with kind
    "v" or "h" following the encoding above.
    """
    i1 = {g for g, i in d.generators.items() if i == "i1"}
    by_label = defaultdict(list)
    for s, t, coef in d.arrows:
        if coef.is_idempotent:
            raise ConversionError("type D not reduced (idempotent arrows remain)")
        by_label[coef.name].append((s, t))

    succ23 = {}
    pred23 = {}
    for s, t in by_label.get("23", ()):
        if s in succ23 or t in pred23:
            raise ConversionError("branching r23 chain")
        succ23[s] = t
        pred23[t] = s

    heads_r1 = defaultdict(list)    # k1 <- x
    heads_r3 = defaultdict(list)    # l1 <- x
    tails_r123 = defaultdict(list)  # kl <- y
    tails_r2 = defaultdict(list)    # ll -> y
    for s, t in by_label.get("1", ()):
        heads_r1[t].append(s)
    for s, t in by_label.get("3", ()):
        heads_r3[t].append(s)
    for s, t in by_label.get("123", ()):
        tails_r123[t].append(s)
    for s, t in by_label.get("2", ()):
        tails_r2[s].append(t)

    seen = set()
    chains = []
    for node in sorted(i1):
        if node in seen:
            continue
        # walk to both ends of the r23 path through node
        start = node
        while start in pred23:
            start = pred23[start]
        path = [start]
        while path[-1] in succ23:
            path.append(succ23[path[-1]])
        seen.update(path)
        first, last = path[0], path[-1]
        # vertical: r23 points k_{i+1} -> k_i, so "first" is k_l and "last" k1
        if heads_r1.get(last) and tails_r123.get(first):
            xs, ys = heads_r1[last], tails_r123[first]
            if len(xs) == 1 and len(ys) == 1 and not tails_r2.get(last) and not heads_r3.get(first):
                chains.append(("v", xs[0], ys[0], list(reversed(path))))
                continue
        if heads_r3.get(first) and tails_r2.get(last):
            xs, ys = heads_r3[first], tails_r2[last]
            if len(xs) == 1 and len(ys) == 1:
                chains.append(("h", xs[0], ys[0], path))
                continue
        raise ConversionError(f"iota_1 chain through {node} is not decodable")

    used = set()
    for kind, x, y, path in chains:
        used.add((x, path[0] if kind == "v" else path[0]))
    # ensure every non-r23 arrow is accounted for by some chain
    expect = set()
    for kind, x, y, path in chains:
        if kind == "v":
            expect.add((x, path[0], "1"))
            expect.add((y, path[-1], "123"))
            for i in range(len(path) - 1):
                expect.add((path[i + 1], path[i], "23"))
        else:
            expect.add((x, path[0], "3"))
            expect.add((path[-1], y, "2"))
            for i in range(len(path) - 1):
                expect.add((path[i], path[i + 1], "23"))
    actual = {(s, t, coef.name) for s, t, coef in d.arrows if coef.name != "12"}
    if expect != actual:
        raise ConversionError("stray arrows not belonging to any chain")
    return chains, by_label.get("12", [])


def cfd_to_cfk(d: TypeD, with_tau: bool = False):
    """Reverse the complement encoding; returns the modUV complex (and tau).

    Exactly one chain plays the unstable role; it is identified by matching
    its endpoints against the vertical/horizontal homology generators of the
    decoded differential.
    """
    d.check_wellformed()
    chains, r12 = _decode_chains(d)
    i0 = sorted(g for g, i in d.generators.items() if i == "i0")

    candidates = []
    if len(r12) > 1:
        raise ConversionError("multiple r12 arrows")
    if r12:
        candidates.append(("r12", r12[0]))
    else:
        for idx, (kind, x, y, path) in enumerate(chains):
            if len(path) % 2 == 0:
                candidates.append(("chain", idx))

    solutions = []
    for kind_tag, which in candidates:
        diff = []
        tau = None
        xi0 = eta0 = None
        for idx, (kind, x, y, path) in enumerate(chains):
            if kind_tag == "chain" and idx == which:
                xi0, eta0 = x, y
                tau = len(path) // 2 if kind == "v" else -(len(path) // 2)
                continue
            if kind == "v":
                diff.append((x, y, 0, len(path)))
            else:
                diff.append((x, y, len(path), 0))
        if kind_tag == "r12":
            xi0, eta0 = which
            tau = 0
        cand = CFKComplex(MOD_UV, {g: (0, 0, 0) for g in i0}, diff)
        try:
            _assign_relative_gradings(cand)
        except ConversionError:
            continue
        if _f2_homology_generator(cand, "v") == xi0 and _f2_homology_generator(cand, "h") == eta0:
            solutions.append((cand, tau))

    if len(solutions) != 1:
        raise ConversionError(
            f"unstable chain not identifiable ({len(solutions)} consistent decodings)"
        )
    cand, tau = solutions[0]
    cand.canonicalize()
    if cand.validate():
        raise ConversionError("decoded complex fails validation")
    return (cand, tau) if with_tau else cand


def _assign_relative_gradings(c: CFKComplex):
    """Per-component relative gradings: root at (0,0,0), propagated exactly."""
    table = defaultdict(list)
    for src, dst, u, v in c.diff:
        table[src].append((dst, u, v, +1))
        table[dst].append((src, u, v, -1))
    assigned = {}
    for root in sorted(c.generators):
        if root in assigned:
            continue
        assigned[root] = (0, 0, 0)
        stack = [root]
        while stack:
            g = stack.pop()
            gu, gv, a = assigned[g]
            for nxt, u, v, sign in table[g]:
                # src values from dst: gu(src) = gu(dst) - 2u + 1
                if sign > 0:
                    vals = (gu - 1 + 2 * u, gv - 1 + 2 * v, a + u - v)
                else:
                    vals = (gu + 1 - 2 * u, gv + 1 - 2 * v, a - u + v)
                vals = (vals[0] % 2, vals[1] % 2, vals[2])
                if nxt in assigned:
                    if assigned[nxt] != vals:
                        raise ConversionError(f"inconsistent grading cycle at {nxt}")
                else:
                    assigned[nxt] = vals
                    stack.append(nxt)
    c.generators = {g: assigned[g] for g in c.generators}
    return c


def cfk_to_cfa(c: CFKComplex, tau: int = 0) -> TypeA:
    """Type A module of the 0-framed complement, built from the same chains.

    The operation patterns mirror the type D encoding under the pairing; the
    basic per-arrow operations are completed to an A-infinity module by the
    corner operations between arrows sharing a generator (verified by the
    A-infinity checker).
    """
    if c.ring != MOD_UV:
        raise ConversionError("cfk_to_cfa expects a complex over F[U,V]/(UV)")
    s = lambda t: element(t, SIGMA)
    gens = {g: "i0" for g in c.generators}
    ops = []
    families = []

    vert = {}   # (x, y) -> chain node
    horiz = {}
    for src, dst, u, v in sorted(c.diff):
        if u + v != 1:
            raise ConversionError(
                "type A conversion is implemented for length-1 arrows only"
            )
        chain = f"{'v' if v else 'h'}.{src}.{dst}"
        gens[chain] = "i1"
        if v:
            vert[(src, dst)] = chain
        else:
            horiz[(src, dst)] = chain

    for (x, y), k in vert.items():
        ops.append((x, (s("s1"),), k))
        ops.append((k, (s("s2"),), y))
        ops.append((x, (s("s12"),), y))
    for (x, y), k in horiz.items():
        ops.append((x, (s("s3"),), k))
        ops.append((y, (s("s3"), s("s2"), s("s1")), k))

    # corner operations between a vertical arrow p -> q and a horizontal
    # arrow sharing the corner q (the published module's extra operations)
    for (p, q), k in vert.items():
        for (q2, r_), lam in horiz.items():
            if q2 == q:  # consecutive: p -V-> q -U-> r
                ops.append((k, (s("s23"),), lam))
                ops.append((p, (s("s123"),), lam))
        for (r_, q2), lam in horiz.items():
            if q2 == q:  # shared target: p -V-> q <-U- r
                ops.append((k, (s("s23"), s("s2"), s("s1")), lam))
                ops.append((p, (s("s123"), s("s2"), s("s1")), lam))

    xi0 = _f2_homology_generator(c, "v")
    eta0 = _f2_homology_generator(c, "h")
    if xi0 is None or eta0 is None:
        raise ConversionError("complex is not reduced to a basis with tower generators")
    if tau != 0:
        raise ConversionError("type A conversion is implemented for tau = 0 only")
    families.append((xi0, (s("s3"),), s("s23"), (s("s2"),), eta0))

    out = TypeA(gens, ops, families).canonicalize()
    out.check_wellformed()
    return out


def cfd_to_cfa(d: TypeD) -> TypeA:
    """Convert a reduced complement type D structure to its type A module."""
    c, tau = cfd_to_cfk(d, with_tau=True)
    return cfk_to_cfa(c, tau)


# ---------------------------------------------------------------------------
# Ring lift (modUV -> full F[U,V]) and diagonal bookkeeping

def _square_defects(c: CFKComplex):
    from collections import Counter

    table = c.d_of()
    square = Counter()
    for src, dst, u, v in c.diff:
        for dst2, u2, v2 in table.get(dst, ()):
            square[(src, dst2, u + u2, v + v2)] += 1
    return sorted(k for k, cnt in square.items() if cnt % 2)


def _diagonal_candidates(c: CFKComplex, defect):
    """Single diagonal entries whose addition can cancel the given d^2 term."""
    x, z, uu, vv = defect
    out = set()
    for src, dst, u, v in c.diff:
        if src == x and uu >= u and vv >= v:
            a, b = uu - u, vv - v
            if a >= 1 and b >= 1:
                out.add((dst, z, a, b))
        if dst == z and uu >= u and vv >= v:
            a, b = uu - u, vv - v
            if a >= 1 and b >= 1:
                out.add((x, src, a, b))
    # grading-compatible candidates only
    keep = set()
    for src, dst, a, b in out:
        gu_s, gv_s, a_s = c.generators[src]
        gu_d, gv_d, a_d = c.generators[dst]
        if (gu_s - 1 - gu_d + 2 * a) % 2 == 0 and (gv_s - 1 - gv_d + 2 * b) % 2 == 0 \
                and a_s == a_d - a + b and src != dst:
            keep.add((src, dst, a, b))
    return sorted(keep)


def lift_to_full_ring(c: CFKComplex, max_new: int = 8) -> CFKComplex:
    """Add the diagonal entries forced by d^2 = 0 over the full ring.

    Backtracking over grading-compatible single-entry repairs, minimal count
    first, so the forced set is as small as possible.
    """
    if c.ring != MOD_UV:
        if c.ring == FULL_UV:
            return c.copy().canonicalize()
        raise ConversionError(f"bad ring {c.ring}")
    if c.validate():
        raise ConversionError("input complex fails validation")

    base = CFKComplex(FULL_UV, dict(c.generators), list(c.diff)).canonicalize()

    def search(cur, budget):
        defects = _square_defects(cur)
        if not defects:
            return cur
        if budget == 0:
            return None
        for cand in _diagonal_candidates(cur, defects[0]):
            trial = cur.copy()
            trial.diff.append(cand)
            trial.canonicalize()
            found = search(trial, budget - 1)
            if found is not None:
                return found
        return None

    for budget in range(0, max_new + 1):
        found = search(base, budget)
        if found is not None:
            if found.validate():
                raise ConversionError("lift produced an invalid complex")
            return found
    raise ConversionError("d^2 not repairable by diagonal entries")


def diagonal_entries(c: CFKComplex):
    return sorted(e for e in c.diff if e[2] >= 1 and e[3] >= 1)


def basis_change(c: CFKComplex, target: str, terms) -> CFKComplex:
    """target -> target + sum of U^a V^b gen, transported through the diff."""
    out = c.copy()
    for a, b, z in terms:
        if z == target:
            raise CFKError("basis change must use a different generator")
        extra = []
        for src, dst, u, v in out.diff:
            if dst == target:
                extra.append((src, z, u + a, v + b))
            if src == z:
                extra.append((target, dst, u + a, v + b))
        out.diff.extend(extra)
        out.canonicalize()
    if out.ring == MOD_UV:
        out.diff = [e for e in out.diff if not (e[2] and e[3])]
    return out


def eliminate_removable_diagonals(c: CFKComplex, max_states: int = 3000):
    """Remove every diagonal entry that a change of basis can remove.

    Best-first over monomial basis changes, scoring by (diagonal count,
    entry count); returns (complex, removed list).
    """
    import heapq

    if c.ring != FULL_UV:
        raise ConversionError("diagonal elimination works over the full ring")

    def score(k):
        return (len(diagonal_entries(k)), len(k.diff))

    def moves(k):
        out = []
        for src, dst, u, v in diagonal_entries(k):
            # paper-style substitutions: redirect through any neighbour pair
            for s2, d2, u2, v2 in k.diff:
                if d2 == dst and (s2, d2) != (src, dst) and u >= u2 and v >= v2:
                    out.append((src, (u - u2, v - v2, s2)))
                if s2 == src and (s2, d2) != (src, dst) and u >= u2 and v >= v2:
                    out.append((d2, (u - u2, v - v2, dst)))
        dedup = []
        for target, (a, b, z) in out:
            if target != z and (target, (a, b, z)) not in dedup:
                gu_t, gv_t, a_t = k.generators[target]
                gu_z, gv_z, a_z = k.generators[z]
                if (gu_t - gu_z + 2 * a) % 2 == 0 and (gv_t - gv_z + 2 * b) % 2 == 0 \
                        and a_t == a_z - a + b:
                    dedup.append((target, (a, b, z)))
        return dedup

    start = c.copy().canonicalize()
    best, best_score = start, score(start)
    seen = set()
    heap = [(best_score, 0, start)]
    counter = 0
    while heap and len(seen) < max_states:
        sc, _, cur = heapq.heappop(heap)
        key = tuple(cur.diff)
        if key in seen:
            continue
        seen.add(key)
        if sc < best_score:
            best, best_score = cur, sc
        for target, term in moves(cur):
            trial = basis_change(cur, target, [term])
            tsc = score(trial)
            if tsc[0] <= sc[0] and tsc[1] <= sc[1] + 2:
                counter += 1
                heapq.heappush(heap, (tsc, counter, trial))
    removed = sorted(set(diagonal_entries(c)) - set(diagonal_entries(best)))
    return best, removed
