"""Almost iota_K enumeration and the local-equivalence obstruction.

Everything runs over the truncated ring F[U,V]/(U^N, V^N) on a full-ring
knot Floer complex with a fixed grading assignment.  Candidate maps are
R-skew-equivariant, so they are determined by generator images; the chain
condition is linear over F2, skew-homotopies act linearly, and the square
condition (iota^2 homotopic to the basepoint-moving map) is invariant along
homotopies, so it is tested once per homotopy class.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from . import gf2
from .cfk import CFKComplex, FULL_UV, CFKError, phi, psi


class InvolutiveError(Exception):
    pass


class TruncatedModule:
    """F[U,V]/(U^N,V^N) basis bookkeeping for a graded complex."""

    def __init__(self, c: CFKComplex, assignment, N: int):
        if c.ring != FULL_UV:
            raise InvolutiveError("involutive computations need the full ring")
        if N < 3:
            raise InvolutiveError("truncation must be at least 3")
        self.c = c
        self.N = N
        self.gens = sorted(c.generators)
        self.assignment = dict(assignment)
        self.index = {}
        for g in self.gens:
            for i in range(N):
                for j in range(N):
                    self.index[(g, i, j)] = len(self.index)
        self.dim = len(self.index)
        self.d_cols = [0] * self.dim
        for (g, i, j), n in self.index.items():
            vec = 0
            for src, dst, u, v in c.diff:
                if src == g and i + u < N and j + v < N:
                    vec |= 1 << self.index[(dst, i + u, j + v)]
            self.d_cols[n] = vec

    def grading(self, g):
        return self.assignment[g]  # (A, M parity)

    # -- maps are dicts gen -> list of (a, b, tgt) -------------------------

    def extend(self, mapping, skew: bool):
        """Full-module columns of the (skew-)equivariant extension."""
        cols = [0] * self.dim
        N = self.N
        for (g, i, j), n in self.index.items():
            vec = 0
            for a, b, y in mapping.get(g, ()):
                ii, jj = (a + j, b + i) if skew else (a + i, b + j)
                if ii < N and jj < N:
                    vec |= 1 << self.index[(y, ii, jj)]
            cols[n] = vec
        return cols

    def compose_cols(self, outer_cols, inner_cols):
        out = [0] * self.dim
        for n in range(self.dim):
            vec = inner_cols[n]
            acc = 0
            while vec:
                low = vec & -vec
                acc ^= outer_cols[low.bit_length() - 1]
                vec ^= low
            out[n] = acc
        return out

    def gen_images(self, cols):
        """Per-generator image vectors (columns at exponent (0,0))."""
        return {g: cols[self.index[(g, 0, 0)]] for g in self.gens}

    def anticommutator_with_d(self, mapping, skew: bool):
        cols = self.extend(mapping, skew)
        dh = self.compose_cols(self.d_cols, cols)
        hd = self.compose_cols(cols, self.d_cols)
        return [a ^ b for a, b in zip(dh, hd)]


def _support(module: TruncatedModule, parity_shift: int, a_sign: int):
    """Allowed unknown slots (x, a, b, y) for a graded map.

    a_sign -1: skew-graded (A(term) = -A(x)); +1: grading-preserving.
    parity_shift: Maslov parity of term relative to source.
    """
    out = []
    N = module.N
    for x in module.gens:
        ax, mx = module.grading(x)
        for y in module.gens:
            ay, my = module.grading(y)
            if (my - mx - parity_shift) % 2:
                continue
            # A(y) - a + b = a_sign * A(x)
            needed = ay - a_sign * ax  # = a - b
            for a in range(N):
                b = a - needed
                if 0 <= b < N:
                    out.append((x, a, b, y))
    return out


def _vec_of_mapping(mapping, slot_index):
    vec = 0
    for x, terms in mapping.items():
        for a, b, y in terms:
            key = (x, a, b, y)
            if key not in slot_index:
                raise InvolutiveError(f"term {key} outside graded support")
            vec |= 1 << slot_index[key]
    return vec


def _mapping_of_vec(vec, slots):
    mapping = defaultdict(list)
    while vec:
        low = vec & -vec
        x, a, b, y = slots[low.bit_length() - 1]
        mapping[x].append((a, b, y))
        vec ^= low
    return dict(mapping)


@dataclass
class IotaCandidate:
    """A skew chain map at truncation together with its mod-(U,V) shadow."""

    images: dict  # gen -> sorted list of (a, b, tgt)
    mod_uv: dict  # gen -> sorted tuple of target gens
    truncation: int = 4
    square_homotopy: dict | None = field(default=None, repr=False)

    def mod_uv_image(self, g):
        return tuple(self.mod_uv.get(g, ()))


def enumerate_almost_iota(c: CFKComplex, assignment, N: int = 4, max_free: int = 24):
    """All skew chain maps with iota^2 homotopic to the Sarkar map.

    Returned modulo skew homotopy (one representative per class); every
    representative passes verify_iota_square by construction.
    """
    module = TruncatedModule(c, assignment, N)
    slots = _support(module, parity_shift=0, a_sign=-1)
    slot_index = {s: i for i, s in enumerate(slots)}
    n_uk = len(slots)

    # chain condition: d(iota(x)) + iota(dx) = 0 for every generator x
    N = module.N
    eq_rows = defaultdict(int)
    for k, (x, a, b, y) in enumerate(slots):
        # d applied to U^a V^b y
        shifted = 0
        for src, dst, u, v in c.diff:
            if src == y and a + u < N and b + v < N:
                shifted |= 1 << module.index[(dst, a + u, b + v)]
        while shifted:
            low = shifted & -shifted
            eq_rows[(x, low.bit_length() - 1)] ^= 1 << k
            shifted ^= low
    for src, dst, u, v in c.diff:
        # iota(dx) terms: skew extension moves U^u V^v to V^u U^v
        for k, (x, a, b, y) in enumerate(slots):
            if x != dst:
                continue
            ii, jj = a + v, b + u
            if ii < N and jj < N:
                eq_rows[(src, module.index[(y, ii, jj)])] ^= 1 << k

    null = gf2.nullspace(list(eq_rows.values()), n_uk)

    # project chain maps to their mod-(U,V) shadows; homotopies vanish there,
    # and the almost-iota square condition lives entirely in the shadow
    shadow_bits = [k for k, (x, a, b, y) in enumerate(slots) if a == 0 and b == 0]
    shadow_pos = {k: i for i, k in enumerate(shadow_bits)}

    def project(vec):
        out = 0
        for k in shadow_bits:
            if (vec >> k) & 1:
                out |= 1 << shadow_pos[k]
        return out

    pairs = []  # (shadow vector, one chain-map lift)
    basis_s, pivots_s, lifts = [], [], []
    for v in null:
        s, lift = project(v), v
        changed = True
        while changed and s:
            changed = False
            for b2, p2, l2 in zip(basis_s, pivots_s, lifts):
                if (s >> p2) & 1:
                    s ^= b2
                    lift ^= l2
                    changed = True
        if s:
            basis_s.append(s)
            pivots_s.append(s.bit_length() - 1)
            lifts.append(lift)
    free = len(basis_s)
    if free > max_free:
        raise InvolutiveError(f"candidate shadow space too large (2^{free})")

    tail_vectors = [v for v in null if project(v) == 0]
    sarkar_like = _sarkar_target(module)
    shadow_sarkar = _shadow_of_images(module, sarkar_like)

    # equivariant homotopy span, used to adjust tails for the full square
    e_vectors = []
    eq_slots = _support(module, parity_shift=1, a_sign=1)
    for x, a, b, y in eq_slots:
        cols = module.anticommutator_with_d({x: [(a, b, y)]}, skew=False)
        e_vectors.append(_flat_gen_images(module, module.gen_images(cols)))
    e_basis, e_pivots = gf2.echelon(e_vectors)

    survivors = []
    for mask in range(1 << free):
        shadow = 0
        lift = 0
        m, idx = mask, 0
        while m:
            if m & 1:
                shadow ^= basis_s[idx]
                lift ^= lifts[idx]
            m >>= 1
            idx += 1
        smap = _shadow_mapping(shadow, shadow_bits, shadow_pos, slots)
        if not _shadow_square_ok(module, smap, shadow_sarkar):
            continue
        mapping = _mapping_of_vec(lift, slots)
        mapping = _adjust_tail(module, mapping, slots, slot_index, tail_vectors,
                               e_basis, e_pivots, sarkar_like)
        images = {g: sorted(mapping.get(g, ())) for g in module.gens if mapping.get(g)}
        mod_uv = {g: tuple(sorted(smap.get(g, ()))) for g in smap}
        survivors.append(IotaCandidate(images, mod_uv, N))
    return survivors


def _shadow_mapping(shadow, shadow_bits, shadow_pos, slots):
    out = defaultdict(set)
    for k in shadow_bits:
        if (shadow >> shadow_pos[k]) & 1:
            x, a, b, y = slots[k]
            out[x].add(y)
    return {g: frozenset(t) for g, t in out.items()}


def _shadow_of_images(module: TruncatedModule, images: dict):
    out = {}
    for g in module.gens:
        vec = images.get(g, 0)
        targets = set()
        while vec:
            low = vec & -vec
            y, i, j = _unindex(module, low.bit_length() - 1)
            if i == 0 and j == 0:
                targets.add(y)
            vec ^= low
        out[g] = frozenset(targets)
    return out


def _shadow_square_ok(module: TruncatedModule, smap, shadow_sarkar) -> bool:
    for g in module.gens:
        acc = set()
        for mid in smap.get(g, ()):
            acc ^= set(smap.get(mid, ()))
        if acc != set(shadow_sarkar.get(g, ())):
            return False
    return True


def _adjust_tail(module, mapping, slots, slot_index, tail_vectors,
                 e_basis, e_pivots, sarkar_like, rounds: int = 4):
    """Move within the chain-map space (fixed shadow) until the full square
    condition holds up to an equivariant homotopy, if possible."""
    vec = _vec_of_mapping(mapping, slot_index)
    for _ in range(rounds):
        cur = _mapping_of_vec(vec, slots)
        defect = _square_defect(module, cur, sarkar_like)
        if gf2.in_span(defect, e_basis, e_pivots):
            return cur
        # linearized correction: solve defect + [iota, t] in E over tails t
        cols = module.extend(cur, skew=True)
        rows = []
        for t in tail_vectors:
            tmap = _mapping_of_vec(t, slots)
            tcols = module.extend(tmap, skew=True)
            bracket = [a ^ b for a, b in zip(module.compose_cols(cols, tcols),
                                             module.compose_cols(tcols, cols))]
            rows.append(_flat_gen_images(module, module.gen_images(bracket)))
        # reduce defect against homotopies and bracket directions
        basis2, pivots2, tags = list(e_basis), list(e_pivots), [0] * len(e_basis)
        for rvec, t in zip(rows, tail_vectors):
            curv, curtag = rvec, t
            changed = True
            while changed and curv:
                changed = False
                for b2, p2, t2 in zip(basis2, pivots2, tags):
                    if (curv >> p2) & 1:
                        curv ^= b2
                        curtag ^= t2
                        changed = True
            if curv:
                basis2.append(curv)
                pivots2.append(curv.bit_length() - 1)
                tags.append(curtag)
        acc, used = defect, 0
        changed = True
        while changed and acc:
            changed = False
            for b2, p2, t2 in zip(basis2, pivots2, tags):
                if (acc >> p2) & 1:
                    acc ^= b2
                    used ^= t2
                    changed = True
        if acc != 0:
            return cur  # no linear correction; report as found
        if used == 0:
            return cur
        vec ^= used
    return _mapping_of_vec(vec, slots)


def cols_to_terms(module: TruncatedModule, cols):
    """Columns restricted to generators, as a gen -> terms mapping."""
    out = {}
    for g in module.gens:
        vec = cols[module.index[(g, 0, 0)]]
        terms = []
        while vec:
            low = vec & -vec
            y, i, j = _unindex(module, low.bit_length() - 1)
            terms.append((i, j, y))
            vec ^= low
        if terms:
            out[g] = terms
    return out


def _unindex(module: TruncatedModule, n):
    g = module.gens[n // (module.N * module.N)]
    rest = n % (module.N * module.N)
    return g, rest // module.N, rest % module.N


def _flat_gen_images(module: TruncatedModule, images: dict) -> int:
    vec = 0
    for k, g in enumerate(module.gens):
        vec |= images.get(g, 0) << (k * module.dim)
    return vec


def _sarkar_target(module: TruncatedModule):
    """Gen-image bitmasks of Id + Psi o Phi at the truncation."""
    c = module.c
    phi_map = {g: [(u, v, y) for u, v, y in terms] for g, terms in phi(c).items()}
    psi_map = {g: [(u, v, y) for u, v, y in terms] for g, terms in psi(c).items()}
    phi_cols = module.extend(phi_map, skew=False)
    psi_cols = module.extend(psi_map, skew=False)
    comp = module.compose_cols(psi_cols, phi_cols)
    images = module.gen_images(comp)
    for g in module.gens:
        images[g] ^= 1 << module.index[(g, 0, 0)]
    return images


def _square_defect(module: TruncatedModule, mapping, sarkar_images):
    cols = module.extend(mapping, skew=True)
    square = module.compose_cols(cols, cols)
    images = module.gen_images(square)
    for g in module.gens:
        images[g] = images.get(g, 0) ^ sarkar_images.get(g, 0)
    return _flat_gen_images(module, images)


def verify_iota_square(c: CFKComplex, iota: IotaCandidate, assignment, N: int | None = None):
    """Solve iota^2 + sarkar = dG + Gd for an equivariant homotopy G."""
    N = N or iota.truncation
    module = TruncatedModule(c, assignment, N)
    defect = _square_defect(module, iota.images, _sarkar_target(module))
    eq_slots = _support(module, parity_shift=1, a_sign=1)
    vectors = []
    for x, a, b, y in eq_slots:
        cols = module.anticommutator_with_d({x: [(a, b, y)]}, skew=False)
        vectors.append(_flat_gen_images(module, module.gen_images(cols)))
    basis, pivots = gf2.echelon(vectors)
    if not gf2.in_span(defect, basis, pivots):
        return False, None
    # recover a witness by tracking which unit homotopies build the defect
    basis2, pivots2, tags = [], [], []
    for vec, slot in zip(vectors, eq_slots):
        cur, curtags = vec, {slot}
        changed = True
        while changed:
            changed = False
            for b2, p2, t2 in zip(basis2, pivots2, tags):
                if (cur >> p2) & 1:
                    cur ^= b2
                    curtags ^= t2
                    changed = True
        if cur:
            basis2.append(cur)
            pivots2.append(cur.bit_length() - 1)
            tags.append(curtags)
    acc, used = defect, set()
    changed = True
    while changed and acc:
        changed = False
        for b2, p2, t2 in zip(basis2, pivots2, tags):
            if (acc >> p2) & 1:
                acc ^= b2
                used ^= t2
                changed = True
    if acc != 0:
        return False, None
    witness = defaultdict(list)
    for x, a, b, y in used:
        witness[x].append((a, b, y))
    return True, dict(witness)


# ---------------------------------------------------------------------------
# Tensor powers mod (U,V) and the obstruction certificate

@dataclass
class ObstructionCertificate:
    power: int
    witness: tuple  # the surviving monomial, e.g. (g, a, a, a)
    basis_size: int
    checked_monomials: int


def tensor_power_mod_uv(c: CFKComplex, iota: IotaCandidate, n: int):
    """The mod-(U,V) tensor power (zero differential) with factor-wise iota."""
    if n < 1:
        raise InvolutiveError("tensor power needs n >= 1")
    for src, dst, u, v in c.diff:
        if u == 0 and v == 0:
            raise InvolutiveError("differential does not vanish mod (U,V)")
    gens = sorted(c.generators)
    action = {g: frozenset(iota.mod_uv_image(g)) for g in gens}

    def iota_tensor(monomial):
        """Set of monomials in iota^{(x)n} applied to one basis monomial."""
        out = {()}
        for g in monomial:
            out = {m + (y,) for m in out for y in action[g]}
        return out

    return gens, action, iota_tensor


def local_obstruction(c: CFKComplex, iota: IotaCandidate, n: int, anchor: str, tower: str):
    """Certificate that omega = Id + iota keeps g (x) a^{(x)(n-1)} alive.

    anchor is the localized-homology generator a; tower is the generator g
    whose class must appear in iota(a).  Admissible corrections lambda run
    over every basis monomial other than a^{(x)n}; the certificate holds iff
    none of them can contribute the witness monomial to omega(lambda).
    """
    gens, action, iota_tensor = tensor_power_mod_uv(c, iota, n)
    if tower not in action.get(anchor, ()):  # iota(a) must contain g
        return None
    witness = (tower,) + (anchor,) * (n - 1)

    # omega(a^{(x)n}) must contain the witness exactly once
    count = 0
    base = (anchor,) * n
    if witness in iota_tensor(base):
        count += 1
    if witness == base:
        count += 1
    if count % 2 == 0:
        return None

    # monomials whose omega could contain the witness: first factor must map
    # over g, the others over a
    first = [x for x in gens if tower in action.get(x, ())]
    rest = [x for x in gens if anchor in action.get(x, ())]
    checked = 0
    for m1 in first:
        stack = [(m1,)]
        while stack:
            mono = stack.pop()
            if len(mono) < n:
                for x in rest:
                    stack.append(mono + (x,))
                continue
            checked += 1
            if mono == base:
                continue  # not an admissible correction
            hits = 0
            if witness in iota_tensor(mono):
                hits += 1
            if mono == witness:
                hits += 1
            if hits % 2:
                return None  # an admissible lambda could cancel the witness
    return ObstructionCertificate(n, witness, len(gens) ** n, checked)
