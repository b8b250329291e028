"""Line-oriented text format for all structure kinds (.bfm files).

Tokens are bit-exact: algebra coefficients r1..r123 / s1..s123, "1" for an
idempotent coefficient on arrows, i0/i1 for generator idempotents.  Comments
start with '#'; blank lines are ignored.  Serialization is canonical (sorted)
so that parse(serialize(x)) round-trips byte-for-byte.
"""

from __future__ import annotations

from .algebra import RHO, SIGMA, element, idempotent
from .cfk import CFKComplex
from .structures import StructureError, TypeA, TypeD, TypeDD


class FormatError(Exception):
    pass


def _word(text: str, side: str):
    if text == "-":
        return ()
    return tuple(element(tok, side) for tok in text.split(","))


def _word_str(word) -> str:
    return ",".join(l.token() for l in word) if word else "-"


def parse(text: str):
    """Parse a .bfm document into the structure object of its declared kind."""
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line.split())
    if not lines or lines[0][0] != "kind":
        raise FormatError("missing kind header")
    kind = lines[0][1]
    if kind == "typeD":
        return _parse_type_d(lines[1:])
    if kind == "typeA":
        return _parse_type_a(lines[1:])
    if kind == "typeDD":
        return _parse_type_dd(lines[1:])
    if kind == "cfk":
        return _parse_cfk(lines[1:])
    raise FormatError(f"unknown kind {kind!r}")


def _parse_type_d(lines) -> TypeD:
    gens, arrows = {}, []
    for parts in lines:
        if parts[0] == "gen":
            gens[parts[1]] = parts[2]
        elif parts[0] == "arrow":
            src, dst, coef = parts[1], parts[2], parts[3]
            if coef == "1":
                arrows.append((src, dst, idempotent(gens[src], RHO)))
            else:
                arrows.append((src, dst, element(coef, RHO)))
        else:
            raise FormatError(f"bad typeD line: {' '.join(parts)}")
    d = TypeD(gens, arrows)
    d.check_wellformed()
    return d


def _parse_type_a(lines) -> TypeA:
    gens, ops, fams = {}, [], []
    for parts in lines:
        if parts[0] == "gen":
            gens[parts[1]] = parts[2]
        elif parts[0] == "mop":
            ops.append((parts[1], _word(parts[3], SIGMA), parts[2]))
        elif parts[0] == "family":
            prefix, repeat, suffix = parts[3].split("|")
            rep = _word(repeat, SIGMA)
            if len(rep) != 1:
                raise FormatError("family repeat must be a single letter")
            fams.append((parts[1], _word(prefix, SIGMA), rep[0], _word(suffix, SIGMA), parts[2]))
        else:
            raise FormatError(f"bad typeA line: {' '.join(parts)}")
    a = TypeA(gens, ops, fams)
    a.check_wellformed()
    return a


def _parse_type_dd(lines) -> TypeDD:
    gens, arrows = {}, []
    for parts in lines:
        if parts[0] == "gen":
            gens[parts[1]] = (parts[2], parts[3])
        elif parts[0] == "ddarrow":
            src, dst, rc, sc = parts[1], parts[2], parts[3], parts[4]
            rho = idempotent(gens[src][0], RHO) if rc == "1" else element(rc, RHO)
            sig = idempotent(gens[src][1], SIGMA) if sc == "1" else element(sc, SIGMA)
            arrows.append((src, dst, rho, sig))
        else:
            raise FormatError(f"bad typeDD line: {' '.join(parts)}")
    dd = TypeDD(gens, arrows)
    dd.check_wellformed()
    return dd


def _parse_cfk(lines) -> CFKComplex:
    ring, gens, diff = None, {}, []
    for parts in lines:
        if parts[0] == "ring":
            ring = parts[1]
        elif parts[0] == "cfkgen":
            gens[parts[1]] = (int(parts[2]), int(parts[3]), int(parts[4]))
        elif parts[0] == "cfkarrow":
            diff.append((parts[1], parts[2], int(parts[3]), int(parts[4])))
        else:
            raise FormatError(f"bad cfk line: {' '.join(parts)}")
    if ring is None:
        raise FormatError("cfk file missing ring header")
    c = CFKComplex(ring, gens, diff)
    c.check_wellformed()
    return c


def serialize(obj) -> str:
    if isinstance(obj, TypeD):
        out = ["kind typeD"]
        for g in sorted(obj.generators):
            out.append(f"gen {g} {obj.generators[g]}")
        for src, dst, coef in sorted(
            obj.arrows, key=lambda a: (a[0], a[1], a[2].token())
        ):
            tok = "1" if coef.is_idempotent else coef.token()
            out.append(f"arrow {src} {dst} {tok}")
    elif isinstance(obj, TypeA):
        out = ["kind typeA"]
        for g in sorted(obj.generators):
            out.append(f"gen {g} {obj.generators[g]}")
        for src, word, dst in sorted(
            obj.operations, key=lambda e: (e[0], tuple(x.token() for x in e[1]), e[2])
        ):
            out.append(f"mop {src} {dst} {_word_str(word)}")
        for src, prefix, repeat, suffix, dst in sorted(
            obj.families,
            key=lambda f: (f[0], tuple(x.token() for x in f[1]), f[2].token()),
        ):
            out.append(
                f"family {src} {dst} {_word_str(prefix)}|{repeat.token()}|{_word_str(suffix)}"
            )
    elif isinstance(obj, TypeDD):
        out = ["kind typeDD"]
        for g in sorted(obj.generators):
            ri, si = obj.generators[g]
            out.append(f"gen {g} {ri} {si}")
        for src, dst, rc, sc in sorted(
            obj.arrows, key=lambda a: (a[0], a[1], a[2].token(), a[3].token())
        ):
            rt = "1" if rc.is_idempotent else rc.token()
            st = "1" if sc.is_idempotent else sc.token()
            out.append(f"ddarrow {src} {dst} {rt} {st}")
    elif isinstance(obj, CFKComplex):
        out = ["kind cfk", f"ring {obj.ring}"]
        for g in sorted(obj.generators):
            gu, gv, a = obj.generators[g]
            out.append(f"cfkgen {g} {gu % 2} {gv % 2} {a}")
        for src, dst, u, v in sorted(obj.diff):
            out.append(f"cfkarrow {src} {dst} {u} {v}")
    else:
        raise FormatError(f"cannot serialize {type(obj).__name__}")
    return "\n".join(out) + "\n"


def load(path):
    with open(path) as fh:
        return parse(fh.read())


def save(obj, path):
    with open(path, "w") as fh:
        fh.write(serialize(obj))
