"""Membership and separation verdicts for the order signature.

Every verdict carries evidence: the violated equation instance, the
non-separable accepting pair with its chain, or a count of checked instances.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .algebra import (
    DEFAULT_MONOID_LIMIT,
    Morphism,
    alphabet_completion,
    j_equivalent_pair,
    joint_morphism,
    syntactic_morphism,
)
from .chains import (
    DEFAULT_JUNCTURE_LIMIT,
    DEFAULT_WITNESS_LIMIT,
    ChainSet,
    JunctureSet,
    all_junctures,
    chains_of_length,
    initial_junctures,
    junctures,
    project_chains,
    rank_bound,
    synthesize_witness,
)
from .errors import AlphabetError, InternalInconsistencyError
from .lang import Dfa, complement

log = logging.getLogger(__name__)

CLASSES = ("sigma1", "pi1", "bsigma1", "sigma2", "pi2", "delta2", "bsigma2", "sigma3", "pi3", "delta3")


@dataclass(frozen=True)
class Limits:
    monoid: int = DEFAULT_MONOID_LIMIT
    junctures: int = DEFAULT_JUNCTURE_LIMIT
    witness: int = DEFAULT_WITNESS_LIMIT


@dataclass(frozen=True)
class Verdict:
    """Answer plus evidence; ``evidence["kind"]`` is one of
    ``equation-violation``, ``chain-pair`` or ``certificate``."""

    answer: bool
    cls: str
    evidence: dict
    signature: str = "order"
    bounds: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "class": self.cls,
            "signature": self.signature,
            "answer": "yes" if self.answer else "no",
            "evidence": self.evidence,
            "bounds": {"separator_rank": self.bounds.get("separator_rank")},
        }


def _certificate(cls: str, checked: int, **extra) -> Verdict:
    return Verdict(True, cls, {"kind": "certificate", "checked": int(checked), **extra})


def _violation(cls: str, equation: str, lhs: int, rhs: int, parameters: dict) -> Verdict:
    return Verdict(
        False,
        cls,
        {"kind": "equation-violation", "equation": equation, "lhs": int(lhs), "rhs": int(rhs), "parameters": parameters},
    )


def _trivial(L: Dfa) -> bool:
    d = L.minimize()
    return d.is_empty() or d.is_universal()


# -- level one -----------------------------------------------------------------------


def membership_sigma1(L: Dfa, dual: bool = False, limits: Limits = Limits()) -> Verdict:
    """Sigma_1: 1 <= t for every t. With ``dual``, Pi_1: t <= 1 for every t."""
    cls = "pi1" if dual else "sigma1"
    if _trivial(L):
        return _certificate(cls, 0, note="trivial language")
    m = syntactic_morphism(L, limit=limits.monoid).with_preorder("L")
    one = m.monoid.identity
    for t in sorted(m.image):
        ok = m.preorder.le(t, one) if dual else m.preorder.le(one, t)
        if not ok:
            eq = "t <= 1" if dual else "1 <= t"
            return _violation(cls, eq, one, t, {"t": t})
    return _certificate(cls, len(m.image))


def membership_bsigma1(L: Dfa, limits: Limits = Limits()) -> Verdict:
    """Boolean combinations of Sigma_1: the syntactic monoid is J-trivial."""
    if _trivial(L):
        return _certificate("bsigma1", 0, note="trivial language")
    m = syntactic_morphism(L, limit=limits.monoid)
    pair = j_equivalent_pair(m.monoid)
    if pair is not None:
        s, t = pair
        return Verdict(False, "bsigma1", {"kind": "equation-violation", "equation": "MsM = MtM implies s = t",
                                          "lhs": s, "rhs": t, "parameters": {"s": s, "t": t}})
    return _certificate("bsigma1", m.size)


# -- level two ----------------------------------------------------------------------


def _first_hit(js: JunctureSet, roots: frozenset, targets: frozenset, start: int = 0):
    bits = 0
    for t in targets:
        bits |= 1 << t
    for jid in range(start, len(js.entries)):
        e = js.entries[jid]
        if e.root in roots and e.mask & bits:
            hit = min(t for t in targets if e.mask >> t & 1)
            return jid, (e.root, hit)
    return None


def separation_sigma2(
    L1: Dfa,
    L2: Dfa,
    direction: str = "sigma",
    limits: Limits = Limits(),
    witnesses: bool = True,
    cls: str | None = None,
) -> Verdict:
    """Whether some Sigma_2 (``direction="sigma"``) or Pi_2 language contains L1 and misses L2.

    Sigma_2: separable iff no (s1, s2) in F1 x F2 is a chain of length 2.
    Pi_2: the same with the pair reversed.
    """
    if direction not in ("sigma", "pi"):
        raise ValueError("direction must be 'sigma' or 'pi'")
    if L1.alphabet != L2.alphabet:
        raise AlphabetError("the two languages use different alphabets")
    cls = cls or ("sep-sigma2" if direction == "sigma" else "sep-pi2")
    m = alphabet_completion(joint_morphism(L1.minimize(), L2.minimize(), limit=limits.monoid), limit=limits.monoid)
    f1, f2 = m.accepting["L1"], m.accepting["L2"]
    roots, targets = (f1, f2) if direction == "sigma" else (f2, f1)
    bound = {"separator_rank": str(rank_bound(2, len(m.image)))}
    if not f1 or not f2:
        return Verdict(True, cls, {"kind": "certificate", "checked": 0, "note": "an input is empty"}, bounds=bound)

    scanned = [0]
    found = []

    def stop(js):
        hit = _first_hit(js, roots, targets, scanned[0])
        scanned[0] = len(js.entries)
        if hit is not None:
            found.append(hit)
            return True
        return False

    level1 = initial_junctures(m, 1)
    js = junctures(m, 2, level1, limit=limits.junctures, stop=stop)
    if not found:
        hit = _first_hit(js, roots, targets)
        if hit is not None:
            found.append(hit)
    if found:
        _, chain = found[0]
        jid = js.find(chain)
        pair = chain if direction == "sigma" else (chain[1], chain[0])
        evidence = {
            "kind": "chain-pair",
            "pair": list(pair),
            "chain": list(chain),
            "labels": [m.element_label(x) for x in chain],
            "juncture": jid,
            "derivation": list(js.derivation(jid)),
        }
        if witnesses:
            ws = synthesize_witness(js, chain, 1, limits.witness)
            evidence["witnesses"] = [m.alphabet.decode(w) for w in ws]
        return Verdict(False, cls, evidence)
    checked = len(f1) * len(f2)
    return Verdict(True, cls, {"kind": "certificate", "checked": checked, "junctures": len(js)}, bounds=bound)


def membership_level2(L: Dfa, which: str = "sigma2", limits: Limits = Limits(), witnesses: bool = True) -> Verdict:
    """Sigma_2, Pi_2 or Delta_2 membership by separation from the complement."""
    if which not in ("sigma2", "pi2", "delta2"):
        raise ValueError(f"unknown level-two class {which!r}")
    if _trivial(L):
        return _certificate(which, 0, note="trivial language")
    d = L.minimize()
    comp = complement(d)
    if which == "sigma2":
        return separation_sigma2(d, comp, "sigma", limits, witnesses, cls="sigma2")
    if which == "pi2":
        return separation_sigma2(comp, d, "sigma", limits, witnesses, cls="pi2")
    sig = membership_level2(d, "sigma2", limits, witnesses)
    if not sig.answer:
        return Verdict(False, "delta2", sig.evidence)
    pi = membership_level2(d, "pi2", limits, witnesses)
    if not pi.answer:
        return Verdict(False, "delta2", pi.evidence)
    return _certificate("delta2", sig.evidence["checked"] + pi.evidence["checked"])


# -- level three -----------------------------------------------------------------------


def _omega(m: Morphism) -> np.ndarray:
    return m.monoid.omega_table().astype(np.int64)


def membership_sigma3_family(L: Dfa, which: str = "sigma3", limits: Limits = Limits()) -> Verdict:
    """s^w <= s^w t s^w (Sigma_3), >= (Pi_3) or = (Delta_3) for all chains (t, s) of length 2.

    Chains are computed on the alphabet completion and projected; the
    saturation stops at the first violating pair.
    """
    if which not in ("sigma3", "pi3", "delta3"):
        raise ValueError(f"unknown level-three class {which!r}")
    if _trivial(L):
        return _certificate(which, 0, note="trivial language")
    base = syntactic_morphism(L, limit=limits.monoid).with_preorder("L")
    comp = alphabet_completion(base, limit=limits.monoid)
    table = base.monoid.table
    omega = _omega(base)
    rel = base.preorder.rel
    e = omega[:, None]
    ete = table[table[e, np.arange(base.size)[None, :]], e]  # ete[s, t] = s^w t s^w
    es = np.broadcast_to(e, ete.shape)
    if which == "sigma3":
        good = rel[es, ete]
    elif which == "pi3":
        good = rel[ete, es]
    else:
        good = es == ete
    proj = np.array([p[0] for p in comp.pairs] if comp.pairs is not None else range(comp.size), dtype=np.int64)
    # bad_for_root[t] = completion elements x with (t, base(x)) violating
    bad_bits = {}
    for t in range(base.size):
        xs = np.flatnonzero(~good[proj, t])
        bad_bits[t] = sum(1 << int(x) for x in xs)
    scanned = [0]
    hit = []

    def stop(js):
        for jid in range(scanned[0], len(js.entries)):
            ent = js.entries[jid]
            bits = ent.mask & bad_bits[int(proj[ent.root])]
            if bits:
                x = (bits & -bits).bit_length() - 1
                hit.append((int(proj[ent.root]), int(proj[x])))
                return True
        scanned[0] = len(js.entries)
        return False

    j2 = junctures(comp, 2, initial_junctures(comp, 1), limit=limits.junctures, stop=stop)
    if not hit:
        stop(j2)
    if hit:
        t, s = hit[0]
        rel_name = {"sigma3": "<=", "pi3": ">=", "delta3": "="}[which]
        return _violation(which, f"s^w {rel_name} s^w t s^w", omega[s], ete[s, t], {"t": t, "s": s})
    c2 = project_chains(chains_of_length(j2), comp)
    return _certificate(which, len(c2))


# -- boolean combinations of Sigma_2 --------------------------------------------------------


@dataclass(frozen=True)
class AlternationSchema:
    s: int
    s1: int
    s2: int
    witness: tuple = ()  # ((r1, R1), (r2, R2), (e, E)) as (root, chain tuple) pairs


def _idempotent_junctures(js: JunctureSet) -> list[tuple[int, int]]:
    seen = set()
    out = []
    for jid in js.maximal_ids():
        e = js.entries[jid]
        _, x = js.omega_exponent(e.root, e.mask)
        if x not in seen:
            seen.add(x)
            out.append(x)
    return out


def _root_unions(js: JunctureSet) -> dict[int, int]:
    out: dict[int, int] = {}
    for jid in js.maximal_ids():
        e = js.entries[jid]
        out[e.root] = out.get(e.root, 0) | e.mask
    return out


def _encode_unique(parts: list[np.ndarray], k: int) -> np.ndarray:
    space = k**3
    if space <= 1 << 25:
        seen = np.zeros(space, dtype=bool)
        for p in parts:
            seen[p.ravel()] = True
        return np.flatnonzero(seen)
    return np.unique(np.concatenate([np.unique(p) for p in parts]))


def _rows(codes: np.ndarray, k: int) -> np.ndarray:
    if len(codes) == 0:
        return np.zeros((0, 3), dtype=np.int64)
    return np.stack([codes // (k * k), (codes // k) % k, codes % k], axis=1)


def diagonal_schema_array(m: Morphism) -> np.ndarray:
    """Schemas (r1 e r2, r1 e, e r2) obtained from diagonal junctures only."""
    k = m.size
    table = m.monoid.table.astype(np.int64)
    roots = np.array(sorted(m.image), dtype=np.int64)
    alph = [m.element_alph[r] for r in roots.tolist()]
    omega = _omega(m)
    parts = []
    for e in sorted({int(omega[r]) for r in roots.tolist()}):
        ae = m.element_alph[e]
        rs = roots[[not a & ~ae for a in alph]]
        left = table[rs, e]
        right = table[e, rs]
        s = table[left[:, None], right[None, :]]
        parts.append((s * k + left[:, None]) * k + right[None, :])
    return _rows(_encode_unique(parts, k), k)


def schema_array(m: Morphism, j2: JunctureSet) -> np.ndarray:
    """All alternation schemas as rows (s, s1, s2), sorted and without repeats."""
    if j2.length != 2:
        raise ValueError("schemas are read off junctures of length 2")
    k = m.size
    table = m.monoid.table.astype(np.int64)
    codec = j2.codec
    unions = _root_unions(j2)
    parts = []
    for e, emask in _idempotent_junctures(j2):
        ae = m.element_alph[e]
        left, right = set(), set()
        for r, rmask in unions.items():
            if m.element_alph[r] & ~ae:
                continue
            re_, er = int(table[r, e]), int(table[e, r])
            for x in codec.indices(codec.product(rmask, emask)).tolist():
                left.add((re_, x))
            for x in codec.indices(codec.product(emask, rmask)).tolist():
                right.add((er, x))
        if not left or not right:
            continue
        la = np.array(sorted(left), dtype=np.int64)
        ra = np.array(sorted(right), dtype=np.int64)
        s = table[la[:, 0][:, None], ra[:, 0][None, :]]
        parts.append((s * k + la[:, 1][:, None]) * k + ra[:, 1][None, :])
    return _rows(_encode_unique(parts, k), k)


def alternation_schemas(m: Morphism, j2: JunctureSet) -> set[AlternationSchema]:
    """Alternation schemas with one witnessing triple of junctures each."""
    table = m.monoid.table
    codec = j2.codec
    ids = j2.maximal_ids()
    out: dict[tuple, AlternationSchema] = {}
    for e, emask in _idempotent_junctures(j2):
        ae = m.element_alph[e]
        eligible = [j for j in ids if not m.element_alph[j2.entries[j].root] & ~ae]
        for i1 in eligible:
            r1 = j2.entries[i1]
            left = codec.indices(codec.product(r1.mask, emask)).tolist()
            for i2 in eligible:
                r2 = j2.entries[i2]
                s = int(table[table[r1.root, e], r2.root])
                right = codec.indices(codec.product(emask, r2.mask)).tolist()
                for s1 in left:
                    for s2 in right:
                        if (s, s1, s2) not in out:
                            wit = (
                                (r1.root, tuple(codec.chains(r1.mask))),
                                (r2.root, tuple(codec.chains(r2.mask))),
                                (e, tuple(codec.chains(emask))),
                            )
                            out[(s, s1, s2)] = AlternationSchema(s, s1, s2, wit)
    return set(out.values())


def _schema_rows(schemas) -> np.ndarray:
    if isinstance(schemas, np.ndarray):
        return schemas.astype(np.int64).reshape(-1, 3)
    rows = sorted((x.s, x.s1, x.s2) for x in schemas)
    return np.array(rows, dtype=np.int64).reshape(-1, 3)


def check_eq16(m: Morphism, schemas, block: int | None = None) -> Verdict:
    """(s1 t1)^w s (t2 s2)^w = (s1 t1)^w s1 t s2 (t2 s2)^w for schema pairs with alph(s) = alph(t)."""
    rows = _schema_rows(schemas)
    table = m.monoid.table.astype(np.int64)
    omega = _omega(m)
    alph = np.array(m.element_alph, dtype=object)
    groups: dict[int, np.ndarray] = {}
    for key in sorted(set(alph[rows[:, 0]].tolist())) if len(rows) else []:
        groups[key] = rows[alph[rows[:, 0]] == key]
    checked = 0
    for _, g in groups.items():
        t, t1, t2 = g[:, 0][None, :], g[:, 1][None, :], g[:, 2][None, :]
        step = block or max(1, 2**20 // len(g))
        for lo in range(0, len(g), step):
            a = g[lo:lo + step]
            s, s1, s2 = a[:, 0][:, None], a[:, 1][:, None], a[:, 2][:, None]
            x = omega[table[s1, t1]]
            y = omega[table[t2, s2]]
            lhs = table[table[x, s], y]
            rhs = table[table[table[table[x, s1], t], s2], y]
            bad = np.argwhere(lhs != rhs)
            checked += lhs.size
            if len(bad):
                i, j = bad[0]
                sch = [int(v) for v in a[i]]
                tch = [int(v) for v in g[j]]
                return _violation(
                    "bsigma2",
                    "(s1t1)^w s (t2s2)^w = (s1t1)^w s1 t s2 (t2s2)^w",
                    lhs[i, j],
                    rhs[i, j],
                    {"s": sch, "t": tch},
                )
    return _certificate("bsigma2", checked)


def check_eq17(m: Morphism, c3: ChainSet) -> Verdict:
    """s1^w s3^w = s1^w s2 s3^w and s3^w s1^w = s3^w s2 s1^w for all chains of length 3."""
    if c3.length != 3:
        raise ValueError("the equation ranges over chains of length 3")
    rows = np.array(sorted(c3.chains), dtype=np.int64).reshape(-1, 3)
    table = m.monoid.table.astype(np.int64)
    omega = _omega(m)
    e1, s2, e3 = omega[rows[:, 0]], rows[:, 1], omega[rows[:, 2]]
    for left, right, name in ((e1, e3, "s1^w s3^w = s1^w s2 s3^w"), (e3, e1, "s3^w s1^w = s3^w s2 s1^w")):
        lhs = table[left, right]
        rhs = table[table[left, s2], right]
        bad = np.flatnonzero(lhs != rhs)
        if len(bad):
            i = int(bad[0])
            return _violation("bsigma2", name, lhs[i], rhs[i], {"chain": [int(v) for v in rows[i]]})
    return _certificate("bsigma2", 2 * len(rows))


def membership_bsigma2(L: Dfa, limits: Limits = Limits(), consistency: bool = True) -> Verdict:
    """Boolean combinations of Sigma_2, via alternation schemas on the alphabet completion.

    With ``consistency`` the length-3 equations are also checked; they must
    hold whenever the schema equation does.
    """
    if _trivial(L):
        return _certificate("bsigma2", 0, note="trivial language")
    comp = alphabet_completion(syntactic_morphism(L, limit=limits.monoid), limit=limits.monoid)
    # schemas from diagonal junctures are a subset; most violations already show up there
    verdict = check_eq16(comp, diagonal_schema_array(comp))
    if not verdict.answer:
        return verdict
    j2 = all_junctures(comp, 2, limits.junctures)[1]
    rows = schema_array(comp, j2)
    verdict = check_eq16(comp, rows)
    if consistency and verdict.answer:
        j3 = junctures(comp, 3, j2, limit=limits.junctures)
        v17 = check_eq17(comp, chains_of_length(j3))
        if not v17.answer:
            raise InternalInconsistencyError(f"schema equation holds but length-3 equation fails: {v17.evidence}")
    if verdict.answer:
        return _certificate("bsigma2", verdict.evidence["checked"], schemas=len(rows))
    return verdict


# -- dispatch -------------------------------------------------------------------------------


def decide(L: Dfa, cls: str, limits: Limits = Limits(), witnesses: bool = True) -> Verdict:
    if cls == "sigma1":
        return membership_sigma1(L, False, limits)
    if cls == "pi1":
        return membership_sigma1(L, True, limits)
    if cls == "bsigma1":
        return membership_bsigma1(L, limits)
    if cls in ("sigma2", "pi2", "delta2"):
        return membership_level2(L, cls, limits, witnesses)
    if cls == "bsigma2":
        return membership_bsigma2(L, limits)
    if cls in ("sigma3", "pi3", "delta3"):
        return membership_sigma3_family(L, cls, limits)
    raise ValueError(f"unknown class {cls!r}; expected one of {', '.join(CLASSES)}")


def decide_many(L: Dfa, classes: Iterable[str], limits: Limits = Limits()) -> dict[str, Verdict]:
    return {c: decide(L, c, limits) for c in classes}
