"""Transfer from the enriched signature (order, successor, min, max) to the order signature.

A morphism alpha: A* -> M with idempotents E of alpha(A+) gives the alphabet

    single(s) | left(s, f) | right(e, s) | middle(e, s, f)

over s in M and e, f in E. A word over it is well formed when it is empty, a
single ``single`` letter, or ``left (middle)* right`` where consecutive
idempotents agree. ``eval`` sends each letter to the product of its
components. The language of well-formed words whose evaluation lies in
alpha(L) sits at the same order-signature level as L does in the enriched
signature (for the levels handled below).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .algebra import Morphism, joint_morphism, syntactic_morphism
from .decide import CLASSES, Limits, Verdict, decide, separation_sigma2
from .errors import InternalInconsistencyError, ResourceLimitError, UnsupportedError
from .lang import Alphabet, Dfa

DEFAULT_ALPHABET_LIMIT = 2000

START, DONE, END, SINK = "start", "done", "end", "sink"


@dataclass(frozen=True)
class WfLetter:
    tag: str  # single | left | right | middle
    s: int
    e: int | None = None
    f: int | None = None

    @property
    def name(self) -> str:
        if self.tag == "single":
            return f"s{self.s}"
        if self.tag == "left":
            return f"l{self.s}_{self.f}"
        if self.tag == "right":
            return f"r{self.e}_{self.s}"
        return f"m{self.e}_{self.s}_{self.f}"


@dataclass(frozen=True)
class WfLanguage:
    letters: tuple[WfLetter, ...]
    alphabet: Alphabet
    dfa: Dfa
    morphism: Morphism

    def eval(self, word) -> int:
        """Product of the letter evaluations, ``word`` being letter indices."""
        m = self.morphism.monoid
        return m.product(wf_eval(self.morphism, self.letters[i]) for i in word)


def plus_idempotents(m: Morphism) -> list[int]:
    """Idempotents among images of nonempty words."""
    table = m.monoid.table
    seen = set(m.letter_image)
    todo = deque(sorted(seen))
    while todo:
        s = todo.popleft()
        for g in m.letter_image:
            x = int(table[s, g])
            if x not in seen:
                seen.add(x)
                todo.append(x)
    return sorted(s for s in seen if table[s, s] == s)


def wf_alphabet(m: Morphism, limit: int = DEFAULT_ALPHABET_LIMIT) -> tuple[WfLetter, ...]:
    idem = plus_idempotents(m)
    if not idem:
        raise InternalInconsistencyError("no idempotent among images of nonempty words")
    n, k = m.size, len(idem)
    total = n + 2 * n * k + n * k * k
    if total > limit:
        raise ResourceLimitError("well-formed alphabet", limit, total)
    out = [WfLetter("single", s) for s in range(n)]
    out += [WfLetter("left", s, f=f) for s in range(n) for f in idem]
    out += [WfLetter("right", s, e=e) for e in idem for s in range(n)]
    out += [WfLetter("middle", s, e=e, f=f) for e in idem for s in range(n) for f in idem]
    return tuple(out)


def wf_eval(m: Morphism, x: WfLetter) -> int:
    table = m.monoid.table
    v = x.s
    if x.e is not None:
        v = int(table[x.e, v])
    if x.f is not None:
        v = int(table[v, x.f])
    return v


def wf_step(state, x: WfLetter):
    """Well-formedness tracker. States: start, done, end, sink, or ("expect", f)."""
    if state == START:
        if x.tag == "single":
            return DONE
        if x.tag == "left":
            return ("expect", x.f)
        return SINK
    if isinstance(state, tuple):
        f = state[1]
        if x.tag == "middle" and x.e == f:
            return ("expect", x.f)
        if x.tag == "right" and x.e == f:
            return END
    return SINK


def well_formed(letters, word) -> bool:
    """Run the tracker over ``word`` (letter indices)."""
    state = START
    for i in word:
        state = wf_step(state, letters[i])
    return state in (START, DONE, END)


def wf_language(L: Dfa | None, m: Morphism, tag: str = "L", limit: int = DEFAULT_ALPHABET_LIMIT) -> WfLanguage:
    """Minimal DFA of well-formed words whose evaluation is accepted under ``tag``.

    ``L`` is only used to check the alphabet; the accepting set is read off ``m``.
    """
    if tag not in m.accepting:
        raise KeyError(f"morphism has no accepting set {tag!r}")
    if L is not None and L.alphabet != m.alphabet:
        raise ValueError("the morphism does not read the language's alphabet")
    letters = wf_alphabet(m, limit)
    alphabet = Alphabet(tuple(x.name for x in letters))
    evals = [wf_eval(m, x) for x in letters]
    table = m.monoid.table
    accepting = m.accepting[tag]
    start = (START, m.monoid.identity)
    index = {start: 0}
    states = [start]
    delta = []
    i = 0
    while i < len(states):
        tr, s = states[i]
        row = []
        for x, v in zip(letters, evals):
            nxt = wf_step(tr, x)
            key = (SINK, 0) if nxt == SINK else (nxt, int(table[s, v]))
            if key not in index:
                index[key] = len(states)
                states.append(key)
            row.append(index[key])
        delta.append(tuple(row))
        i += 1
    finals = frozenset(j for j, (tr, s) in enumerate(states) if tr in (START, DONE, END) and s in accepting)
    dfa = Dfa(alphabet, tuple(delta), 0, finals).minimize()
    return WfLanguage(letters, alphabet, dfa, m)


def merge_letters(*dfas: Dfa) -> tuple[Dfa, ...]:
    """Restrict minimal DFAs to one letter per class of letters acting identically on all of them.

    Letters with the same action have the same syntactic image, and the
    classes handled here are closed under inverse letter-to-letter
    morphisms, so membership and separation are unchanged. Alphabet
    compatible morphisms grow with the number of letters, which makes
    this worth doing before any saturation.
    """
    ds = [d.minimize() for d in dfas]
    if any(d.alphabet != ds[0].alphabet for d in ds):
        raise ValueError("automata read different alphabets")
    keep, seen = [], set()
    for i in range(len(ds[0].alphabet)):
        key = tuple(tuple(row[i] for row in d.delta) for d in ds)
        if key not in seen:
            seen.add(key)
            keep.append(i)
    if len(keep) == len(ds[0].alphabet):
        return tuple(ds)
    alphabet = Alphabet(tuple(ds[0].alphabet.letters[i] for i in keep))
    return tuple(Dfa(alphabet, tuple(tuple(row[i] for i in keep) for row in d.delta), d.initial, d.finals).minimize()
                 for d in ds)


MEMBERSHIP_VIA_TRANSFER = ("bsigma2", "sigma3", "pi3", "delta3")
MEMBERSHIP_VIA_SEPARATION = ("sigma2", "pi2", "delta2")


def _tag(v: Verdict, cls: str) -> Verdict:
    return Verdict(v.answer, cls, v.evidence, signature="enriched", bounds=v.bounds)


def _via_order(v: Verdict, cls: str) -> Verdict:
    ev = dict(v.evidence)
    ev["via"] = "order-signature"
    return Verdict(True, cls, ev, signature="enriched", bounds=v.bounds)


def enriched_separation(L1: Dfa, L2: Dfa, direction: str = "sigma", limits: Limits = Limits(),
                        alphabet_limit: int = DEFAULT_ALPHABET_LIMIT, cls: str | None = None,
                        shortcut: bool = True) -> Verdict:
    """Separation in the enriched signature through the well-formed word languages.

    With ``shortcut``, an order-signature separator is tried first: it is
    also an enriched one, so a positive answer there settles the question.
    """
    cls = cls or ("sep-sigma2" if direction == "sigma" else "sep-pi2")
    if shortcut:
        v = separation_sigma2(L1, L2, direction, limits, witnesses=False)
        if v.answer:
            return _via_order(v, cls)
    m = joint_morphism(L1.minimize(), L2.minimize(), limit=limits.monoid)
    w1 = wf_language(L1, m, "L1", alphabet_limit)
    w2 = wf_language(L2, m, "L2", alphabet_limit)
    d1, d2 = merge_letters(w1.dfa, w2.dfa)
    return _tag(separation_sigma2(d1, d2, direction, limits), cls)


def enriched_decide(L: Dfa, cls: str, limits: Limits = Limits(), alphabet_limit: int = DEFAULT_ALPHABET_LIMIT,
                    shortcut: bool = True) -> Verdict:
    """Membership in the enriched signature.

    With ``shortcut``, a positive order-signature verdict is returned first
    (the enriched class contains the order class).
    """
    if cls not in CLASSES:
        raise ValueError(f"unknown class {cls!r}")
    if cls in ("sigma1", "pi1", "bsigma1"):
        raise UnsupportedError(f"{cls} is below the levels the well-formed word transfer handles")
    d = L.minimize()
    if shortcut:
        v = decide(d, cls, limits, witnesses=False)
        if v.answer:
            return _via_order(v, cls)
    if cls in MEMBERSHIP_VIA_TRANSFER:
        m = syntactic_morphism(d, limit=limits.monoid)
        w = wf_language(d, m, "L", alphabet_limit)
        (dw,) = merge_letters(w.dfa)
        return _tag(decide(dw, cls, limits), cls)
    # level two: separation from the complement, both languages read through one morphism
    m = syntactic_morphism(d, limit=limits.monoid)
    inside = m.accepting["L"]
    m2 = Morphism(m.monoid, m.alphabet, m.letter_image, m.image,
                  {"L1": inside, "L2": frozenset(m.image - inside)}, words=m.words)
    w_in = wf_language(d, m2, "L1", alphabet_limit)
    w_out = wf_language(d, m2, "L2", alphabet_limit)
    w_in, w_out = merge_letters(w_in.dfa, w_out.dfa)
    if cls == "sigma2":
        return _tag(separation_sigma2(w_in, w_out, "sigma", limits), cls)
    if cls == "pi2":
        return _tag(separation_sigma2(w_out, w_in, "sigma", limits), cls)
    sig = separation_sigma2(w_in, w_out, "sigma", limits)
    if not sig.answer:
        return _tag(sig, cls)
    pi = separation_sigma2(w_out, w_in, "sigma", limits)
    if not pi.answer:
        return _tag(pi, cls)
    return Verdict(True, cls, {"kind": "certificate", "checked": sig.evidence["checked"] + pi.evidence["checked"]},
                   signature="enriched")
