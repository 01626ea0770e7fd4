"""Shared fixtures and brute-force helpers for the test suite."""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from alternation.algebra import alphabet_completion, syntactic_morphism
from alternation.chains import chains_of_length
from alternation.cli import corpus
from alternation.decide import CLASSES, decide
from alternation.lang import Alphabet, compile_regex

AB = Alphabet.of("ab")

FX = {
    "FX1": "(a|b)*a(a|b)*",
    "FX2": "b*",
    "FX3": "(ab)*",
    "FX4": "(a(ab)*b)*",
    "FX5": "(a(a(ab)*b)*b)*",
}

CORPUS_SEED = 1
CORPUS_SIZE = 200
CORPUS_STATES = 6
# every corpus member gets a length-3 saturation; the cap keeps that affordable
CORPUS_MAX_MONOID = 512

# criterion number -> (passed, detail); filled by the acceptance suite, printed at the end of the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def fx(name: str):
    return compile_regex(FX[name], AB)


def lang(regex: str, alphabet: Alphabet = AB):
    return compile_regex(regex, alphabet)


def words(alphabet, maxlen: int):
    letters = alphabet.letters if isinstance(alphabet, Alphabet) else tuple(alphabet)
    for n in range(maxlen + 1):
        for w in itertools.product(letters, repeat=n):
            yield "".join(w)


def word_indices(nletters: int, maxlen: int):
    for n in range(maxlen + 1):
        yield from itertools.product(range(nletters), repeat=n)


def elem(m, word: str) -> int:
    """Image of a word given as a string over single-character letters."""
    return m.evaluate(m.alphabet.encode(word))


@lru_cache(maxsize=None)
def corpus_dfas():
    return tuple(corpus(CORPUS_SEED, CORPUS_SIZE, CORPUS_STATES, "ab", max_monoid=CORPUS_MAX_MONOID))


@lru_cache(maxsize=None)
def corpus_verdicts():
    """All ten order-signature verdicts for every corpus member (answers only)."""
    return tuple({c: decide(d, c, witnesses=False).answer for c in CLASSES} for d in corpus_dfas())


@lru_cache(maxsize=None)
def corpus_completions(max_size: int | None = None):
    out = []
    for d in corpus_dfas():
        comp = alphabet_completion(syntactic_morphism(d))
        if max_size is None or len(comp.image) <= max_size:
            out.append(comp)
    return tuple(out)


def brute_state_count(accepts, alphabet, maxlen: int) -> int:
    """Myhill-Nerode classes distinguished by suffixes up to ``maxlen``, over prefixes up to ``maxlen``."""
    suffixes = list(words(alphabet, maxlen))
    rows = {tuple(accepts(p + s) for s in suffixes) for p in words(alphabet, maxlen)}
    return len(rows)


def brute_transformations(d, maxlen: int) -> dict:
    """Distinct state transformations of words up to ``maxlen`` with a shortest word for each."""
    out = {}
    for w in word_indices(len(d.alphabet), maxlen):
        f = tuple(d.run(w, start=q) for q in range(d.size))
        out.setdefault(f, w)
    return out


def brute_le(L, u: str, v: str, contexts) -> bool:
    """Word-level syntactic preorder over the given contexts: x u y in L implies x v y in L."""
    return all(L.accepts(x + v + y) for x in contexts for y in contexts if L.accepts(x + u + y))


# -- juncture and chain checks -------------------------------------------------------


def juncture_omega(js, root: int, mask: int):
    """Idempotent power of a juncture, by iterating powers."""
    table = js.morphism.monoid.table
    r, m = root, mask
    while (int(table[r, r]), js.codec.product(m, m)) != (r, m):
        r, m = int(table[r, root]), js.codec.product(m, mask)
    return r, m


def _covered(maxes, root, mask) -> bool:
    return any(r == root and mask & ~mm == 0 for r, mm in maxes)


def closure_failures(js, prev_chains) -> list[str]:
    """Product and insertion closure of a saturated juncture set, checked on its maximal elements.

    Closure of the maximal elements implies closure of the whole downset since both
    operations are monotone for inclusion.
    """
    m = js.morphism
    table = m.monoid.table
    codec = js.codec
    maxes = [(js.entries[j].root, js.entries[j].mask) for j in js.maximal_ids()]
    out = []
    for (r1, m1), (r2, m2) in itertools.product(maxes, repeat=2):
        if not _covered(maxes, int(table[r1, r2]), codec.product(m1, m2)):
            out.append(f"product of roots {r1}, {r2}")
    if prev_chains is not None:
        for r, mk in maxes:
            er, em = juncture_omega(js, r, mk)
            tmask = codec.mask_of(c for c in prev_chains.chains if m.element_alph[c[0]] == m.element_alph[r])
            mid = codec.product(codec.product(em, tmask), em)
            if not _covered(maxes, int(table[er, er]), mid):
                out.append(f"insertion on root {r}")
    return out


def chain_property_failures(m, levels) -> list[str]:
    """Diagonal, subword, stutter and submonoid properties of the chain sets of ``levels``."""
    table = m.monoid.table
    sets = [chains_of_length(js).chains for js in levels]
    out = []
    for n, cs in enumerate(sets, 1):
        for s in m.image:
            if (s,) * n not in cs:
                out.append(f"diagonal {s} missing at length {n}")
        for c in cs:
            if n > 1:
                for i in range(n):
                    if c[:i] + c[i + 1 :] not in sets[n - 2]:
                        out.append(f"subword of {c} missing")
            if n < len(sets):
                for i in range(n):
                    if c[: i + 1] + c[i:] not in sets[n]:
                        out.append(f"stutter of {c} missing")
        arr = np.array(sorted(cs), dtype=np.int64).reshape(-1, n)
        k = m.size
        codes = (arr * k ** np.arange(n)).sum(1)
        for row in arr:
            prod = table[row[None, :], arr]
            pc = (prod * k ** np.arange(n)).sum(1)
            if not np.isin(pc, codes).all():
                out.append(f"product with {tuple(row)} leaves the chains of length {n}")
                break
    return out
