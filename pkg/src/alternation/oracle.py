"""Independent reference procedures used to validate the main pipeline.

Everything here is deliberately naive: a memoized Ehrenfeucht-Fraisse game
for the Sigma_i preorders, brute-force chain sets over short words, an exact
test for Sigma_1 pairs through upward closure under the subword ordering, and
the classical Sigma_2 equation checked directly on the ordered monoid.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

import numpy as np

from .algebra import Morphism, alphabet_completion, syntactic_morphism
from .chains import ChainSet
from .errors import ResourceLimitError
from .lang import Dfa

DEFAULT_GAME_BUDGET = 2_000_000


def _as_word(w, alphabet=None):
    if isinstance(w, str):
        if alphabet is not None:
            return tuple(alphabet.encode(w))
        return tuple(w)
    return tuple(w)


class _Game:
    def __init__(self, i: int, w, v, budget: int):
        self.i = i
        self.words = (w, v)
        self.budget = budget
        self.visited = 0
        self.memo: dict = {}
        letters = sorted(set(w) | set(v))
        self.letters = letters
        # prefix[x][a][p] = occurrences of letter a in word x before position p
        self.prefix = []
        for x in self.words:
            table = {}
            for a in letters:
                arr = np.zeros(len(x) + 1, dtype=np.int32)
                if x:
                    arr[1:] = np.cumsum([c == a for c in x])
                table[a] = arr
            self.prefix.append(table)

    def _labels(self, x: int, lo: int, hi: int) -> frozenset:
        """Letters of word x at positions lo..hi-1."""
        if hi <= lo:
            return frozenset()
        pre = self.prefix[x]
        return frozenset(a for a in self.letters if pre[a][hi] - pre[a][lo] > 0)

    def _gaps_covered(self, pebbles, x: int) -> bool:
        """Last round: every unpebbled position of word x can be answered in the other word."""
        y = 1 - x
        px = sorted({p[x] for p in pebbles})
        py = sorted({p[y] for p in pebbles})
        bx = [-1] + px + [len(self.words[x])]
        by = [-1] + py + [len(self.words[y])]
        for g in range(len(bx) - 1):
            if not self._labels(x, bx[g] + 1, bx[g + 1]) <= self._labels(y, by[g] + 1, by[g + 1]):
                return False
        return True

    def _consistent(self, pebbles, p: int, q: int) -> bool:
        w, v = self.words
        if w[p] != v[q]:
            return False
        for a, b in pebbles:
            if (a < p) != (b < q) or (a == p) != (b == q):
                return False
        return True

    def duplicator_wins(self, pebbles: tuple, active: int, c: int, rounds: int) -> bool:
        if rounds == 0:
            return True
        key = (pebbles, active, c, rounds)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self.visited += 1
        if self.visited > self.budget:
            raise ResourceLimitError("game states", self.budget, self.visited)
        choices = [(active, c)]
        if c < self.i - 1:
            choices.append((1 - active, c + 1))
        result = True
        for x, cx in choices:
            if rounds == 1:
                if not self._gaps_covered(pebbles, x):
                    result = False
                    break
                continue
            y = 1 - x
            for p in range(len(self.words[x])):
                answered = False
                for q in range(len(self.words[y])):
                    pair = (p, q) if x == 0 else (q, p)
                    if not self._consistent(pebbles, *pair):
                        continue
                    nxt = tuple(sorted(set(pebbles) | {pair}))
                    if self.duplicator_wins(nxt, x, cx, rounds - 1):
                        answered = True
                        break
                if not answered:
                    result = False
                    break
            if not result:
                break
        self.memo[key] = result
        return result


def ef_leq(i: int, k: int, w, v, budget: int = DEFAULT_GAME_BUDGET) -> bool:
    """Whether every Sigma_i sentence of rank k satisfied by ``w`` is satisfied by ``v``.

    Spoiler starts in ``w`` and may switch to the other word at most i-1
    times. A Spoiler with no position to play loses.
    """
    if i < 1 or k < 0:
        raise ValueError("level must be >= 1 and rank >= 0")
    game = _Game(i, tuple(w), tuple(v), budget)
    return game.duplicator_wins((), 0, 0, k)


def _words_upto(nletters: int, maxlen: int):
    for n in range(maxlen + 1):
        yield from itertools.product(range(nletters), repeat=n)


def brute_chain_set(
    m: Morphism, i: int, n: int, k: int, maxlen: int, budget: int = DEFAULT_GAME_BUDGET
) -> ChainSet:
    """Chains witnessed by words of length at most ``maxlen`` for the rank-k Sigma_i preorder.

    This under-approximates the rank-k chain set: longer witnesses are never
    considered.
    """
    if n < 1:
        raise ValueError("chain length must be at least 1")
    words = list(_words_upto(len(m.alphabet.letters), maxlen))
    if len(words) ** 2 > budget:
        raise ResourceLimitError("word pairs", budget, len(words) ** 2)
    images = [m.evaluate(w) for w in words]
    le = [[ef_leq(i, k, u, v, budget) for v in words] for u in words]
    layer = [{(images[j],)} for j in range(len(words))]
    for _ in range(n - 1):
        nxt = []
        for b in range(len(words)):
            acc = set()
            for a in range(len(words)):
                if le[a][b]:
                    acc.update(c + (images[b],) for c in layer[a])
            nxt.append(acc)
        layer = nxt
    return ChainSet(n, frozenset(c for s in layer for c in s))


@dataclass(frozen=True)
class UpwardClosure:
    """Words having some accepted word of ``dfa`` as a scattered subword.

    The automaton is the DFA with a self loop added on every letter at every
    state, read nondeterministically.
    """

    dfa: Dfa

    def _step(self, states: frozenset, a: int) -> frozenset:
        return frozenset(states | {self.dfa.delta[q][a] for q in states})

    def accepts(self, word) -> bool:
        d = self.dfa
        states = frozenset({d.initial})
        for a in _as_word(word, d.alphabet if isinstance(word, str) else None):
            states = self._step(states, a)
        return bool(states & d.finals)

    def intersects(self, other: Dfa) -> bool:
        """Whether some word accepted by ``other`` lies in the closure."""
        d = self.dfa
        start = (d.initial, other.initial)
        seen = {start}
        todo = deque([start])
        while todo:
            p, q = todo.popleft()
            if p in d.finals and q in other.finals:
                return True
            for a in range(len(d.alphabet.letters)):
                q2 = other.delta[q][a]
                for p2 in {p, d.delta[p][a]}:
                    if (p2, q2) not in seen:
                        seen.add((p2, q2))
                        todo.append((p2, q2))
        return False

    def is_empty(self) -> bool:
        return self.dfa.is_empty()


def upward_closure(d: Dfa) -> UpwardClosure:
    return UpwardClosure(d)


def cayley_dfa(m: Morphism, finals) -> Dfa:
    """DFA reading a word into its image, states being monoid elements."""
    table = m.monoid.table
    delta = tuple(tuple(int(table[s, g]) for g in m.letter_image) for s in range(m.size))
    return Dfa(m.alphabet, delta, m.monoid.identity, frozenset(finals))


def exact_sigma1_pair(m: Morphism, t: int, s: int) -> bool:
    """Whether some word mapped to ``s`` has a subword mapped to ``t``."""
    return upward_closure(cayley_dfa(m, {t})).intersects(cayley_dfa(m, {s}))


def pinweil_sigma2(L: Dfa) -> bool:
    """The classical Sigma_2 equation: s^w <= s^w t s^w whenever alph(t) is within alph(s)."""
    base = syntactic_morphism(L).with_preorder("L")
    comp = alphabet_completion(base)
    pairs = comp.pairs if comp.pairs is not None else tuple((x, comp.element_alph[x]) for x in range(comp.size))
    mon = base.monoid
    for s, bs in pairs:
        e = mon.power(s, mon.omega_exponent(s))
        for t, bt in pairs:
            if bt & ~bs:
                continue
            if not base.preorder.le(e, mon.product((e, t, e))):
                return False
    return True
