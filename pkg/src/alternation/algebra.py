"""Finite monoids, morphisms from free monoids, and their ordered structure.

Elements are integers ``0..size-1``. A ``Morphism`` records where each letter
goes, which elements are accepting for each named language, and optionally
the letter content of every element (for alphabet compatible morphisms) and
how each element projects back onto a smaller morphism it was built from.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from math import gcd
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import AlphabetError, ParseError, ResourceLimitError
from .lang import Alphabet, Dfa

DEFAULT_MONOID_LIMIT = 512
_CHECK_LIMIT = 200


class Monoid:
    """A finite monoid given by its multiplication table."""

    def __init__(self, table, identity: int, check: bool = True):
        table = np.asarray(table, dtype=np.int32)
        if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] == 0:
            raise ValueError("multiplication table must be a nonempty square array")
        n = table.shape[0]
        if table.min() < 0 or table.max() >= n:
            raise ValueError("table entries out of range")
        if not 0 <= identity < n:
            raise ValueError("identity out of range")
        table.setflags(write=False)
        self.table = table
        self.identity = identity
        self.size = n
        self._omega_exp: list[int] | None = None
        if check and n <= _CHECK_LIMIT:
            self._check()

    def _check(self):
        t = self.table
        ar = np.arange(self.size)
        if not (np.array_equal(t[self.identity], ar) and np.array_equal(t[:, self.identity], ar)):
            raise ValueError(f"element {self.identity} is not an identity")
        # (xy)z == x(yz) for all triples
        lhs = t[t[:, :, None], ar[None, None, :]]
        rhs = t[ar[:, None, None], t[None, :, :]]
        if not np.array_equal(lhs, rhs):
            bad = np.argwhere(lhs != rhs)[0]
            raise ValueError(f"table is not associative at {tuple(int(v) for v in bad)}")

    def __repr__(self):
        return f"Monoid(size={self.size}, identity={self.identity})"

    def __eq__(self, other):
        return (
            isinstance(other, Monoid)
            and self.identity == other.identity
            and np.array_equal(self.table, other.table)
        )

    def __hash__(self):
        return hash((self.size, self.identity, self.table.tobytes()))

    def mul(self, s: int, t: int) -> int:
        return int(self.table[s, t])

    def product(self, elements: Iterable[int]) -> int:
        r = self.identity
        t = self.table
        for s in elements:
            r = t[r, s]
        return int(r)

    def power(self, s: int, n: int) -> int:
        r, base = self.identity, s
        t = self.table
        while n:
            if n & 1:
                r = t[r, base]
            base = t[base, base]
            n >>= 1
        return int(r)

    def is_idempotent(self, s: int) -> bool:
        return self.table[s, s] == s

    def index_period(self, s: int) -> tuple[int, int]:
        """Index i >= 1 and period p of the cyclic subsemigroup of ``s``."""
        seen = {}
        x, k = s, 1
        t = self.table
        while x not in seen:
            seen[x] = k
            x = int(t[x, s])
            k += 1
        i = seen[x]
        return i, k - i

    def omega_exponent(self, s: int) -> int:
        """Smallest N >= 1 such that s^N is idempotent."""
        if self._omega_exp is None:
            self._omega_exp = [0] * self.size
        if not self._omega_exp[s]:
            i, p = self.index_period(s)
            self._omega_exp[s] = max(1, -(-i // p)) * p
        return self._omega_exp[s]

    def omega_table(self) -> np.ndarray:
        """Array mapping every element to its idempotent power."""
        return np.array([idempotent_power(self, s) for s in range(self.size)], dtype=np.int32)

    def idempotents(self) -> list[int]:
        return [s for s in range(self.size) if self.table[s, s] == s]


def idempotent_power(m: Monoid, s: int) -> int:
    """The unique idempotent among the powers s, s^2, s^3, ..."""
    return m.power(s, m.omega_exponent(s))


def global_omega(m: Monoid) -> int:
    """Smallest N such that s^N is idempotent for every element s."""
    period = 1
    index = 1
    for s in range(m.size):
        i, p = m.index_period(s)
        period = period * p // gcd(period, p)
        index = max(index, i)
    return max(1, -(-index // period)) * period


class Preorder:
    """A preorder on monoid elements stored as a boolean matrix ``rel[s, t] = s <= t``."""

    def __init__(self, rel, monoid: Monoid | None = None, check: bool = True):
        rel = np.asarray(rel, dtype=bool)
        rel.setflags(write=False)
        self.rel = rel
        if check:
            problem = _preorder_problem(rel, monoid)
            if problem:
                raise ValueError(problem)

    def le(self, s: int, t: int) -> bool:
        return bool(self.rel[s, t])

    def __eq__(self, other):
        return isinstance(other, Preorder) and np.array_equal(self.rel, other.rel)

    def __hash__(self):
        return hash(self.rel.tobytes())

    def pairs(self) -> list[tuple[int, int]]:
        return [(int(a), int(b)) for a, b in np.argwhere(self.rel)]


def _preorder_problem(rel: np.ndarray, monoid: Monoid | None) -> str | None:
    n = rel.shape[0]
    if not rel[np.arange(n), np.arange(n)].all():
        return "relation is not reflexive"
    r = rel.astype(np.int64)
    if ((r @ r > 0) & ~rel).any():
        return "relation is not transitive"
    if monoid is not None:
        t = monoid.table
        # given transitivity, compatibility reduces to one-sided translations
        for x in range(n):
            row = t[x]
            col = t[:, x]
            if (rel & ~rel[row[:, None], row[None, :]]).any():
                return f"relation is not compatible with left multiplication by {x}"
            if (rel & ~rel[col[:, None], col[None, :]]).any():
                return f"relation is not compatible with right multiplication by {x}"
    return None


def is_upward_closed(accepting: Iterable[int], order: Preorder) -> bool:
    acc = set(accepting)
    rel = order.rel
    return all(int(t) in acc for s in acc for t in np.flatnonzero(rel[s]))


@dataclass(frozen=True, eq=False)
class Morphism:
    """Morphism from the free monoid over ``alphabet`` into ``monoid``.

    ``element_alph[s]`` is a bitmask over alphabet positions when the morphism
    is alphabet compatible. ``pairs[s]`` is ``(base element, letter mask)``
    for alphabet completions. ``words[s]`` is a shortest preimage, as a tuple
    of letter indices.
    """

    monoid: Monoid
    alphabet: Alphabet
    letter_image: tuple[int, ...]
    image: frozenset[int]
    accepting: Mapping[str, frozenset[int]]
    element_alph: tuple[int, ...] | None = None
    preorder: Preorder | None = None
    pairs: tuple[tuple[int, int], ...] | None = None
    words: tuple[tuple[int, ...], ...] | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "letter_image", tuple(int(x) for x in self.letter_image))
        object.__setattr__(self, "accepting", {k: frozenset(v) for k, v in self.accepting.items()})
        if len(self.letter_image) != len(self.alphabet):
            raise ValueError("one image per letter is required")
        closure = _closure(self.monoid, self.letter_image)
        if self.image is None:
            object.__setattr__(self, "image", closure)
        elif frozenset(self.image) != closure:
            raise ValueError("image is not the submonoid generated by the letters")
        else:
            object.__setattr__(self, "image", frozenset(self.image))
        for tag, acc in self.accepting.items():
            if not acc <= self.image:
                raise ValueError(f"accepting set {tag!r} leaves the image")
        if self.element_alph is not None:
            _check_alph(self)

    @property
    def size(self) -> int:
        return self.monoid.size

    @property
    def surjective(self) -> bool:
        return len(self.image) == self.monoid.size

    def evaluate(self, word: Sequence[int]) -> int:
        return self.monoid.product(self.letter_image[i] for i in word)

    def evaluate_word(self, word) -> int:
        return self.evaluate(self.alphabet.encode(word))

    def alph(self, s: int) -> int:
        if self.element_alph is None:
            raise ValueError("morphism is not alphabet compatible")
        return self.element_alph[s]

    def alph_letters(self, s: int) -> frozenset[str]:
        mask = self.alph(s)
        return frozenset(x for i, x in enumerate(self.alphabet.letters) if mask >> i & 1)

    def shortest_word(self, s: int) -> tuple[int, ...]:
        if self.words is None:
            object.__setattr__(self, "words", shortest_words(self))
        w = self.words[s]
        if w is None:
            raise ValueError(f"element {s} has no preimage")
        return w

    def with_preorder(self, tag: str) -> "Morphism":
        return replace(self, preorder=recognition_preorder(self, tag))

    def element_label(self, s: int) -> str:
        if self.pairs is None:
            return str(s)
        base, mask = self.pairs[s]
        letters = "".join(x for i, x in enumerate(self.alphabet.letters) if mask >> i & 1)
        return f"{s}({base},{{{letters}}})"


def _closure(m: Monoid, generators: Sequence[int]) -> frozenset[int]:
    seen = {m.identity}
    queue = deque([m.identity])
    t = m.table
    while queue:
        s = queue.popleft()
        for g in generators:
            x = int(t[s, g])
            if x not in seen:
                seen.add(x)
                queue.append(x)
    return frozenset(seen)


def _check_alph(m: Morphism):
    alph = m.element_alph
    t = m.monoid.table
    if alph[m.monoid.identity] != 0:
        raise ValueError("the identity must have empty alphabet")
    for i, g in enumerate(m.letter_image):
        if alph[g] != 1 << i:
            raise ValueError(f"letter image {g} has the wrong alphabet")
    img = np.array(sorted(m.image), dtype=np.int64)
    a = np.asarray(alph, dtype=np.int64)
    ai = a[img]
    block = max(1, 2**22 // max(len(img), 1))
    for lo in range(0, len(img), block):
        rows = img[lo : lo + block]
        bad = a[t[rows[:, None], img[None, :]]] != (ai[lo : lo + block, None] | ai[None, :])
        if bad.any():
            i, j = map(int, np.argwhere(bad)[0])
            raise ValueError(f"alph is not multiplicative at ({int(rows[i])}, {int(img[j])})")


def shortest_words(m: Morphism) -> tuple:
    """A shortest preimage for every element (None off the image), BFS in letter order."""
    words: list = [None] * m.size
    e = m.monoid.identity
    words[e] = ()
    queue = deque([e])
    t = m.monoid.table
    while queue:
        s = queue.popleft()
        for i, g in enumerate(m.letter_image):
            x = int(t[s, g])
            if words[x] is None:
                words[x] = words[s] + (i,)
                queue.append(x)
    return tuple(words)


def _transformation_monoid(alphabet: Alphabet, letter_maps, limit: int):
    """BFS over transformations generated by ``letter_maps`` (tuples over a state set).

    Returns the element list (transformations), the letter images and the
    multiplication table; s·t means "apply s, then t".
    """
    ident = tuple(range(len(letter_maps[0])))
    index = {ident: 0}
    elems = [ident]
    words: list[tuple[int, ...]] = [()]
    i = 0
    while i < len(elems):
        f = elems[i]
        for a, g in enumerate(letter_maps):
            h = tuple(g[q] for q in f)
            if h not in index:
                if len(elems) >= limit:
                    raise ResourceLimitError("monoid size", limit, len(elems) + 1)
                index[h] = len(elems)
                elems.append(h)
                words.append(words[i] + (a,))
        i += 1
    arr = np.array(elems, dtype=np.int64)
    n = len(elems)
    table = np.empty((n, n), dtype=np.int32)
    for s in range(n):
        # row u of prod is the composite "apply s, then u"
        prod = arr[:, arr[s]].tolist()
        table[s] = [index[tuple(row)] for row in prod]
    letter_image = tuple(index[tuple(g)] for g in letter_maps)
    return elems, letter_image, table, tuple(words)


def transition_monoid(d: Dfa, tag: str = "L", limit: int = DEFAULT_MONOID_LIMIT) -> Morphism:
    """Transition monoid of ``d``; the syntactic morphism when ``d`` is minimal."""
    maps = [tuple(d.delta[q][a] for q in range(d.size)) for a in range(len(d.alphabet))]
    elems, letters, table, words = _transformation_monoid(d.alphabet, maps, limit)
    accepting = frozenset(k for k, f in enumerate(elems) if f[d.initial] in d.finals)
    return Morphism(
        Monoid(table, 0, check=False),
        d.alphabet,
        letters,
        frozenset(range(len(elems))),
        {tag: accepting},
        words=words,
    )


def syntactic_morphism(d: Dfa, tag: str = "L", limit: int = DEFAULT_MONOID_LIMIT) -> Morphism:
    return transition_monoid(d.minimize(), tag, limit)


def joint_morphism(d1: Dfa, d2: Dfa, limit: int = DEFAULT_MONOID_LIMIT) -> Morphism:
    """Transition monoid of the parallel product, accepting tags ``L1`` and ``L2``."""
    if d1.alphabet != d2.alphabet:
        raise AlphabetError("alphabet mismatch")
    n1 = d1.size
    maps = []
    for a in range(len(d1.alphabet)):
        left = [d1.delta[q][a] for q in range(n1)]
        right = [d2.delta[q][a] + n1 for q in range(d2.size)]
        maps.append(tuple(left + right))
    elems, letters, table, words = _transformation_monoid(d1.alphabet, maps, limit)
    acc1 = frozenset(k for k, f in enumerate(elems) if f[d1.initial] in d1.finals)
    acc2 = frozenset(k for k, f in enumerate(elems) if f[n1 + d2.initial] - n1 in d2.finals)
    return Morphism(
        Monoid(table, 0, check=False),
        d1.alphabet,
        letters,
        frozenset(range(len(elems))),
        {"L1": acc1, "L2": acc2},
        words=words,
    )


def recognition_preorder(m: Morphism, tag: str) -> Preorder:
    """s <= t iff every context (x, y) putting s into the accepting set also puts t there.

    Computed through residuals: with R(z) = {y : zy accepted}, s <= t iff
    R(xs) is contained in R(xt) for every x.
    """
    if tag not in m.accepting:
        raise KeyError(f"unknown language tag {tag!r}")
    t = m.monoid.table
    n = m.size
    acc = np.zeros(n, dtype=bool)
    acc[list(m.accepting[tag])] = True
    img = np.array(sorted(m.image), dtype=np.int64)
    res = acc[t[:, img]].astype(np.float32)  # res[z, y] = zy accepted
    # incl[z, w]: no y with zy accepted and wy rejected
    incl = (res @ (1.0 - res).T) < 0.5
    rows = t[img]
    rel = np.empty((n, n), dtype=bool)
    for s in range(n):
        rel[s] = incl[rows[:, s][:, None], rows].all(axis=0)
    return Preorder(rel, m.monoid, check=False)


def is_alphabet_compatible(m: Morphism) -> bool:
    return _alph_assignment(m) is not None


def _alph_assignment(m: Morphism):
    """Letter content of each image element, or None if some element has two."""
    alph: dict[int, int] = {m.monoid.identity: 0}
    queue = deque([m.monoid.identity])
    t = m.monoid.table
    while queue:
        s = queue.popleft()
        for i, g in enumerate(m.letter_image):
            x = int(t[s, g])
            mask = alph[s] | 1 << i
            if x not in alph:
                alph[x] = mask
                queue.append(x)
            elif alph[x] != mask:
                return None
    return alph


def alphabet_completion(m: Morphism, limit: int = DEFAULT_MONOID_LIMIT) -> Morphism:
    """Pair each element with the letter set of its preimages.

    Returns ``m`` itself (with ``element_alph`` filled in) when ``m`` is
    already alphabet compatible.
    """
    if m.element_alph is not None:
        return m
    assignment = _alph_assignment(m)
    if assignment is not None and m.surjective:
        alph = tuple(assignment.get(s, 0) for s in range(m.size))
        return replace(m, element_alph=alph)
    t = m.monoid.table
    start = (m.monoid.identity, 0)
    index = {start: 0}
    pairs = [start]
    queue = deque([start])
    while queue:
        s, b = queue.popleft()
        for i, g in enumerate(m.letter_image):
            nxt = (int(t[s, g]), b | 1 << i)
            if nxt not in index:
                if len(pairs) >= limit:
                    raise ResourceLimitError("monoid size", limit, len(pairs) + 1)
                index[nxt] = len(pairs)
                pairs.append(nxt)
                queue.append(nxt)
    n = len(pairs)
    table = _completion_table(t, pairs, index, len(m.alphabet), m.size)
    letters = tuple(index[(g, 1 << i)] for i, g in enumerate(m.letter_image))
    accepting = {
        tag: frozenset(k for k, (s, _) in enumerate(pairs) if s in acc) for tag, acc in m.accepting.items()
    }
    return Morphism(
        Monoid(table, 0, check=False),
        m.alphabet,
        letters,
        frozenset(range(n)),
        accepting,
        element_alph=tuple(p[1] for p in pairs),
        pairs=tuple(pairs),
    )


def _completion_table(t, pairs, index, nletters, msize):
    n = len(pairs)
    base = np.array([p[0] for p in pairs], dtype=np.int64)
    prods = t[base[:, None], base[None, :]]
    if nletters <= 16 and msize << nletters <= 1 << 26:
        width = 1 << nletters
        masks = np.array([p[1] for p in pairs], dtype=np.int64)
        lookup = np.full(msize * width, -1, dtype=np.int32)
        lookup[base * width + masks] = np.arange(n, dtype=np.int32)
        return lookup[prods.astype(np.int64) * width + (masks[:, None] | masks[None, :])]
    # wide alphabets: letter masks do not fit a machine word
    table = np.empty((n, n), dtype=np.int32)
    for k, (_, b) in enumerate(pairs):
        row = prods[k]
        for j, (_, c) in enumerate(pairs):
            table[k, j] = index[(int(row[j]), b | c)]
    return table


def is_j_trivial(m: Monoid) -> bool:
    return j_equivalent_pair(m) is None


def two_sided_ideals(m: Monoid) -> list[int]:
    """Bitmask of MsM for each element s."""
    t = m.table
    out = []
    for s in range(m.size):
        ideal = np.unique(t[t[:, s]])
        out.append(sum(1 << int(x) for x in ideal))
    return out


def j_equivalent_pair(m: Monoid) -> tuple[int, int] | None:
    """Two distinct elements generating the same two-sided ideal, if any."""
    first: dict[int, int] = {}
    for s, ideal in enumerate(two_sided_ideals(m)):
        if ideal in first:
            return first[ideal], s
        first[ideal] = s
    return None


# -- .mon files --------------------------------------------------------------------


def parse_monoid(text: str) -> Morphism:
    """Read the monoid file format: size, identity, table rows, letter images, accepting sets."""
    lines = [(n, raw.split("#", 1)[0].strip()) for n, raw in enumerate(text.splitlines(), 1)]
    lines = [(n, s) for n, s in lines if s]
    size = identity = None
    rows: list[list[int]] = []
    letters: list[tuple[str, int]] = []
    accepting: dict[str, frozenset[int]] = {}
    i = 0
    while i < len(lines):
        n, line = lines[i]
        key, sep, value = line.partition(":")
        key = key.strip()
        try:
            if key == "size":
                size = int(value)
            elif key == "identity":
                identity = int(value)
            elif key == "table":
                if size is None:
                    raise ParseError("table before size", line=n)
                rows = []
                for _ in range(size):
                    i += 1
                    if i >= len(lines):
                        raise ParseError("table is truncated", line=n)
                    rows.append([int(x) for x in lines[i][1].split()])
            elif key == "letters":
                for item in value.split():
                    name, _, img = item.partition("=")
                    letters.append((name, int(img)))
            elif key.startswith("accept"):
                tag = key[len("accept") :].strip() or "L"
                accepting[tag] = frozenset(int(x) for x in value.split())
            else:
                raise ParseError(f"unknown directive {key!r}", line=n)
        except ValueError:
            raise ParseError("expected integers", line=n) from None
        i += 1
    if size is None or identity is None or not rows or not letters:
        raise ParseError("monoid file needs size, identity, table and letters")
    try:
        monoid = Monoid(rows, identity)
        alphabet = Alphabet(tuple(x for x, _ in letters))
        return Morphism(monoid, alphabet, tuple(g for _, g in letters), None, accepting)
    except (ValueError, AlphabetError) as e:
        raise ParseError(str(e)) from None
