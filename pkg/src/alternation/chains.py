"""Sigma_2 junctures and chains of an alphabet compatible morphism.

A juncture of length n is a root element together with a set of chains of
length n-1. Chain sets are stored as Python integers used as bitsets over
M^(n-1), where the chain (c_0, ..., c_{n-2}) has index sum(c_i * |M|^i).

The saturation keeps, for each root, only the maximal chain sets found so
far. That is enough because multiplication, idempotent powers and the
insertion operation are all monotone for inclusion of chain sets, so the
downset of the stored family is the least fixpoint.

Closure under product is computed by right-multiplying every stored juncture
by a generating set: the one-letter diagonal junctures (which generate the
diagonal junctures of every word) plus every maximal juncture produced by the
insertion operation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .algebra import Morphism
from .errors import ResourceLimitError

log = logging.getLogger(__name__)

DEFAULT_JUNCTURE_LIMIT = 10**6
DEFAULT_WITNESS_LIMIT = 10**5
_MAX_CHAIN_SPACE = 1 << 24

Chain = tuple[int, ...]


@dataclass(frozen=True)
class ChainSet:
    """All chains of one length; ``chains`` is a frozenset of tuples."""

    length: int
    chains: frozenset[Chain]

    def __contains__(self, chain):
        return tuple(chain) in self.chains

    def __iter__(self):
        return iter(sorted(self.chains))

    def __len__(self):
        return len(self.chains)


class _Codec:
    """Bitset encoding of sets of chains of a fixed length over a monoid."""

    def __init__(self, morphism: Morphism, length: int):
        self.k = morphism.size
        self.length = length
        self.space = self.k**length
        if self.space > _MAX_CHAIN_SPACE:
            raise ResourceLimitError("chain space |M|^(n-1)", _MAX_CHAIN_SPACE, self.space)
        self.table = morphism.monoid.table.astype(np.int64)
        self.weights = np.array([self.k**i for i in range(length)], dtype=np.int64)

    def index(self, chain: Sequence[int]) -> int:
        return int(sum(c * w for c, w in zip(chain, self.weights.tolist())))

    def chain(self, index: int) -> Chain:
        out = []
        for _ in range(self.length):
            index, c = divmod(index, self.k)
            out.append(c)
        return tuple(out)

    def indices(self, mask: int) -> np.ndarray:
        if not mask:
            return np.zeros(0, dtype=np.int64)
        raw = np.frombuffer(mask.to_bytes((mask.bit_length() + 7) // 8, "little"), dtype=np.uint8)
        return np.flatnonzero(np.unpackbits(raw, bitorder="little")).astype(np.int64)

    def mask(self, indices: np.ndarray) -> int:
        if len(indices) == 0:
            return 0
        bits = np.zeros(self.space, dtype=bool)
        bits[indices] = True
        return int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")

    def mask_of(self, chains: Iterable[Sequence[int]]) -> int:
        m = 0
        for c in chains:
            m |= 1 << self.index(c)
        return m

    def chains(self, mask: int) -> list[Chain]:
        return [self.chain(int(i)) for i in self.indices(mask)]

    def digits(self, indices: np.ndarray) -> np.ndarray:
        out = np.empty((len(indices), self.length), dtype=np.int64)
        rest = indices.copy()
        for i in range(self.length):
            rest, out[:, i] = np.divmod(rest, self.k)
        return out

    def product(self, left: int, right: int) -> int:
        """Componentwise product {s t : s in left, t in right}."""
        if self.length == 0:
            return left & right
        a = self.indices(left)
        b = self.indices(right)
        if len(a) == 0 or len(b) == 0:
            return 0
        if self.length == 1:
            return self.mask(self.table[a[:, None], b[None, :]].ravel())
        da = self.digits(a)
        db = self.digits(b)
        idx = np.zeros((len(a), len(b)), dtype=np.int64)
        for i in range(self.length):
            idx += self.table[da[:, i][:, None], db[:, i][None, :]] * self.weights[i]
        return self.mask(idx.ravel())


@dataclass(frozen=True)
class Juncture:
    root: int
    chains: frozenset[Chain]


@dataclass(frozen=True)
class _Entry:
    root: int
    mask: int
    derivation: tuple


class JunctureSet:
    """Junctures of one length, stored as per-root antichains of maximal chain sets.

    ``entries`` keeps every juncture ever recorded (with how it was obtained),
    including ones later subsumed; ``maximal`` maps each root to the ids of
    the currently maximal ones.
    """

    def __init__(self, morphism: Morphism, length: int, prev: "JunctureSet | None" = None):
        if length < 1:
            raise ValueError("juncture length must be at least 1")
        self.morphism = morphism
        self.length = length
        self.prev = prev
        self.codec = _Codec(morphism, length - 1)
        self.entries: list[_Entry] = []
        self.maximal: dict[int, list[int]] = {}

    # -- construction ---------------------------------------------------------

    def _covering(self, root: int, mask: int) -> int | None:
        for jid in self.maximal.get(root, ()):
            if mask & ~self.entries[jid].mask == 0:
                return jid
        return None

    def add(self, root: int, mask: int, derivation: tuple) -> int | None:
        """Record a juncture unless already covered; returns its id when new."""
        if self._covering(root, mask) is not None:
            return None
        bucket = self.maximal.setdefault(root, [])
        bucket[:] = [j for j in bucket if self.entries[j].mask & ~mask != 0]
        jid = len(self.entries)
        self.entries.append(_Entry(root, mask, derivation))
        bucket.append(jid)
        return jid

    def copy(self) -> "JunctureSet":
        out = JunctureSet(self.morphism, self.length, self.prev)
        out.entries = list(self.entries)
        out.maximal = {r: list(ids) for r, ids in self.maximal.items()}
        return out

    # -- queries ----------------------------------------------------------------

    def maximal_ids(self) -> list[int]:
        return [j for r in sorted(self.maximal) for j in self.maximal[r]]

    def __len__(self):
        return sum(len(v) for v in self.maximal.values())

    def juncture(self, jid: int) -> Juncture:
        e = self.entries[jid]
        return Juncture(e.root, frozenset(self.codec.chains(e.mask)))

    def maximal_junctures(self) -> list[Juncture]:
        return [self.juncture(j) for j in self.maximal_ids()]

    def contains(self, root: int, chains: Iterable[Sequence[int]]) -> bool:
        """Membership in the downset of the stored family."""
        return self._covering(root, self.codec.mask_of(chains)) is not None

    def derivation(self, jid: int) -> tuple:
        return self.entries[jid].derivation

    def find(self, chain: Sequence[int]) -> int | None:
        """Earliest recorded juncture containing ``chain`` (root first, then the rest)."""
        chain = tuple(chain)
        if len(chain) != self.length:
            raise ValueError(f"chain of length {len(chain)} in a length-{self.length} set")
        bit = 1 << self.codec.index(chain[1:])
        for jid, e in enumerate(self.entries):
            if e.root == chain[0] and e.mask & bit:
                return jid
        return None

    def chains(self) -> ChainSet:
        return chains_of_length(self)

    def mul(self, a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
        t = self.morphism.monoid.table
        return int(t[a[0], b[0]]), self.codec.product(a[1], b[1])

    def omega_exponent(self, root: int, mask: int) -> tuple[int, tuple[int, int]]:
        """Smallest p >= 1 with (root, mask)^p idempotent, and that idempotent."""
        x = (root, mask)
        powers = [x]
        seen = {x: 1}
        while True:
            nxt = self.mul(powers[-1], x)
            if nxt in seen:
                break
            seen[nxt] = len(powers) + 1
            powers.append(nxt)
        start = seen[nxt]
        period = len(powers) + 1 - start
        p = max(1, -(-start // period)) * period
        return p, powers[p - 1]


# -- operations -----------------------------------------------------------------


def initial_junctures(m: Morphism, n: int) -> JunctureSet:
    """The diagonal junctures (s, {(s, ..., s)}) for every s in the image."""
    js = JunctureSet(m, n)
    for s in sorted(m.image):
        js.add(s, 1 << js.codec.index((s,) * (n - 1)), ("initial",))
    return js


def _insertion_sets(m: Morphism, prev_chains: ChainSet, codec: _Codec) -> dict[int, int]:
    """For each letter mask B, the chains of ``prev_chains`` whose first element has alphabet B."""
    out: dict[int, int] = {}
    for c in prev_chains.chains:
        b = m.element_alph[c[0]]
        out[b] = out.get(b, 0) | 1 << codec.index(c)
    return out


def saturate(
    base: JunctureSet,
    prev_chains: ChainSet | None,
    m: Morphism,
    generators: Sequence[tuple[int, int]] | None = None,
    limit: int = DEFAULT_JUNCTURE_LIMIT,
    stop: Callable[[JunctureSet], bool] | None = None,
) -> JunctureSet:
    """Least set containing ``base`` closed under downset, product and insertion.

    The insertion operation maps (s, S) to (s, S)^w (1, T) (s, S)^w where T
    holds the chains of ``prev_chains`` whose first element has the alphabet
    of s. ``generators`` must generate ``base`` under product together with
    the base itself; by default every base juncture is a generator. ``stop``
    is polled after each processed juncture; when it returns True the partial
    (still sound) set is returned.
    """
    if m.element_alph is None:
        raise ValueError("saturation needs an alphabet compatible morphism")
    n = base.length
    if n == 1:
        return base.copy()
    if prev_chains is None or prev_chains.length != n - 1:
        raise ValueError(f"saturation at length {n} needs the chains of length {n - 1}")
    js = base.copy()
    codec = js.codec
    table = m.monoid.table
    identity = m.monoid.identity
    insert = _insertion_sets(m, prev_chains, codec)

    gens: list[int] = []
    if generators is None:
        gens = js.maximal_ids()
    else:
        for root, mask in generators:
            jid = js._covering(root, mask)
            if jid is None:
                jid = js.add(root, mask, ("initial",))
            gens.append(jid)

    queue = list(js.maximal_ids())
    head = 0
    alive = lambda jid: jid in js.maximal.get(js.entries[jid].root, ())  # noqa: E731

    def record(root, mask, derivation):
        jid = js.add(root, mask, derivation)
        if jid is not None:
            if len(js.entries) > limit:
                raise ResourceLimitError("stored junctures", limit, len(js.entries))
            queue.append(jid)
        return jid

    while head < len(queue):
        xid = queue[head]
        head += 1
        if not alive(xid):
            continue
        x = js.entries[xid]
        for gid in list(gens):
            g = js.entries[gid]
            record(int(table[x.root, g.root]), codec.product(x.mask, g.mask), ("product", xid, gid))
            if not alive(xid):
                break
        if not alive(xid):
            continue
        # insertion: (s,S)^w . (1,T) . (s,S)^w
        _, (er, emask) = js.omega_exponent(x.root, x.mask)
        tmask = insert.get(m.element_alph[x.root], 0)
        mid = codec.product(codec.product(emask, tmask), emask)
        root = int(table[table[er, identity], er])
        new = record(root, mid, ("op3", xid))
        if new is not None:
            gens.append(new)
            for yid in js.maximal_ids():
                if yid == new:
                    continue
                y = js.entries[yid]
                record(int(table[y.root, root]), codec.product(y.mask, mid), ("product", yid, new))
        if stop is not None and stop(js):
            log.debug("saturation stopped early after %d junctures", len(js.entries))
            break
    return js


def letter_generators(m: Morphism, n: int, codec: _Codec | None = None) -> list[tuple[int, int]]:
    codec = codec or _Codec(m, n - 1)
    return [(g, 1 << codec.index((g,) * (n - 1))) for g in m.letter_image]


def junctures(
    m: Morphism,
    n: int,
    prev: JunctureSet | None = None,
    limit: int = DEFAULT_JUNCTURE_LIMIT,
    stop: Callable[[JunctureSet], bool] | None = None,
) -> JunctureSet:
    """Sigma_2 junctures of length ``n``, given those of length ``n - 1``."""
    base = initial_junctures(m, n)
    if n == 1:
        return base
    if prev is None or prev.length != n - 1:
        raise ValueError(f"need the junctures of length {n - 1}")
    out = saturate(
        base, chains_of_length(prev), m, letter_generators(m, n, base.codec), limit=limit, stop=stop
    )
    out.prev = prev
    return out


def all_junctures(m: Morphism, n_max: int, limit: int = DEFAULT_JUNCTURE_LIMIT) -> list[JunctureSet]:
    """Junctures of every length 1..n_max, each level built from the previous one."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    levels = [initial_junctures(m, 1)]
    for n in range(2, n_max + 1):
        levels.append(junctures(m, n, levels[-1], limit=limit))
    return levels


def chains_of_length(js: JunctureSet) -> ChainSet:
    """Chains (s_1, ..., s_n) such that (s_1, {(s_2, ..., s_n)}) is a stored juncture or below one."""
    out = set()
    for jid in js.maximal_ids():
        e = js.entries[jid]
        for c in js.codec.chains(e.mask):
            out.add((e.root,) + c)
    return ChainSet(js.length, frozenset(out))


def project_chains(chains: ChainSet, completion: Morphism) -> ChainSet:
    """Forget the letter-set component of every chain element."""
    if completion.pairs is None:
        return chains
    pairs = completion.pairs
    return ChainSet(chains.length, frozenset(tuple(pairs[s][0] for s in c) for c in chains.chains))


def alternation(chain: Sequence[int]) -> int:
    """Number of adjacent positions holding different elements."""
    return sum(1 for a, b in zip(chain, chain[1:]) if a != b)


def rank_bound(n: int, msize: int) -> int:
    """Quantifier rank sufficient for junctures of length n: 9 n |M|^2 2^(|M|^(n-1))."""
    if n < 1 or msize < 1:
        raise ValueError("n and msize must be positive")
    return 9 * n * msize**2 * 2 ** (msize ** (n - 1))


# -- witnesses ---------------------------------------------------------------------


class _Synth:
    def __init__(self, js: JunctureSet, k: int, limit: int):
        self.js = js
        self.k = k
        self.limit = limit
        self.roots: dict[int, tuple[int, ...]] = {}
        self.branches: dict[tuple[int, Chain], list[tuple[int, ...]]] = {}
        self.factorings: dict[int, list[dict]] = {}

    def check(self, word):
        if len(word) > self.limit:
            raise ResourceLimitError("witness length", self.limit, len(word))
        return word

    def exponent(self, xid: int) -> int:
        e = self.js.entries[xid]
        p, _ = self.js.omega_exponent(e.root, e.mask)
        return p * 4**self.k

    def root(self, jid: int) -> tuple[int, ...]:
        if jid in self.roots:
            return self.roots[jid]
        e = self.js.entries[jid]
        d = e.derivation
        if d[0] == "initial":
            w = self.js.morphism.shortest_word(e.root)
        elif d[0] == "product":
            w = self.root(d[1]) + self.root(d[2])
        else:
            h = self.exponent(d[1])
            w = self.check(self.root(d[1]) * (2 * h))
        self.roots[jid] = w
        return w

    def branch(self, jid: int, chain: Chain) -> list[tuple[int, ...]]:
        """Words for the chain elements below the root of juncture ``jid``."""
        key = (jid, chain)
        if key in self.branches:
            return self.branches[key]
        js = self.js
        e = js.entries[jid]
        d = e.derivation
        codec = js.codec
        if d[0] == "initial":
            w = self.root(jid)
            out = [w] * len(chain)
        elif d[0] == "product":
            a, b = js.entries[d[1]], js.entries[d[2]]
            out = None
            for c1 in codec.chains(a.mask):
                for c2 in codec.chains(b.mask):
                    if _cmul(js, c1, c2) == chain:
                        left = self.branch(d[1], c1)
                        right = self.branch(d[2], c2)
                        out = [self.check(x + y) for x, y in zip(left, right)]
                        break
                if out is not None:
                    break
            if out is None:
                raise AssertionError("product derivation does not produce the chain")
        else:
            out = self._insert_branch(jid, d[1], chain)
        self.branches[key] = out
        return out

    def _powers(self, xid: int, h: int) -> list[dict]:
        """Layer i maps each chain of S^(i+1) to (chain of S^i, factor in S)."""
        cached = self.factorings.get(xid)
        if cached is not None and len(cached) >= h:
            return cached
        js = self.js
        s_chains = js.codec.chains(js.entries[xid].mask)
        layers = [{c: (None, c) for c in s_chains}]
        while len(layers) < h:
            prev = layers[-1]
            nxt = {}
            for c in prev:
                for f in s_chains:
                    p = _cmul(js, c, f)
                    if p not in nxt:
                        nxt[p] = (c, f)
            layers.append(nxt)
        self.factorings[xid] = layers
        return layers

    def _factor(self, xid: int, h: int, chain: Chain) -> list[Chain]:
        layers = self._powers(xid, h)
        out = []
        c = chain
        for i in range(h - 1, -1, -1):
            prev, f = layers[i][c]
            out.append(f)
            c = prev
        out.reverse()
        return out

    def _concat_power(self, xid: int, factors: list[Chain]) -> list[tuple[int, ...]]:
        width = len(factors[0])
        words = [()] * width
        for f in factors:
            part = self.branch(xid, f)
            words = [self.check(w + p) for w, p in zip(words, part)]
        return words

    def _insert_branch(self, jid: int, xid: int, chain: Chain) -> list[tuple[int, ...]]:
        js = self.js
        m = js.morphism
        h = self.exponent(xid)
        x = js.entries[xid]
        layers = self._powers(xid, h)
        power = layers[h - 1]
        b = m.element_alph[x.root]
        prev_chains = [c for c in chains_of_length(js.prev).chains if m.element_alph[c[0]] == b]
        # find s' t s'' == chain with s', s'' in S^h and t in T
        left_products: dict[Chain, tuple[Chain, Chain]] = {}
        for s1 in sorted(power):
            for t in sorted(prev_chains):
                left_products.setdefault(_cmul(js, s1, t), (s1, t))
        found = None
        for lt in sorted(left_products):
            for s2 in sorted(power):
                if _cmul(js, lt, s2) == chain:
                    found = left_products[lt] + (s2,)
                    break
            if found:
                break
        if found is None:
            raise AssertionError("insertion derivation does not produce the chain")
        s1, t, s2 = found
        left = self._concat_power(xid, self._factor(xid, h, s1))
        right = self._concat_power(xid, self._factor(xid, h, s2))
        middle = synthesize_witness(js.prev, t, self.k, self.limit)
        return [self.check(u + v + w) for u, v, w in zip(left, middle, right)]


def _cmul(js: JunctureSet, a: Chain, b: Chain) -> Chain:
    t = js.morphism.monoid.table
    return tuple(int(t[x, y]) for x, y in zip(a, b))


def synthesize_witness(
    js: JunctureSet, target: Sequence[int], k: int = 1, limit: int = DEFAULT_WITNESS_LIMIT
) -> list[tuple[int, ...]]:
    """Words w_1, ..., w_n mapped to ``target`` with w_1 <= w_2 <= ... for the rank-k Sigma_2 preorder.

    Words are tuples of letter indices. The construction follows the recorded
    derivation of the earliest juncture containing the chain.
    """
    if k < 1:
        raise ValueError("rank must be at least 1")
    target = tuple(target)
    jid = js.find(target)
    if jid is None:
        raise KeyError(f"chain {target} is not a computed chain")
    synth = _Synth(js, k, limit)
    return [synth.root(jid)] + synth.branch(jid, target[1:])
