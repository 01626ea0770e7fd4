"""Alphabets, regular expressions and complete DFAs.

Every automaton handed to the rest of the package is a complete DFA whose
states are numbered breadth-first from the initial state (letters visited in
alphabet order), so two equal minimal DFAs are equal as Python values.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import AlphabetError, ParseError

_SYMBOL = re.compile(r"[A-Za-z0-9][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite set of letter symbols.

    Letters typed by users are single ASCII letters or digits. Longer
    symbols (``l0_1`` and friends) only appear in generated alphabets such as
    the well-formed word alphabet.
    """

    letters: tuple[str, ...]
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        letters = tuple(self.letters)
        object.__setattr__(self, "letters", letters)
        if not letters:
            raise AlphabetError("alphabet must be nonempty")
        if len(set(letters)) != len(letters):
            raise AlphabetError(f"duplicate letters in alphabet {letters}")
        for x in letters:
            if not isinstance(x, str) or not _SYMBOL.match(x):
                raise AlphabetError(f"invalid letter {x!r}")
        object.__setattr__(self, "_index", {x: i for i, x in enumerate(letters)})

    @classmethod
    def of(cls, letters: str | Iterable[str]) -> "Alphabet":
        if isinstance(letters, str):
            letters = letters.split() if " " in letters else list(letters)
        return cls(tuple(letters))

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __contains__(self, letter):
        return letter in self._index

    def __str__(self):
        return " ".join(self.letters)

    @property
    def single_char(self) -> bool:
        return all(len(x) == 1 for x in self.letters)

    def index(self, letter: str) -> int:
        try:
            return self._index[letter]
        except KeyError:
            raise AlphabetError(f"letter {letter!r} not in alphabet {{{', '.join(self.letters)}}}") from None

    def encode(self, word: str | Sequence[str]) -> tuple[int, ...]:
        """Turn a word (string or sequence of symbols) into letter indices."""
        if isinstance(word, str) and not self.single_char:
            word = word.split()
        return tuple(self.index(x) for x in word)

    def decode(self, word: Sequence[int]) -> str:
        sep = "" if self.single_char else " "
        return sep.join(self.letters[i] for i in word)


def word_alphabet(word: Iterable[str]) -> frozenset[str]:
    """The set of letters occurring in ``word``."""
    return frozenset(word)


# -- regular expressions ----------------------------------------------------


@dataclass(frozen=True)
class EmptySet:
    def __str__(self):
        return "%0"


@dataclass(frozen=True)
class EmptyWord:
    def __str__(self):
        return "%e"


@dataclass(frozen=True)
class Letter:
    letter: str

    def __str__(self):
        return self.letter


@dataclass(frozen=True)
class Union:
    left: "Regex"
    right: "Regex"

    def __str__(self):
        return f"{self.left}|{self.right}"


@dataclass(frozen=True)
class Concat:
    left: "Regex"
    right: "Regex"

    def __str__(self):
        return f"{_wrap(self.left, Union)}{_wrap(self.right, Union)}"


@dataclass(frozen=True)
class Star:
    child: "Regex"

    def __str__(self):
        return f"{_wrap(self.child, Union, Concat)}*"


Regex = EmptySet | EmptyWord | Letter | Union | Concat | Star


def _wrap(node, *loose):
    return f"({node})" if isinstance(node, loose) else str(node)


class _Parser:
    def __init__(self, text: str, alphabet: Alphabet):
        self.text = text
        self.alphabet = alphabet
        self.pos = 0

    def peek(self):
        return self.text[self.pos] if self.pos < len(self.text) else None

    def parse(self):
        if not self.text:
            raise ParseError("empty regular expression", offset=0)
        node = self.expr()
        if self.pos != len(self.text):
            ch = self.text[self.pos]
            if ch == ")":
                raise ParseError("unbalanced parenthesis", offset=self.pos)
            raise ParseError(f"unexpected {ch!r}", offset=self.pos)
        return node

    def expr(self):
        node = self.cat()
        while self.peek() == "|":
            self.pos += 1
            node = Union(node, self.cat())
        return node

    def cat(self):
        node = self.rep()
        while self.peek() is not None and self.peek() not in "|)":
            node = Concat(node, self.rep())
        return node

    def rep(self):
        node = self.atom()
        while self.peek() == "*":
            self.pos += 1
            if not isinstance(node, Star):
                node = Star(node)
        return node

    def atom(self):
        ch = self.peek()
        start = self.pos
        if ch is None:
            raise ParseError("unexpected end of expression", offset=self.pos)
        if ch == "(":
            self.pos += 1
            node = self.expr()
            if self.peek() != ")":
                raise ParseError("unbalanced parenthesis", offset=self.pos)
            self.pos += 1
            return node
        if ch == "%":
            code = self.text[self.pos + 1 : self.pos + 2]
            if code == "e":
                self.pos += 2
                return EmptyWord()
            if code == "0":
                self.pos += 2
                return EmptySet()
            raise ParseError("expected %e or %0", offset=start)
        if ch.isascii() and ch.isalnum():
            if ch not in self.alphabet:
                raise ParseError(f"letter {ch!r} not in alphabet", offset=start)
            self.pos += 1
            return Letter(ch)
        raise ParseError(f"unexpected {ch!r}", offset=start)


def parse_regex(text: str, alphabet: Alphabet) -> Regex:
    """Parse ``text`` with the usual precedence: star, then concatenation, then union.

    ``%e`` denotes the empty word and ``%0`` the empty language. Binary
    operators associate to the left.
    """
    if not alphabet.single_char:
        raise AlphabetError("regular expressions need single-character letters")
    return _Parser(text, alphabet).parse()


# -- automata -----------------------------------------------------------------


@dataclass(frozen=True)
class Dfa:
    """Complete deterministic automaton; ``delta[q][i]`` is the target of letter ``i``."""

    alphabet: Alphabet
    delta: tuple[tuple[int, ...], ...]
    initial: int
    finals: frozenset[int]

    def __post_init__(self):
        delta = tuple(tuple(row) for row in self.delta)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "finals", frozenset(self.finals))
        n = len(delta)
        if n == 0:
            raise ValueError("a DFA needs at least one state")
        if not 0 <= self.initial < n:
            raise ValueError(f"initial state {self.initial} out of range")
        for q in self.finals:
            if not 0 <= q < n:
                raise ValueError(f"final state {q} out of range")
        k = len(self.alphabet)
        for q, row in enumerate(delta):
            if len(row) != k:
                raise ValueError(f"state {q} has {len(row)} transitions, expected {k}")
            for p in row:
                if not 0 <= p < n:
                    raise ValueError(f"transition target {p} out of range")

    @property
    def size(self) -> int:
        return len(self.delta)

    def run(self, word: Sequence[int], start: int | None = None) -> int:
        q = self.initial if start is None else start
        for i in word:
            q = self.delta[q][i]
        return q

    def accepts(self, word: str | Sequence[str]) -> bool:
        return self.run(self.alphabet.encode(word)) in self.finals

    def accepts_indices(self, word: Sequence[int]) -> bool:
        return self.run(word) in self.finals

    def complement(self) -> "Dfa":
        return Dfa(self.alphabet, self.delta, self.initial, frozenset(range(self.size)) - self.finals)

    def reachable(self) -> list[int]:
        """States reachable from the initial state, in canonical BFS order."""
        seen = {self.initial}
        order = [self.initial]
        queue = deque(order)
        while queue:
            q = queue.popleft()
            for p in self.delta[q]:
                if p not in seen:
                    seen.add(p)
                    order.append(p)
                    queue.append(p)
        return order

    def canonical(self) -> "Dfa":
        """Restrict to reachable states and renumber them in BFS order."""
        order = self.reachable()
        rename = {q: i for i, q in enumerate(order)}
        delta = tuple(tuple(rename[p] for p in self.delta[q]) for q in order)
        finals = frozenset(rename[q] for q in order if q in self.finals)
        return Dfa(self.alphabet, delta, 0, finals)

    def minimize(self) -> "Dfa":
        """Moore partition refinement followed by canonical renumbering."""
        d = self.canonical()
        block = [1 if q in d.finals else 0 for q in range(d.size)]
        count = len(set(block))
        while True:
            sigs = {}
            new = []
            for q in range(d.size):
                sig = (block[q],) + tuple(block[p] for p in d.delta[q])
                new.append(sigs.setdefault(sig, len(sigs)))
            stable = len(sigs) == count
            block, count = new, len(sigs)
            if stable:
                break
        delta = [None] * count
        for q in range(d.size):
            if delta[block[q]] is None:
                delta[block[q]] = tuple(block[p] for p in d.delta[q])
        finals = frozenset(block[q] for q in d.finals)
        return Dfa(d.alphabet, tuple(delta), block[0], finals).canonical()

    def is_empty(self) -> bool:
        return not any(q in self.finals for q in self.reachable())

    def is_universal(self) -> bool:
        return all(q in self.finals for q in self.reachable())

    def product(self, other: "Dfa", combine) -> "Dfa":
        """Synchronous product; a pair is final when ``combine(f1, f2)`` holds."""
        if self.alphabet != other.alphabet:
            raise AlphabetError("alphabet mismatch")
        start = (self.initial, other.initial)
        index = {start: 0}
        order = [start]
        rows = []
        i = 0
        while i < len(order):
            p, q = order[i]
            row = []
            for a in range(len(self.alphabet)):
                nxt = (self.delta[p][a], other.delta[q][a])
                if nxt not in index:
                    index[nxt] = len(order)
                    order.append(nxt)
                row.append(index[nxt])
            rows.append(tuple(row))
            i += 1
        finals = frozenset(
            index[(p, q)] for p, q in order if combine(p in self.finals, q in other.finals)
        )
        return Dfa(self.alphabet, tuple(rows), 0, finals)

    @classmethod
    def universal(cls, alphabet: Alphabet) -> "Dfa":
        return cls(alphabet, ((0,) * len(alphabet),), 0, frozenset({0}))

    @classmethod
    def empty(cls, alphabet: Alphabet) -> "Dfa":
        return cls(alphabet, ((0,) * len(alphabet),), 0, frozenset())


def complement(d: Dfa) -> Dfa:
    return d.complement()


def accepts(d: Dfa, word: str | Sequence[str]) -> bool:
    return d.accepts(word)


def _thompson(ast: Regex, alphabet: Alphabet):
    """Epsilon-NFA as (start, end, edges) with edges[q] = list of (label|None, target)."""
    edges: list[list] = []

    def new():
        edges.append([])
        return len(edges) - 1

    def build(node):
        s, t = new(), new()
        if isinstance(node, EmptySet):
            pass
        elif isinstance(node, EmptyWord):
            edges[s].append((None, t))
        elif isinstance(node, Letter):
            edges[s].append((alphabet.index(node.letter), t))
        elif isinstance(node, Union):
            for child in (node.left, node.right):
                cs, ct = build(child)
                edges[s].append((None, cs))
                edges[ct].append((None, t))
        elif isinstance(node, Concat):
            ls, lt = build(node.left)
            rs, rt = build(node.right)
            edges[s].append((None, ls))
            edges[lt].append((None, rs))
            edges[rt].append((None, t))
        elif isinstance(node, Star):
            cs, ct = build(node.child)
            edges[s].append((None, cs))
            edges[s].append((None, t))
            edges[ct].append((None, cs))
            edges[ct].append((None, t))
        else:
            raise TypeError(f"not a regex node: {node!r}")
        return s, t

    start, end = build(ast)
    return start, end, edges


def regex_to_dfa(ast: Regex, alphabet: Alphabet) -> Dfa:
    """Minimal complete DFA of the language denoted by ``ast``."""
    start, end, edges = _thompson(ast, alphabet)

    def closure(states):
        stack = list(states)
        seen = set(states)
        while stack:
            q = stack.pop()
            for label, p in edges[q]:
                if label is None and p not in seen:
                    seen.add(p)
                    stack.append(p)
        return frozenset(seen)

    first = closure([start])
    index = {first: 0}
    order = [first]
    rows = []
    i = 0
    while i < len(order):
        current = order[i]
        row = []
        for a in range(len(alphabet)):
            moved = {p for q in current for label, p in edges[q] if label == a}
            nxt = closure(moved)
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            row.append(index[nxt])
        rows.append(tuple(row))
        i += 1
    finals = frozenset(i for i, states in enumerate(order) if end in states)
    return Dfa(alphabet, tuple(rows), 0, finals).minimize()


def compile_regex(text: str, alphabet: Alphabet | str) -> Dfa:
    if not isinstance(alphabet, Alphabet):
        alphabet = Alphabet.of(alphabet)
    return regex_to_dfa(parse_regex(text, alphabet), alphabet)


# -- .lang files ------------------------------------------------------------------


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_lang(text: str) -> Dfa:
    """Read the line-oriented language format (alphabet, then regex or DFA block).

    The result is always minimized.
    """
    lines = [(n, _strip_comment(raw)) for n, raw in enumerate(text.splitlines(), 1)]
    lines = [(n, s) for n, s in lines if s]
    if not lines:
        raise ParseError("missing 'alphabet:' line", line=1)
    n, first = lines[0]
    key, _, value = first.partition(":")
    if key.strip() != "alphabet" or not _:
        raise ParseError("first line must be 'alphabet: ...'", line=n)
    try:
        alphabet = Alphabet(tuple(value.split()))
    except AlphabetError as e:
        raise ParseError(str(e), line=n) from None
    rest = lines[1:]
    if not rest:
        raise ParseError("expected 'regex:' or a DFA block", line=n + 1)
    n, second = rest[0]
    key, _, value = second.partition(":")
    key = key.strip()
    if key == "regex":
        if len(rest) > 1:
            raise ParseError("unexpected content after regex", line=rest[1][0])
        try:
            ast = parse_regex(value.strip(), alphabet)
        except ParseError as e:
            raise ParseError(f"regex: {e}", line=n) from None
        except AlphabetError as e:
            raise ParseError(str(e), line=n) from None
        return regex_to_dfa(ast, alphabet)
    if key == "states":
        return _parse_dfa_block(alphabet, rest)
    raise ParseError(f"unknown directive {key!r}", line=n)


def _parse_dfa_block(alphabet: Alphabet, lines) -> Dfa:
    size = initial = None
    finals: set[int] = set()
    trans: dict[tuple[int, int], int] = {}

    def ints(tokens, n):
        try:
            return [int(t) for t in tokens]
        except ValueError:
            raise ParseError("expected state numbers", line=n) from None

    for n, line in lines:
        key, sep, value = line.partition(":")
        key = key.strip()
        if not sep:
            raise ParseError(f"malformed line {line!r}", line=n)
        tokens = value.split()
        if key == "states":
            (size,) = ints(tokens, n) if len(tokens) == 1 else (None,)
            if size is None or size < 1:
                raise ParseError("states: expects one positive integer", line=n)
        elif key == "initial":
            if len(tokens) != 1:
                raise ParseError("initial: expects one state", line=n)
            (initial,) = ints(tokens, n)
        elif key == "final":
            finals.update(ints(tokens, n))
        elif key == "trans":
            if len(tokens) != 3:
                raise ParseError("trans: expects 'q letter q2'", line=n)
            q, p = ints([tokens[0], tokens[2]], n)
            if tokens[1] not in alphabet:
                raise ParseError(f"letter {tokens[1]!r} not in alphabet", line=n)
            a = alphabet.index(tokens[1])
            if (q, a) in trans:
                raise ParseError(f"duplicate transition for ({q}, {tokens[1]})", line=n)
            trans[q, a] = p
        else:
            raise ParseError(f"unknown directive {key!r}", line=n)
    if size is None or initial is None:
        raise ParseError("DFA block needs 'states:' and 'initial:'")
    for q in [initial, *finals]:
        if not 0 <= q < size:
            raise ParseError(f"state {q} out of range")
    delta = []
    for q in range(size):
        row = []
        for a in range(len(alphabet)):
            if (q, a) not in trans:
                raise ParseError(f"transition function not total: missing ({q}, {alphabet.letters[a]})")
            p = trans[q, a]
            if not 0 <= p < size:
                raise ParseError(f"state {p} out of range")
            row.append(p)
        delta.append(tuple(row))
    for q, _a in trans:
        if not 0 <= q < size:
            raise ParseError(f"state {q} out of range")
    return Dfa(alphabet, tuple(delta), initial, frozenset(finals)).minimize()


def load_lang(path) -> Dfa:
    with open(path, encoding="utf-8") as fh:
        return parse_lang(fh.read())


def format_lang(d: Dfa) -> str:
    """Render ``d`` as a DFA block in the language file format."""
    out = ["# fmt 1", f"alphabet: {d.alphabet}", f"states: {d.size}", f"initial: {d.initial}"]
    out.append("final: " + " ".join(str(q) for q in sorted(d.finals)))
    for q, row in enumerate(d.delta):
        for a, p in enumerate(row):
            out.append(f"trans: {q} {d.alphabet.letters[a]} {p}")
    return "\n".join(out) + "\n"
