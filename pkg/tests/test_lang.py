import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alternation.errors import AlphabetError, ParseError
from alternation.lang import (
    Alphabet,
    Concat,
    Dfa,
    EmptySet,
    EmptyWord,
    Letter,
    Star,
    Union,
    accepts,
    compile_regex,
    complement,
    format_lang,
    parse_lang,
    parse_regex,
    regex_to_dfa,
    word_alphabet,
)
from support import AB, brute_state_count, words


def test_parse_star_of_concat():
    assert parse_regex("(ab)*", AB) == Star(Concat(Letter("a"), Letter("b")))


def test_parse_empty_word():
    assert parse_regex("%e", Alphabet.of("a")) == EmptyWord()
    assert parse_regex("%0", Alphabet.of("a")) == EmptySet()


def test_precedence_and_left_associativity():
    assert parse_regex("a|b|ab*", AB) == Union(Union(Letter("a"), Letter("b")), Concat(Letter("a"), Star(Letter("b"))))


def test_unbalanced_parenthesis_offset():
    with pytest.raises(ParseError, match="unbalanced parenthesis") as e:
        parse_regex("a|(bc", Alphabet.of("abc"))
    # the missing ")" is detected at the end of the text
    assert e.value.offset == 5


@pytest.mark.parametrize("text", ["", "a|", "(", "*a", "a)", "%x"])
def test_syntax_errors(text):
    with pytest.raises(ParseError):
        parse_regex(text, AB)


def test_letter_outside_alphabet():
    with pytest.raises(ParseError, match="not in alphabet"):
        parse_regex("ac", AB)
    with pytest.raises(AlphabetError):
        accepts(compile_regex("a", AB), "c")


def test_star_of_concat_dfa():
    d = compile_regex("(ab)*", AB)
    assert d.size == 3
    assert d.size == brute_state_count(d.accepts, "ab", 6)
    assert d.minimize() == d


def test_empty_word_dfa():
    d = compile_regex("%e", Alphabet.of("a"))
    assert d.size == 2 and d.initial in d.finals


def test_letter_dfa():
    d = compile_regex("a", AB)
    assert d.size == 3
    assert d.size == brute_state_count(d.accepts, "ab", 6)


def test_complement_examples():
    b_star = compile_regex("b*", AB)
    c = complement(b_star)
    assert c.accepts("a") and c.accepts("ba")
    assert not c.accepts("") and not c.accepts("bb")
    assert complement(c) == b_star
    assert complement(Dfa.universal(AB)).is_empty()


def test_accepts_examples():
    d = compile_regex("(ab)*", AB)
    assert accepts(d, "abab")
    assert not accepts(d, "aba")
    assert accepts(d, "")


def test_word_alphabet():
    assert word_alphabet("abba") == {"a", "b"}
    assert word_alphabet("") == frozenset()
    assert word_alphabet("aaa") == {"a"}


def test_lang_file_roundtrip():
    d = compile_regex("(a(ab)*b)*", AB)
    assert parse_lang(format_lang(d)) == d
    text = "# fmt 1\nalphabet: a b\nregex: (ab)*  # comment\n"
    assert parse_lang(text) == compile_regex("(ab)*", AB)


def test_lang_dfa_block():
    text = "alphabet: a b\nstates: 2\ninitial: 0\nfinal: 1\ntrans: 0 a 1\ntrans: 0 b 0\ntrans: 1 a 1\ntrans: 1 b 1\n"
    assert parse_lang(text) == compile_regex("(a|b)*a(a|b)*", AB)


@pytest.mark.parametrize(
    "text",
    [
        "regex: ab",
        "alphabet: a b\n",
        "alphabet: a b\nstates: 2\ninitial: 0\nfinal: 1\ntrans: 0 a 1\n",
        "alphabet: a a\nregex: a",
    ],
)
def test_lang_file_errors(text):
    with pytest.raises((ParseError, AlphabetError)):
        parse_lang(text)


def test_alphabet_is_explicit():
    over_b = compile_regex("b*", Alphabet.of("b"))
    over_ab = compile_regex("b*", AB)
    assert over_b.is_universal() and not over_ab.is_universal()


# -- properties -------------------------------------------------------------------


def _regexes():
    leaves = st.sampled_from([Letter("a"), Letter("b"), EmptyWord(), EmptySet()])
    return st.recursive(
        leaves,
        lambda inner: st.one_of(
            st.builds(Union, inner, inner), st.builds(Concat, inner, inner), st.builds(Star, inner)
        ),
        max_leaves=8,
    )


def _matches(node, w: str) -> bool:
    """Direct interpretation of the syntax tree."""
    if isinstance(node, EmptySet):
        return False
    if isinstance(node, EmptyWord):
        return w == ""
    if isinstance(node, Letter):
        return w == node.letter
    if isinstance(node, Union):
        return _matches(node.left, w) or _matches(node.right, w)
    if isinstance(node, Concat):
        return any(_matches(node.left, w[:i]) and _matches(node.right, w[i:]) for i in range(len(w) + 1))
    if w == "":
        return True
    return any(_matches(node.child, w[:i]) and _matches(node, w[i:]) for i in range(1, len(w) + 1))


@settings(max_examples=60, deadline=None)
@given(_regexes())
def test_dfa_agrees_with_syntax_tree(ast):
    d = regex_to_dfa(ast, AB)
    assert d.minimize() == d
    c = complement(d)
    for w in words("ab", 6):
        assert d.accepts(w) == _matches(ast, w)
        assert c.accepts(w) != d.accepts(w)


@settings(max_examples=60, deadline=None)
@given(_regexes())
def test_printed_regex_reparses(ast):
    again = parse_regex(str(ast), AB)
    assert regex_to_dfa(again, AB) == regex_to_dfa(ast, AB)
