"""Command line front end.

Exit codes: 0 verdict computed, 1 ``--expect`` mismatch, 2 usage or input
error, 3 resource limit, 4 internal inconsistency.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .algebra import (
    DEFAULT_MONOID_LIMIT,
    Morphism,
    alphabet_completion,
    parse_monoid,
    syntactic_morphism,
)
from .chains import (
    DEFAULT_JUNCTURE_LIMIT,
    DEFAULT_WITNESS_LIMIT,
    ChainSet,
    all_junctures,
    chains_of_length,
    project_chains,
    synthesize_witness,
)
from .decide import CLASSES, Limits, Verdict, decide, separation_sigma2
from .enriched import DEFAULT_ALPHABET_LIMIT, enriched_decide, enriched_separation, wf_language
from .errors import (
    AlphabetError,
    InternalInconsistencyError,
    ParseError,
    ResourceLimitError,
    UnsupportedError,
)
from .lang import Alphabet, Dfa, format_lang, load_lang
from .oracle import DEFAULT_GAME_BUDGET, brute_chain_set, ef_leq

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_RESOURCE, EXIT_INTERNAL = 0, 1, 2, 3, 4

log = logging.getLogger("alternation")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    limits: Limits
    alphabet_limit: int
    budget: int
    json: bool


# -- reporting ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, (list, tuple)):
        return " ".join(_fmt(v) for v in value)
    if isinstance(value, dict):
        return ", ".join(f"{k}={_fmt(v)}" for k, v in sorted(value.items()))
    return str(value)


def report(v: Verdict, as_json: bool = False) -> str:
    """Render a verdict as text or JSON (keys: class, signature, answer, evidence, bounds)."""
    if as_json:
        return json.dumps(v.to_json(), sort_keys=True, indent=2)
    lines = [
        f"class: {v.cls}",
        f"signature: {v.signature}",
        f"answer: {'yes' if v.answer else 'no'}",
        f"evidence: {v.evidence['kind']}",
    ]
    for key in sorted(k for k in v.evidence if k != "kind"):
        val = v.evidence[key]
        if key == "checked":
            lines.append(f"  checked: {val} instances")
        else:
            lines.append(f"  {key}: {_fmt(val)}")
    if "separator_rank" in v.bounds:
        lines.append(f"separator rank bound: {v.bounds['separator_rank']}")
    return "\n".join(lines)


def format_chains(chains: ChainSet, m: Morphism | None = None) -> str:
    """One chain per line; with ``m``, elements carry their letter sets."""
    out = []
    for c in sorted(chains.chains):
        if m is not None and m.pairs is not None:
            out.append(" ".join(m.element_label(x) for x in c))
        else:
            out.append(" ".join(str(x) for x in c))
    return "\n".join(out)


# -- corpus -------------------------------------------------------------------------------


def corpus(
    seed: int,
    count: int,
    states: int,
    alphabet: str | Alphabet = "ab",
    max_monoid: int | None = None,
    attempts: int | None = None,
) -> list[Dfa]:
    """Deterministic pseudo-random complete DFAs, minimized and without repeats.

    State counts are drawn uniformly from 1..``states``, transitions uniformly,
    and each state is final with probability 1/2. With ``max_monoid``, DFAs
    whose syntactic monoid is larger are redrawn. Generation stops after
    ``attempts`` draws (default 1000 per requested DFA), so small state
    bounds return fewer DFAs than requested.
    """
    if isinstance(alphabet, str):
        alphabet = Alphabet.of(alphabet)
    rng = random.Random(seed)
    attempts = 1000 * max(count, 1) if attempts is None else attempts
    seen = set()
    out: list[Dfa] = []
    k = len(alphabet)
    for _ in range(attempts):
        if len(out) >= count:
            break
        n = rng.randint(1, states)
        delta = tuple(tuple(rng.randrange(n) for _ in range(k)) for _ in range(n))
        finals = frozenset(q for q in range(n) if rng.random() < 0.5)
        d = Dfa(alphabet, delta, 0, finals).minimize().canonical()
        key = (d.delta, d.initial, d.finals)
        if key in seen:
            continue
        seen.add(key)
        if max_monoid is not None:
            try:
                syntactic_morphism(d, limit=max_monoid)
            except ResourceLimitError:
                continue
        out.append(d)
    return out


# -- subcommands ------------------------------------------------------------------------------


def _load_morphism(path: str, limit: int) -> Morphism:
    if path.endswith(".mon"):
        with open(path, encoding="utf-8") as fh:
            return parse_monoid(fh.read())
    return syntactic_morphism(load_lang(path), limit=limit)


def _emit(v: Verdict, args, cfg: RunConfig) -> int:
    print(report(v, cfg.json))
    if args.expect is not None and (args.expect == "yes") != v.answer:
        return EXIT_MISMATCH
    return EXIT_OK


def _dump(path: str, d: Dfa, m: Morphism, tag: str, cfg: RunConfig):
    w = wf_language(d, m, tag, cfg.alphabet_limit)
    Path(path).write_text(format_lang(w.dfa), encoding="utf-8")


def cmd_decide(args, cfg: RunConfig) -> int:
    d = load_lang(args.file)
    if args.signature == "enriched":
        if args.dump_wf:
            _dump(args.dump_wf, d, syntactic_morphism(d, limit=cfg.limits.monoid), "L", cfg)
        v = enriched_decide(d, args.cls, cfg.limits, cfg.alphabet_limit, shortcut=not args.no_shortcut)
    else:
        v = decide(d, args.cls, cfg.limits)
    return _emit(v, args, cfg)


def cmd_separate(args, cfg: RunConfig) -> int:
    if args.cls not in ("sigma2", "pi2"):
        raise UsageError("separation is supported for sigma2 and pi2")
    d1, d2 = load_lang(args.file1), load_lang(args.file2)
    direction = "sigma" if args.cls == "sigma2" else "pi"
    if args.signature == "enriched":
        if args.dump_wf:
            from .algebra import joint_morphism

            m = joint_morphism(d1.minimize(), d2.minimize(), limit=cfg.limits.monoid)
            _dump(args.dump_wf, d1, m, "L1", cfg)
            _dump(args.dump_wf + ".2", d2, m, "L2", cfg)
        v = enriched_separation(d1, d2, direction, cfg.limits, cfg.alphabet_limit, cls=args.cls,
                                shortcut=not args.no_shortcut)
    else:
        v = separation_sigma2(d1, d2, direction, cfg.limits, cls=args.cls)
    return _emit(v, args, cfg)


def cmd_chains(args, cfg: RunConfig) -> int:
    m = alphabet_completion(_load_morphism(args.file, cfg.limits.monoid), limit=cfg.limits.monoid)
    levels = all_junctures(m, args.n, cfg.limits.junctures)
    js = levels[-1]
    if args.junctures:
        for j in js.maximal_junctures():
            chains = " | ".join(" ".join(str(x) for x in c) for c in sorted(j.chains))
            print(f"{j.root}: {chains}")
        return EXIT_OK
    chains = chains_of_length(js)
    if args.project:
        print(format_chains(project_chains(chains, m)))
    else:
        print(format_chains(chains, m if args.labels else None))
    return EXIT_OK


def cmd_witness(args, cfg: RunConfig) -> int:
    m = alphabet_completion(_load_morphism(args.file, cfg.limits.monoid), limit=cfg.limits.monoid)
    try:
        target = tuple(int(x) for x in args.chain.replace(",", " ").split())
    except ValueError:
        raise UsageError(f"chain must be a list of element indices, got {args.chain!r}") from None
    if len(target) < 1:
        raise UsageError("empty chain")
    js = all_junctures(m, len(target), cfg.limits.junctures)[-1]
    try:
        words = synthesize_witness(js, target, args.k, cfg.limits.witness)
    except KeyError as e:
        raise UsageError(str(e.args[0])) from None
    for w in words:
        print(m.alphabet.decode(w) or "%e")
    if args.verify:
        ok = all(ef_leq(2, args.k, u, v, cfg.budget) for u, v in zip(words, words[1:]))
        print(f"verified: {'yes' if ok else 'no'}")
        if not ok:
            return EXIT_INTERNAL
    return EXIT_OK


def cmd_oracle(args, cfg: RunConfig) -> int:
    if args.what == "ef":
        w = "" if args.w1 == "%e" else args.w1
        v = "" if args.w2 == "%e" else args.w2
        print("true" if ef_leq(args.i, args.k, w, v, cfg.budget) else "false")
        return EXIT_OK
    m = alphabet_completion(_load_morphism(args.file, cfg.limits.monoid), limit=cfg.limits.monoid)
    print(format_chains(brute_chain_set(m, args.i, args.n, args.k, args.maxlen, cfg.budget), m if args.labels else None))
    return EXIT_OK


# -- argument parsing -------------------------------------------------------------------------


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    caps = _Parser(add_help=False)
    caps.add_argument("--monoid-limit", type=_positive, default=DEFAULT_MONOID_LIMIT,
                      help=f"largest monoid or completion built (default {DEFAULT_MONOID_LIMIT})")
    caps.add_argument("--juncture-limit", type=_positive, default=DEFAULT_JUNCTURE_LIMIT,
                      help=f"largest number of recorded junctures (default {DEFAULT_JUNCTURE_LIMIT})")
    caps.add_argument("--witness-limit", type=_positive, default=DEFAULT_WITNESS_LIMIT,
                      help=f"longest synthesized witness word (default {DEFAULT_WITNESS_LIMIT})")
    caps.add_argument("--alphabet-limit", type=_positive, default=DEFAULT_ALPHABET_LIMIT,
                      help=f"largest well-formed word alphabet (default {DEFAULT_ALPHABET_LIMIT})")
    caps.add_argument("--budget", type=_positive, default=DEFAULT_GAME_BUDGET,
                      help=f"game positions explored by the oracle (default {DEFAULT_GAME_BUDGET})")
    caps.add_argument("--json", action="store_true", help="machine-readable output")
    caps.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    p = _Parser(prog="alternation", description="Quantifier alternation: membership and separation for regular languages.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("decide", parents=[caps], help="membership of a language in a class")
    d.add_argument("--class", dest="cls", required=True, choices=CLASSES)
    d.add_argument("--signature", choices=("order", "enriched"), default="order")
    d.add_argument("--expect", choices=("yes", "no"))
    d.add_argument("--dump-wf", metavar="PATH", help="write the well-formed word language (enriched only)")
    d.add_argument("--no-shortcut", action="store_true",
                   help="enriched: always go through the well-formed word languages")
    d.add_argument("file")
    d.set_defaults(run=cmd_decide)

    s = sub.add_parser("separate", parents=[caps], help="separation of two languages")
    s.add_argument("--class", dest="cls", required=True, choices=("sigma2", "pi2"))
    s.add_argument("--signature", choices=("order", "enriched"), default="order")
    s.add_argument("--expect", choices=("yes", "no"))
    s.add_argument("--dump-wf", metavar="PATH")
    s.add_argument("--no-shortcut", action="store_true")
    s.add_argument("file1")
    s.add_argument("file2")
    s.set_defaults(run=cmd_separate)

    c = sub.add_parser("chains", parents=[caps], help="Sigma_2 chains of the alphabet completion")
    c.add_argument("--n", type=_positive, default=2, help="chain length (default 2)")
    c.add_argument("--labels", action="store_true", help="annotate elements with letter sets")
    c.add_argument("--project", action="store_true", help="project onto the underlying monoid")
    c.add_argument("--junctures", action="store_true", help="print maximal junctures instead")
    c.add_argument("file", help=".lang or .mon file")
    c.set_defaults(run=cmd_chains)

    w = sub.add_parser("witness", parents=[caps], help="words witnessing a chain")
    w.add_argument("--chain", required=True, help="element indices of the completion, e.g. 4,7")
    w.add_argument("--k", type=_positive, default=1, help="rank (default 1)")
    w.add_argument("--verify", action="store_true", help="check the words with the game oracle")
    w.add_argument("file")
    w.set_defaults(run=cmd_witness)

    o = sub.add_parser("oracle", help="reference procedures")
    osub = o.add_subparsers(dest="what", required=True, parser_class=_Parser)
    ef = osub.add_parser("ef", parents=[caps], help="w1 <= w2 for the rank-k Sigma_i preorder")
    ef.add_argument("--i", type=_positive, required=True)
    ef.add_argument("--k", type=int, required=True)
    ef.add_argument("w1")
    ef.add_argument("w2")
    oc = osub.add_parser("chains", parents=[caps], help="brute-force chains over short words")
    oc.add_argument("--i", type=_positive, required=True)
    oc.add_argument("--n", type=_positive, required=True)
    oc.add_argument("--k", type=int, required=True)
    oc.add_argument("--maxlen", type=int, required=True)
    oc.add_argument("--labels", action="store_true")
    oc.add_argument("file")
    o.set_defaults(run=cmd_oracle)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help and --version
        return int(e.code or 0)
    logging.basicConfig(level=logging.DEBUG if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    cfg = RunConfig(
        Limits(args.monoid_limit, args.juncture_limit, args.witness_limit) if hasattr(args, "monoid_limit") else Limits(),
        getattr(args, "alphabet_limit", DEFAULT_ALPHABET_LIMIT),
        getattr(args, "budget", DEFAULT_GAME_BUDGET),
        getattr(args, "json", False),
    )
    try:
        return args.run(args, cfg)
    except (UsageError, UnsupportedError, ParseError, AlphabetError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e.strerror}: {e.filename}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as e:
        print(f"error: resource limit: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except InternalInconsistencyError as e:
        print(f"error: internal inconsistency: {e}", file=sys.stderr)
        return EXIT_INTERNAL


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
