"""The line-oriented instance file format.

Sections: [automaton] with states/initial/final/trans, [grammar] with
refuter/prover/rules, optional [start].  Tokens are whitespace-separated;
`_eps_` alone denotes an empty right-hand side; `#` starts a comment.
The grammar's terminal alphabet is the automaton's alphabet; rule symbols
that are neither declared non-terminals nor alphabet letters are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .automaton import Nfa
from .errors import ParseError
from .generator import GeneratedInstance
from .grammar import EPSILON_TOKEN, GameGrammar, SententialForm, validate


@dataclass
class Instance:
    nfa: Nfa
    grammar: GameGrammar
    start: Optional[SententialForm]
    header: list[str] = field(default_factory=list)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Instance)
            and self.nfa == other.nfa
            and self.grammar == other.grammar
            and self.start == other.start
        )


def _strip_comment(line: str) -> str:
    at = line.find("#")
    return line if at < 0 else line[:at]


def parse_instance(text: str) -> Instance:
    header = []
    for raw in text.splitlines():
        stripped = raw.strip()
        if stripped.startswith("#"):
            header.append(stripped.lstrip("#").strip())
        elif stripped:
            break

    section = None
    key = None
    auto: dict = {
        "states": None,
        "letters": None,
        "initial": None,
        "final": None,
        "trans": [],
    }
    gram: dict = {"refuter": [], "prover": [], "rules": []}
    start_tokens: Optional[list[str]] = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            key = None
            if section not in ("automaton", "grammar", "start"):
                raise ParseError(lineno, f"unknown section [{section}]")
            if section == "start":
                start_tokens = []
            continue
        if section is None:
            raise ParseError(lineno, "content before any section header")
        if section == "start":
            start_tokens.extend(line.split())
            continue
        if section == "automaton":
            head, sep, rest = line.partition(":")
            if sep and head.strip() in ("states", "letters", "initial", "final", "trans"):
                key = head.strip()
                if key == "trans":
                    if rest.split():
                        auto["trans"].append((lineno, rest.split()))
                elif auto[key] is not None:
                    raise ParseError(lineno, f"duplicate {key!r} line")
                else:
                    auto[key] = (lineno, rest.split())
                continue
            if key == "trans":
                auto["trans"].append((lineno, line.split()))
                continue
            raise ParseError(lineno, f"unexpected line in [automaton]: {line!r}")
        if section == "grammar":
            head, sep, rest = line.partition(":")
            if sep and head.strip() in ("refuter", "prover", "rules"):
                key = head.strip()
                if key == "rules":
                    if rest.split():
                        gram["rules"].append((lineno, rest.split()))
                else:
                    gram[key].append((lineno, rest.split()))
                continue
            if key == "rules":
                gram["rules"].append((lineno, line.split()))
                continue
            raise ParseError(lineno, f"unexpected line in [grammar]: {line!r}")

    if auto["states"] is None:
        raise ParseError(1, "missing [automaton] states line")
    lineno, names = auto["states"]
    if not names:
        raise ParseError(lineno, "automaton needs at least one state")
    state_index = {name: i for i, name in enumerate(names)}
    if len(state_index) != len(names):
        raise ParseError(lineno, "duplicate state names")

    if auto["initial"] is None:
        raise ParseError(1, "missing initial line")
    lineno, tokens = auto["initial"]
    if len(tokens) != 1 or tokens[0] not in state_index:
        raise ParseError(lineno, "initial must name exactly one declared state")
    initial = state_index[tokens[0]]

    finals = []
    if auto["final"] is not None:
        lineno, tokens = auto["final"]
        for t in tokens:
            if t not in state_index:
                raise ParseError(lineno, f"unknown final state {t!r}")
            finals.append(state_index[t])

    # explicit letters line fixes the alphabet; otherwise it is the set of
    # letters appearing on transitions (the format of the docs examples)
    declared_letters: Optional[list[str]] = None
    if auto["letters"] is not None:
        lineno, tokens = auto["letters"]
        if len(set(tokens)) != len(tokens):
            raise ParseError(lineno, "duplicate letters")
        declared_letters = tokens

    transitions = []
    alphabet: list[str] = [] if declared_letters is None else list(declared_letters)
    seen_letters = set(alphabet)
    for lineno, tokens in auto["trans"]:
        if len(tokens) != 3:
            raise ParseError(lineno, "transition must be: source letter target")
        s, a, t = tokens
        if s not in state_index or t not in state_index:
            raise ParseError(lineno, f"unknown state in transition {tokens}")
        if a not in seen_letters:
            if declared_letters is not None:
                raise ParseError(lineno, f"letter {a!r} not in the declared alphabet")
            seen_letters.add(a)
            alphabet.append(a)
        transitions.append((state_index[s], a, state_index[t]))

    refuter_nts = [name for _, tokens in gram["refuter"] for name in tokens]
    prover_nts = [name for _, tokens in gram["prover"] for name in tokens]
    if not refuter_nts and not prover_nts:
        raise ParseError(1, "missing [grammar] section or non-terminal declarations")
    declared = set(refuter_nts) | set(prover_nts)
    for name in declared & seen_letters:
        raise ParseError(1, f"symbol {name!r} is both a letter and a non-terminal")

    rules = []
    for lineno, tokens in gram["rules"]:
        if len(tokens) < 3 or tokens[1] != "->":
            raise ParseError(lineno, "rule must be: lhs -> rhs tokens")
        lhs = tokens[0]
        if lhs not in declared:
            raise ParseError(lineno, f"rule for undeclared non-terminal {lhs!r}")
        rhs = tokens[2:]
        if rhs == [EPSILON_TOKEN]:
            rhs = []
        for symbol in rhs:
            if symbol not in declared and symbol not in seen_letters:
                raise ParseError(
                    lineno,
                    f"symbol {symbol!r} is neither a non-terminal nor a letter "
                    f"of the automaton",
                )
        rules.append((lhs, tuple(rhs)))

    grammar = GameGrammar(refuter_nts, prover_nts, alphabet, rules)
    problems = validate(grammar)
    if problems:
        raise ParseError(1, "; ".join(problems))
    nfa = Nfa(names, alphabet, initial, finals, transitions)

    start = None
    if start_tokens is not None:
        if start_tokens == [EPSILON_TOKEN]:
            start = ()
        else:
            for lineno_, symbol in [(1, s) for s in start_tokens]:
                if symbol not in declared and symbol not in seen_letters:
                    raise ParseError(lineno_, f"unknown start symbol {symbol!r}")
            start = tuple(start_tokens)

    return Instance(nfa, grammar, start, header)


def render_instance(instance: Instance) -> str:
    nfa, grammar = instance.nfa, instance.grammar
    lines = [f"# {comment}" for comment in instance.header]
    lines += [
        "[automaton]",
        "states: " + " ".join(nfa.names),
        "letters: " + " ".join(nfa.alphabet),
        "initial: " + nfa.names[nfa.initial],
        "final: " + " ".join(nfa.names[q] for q in sorted(nfa.finals)),
        "trans:",
    ]
    lines += [f"{nfa.names[s]} {a} {nfa.names[t]}" for s, a, t in nfa.transitions]
    refuter = [x for x in grammar.nonterminals if grammar.owner[x] == "refuter"]
    prover = [x for x in grammar.nonterminals if grammar.owner[x] == "prover"]
    lines += [
        "[grammar]",
        "refuter: " + " ".join(refuter),
        "prover: " + " ".join(prover),
        "rules:",
    ]
    lines += [rule.render() for rule in grammar.rules]
    if instance.start is not None:
        lines += ["[start]", " ".join(instance.start) or EPSILON_TOKEN]
    return "\n".join(lines) + "\n"


def instance_from_generated(gen: GeneratedInstance) -> Instance:
    return Instance(gen.nfa, gen.grammar, gen.start, list(gen.header))


def parse_position(instance: Instance, text: str) -> SententialForm:
    """Sentential form from CLI text: whitespace tokens, or a compact run of
    single-character symbols; `_eps_` is the empty form."""
    text = text.strip()
    if text == EPSILON_TOKEN or text == "":
        return ()
    tokens = text.split()
    symbols = set(instance.grammar.nonterminals) | set(instance.grammar.terminals)
    if len(tokens) == 1 and tokens[0] not in symbols:
        candidate = tuple(tokens[0])
        if all(c in symbols for c in candidate):
            return candidate
        raise ValueError(f"unknown symbols in position {text!r}")
    for t in tokens:
        if t not in symbols:
            raise ValueError(f"unknown symbol {t!r} in position")
    return tuple(tokens)
