"""Atomic rule systems (bases), derivability, and extension enumeration.

A base is a finite set of rules over atoms.  Level-1 rules have flat
premises ``p1, ..., pn => c``; level-2 rules may attach dischargeable
atomic hypotheses to each premise, written ``(h1, h2 > p) => c``.
Falsum never occurs in a rule, so bases cannot be inconsistent.

File format, one rule per line (comments with ``#``)::

    => c
    p1, p2 => c
    (p1, p2 > q), (> r) => c
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Optional

from .syntax import Atom, AtomRef
from . import proofs


class BaseFormatError(ValueError):
    pass


@dataclass(frozen=True)
class RulePremise:
    """One premise slot: a premise atom plus its dischargeable hypotheses."""

    hypotheses: frozenset[Atom]
    atom: Atom

    def __post_init__(self):
        object.__setattr__(self, "hypotheses", frozenset(self.hypotheses))

    def _key(self):
        return (self.atom, sorted(self.hypotheses))


@dataclass(frozen=True)
class AtomicRule:
    """premises => conclusion.  Premises form a set: order and duplicates
    are irrelevant for rule identity."""

    premises: tuple[RulePremise, ...]
    conclusion: Atom

    def __post_init__(self):
        canon = tuple(sorted(set(self.premises), key=RulePremise._key))
        object.__setattr__(self, "premises", canon)

    @property
    def level(self) -> int:
        return 2 if any(p.hypotheses for p in self.premises) else 1

    def __str__(self) -> str:
        return format_rule(self)


def rule(premises: Iterable, conclusion: str | Atom) -> AtomicRule:
    """Convenience constructor.  Premises are atom names or
    (hypothesis-names, name) pairs."""
    prems = []
    for pr in premises:
        if isinstance(pr, RulePremise):
            prems.append(pr)
        elif isinstance(pr, tuple):
            hyps, at = pr
            prems.append(RulePremise(frozenset(Atom(h) for h in hyps), Atom(at)))
        else:
            prems.append(RulePremise(frozenset(), Atom(pr)))
    c = conclusion if isinstance(conclusion, Atom) else Atom(conclusion)
    return AtomicRule(tuple(prems), c)


@dataclass(frozen=True)
class Base:
    """A finite set of atomic rules with a level tag (1 or 2)."""

    rules: frozenset[AtomicRule] = frozenset()
    level: int = 0  # 0 means: infer from the rules

    def __post_init__(self):
        object.__setattr__(self, "rules", frozenset(self.rules))
        inferred = max((r.level for r in self.rules), default=1)
        lvl = self.level or inferred
        if lvl not in (1, 2):
            raise ValueError(f"base level must be 1 or 2, not {lvl}")
        if lvl < inferred:
            raise ValueError("level-1 base may not contain level-2 rules")
        object.__setattr__(self, "level", lvl)

    @cached_property
    def ordered_rules(self) -> tuple[AtomicRule, ...]:
        """Deterministic rule order; BaseRule indices in proofs refer to it."""
        return tuple(sorted(self.rules, key=format_rule))

    @cached_property
    def atoms(self) -> frozenset[Atom]:
        acc = set()
        for r in self.rules:
            acc.add(r.conclusion)
            for p in r.premises:
                acc.add(p.atom)
                acc |= p.hypotheses
        return frozenset(acc)

    def rule_index(self, r: AtomicRule) -> int:
        return self.ordered_rules.index(r)

    def extend(self, extra: Iterable[AtomicRule], level: int = 0) -> "Base":
        return Base(self.rules | frozenset(extra), level or self.level)

    def __le__(self, other: "Base") -> bool:
        return self.rules <= other.rules

    def __str__(self) -> str:
        return format_base(self)


EMPTY_BASE = Base()


# ----------------------------------------------------------------------
# Derivability: least fixed point over hypothesis sets
# ----------------------------------------------------------------------
#
# D(S) is the least family with S ⊆ D(S) and, for each rule
# ((Σ1,p1),...,(Σn,pn) => c), c ∈ D(S) whenever pi ∈ D(S ∪ Σi) for all i.
# States only grow and only finitely many arise, so iteration terminates.

def _saturate(base: Base, start: frozenset[Atom], why: Optional[dict] = None):
    states: dict[frozenset[Atom], set[Atom]] = {start: set(start)}
    changed = True
    while changed:
        changed = False
        for S in list(states):
            derived = states[S]
            for idx, r in enumerate(base.ordered_rules):
                if r.conclusion in derived:
                    continue
                ok = True
                for prem in r.premises:
                    S2 = S | prem.hypotheses
                    if S2 not in states:
                        states[S2] = set(S2)
                        changed = True
                    if prem.atom not in states[S2]:
                        ok = False
                if ok:
                    derived.add(r.conclusion)
                    if why is not None:
                        why[(S, r.conclusion)] = idx
                    changed = True
    return states


@lru_cache(maxsize=None)
def atom_closure(base: Base, hypotheses: frozenset[Atom]) -> frozenset[Atom]:
    """All atoms derivable in the base from the given atomic hypotheses."""
    return frozenset(_saturate(base, frozenset(hypotheses))[frozenset(hypotheses)])


def derivable_atom(base: Base, hypotheses: Iterable[Atom], goal: Atom) -> bool:
    return goal in atom_closure(base, frozenset(hypotheses))


def derivation_in_base(base: Base, hypotheses: Iterable[Atom],
                       goal: Atom) -> Optional[proofs.Argument]:
    """A checkable Assume/BaseRule argument witnessing derivability, if any.

    Level-2 rule applications discharge their hypothesis atoms with fresh
    labels (one label per hypothesis atom per premise slot).
    """
    hyp = frozenset(hypotheses)
    why: dict[tuple[frozenset[Atom], Atom], int] = {}
    states = _saturate(base, hyp, why)
    if goal not in states[hyp]:
        return None
    counter = itertools.count(1)

    def build(S: frozenset[Atom], c: Atom) -> proofs.Argument:
        if (S, c) not in why:  # c is a hypothesis of this state
            return proofs.assume(AtomRef(c))
        r = base.ordered_rules[why[(S, c)]]
        prems, slots = [], []
        for prem in r.premises:
            d = build(S | prem.hypotheses, prem.atom)
            labels = set()
            for h in sorted(prem.hypotheses):
                lab = f"b{next(counter)}"
                d, n = proofs.bind_open_leaves(d, AtomRef(h), lab)
                if n:
                    labels.add(lab)
            prems.append(d)
            slots.append(frozenset(labels))
        return proofs.Argument(AtomRef(c), proofs.BaseRuleRef(why[(S, c)]),
                               tuple(prems), discharges=tuple(slots))

    return build(hyp, goal)


# ----------------------------------------------------------------------
# Bounded enumeration of bases and base extensions
# ----------------------------------------------------------------------

@lru_cache(maxsize=None)
def candidate_rules(alphabet: frozenset[Atom], max_premises: int,
                    level: int, max_hyps: int) -> tuple[AtomicRule, ...]:
    """All rules over the alphabet within the bounds, deterministically ordered."""
    atoms = sorted(alphabet)
    if level == 1:
        hyp_sets = [frozenset()]
    else:
        hyp_sets = [frozenset(c) for k in range(max_hyps + 1)
                    for c in itertools.combinations(atoms, k)]
    pool = sorted((RulePremise(h, a) for h in hyp_sets for a in atoms),
                  key=RulePremise._key)
    rules = []
    for c in atoms:
        for k in range(max_premises + 1):
            for combo in itertools.combinations(pool, k):
                rules.append(AtomicRule(combo, c))
    return tuple(sorted(rules, key=format_rule))


def enumerate_extensions(base: Base, alphabet: frozenset[Atom], max_rules: int,
                         max_premises: int, level: int = 1,
                         max_hyps: int = 0) -> Iterator[Base]:
    """Every C ⊇ base whose added rules respect the bounds, each exactly
    once, base itself first.  Call again to restart the stream."""
    lvl = max(base.level, level)
    yield Base(base.rules, lvl)
    cands = [r for r in candidate_rules(frozenset(alphabet), max_premises,
                                        level, max_hyps)
             if r not in base.rules]
    for k in range(1, max_rules + 1):
        for combo in itertools.combinations(cands, k):
            yield Base(base.rules | frozenset(combo), lvl)


# ----------------------------------------------------------------------
# File format
# ----------------------------------------------------------------------

def format_rule(r: AtomicRule) -> str:
    if not r.premises:
        return f"=> {r.conclusion}"
    if r.level == 1:
        left = ", ".join(p.atom.name for p in r.premises)
    else:
        parts = []
        for p in r.premises:
            hyps = ", ".join(h.name for h in sorted(p.hypotheses))
            parts.append(f"({hyps} > {p.atom})" if hyps else f"(> {p.atom})")
        left = ", ".join(parts)
    return f"{left} => {r.conclusion}"


def format_base(base: Base) -> str:
    return "".join(format_rule(r) + "\n" for r in base.ordered_rules)


def _split_top_level(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise BaseFormatError(f"unbalanced ')' in {text!r}")
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if depth:
        raise BaseFormatError(f"unbalanced '(' in {text!r}")
    parts.append("".join(cur))
    return parts


def _parse_atom(text: str, where: str) -> Atom:
    try:
        return Atom(text.strip())
    except ValueError as e:
        raise BaseFormatError(f"{where}: {e}") from None


def parse_rule(line: str) -> AtomicRule:
    if "=>" not in line:
        raise BaseFormatError(f"missing '=>' in rule {line!r}")
    left, _, right = line.partition("=>")
    conclusion = _parse_atom(right, line)
    prems = []
    for part in _split_top_level(left):
        part = part.strip()
        if not part:
            continue
        if part.startswith("("):
            if not part.endswith(")"):
                raise BaseFormatError(f"malformed premise {part!r} in {line!r}")
            inner = part[1:-1]
            if ">" not in inner:
                raise BaseFormatError(f"missing '>' in premise {part!r}")
            hyp_text, _, at_text = inner.partition(">")
            hyps = frozenset(_parse_atom(h, line)
                             for h in hyp_text.split(",") if h.strip())
            prems.append(RulePremise(hyps, _parse_atom(at_text, line)))
        else:
            prems.append(RulePremise(frozenset(), _parse_atom(part, line)))
    return AtomicRule(tuple(prems), conclusion)


def parse_base(text: str) -> Base:
    rules = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rules.append(parse_rule(line))
    return Base(frozenset(rules))


def load_base(path) -> Base:
    with open(path, encoding="utf-8") as fh:
        return parse_base(fh.read())


def save_base(base: Base, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_base(base))
