"""Rule-annotated argument trees with discharge, checking, and composition.

An Argument is a rooted tree whose nodes carry the rule that produced
them.  Assume leaves may carry a discharge label; binder nodes (ImpI,
OrE minors, level-2 base rule premises) record, per premise slot, the
set of labels they bind.  Hygiene invariants:

  * every label is bound by at most one slot in the whole tree;
  * all leaves marked with a bound label lie inside the binding slot;
  * leaves sharing a label carry the same formula.

A leaf is discharged iff its label is bound; an argument is open iff it
has an undischarged leaf.

Premise order follows the rule figures: ImpE is (minor, major), OrE is
(major, left minor, right minor), the eliminated premise of AndE/BotE
comes first.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence, TYPE_CHECKING

from .syntax import (
    And, AtomRef, BOT, Bot, Formula, Imp, Or, Sequent, parse_formula,
    print_formula,
)

if TYPE_CHECKING:  # avoid an import cycle; bases imports this module
    from .bases import Base


class ProofError(ValueError):
    """Malformed argument construction or use."""


class DischargeError(ProofError):
    """Discharge binding hygiene violation; carries the offending label."""

    def __init__(self, message: str, label: str):
        super().__init__(message)
        self.label = label


class RuleSchemaError(ProofError):
    """Rule applied to premises it does not fit."""


class CutError(ProofError):
    pass


class NjRule(enum.Enum):
    ASSUME = "Assume"
    AND_I = "AndI"
    AND_E1 = "AndE1"
    AND_E2 = "AndE2"
    OR_I1 = "OrI1"
    OR_I2 = "OrI2"
    OR_E = "OrE"
    IMP_I = "ImpI"
    IMP_E = "ImpE"
    BOT_E = "BotE"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class BaseRuleRef:
    """Reference to a rule of a base, by index into its canonical order."""

    index: int

    def __str__(self):
        return f"Base:{self.index}"


RuleId = NjRule | BaseRuleRef

INTRO_RULES = frozenset({NjRule.AND_I, NjRule.OR_I1, NjRule.OR_I2, NjRule.IMP_I})
ELIM_RULES = frozenset({NjRule.AND_E1, NjRule.AND_E2, NjRule.OR_E,
                        NjRule.IMP_E, NjRule.BOT_E})


class CalculusMode(enum.Enum):
    """Which NJ rules are in force: full NJ has EFQ, minimal NJ does not."""

    MINIMAL = "minimal"
    INTUITIONISTIC = "nj"

    @property
    def allows_efq(self) -> bool:
        return self is CalculusMode.INTUITIONISTIC


@dataclass(frozen=True)
class Argument:
    conclusion: Formula
    rule: RuleId
    premises: tuple["Argument", ...] = ()
    label: Optional[str] = None             # Assume leaves only
    discharges: tuple[frozenset[str], ...] = ()  # per-premise bound labels
    _hash: int = field(init=False, repr=False, compare=False, default=0)

    def __post_init__(self):
        if self.rule is NjRule.ASSUME:
            if self.premises:
                raise ProofError("Assume is a leaf")
        elif self.label is not None:
            raise ProofError("only Assume leaves carry a label")
        if self.discharges and len(self.discharges) != len(self.premises):
            raise ProofError("discharges must align with premises")
        object.__setattr__(self, "_hash", hash(
            (self.conclusion, self.rule, self.premises, self.label,
             self.discharges)))

    def __hash__(self):
        return self._hash

    @property
    def slot_labels(self) -> tuple[frozenset[str], ...]:
        if self.discharges:
            return self.discharges
        return tuple(frozenset() for _ in self.premises)

    def at(self, path: Sequence[int]) -> "Argument":
        node = self
        for i in path:
            node = node.premises[i]
        return node

    def __str__(self):
        return format_argument(self)


def assume(f: Formula, label: Optional[str] = None) -> Argument:
    return Argument(f, NjRule.ASSUME, label=label)


def count_nodes(a: Argument) -> int:
    return 1 + sum(count_nodes(p) for p in a.premises)


def iter_nodes(a: Argument, path: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], Argument]]:
    yield path, a
    for i, p in enumerate(a.premises):
        yield from iter_nodes(p, path + (i,))


def all_labels(a: Argument) -> frozenset[str]:
    acc = set()
    for _, node in iter_nodes(a):
        if node.label is not None:
            acc.add(node.label)
        for slot in node.slot_labels:
            acc |= slot
    return frozenset(acc)


# ----------------------------------------------------------------------
# Discharge hygiene
# ----------------------------------------------------------------------

def _labeling_defect(a: Argument) -> Optional[DischargeError]:
    binders: dict[str, tuple[int, ...]] = {}
    leaf_formula: dict[str, Formula] = {}
    leaves: list[tuple[tuple[int, ...], Argument, frozenset[str]]] = []

    def walk(node: Argument, path: tuple[int, ...], env: frozenset[str]):
        for slot in node.slot_labels:
            for lab in slot:
                if lab in binders:
                    return DischargeError(f"label {lab!r} bound twice", lab)
                binders[lab] = path
        if node.rule is NjRule.ASSUME and node.label is not None:
            prev = leaf_formula.get(node.label)
            if prev is not None and prev != node.conclusion:
                return DischargeError(
                    f"label {node.label!r} marks distinct formulas", node.label)
            leaf_formula[node.label] = node.conclusion
            leaves.append((path, node, env))
        for i, prem in enumerate(node.premises):
            bad = walk(prem, path + (i,), env | node.slot_labels[i])
            if bad:
                return bad
        return None

    bad = walk(a, (), frozenset())
    if bad:
        return bad
    for path, leaf, env in leaves:
        lab = leaf.label
        if lab in binders and lab not in env:
            return DischargeError(
                f"label {lab!r} is bound outside the leaf's slot", lab)
    return None


def well_labeled(a: Argument) -> bool:
    return _labeling_defect(a) is None


def open_assumptions(a: Argument) -> frozenset[Formula]:
    """Formulas at undischarged leaves.  Raises DischargeError on
    malformed binding."""
    bad = _labeling_defect(a)
    if bad:
        raise bad
    acc: set[Formula] = set()

    def walk(node: Argument, env: frozenset[str]):
        if node.rule is NjRule.ASSUME:
            if node.label is None or node.label not in env:
                acc.add(node.conclusion)
            return
        for i, prem in enumerate(node.premises):
            walk(prem, env | node.slot_labels[i])

    walk(a, frozenset())
    return frozenset(acc)


def is_closed(a: Argument) -> bool:
    return not open_assumptions(a)


def witnesses(a: Argument, s: Sequent) -> bool:
    """True iff the open assumptions are within the context and the
    conclusion is the extract."""
    return a.conclusion == s.extract and open_assumptions(a) <= s.context


# ----------------------------------------------------------------------
# Canonical relabeling (alpha)
# ----------------------------------------------------------------------

def canonical_relabel(a: Argument) -> Argument:
    """Rename bound labels to d1, d2, ... in pre-order binder order.
    Open labels are left alone.  Alpha-equivalent arguments map to the
    same tree."""
    mapping: dict[str, str] = {}
    counter = [0]
    for _, node in iter_nodes(a):
        for slot in node.slot_labels:
            for lab in sorted(slot):
                counter[0] += 1
                mapping[lab] = f"d{counter[0]}"

    def rebuild(node: Argument) -> Argument:
        label = node.label
        if label is not None:
            label = mapping.get(label, label)
        discharges = tuple(frozenset(mapping[l] for l in slot)
                           for slot in node.discharges)
        return Argument(node.conclusion, node.rule,
                        tuple(rebuild(p) for p in node.premises),
                        label=label, discharges=discharges)

    return rebuild(a)


def alpha_equal(a: Argument, b: Argument) -> bool:
    return canonical_relabel(a) == canonical_relabel(b)


class _Gensym:
    """Fresh label supply avoiding a given set of names."""

    def __init__(self, used=(), prefix: str = "g"):
        self.used = set(used)
        self.prefix = prefix
        self.n = 0

    def fresh(self) -> str:
        while True:
            self.n += 1
            name = f"{self.prefix}{self.n}"
            if name not in self.used:
                self.used.add(name)
                return name


def _rename_labels(a: Argument, mapping: dict[str, str]) -> Argument:
    """Rename labels wherever they occur, on leaves and in binder slots."""
    if not mapping:
        return a

    def rebuild(node: Argument) -> Argument:
        label = node.label
        if label is not None and label in mapping:
            label = mapping[label]
        discharges = tuple(frozenset(mapping.get(l, l) for l in slot)
                           for slot in node.discharges)
        return Argument(node.conclusion, node.rule,
                        tuple(rebuild(p) for p in node.premises),
                        label=label, discharges=discharges)

    return rebuild(a)


def _freshen_bound(a: Argument, gensym: _Gensym) -> Argument:
    """Rename every bound label of `a` to a fresh one."""
    mapping: dict[str, str] = {}
    for _, node in iter_nodes(a):
        for slot in node.slot_labels:
            for lab in sorted(slot):
                mapping[lab] = gensym.fresh()
    return _rename_labels(a, mapping)


def bind_open_leaves(a: Argument, f: Formula, label: str) -> tuple[Argument, int]:
    """Attach `label` to every unlabeled open leaf carrying `f`.
    Returns the new argument and the number of leaves marked."""
    n = 0

    def rebuild(node: Argument) -> Argument:
        nonlocal n
        if node.rule is NjRule.ASSUME:
            if node.label is None and node.conclusion == f:
                n += 1
                return Argument(node.conclusion, NjRule.ASSUME, label=label)
            return node
        return Argument(node.conclusion, node.rule,
                        tuple(rebuild(p) for p in node.premises),
                        discharges=node.discharges)

    out = rebuild(a)
    return (out if n else a), n


# ----------------------------------------------------------------------
# Rule application
# ----------------------------------------------------------------------

def apply_rule(r: RuleId, inputs: Sequence[Argument], *,
               other: Optional[Formula] = None,
               labels: Sequence = (),
               base: Optional["Base"] = None) -> frozenset[Argument]:
    """One rule application, as a deduction operator from arguments to
    sets of arguments.  `other` supplies the formula the rule does not
    determine (the missing disjunct of OrI, the conclusion of BotE, the
    antecedent of ImpI); `labels` selects the discharge labels (one for
    ImpI, a left/right pair for OrE, one tuple per premise slot for a
    level-2 base rule).
    """
    inputs = tuple(inputs)

    def arity(n):
        if len(inputs) != n:
            raise RuleSchemaError(f"{r} expects {n} premises, got {len(inputs)}")

    if isinstance(r, BaseRuleRef):
        if base is None:
            raise RuleSchemaError("base rule application needs the base")
        if not 0 <= r.index < len(base.ordered_rules):
            raise RuleSchemaError(f"no rule {r.index} in base")
        schema = base.ordered_rules[r.index]
        arity(len(schema.premises))
        slot_labels = tuple(tuple(ls) for ls in labels) if labels else \
            tuple(() for _ in schema.premises)
        if len(slot_labels) != len(schema.premises):
            raise RuleSchemaError("need one label tuple per premise slot")
        prems, slots = [], []
        for inp, prem, labs in zip(inputs, schema.premises, slot_labels):
            if inp.conclusion != AtomRef(prem.atom):
                raise RuleSchemaError(
                    f"premise must conclude {prem.atom}, got "
                    f"{print_formula(inp.conclusion)}")
            hyp_forms = {AtomRef(h) for h in prem.hypotheses}
            for lab in labs:
                marked = [n for _, n in iter_nodes(inp)
                          if n.rule is NjRule.ASSUME and n.label == lab]
                if any(m.conclusion not in hyp_forms for m in marked):
                    raise RuleSchemaError(
                        f"label {lab!r} marks a non-hypothesis formula")
            prems.append(inp)
            slots.append(frozenset(labs))
        out = Argument(AtomRef(schema.conclusion), r, tuple(prems),
                       discharges=tuple(slots))
    elif r is NjRule.ASSUME:
        arity(0)
        if other is None:
            raise RuleSchemaError("Assume needs its formula")
        lab = labels[0] if labels else None
        out = assume(other, lab)
    elif r is NjRule.AND_I:
        arity(2)
        out = Argument(And(inputs[0].conclusion, inputs[1].conclusion), r, inputs)
    elif r in (NjRule.AND_E1, NjRule.AND_E2):
        arity(1)
        big = inputs[0].conclusion
        if not isinstance(big, And):
            raise RuleSchemaError("AndE needs a conjunction premise")
        side = big.left if r is NjRule.AND_E1 else big.right
        out = Argument(side, r, inputs)
    elif r in (NjRule.OR_I1, NjRule.OR_I2):
        arity(1)
        if other is None:
            raise RuleSchemaError("OrI needs the other disjunct")
        c = Or(inputs[0].conclusion, other) if r is NjRule.OR_I1 \
            else Or(other, inputs[0].conclusion)
        out = Argument(c, r, inputs)
    elif r is NjRule.IMP_E:
        arity(2)
        major = inputs[1].conclusion
        if not isinstance(major, Imp):
            raise RuleSchemaError("ImpE major premise must be an implication")
        if inputs[0].conclusion != major.left:
            raise RuleSchemaError("ImpE minor premise must match the antecedent")
        out = Argument(major.right, r, inputs)
    elif r is NjRule.IMP_I:
        arity(1)
        if labels:
            lab = labels[0]
            marked = {n.conclusion for _, n in iter_nodes(inputs[0])
                      if n.rule is NjRule.ASSUME and n.label == lab}
            if len(marked) > 1:
                raise DischargeError(f"label {lab!r} marks distinct formulas", lab)
            antecedent = other if other is not None else next(iter(marked), None)
            if antecedent is None:
                raise RuleSchemaError(
                    "vacuous ImpI discharge needs an explicit antecedent")
            if marked and antecedent not in marked:
                raise RuleSchemaError("discharged leaves do not match antecedent")
        else:
            if other is None:
                raise RuleSchemaError("ImpI needs a label or an antecedent")
            lab = _Gensym(all_labels(inputs[0])).fresh()
            antecedent = other
        out = Argument(Imp(antecedent, inputs[0].conclusion), r, inputs,
                       discharges=(frozenset({lab}),))
    elif r is NjRule.OR_E:
        arity(3)
        major = inputs[0].conclusion
        if not isinstance(major, Or):
            raise RuleSchemaError("OrE major premise must be a disjunction")
        if inputs[1].conclusion != inputs[2].conclusion:
            raise RuleSchemaError("OrE minor premises must share a conclusion")
        if len(labels) != 2:
            raise RuleSchemaError("OrE needs one label per branch")
        l1, l2 = labels
        for lab, minor, disjunct in ((l1, inputs[1], major.left),
                                     (l2, inputs[2], major.right)):
            for _, n in iter_nodes(minor):
                if n.rule is NjRule.ASSUME and n.label == lab \
                        and n.conclusion != disjunct:
                    raise RuleSchemaError(
                        f"label {lab!r} must mark the branch disjunct")
        out = Argument(inputs[1].conclusion, r, inputs,
                       discharges=(frozenset(), frozenset({l1}), frozenset({l2})))
    elif r is NjRule.BOT_E:
        arity(1)
        if inputs[0].conclusion != BOT:
            raise RuleSchemaError("BotE premise must be bot")
        if other is None:
            raise RuleSchemaError("BotE needs its conclusion")
        out = Argument(other, r, inputs)
    else:  # pragma: no cover
        raise RuleSchemaError(f"unknown rule {r}")

    bad = _labeling_defect(out)
    if bad:
        raise bad
    return frozenset({out})


# ----------------------------------------------------------------------
# Derivation checking
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Defect:
    """A located reason why a tree is not a derivation."""

    path: tuple[int, ...]
    reason: str

    def __str__(self):
        where = ".".join(map(str, self.path)) or "root"
        return f"{where}: {self.reason}"


def derivation_defect(a: Argument, base: Optional["Base"] = None,
                      mode: CalculusMode = CalculusMode.INTUITIONISTIC
                      ) -> Optional[Defect]:
    """None if `a` is built exactly by Assume plus rules of NJ and the
    base (BotE admitted per mode); otherwise the first defect found."""
    bad = _labeling_defect(a)
    if bad:
        return Defect((), str(bad))

    def leaf_formulas(node: Argument, lab: str) -> set[Formula]:
        return {n.conclusion for _, n in iter_nodes(node)
                if n.rule is NjRule.ASSUME and n.label == lab}

    for path, node in iter_nodes(a):
        r = node.rule
        c = node.conclusion
        prems = node.premises
        slots = node.slot_labels

        def fail(reason: str) -> Defect:
            return Defect(path, reason)

        if r is NjRule.ASSUME:
            continue
        if any(slots[i] for i in range(len(prems))) and r not in (
                NjRule.IMP_I, NjRule.OR_E) and not isinstance(r, BaseRuleRef):
            return fail(f"{r} does not discharge")
        if isinstance(r, BaseRuleRef):
            if base is None or not 0 <= r.index < len(base.ordered_rules):
                return fail(f"no rule {r.index} in the governing base")
            schema = base.ordered_rules[r.index]
            if c != AtomRef(schema.conclusion):
                return fail(f"base rule {r.index} concludes {schema.conclusion}")
            if len(prems) != len(schema.premises):
                return fail(f"base rule {r.index} has {len(schema.premises)} premises")
            for i, prem in enumerate(schema.premises):
                if prems[i].conclusion != AtomRef(prem.atom):
                    return fail(f"premise {i} must conclude {prem.atom}")
                allowed = {AtomRef(h) for h in prem.hypotheses}
                for lab in slots[i]:
                    if not leaf_formulas(prems[i], lab) <= allowed:
                        return fail(f"label {lab!r} discharges outside the "
                                    f"declared hypotheses")
        elif r is NjRule.AND_I:
            if len(prems) != 2 or c != And(prems[0].conclusion, prems[1].conclusion):
                return fail("AndI schema mismatch")
        elif r is NjRule.AND_E1:
            if len(prems) != 1 or not isinstance(prems[0].conclusion, And) \
                    or c != prems[0].conclusion.left:
                return fail("AndE1 schema mismatch")
        elif r is NjRule.AND_E2:
            if len(prems) != 1 or not isinstance(prems[0].conclusion, And) \
                    or c != prems[0].conclusion.right:
                return fail("AndE2 schema mismatch")
        elif r is NjRule.OR_I1:
            if len(prems) != 1 or not isinstance(c, Or) or c.left != prems[0].conclusion:
                return fail("OrI1 schema mismatch")
        elif r is NjRule.OR_I2:
            if len(prems) != 1 or not isinstance(c, Or) or c.right != prems[0].conclusion:
                return fail("OrI2 schema mismatch")
        elif r is NjRule.IMP_E:
            if len(prems) != 2 or not isinstance(prems[1].conclusion, Imp) \
                    or prems[0].conclusion != prems[1].conclusion.left \
                    or c != prems[1].conclusion.right:
                return fail("ImpE schema mismatch")
        elif r is NjRule.IMP_I:
            if len(prems) != 1 or not isinstance(c, Imp) \
                    or c.right != prems[0].conclusion:
                return fail("ImpI schema mismatch")
            for lab in slots[0]:
                if not leaf_formulas(prems[0], lab) <= {c.left}:
                    return fail(f"label {lab!r} discharges a formula other "
                                f"than the antecedent")
        elif r is NjRule.OR_E:
            if len(prems) != 3 or not isinstance(prems[0].conclusion, Or) \
                    or prems[1].conclusion != c or prems[2].conclusion != c:
                return fail("OrE schema mismatch")
            major = prems[0].conclusion
            if slots[0]:
                return fail("OrE does not discharge in its major premise")
            for i, disjunct in ((1, major.left), (2, major.right)):
                for lab in slots[i]:
                    if not leaf_formulas(prems[i], lab) <= {disjunct}:
                        return fail(f"label {lab!r} discharges a formula "
                                    f"other than the branch disjunct")
        elif r is NjRule.BOT_E:
            if not mode.allows_efq:
                return fail("BotE is not admitted in minimal mode")
            if len(prems) != 1 or prems[0].conclusion != BOT:
                return fail("BotE schema mismatch")
        else:  # pragma: no cover
            return fail(f"unknown rule {r}")
    return None


def check_derivation(a: Argument, base: Optional["Base"] = None,
                     mode: CalculusMode = CalculusMode.INTUITIONISTIC) -> bool:
    return derivation_defect(a, base, mode) is None


# ----------------------------------------------------------------------
# Composition (cut)
# ----------------------------------------------------------------------

def graft(a: Argument, f: Formula, closure: Argument,
          gensym: Optional[_Gensym] = None) -> Argument:
    """Replace every open leaf of `a` carrying `f` with a copy of
    `closure` (bound labels freshened per copy).  Zero occurrences is a
    no-op.  Open labels of the closure colliding with labels already in
    `a` are freshened too, to preserve hygiene across provenances."""
    if gensym is None:
        gensym = _Gensym(all_labels(a) | all_labels(closure))
    bound_in_a = set()
    for _, node in iter_nodes(a):
        for slot in node.slot_labels:
            bound_in_a |= slot
    closure_open = {n.label for _, n in iter_nodes(closure)
                    if n.rule is NjRule.ASSUME and n.label is not None}
    closure_bound = set()
    for _, node in iter_nodes(closure):
        for slot in node.slot_labels:
            closure_bound |= slot
    rename_open = {lab: gensym.fresh()
                   for lab in sorted((closure_open - closure_bound) & bound_in_a)}

    def rename(node: Argument) -> Argument:
        label = node.label
        if label in rename_open:
            label = rename_open[label]
        return Argument(node.conclusion, node.rule,
                        tuple(rename(p) for p in node.premises),
                        label=label, discharges=node.discharges)

    safe_closure = rename(closure) if rename_open else closure

    def rebuild(node: Argument, env: frozenset[str]) -> Argument:
        if node.rule is NjRule.ASSUME:
            if node.conclusion == f and (node.label is None or node.label not in env):
                return _freshen_bound(safe_closure, gensym)
            return node
        return Argument(
            node.conclusion, node.rule,
            tuple(rebuild(p, env | node.slot_labels[i])
                  for i, p in enumerate(node.premises)),
            discharges=node.discharges)

    return rebuild(a, frozenset())


def cut(closures: Sequence[Argument], a: Argument,
        targets: Optional[Sequence[Formula]] = None) -> Argument:
    """Extend `a` by grafting each closure above every open leaf of its
    target formula (by default the closure's own conclusion)."""
    closures = list(closures)
    if targets is None:
        targets = [c.conclusion for c in closures]
    if len(targets) != len(closures):
        raise CutError("need one target per closure")
    if len(set(targets)) != len(targets):
        raise CutError("duplicate cut targets")
    opens = open_assumptions(a)
    used = set(all_labels(a))
    for c in closures:
        used |= all_labels(c)
    gensym = _Gensym(used)
    out = a
    for closure, target in zip(closures, targets):
        if closure.conclusion != target:
            raise CutError(
                f"closure concludes {print_formula(closure.conclusion)}, "
                f"cannot close {print_formula(target)}")
        if target not in opens:
            raise CutError(
                f"{print_formula(target)} is not an open assumption")
        out = graft(out, target, closure, gensym)
    return out


# ----------------------------------------------------------------------
# Text rendering and exchange format
# ----------------------------------------------------------------------

def format_argument(a: Argument, indent: str = "") -> str:
    """Indented one-node-per-line rendering, leaves first."""
    lines = []
    for prem in a.premises:
        lines.append(format_argument(prem, indent + "  "))
    head = f"{indent}{a.conclusion}   [{a.rule}"
    if a.label is not None:
        head += f" #{a.label}"
    if any(a.discharges):
        head += " discharging " + ", ".join(
            "{" + ", ".join(sorted(s)) + "}" if s else "{}"
            for s in a.discharges)
    head += "]"
    lines.append(head)
    return "\n".join(lines)


def _rule_to_text(r: RuleId) -> str:
    return str(r)


def _rule_from_text(text: str) -> RuleId:
    if text.startswith("Base:"):
        return BaseRuleRef(int(text.split(":", 1)[1]))
    for r in NjRule:
        if r.value == text:
            return r
    raise ProofError(f"unknown rule name {text!r}")


def argument_to_obj(a: Argument) -> dict:
    obj: dict = {"rule": _rule_to_text(a.rule),
                 "conclusion": print_formula(a.conclusion)}
    if a.label is not None:
        obj["label"] = a.label
    if any(a.discharges):
        obj["discharges"] = [sorted(s) for s in a.discharges]
    if a.premises:
        obj["premises"] = [argument_to_obj(p) for p in a.premises]
    return obj


def argument_from_obj(obj: dict) -> Argument:
    rule = _rule_from_text(obj["rule"])
    conclusion = parse_formula(obj["conclusion"])
    premises = tuple(argument_from_obj(p) for p in obj.get("premises", []))
    discharges = tuple(frozenset(s) for s in obj["discharges"]) \
        if "discharges" in obj else ()
    return Argument(conclusion, rule, premises,
                    label=obj.get("label"), discharges=discharges)


def dump_argument(a: Argument) -> str:
    """Proof exchange format: a JSON tree, one object per node, with
    fields rule / conclusion / label / discharges / premises.  Loading
    then dumping reproduces the text bit-exactly."""
    return json.dumps(argument_to_obj(a), indent=2) + "\n"


def load_argument(text: str) -> Argument:
    return argument_from_obj(json.loads(text))


# ----------------------------------------------------------------------
# Bare-tree import
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class BareTree:
    """A rule-free argument per the plain tree definition: formulas with
    leaves optionally marked discharged."""

    formula: Formula
    children: tuple["BareTree", ...] = ()
    discharged: bool = False


class AmbiguityError(ProofError):
    pass


def infer_rules(t: BareTree, base: Optional["Base"] = None) -> Argument:
    """Best-effort rule inference for a bare formula tree.

    Enumerates every rule annotation consistent with the node shapes,
    binding each discharged leaf at the nearest dominating node whose
    schema admits it.  Fails loudly when no annotation covers all the
    discharge marks or when more than one does.
    """
    import itertools

    gensym = _Gensym()

    def candidates(f: Formula, concls: tuple[Formula, ...]) -> list[RuleId]:
        found: list[RuleId] = []
        if not concls:
            return [NjRule.ASSUME]
        if len(concls) == 2 and isinstance(f, And) \
                and (f.left, f.right) == concls:
            found.append(NjRule.AND_I)
        if len(concls) == 1 and isinstance(concls[0], And):
            if concls[0].left == f:
                found.append(NjRule.AND_E1)
            if concls[0].right == f:
                found.append(NjRule.AND_E2)
        if len(concls) == 1 and isinstance(f, Or):
            if f.left == concls[0]:
                found.append(NjRule.OR_I1)
            if f.right == concls[0]:
                found.append(NjRule.OR_I2)
        if len(concls) == 1 and isinstance(f, Imp) and f.right == concls[0]:
            found.append(NjRule.IMP_I)
        if len(concls) == 2 and isinstance(concls[1], Imp) \
                and concls[1].left == concls[0] and concls[1].right == f:
            found.append(NjRule.IMP_E)
        if len(concls) == 3 and isinstance(concls[0], Or) \
                and concls[1] == f and concls[2] == f:
            found.append(NjRule.OR_E)
        if len(concls) == 1 and concls[0] == BOT and f != BOT:
            found.append(NjRule.BOT_E)
        if base is not None and isinstance(f, AtomRef):
            for i, schema in enumerate(base.ordered_rules):
                if schema.conclusion == f.atom \
                        and len(schema.premises) == len(concls) \
                        and all(AtomRef(p.atom) == c
                                for p, c in zip(schema.premises, concls)):
                    found.append(BaseRuleRef(i))
        return found

    def dangling(p: Argument) -> set[str]:
        bound = set()
        for _, n in iter_nodes(p):
            for slot in n.slot_labels:
                bound |= slot
        return {n.label for _, n in iter_nodes(p)
                if n.rule is NjRule.ASSUME and n.label is not None
                and n.label not in bound}

    def leaf_formula(p: Argument, lab: str) -> Formula:
        for _, n in iter_nodes(p):
            if n.rule is NjRule.ASSUME and n.label == lab:
                return n.conclusion
        raise AmbiguityError(f"lost label {lab}")

    def infer_discharges(r: RuleId, f: Formula,
                         prems: tuple[Argument, ...]) -> tuple[frozenset[str], ...]:
        if r is NjRule.IMP_I:
            slot_forms = [{f.left}]
        elif r is NjRule.OR_E:
            major = prems[0].conclusion
            slot_forms = [set(), {major.left}, {major.right}]
        elif isinstance(r, BaseRuleRef):
            schema = base.ordered_rules[r.index]
            slot_forms = [{AtomRef(h) for h in p.hypotheses}
                          for p in schema.premises]
        else:
            return ()
        slots = []
        for i, prem in enumerate(prems):
            slots.append(frozenset(
                lab for lab in dangling(prem)
                if leaf_formula(prem, lab) in slot_forms[i]))
        return tuple(slots)

    def builds(t: BareTree) -> list[Argument]:
        child_options = [builds(c) for c in t.children]
        outs: list[Argument] = []
        for combo in itertools.product(*child_options):
            concls = tuple(c.conclusion for c in combo)
            for r in candidates(t.formula, concls):
                if r is NjRule.ASSUME:
                    outs.append(assume(
                        t.formula, gensym.fresh() if t.discharged else None))
                else:
                    outs.append(Argument(
                        t.formula, r, combo,
                        discharges=infer_discharges(r, t.formula, combo)))
        return outs

    # only discharge-marked leaves carry labels here, so an annotation is
    # admissible exactly when no labeled leaf is left dangling
    complete = [arg for arg in builds(t) if not dangling(arg)]
    dedup = {canonical_relabel(a): a for a in complete}
    if not dedup:
        raise AmbiguityError(
            f"no rule annotation covers the discharge marks of "
            f"{print_formula(t.formula)}")
    if len(dedup) > 1:
        rules = sorted({str(a.rule) for a in dedup.values()})
        raise AmbiguityError(
            f"ambiguous annotation for {print_formula(t.formula)}: "
            f"{', '.join(rules)}")
    return next(iter(dedup.values()))
