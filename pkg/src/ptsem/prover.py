"""Decision procedure for consequence in NJ extended by a base.

The search is backward, in a contraction-free sequent presentation of
IPL (the four-way implication-left split), so it terminates without
loop checking.  Base rules enter through the atomic saturation engine:
the axiom case accepts any atomic goal derivable from the atomic part
of the context, and an implication whose atomic antecedent is so
derivable may be fired.  Minimal mode drops EFQ and treats falsum as an
inert atom.

Witnesses are reconstructed as genuine NJ/BaseRule argument trees.  The
refutation oracle searches base-closed Kripke models exhaustively up to
a world bound; it is deliberately independent of the search so the two
can certify each other.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional

from .bases import Base, atom_closure, derivable_atom, derivation_in_base
from .proofs import (
    Argument, BaseRuleRef, CalculusMode, NjRule, _freshen_bound, _Gensym,
    assume, bind_open_leaves, graft,
)
from .syntax import (
    And, Atom, AtomRef, BOT, Bot, Formula, Imp, Or, atoms_of, print_formula,
)

DEFAULT_NODE_BUDGET = 10 ** 6
BUDGET_ENV_VAR = "PTSEM_BUDGET"


def default_budget() -> int:
    raw = os.environ.get(BUDGET_ENV_VAR)
    return int(raw) if raw else DEFAULT_NODE_BUDGET


class BudgetExceededError(RuntimeError):
    pass


_fkey = lru_cache(maxsize=None)(print_formula)


def _ctx_atoms(ctx: frozenset[Formula]) -> frozenset[Atom]:
    return frozenset(f.atom for f in ctx if isinstance(f, AtomRef))


# ----------------------------------------------------------------------
# Kripke models (test oracle; the calculus itself never consults them)
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class KripkeModel:
    """Finite rooted poset with a monotone, base-closed valuation.

    World 0 is the root.  `le` is the full reflexive-transitive order.
    `bot_worlds` realizes falsum-as-an-atom for minimal mode; it stays
    empty in intuitionistic mode.
    """

    worlds: tuple[int, ...]
    le: frozenset[tuple[int, int]]
    valuation: tuple[frozenset[Atom], ...]
    base_closure: bool = True
    bot_worlds: frozenset[int] = frozenset()

    def above(self, w: int) -> list[int]:
        return [v for v in self.worlds if (w, v) in self.le]

    def forces(self, w: int, f: Formula) -> bool:
        if isinstance(f, Bot):
            return w in self.bot_worlds
        if isinstance(f, AtomRef):
            return f.atom in self.valuation[w]
        if isinstance(f, And):
            return self.forces(w, f.left) and self.forces(w, f.right)
        if isinstance(f, Or):
            return self.forces(w, f.left) or self.forces(w, f.right)
        if isinstance(f, Imp):
            return all(self.forces(v, f.right) for v in self.above(w)
                       if self.forces(v, f.left))
        raise TypeError(f"not a formula: {f!r}")

    def describe(self) -> str:
        lines = [f"worlds: {len(self.worlds)} (root 0)"]
        strict = sorted((a, b) for (a, b) in self.le if a != b)
        lines.append("order: " + (", ".join(f"{a}<{b}" for a, b in strict)
                                  or "discrete"))
        for w in self.worlds:
            val = ", ".join(sorted(a.name for a in self.valuation[w]))
            extra = " bot" if w in self.bot_worlds else ""
            lines.append(f"world {w}: {{{val}}}{extra}")
        return "\n".join(lines)


def verify_countermodel(model: KripkeModel, base: Base,
                        gamma: Iterable[Formula], phi: Formula,
                        mode: CalculusMode = CalculusMode.INTUITIONISTIC) -> bool:
    """Re-check a countermodel from first principles: order shape,
    persistence, base closure, and the forcing conditions."""
    gamma = frozenset(gamma)
    ws = model.worlds
    if ws != tuple(range(len(ws))) or not ws:
        return False
    le = model.le
    if any((w, w) not in le for w in ws):
        return False
    if any((a, b) in le and (b, c) in le and (a, c) not in le
           for a in ws for b in ws for c in ws):
        return False
    if any((a, b) in le and (b, a) in le and a != b for a in ws for b in ws):
        return False
    if any((0, w) not in le for w in ws):
        return False
    for (a, b) in le:
        if not model.valuation[a] <= model.valuation[b]:
            return False
        if a in model.bot_worlds and b not in model.bot_worlds:
            return False
    if mode.allows_efq and model.bot_worlds:
        return False
    if model.base_closure:
        atoms = base.atoms.union(*(atoms_of(f) for f in gamma),
                                 atoms_of(phi),
                                 *(model.valuation or [frozenset()]))
        for w in ws:
            closure = atom_closure(base, model.valuation[w]) & atoms
            if closure != model.valuation[w]:
                return False
    if any(not model.forces(0, g) for g in gamma):
        return False
    return not model.forces(0, phi)


@lru_cache(maxsize=None)
def _rooted_posets(n: int) -> tuple[frozenset[tuple[int, int]], ...]:
    """All partial orders on 0..n-1 with 0 as minimum, as full
    reflexive-transitive relations, in a fixed order."""
    pairs = [(i, j) for i in range(n) for j in range(n) if i < j]
    out = []
    for choice in itertools.product((0, 1, 2), repeat=len(pairs)):
        rel = {(w, w) for w in range(n)}
        for (i, j), c in zip(pairs, choice):
            if c == 1:
                rel.add((i, j))
            elif c == 2:
                rel.add((j, i))
        if any((a, b) in rel and (b, c) in rel and (a, c) not in rel
               for a in range(n) for b in range(n) for c in range(n)):
            continue
        if any((0, w) not in rel for w in range(n)):
            continue
        out.append(frozenset(rel))
    return tuple(out)


def refute(base: Base, gamma: Iterable[Formula], phi: Formula, bound: int,
           mode: CalculusMode = CalculusMode.INTUITIONISTIC
           ) -> Optional[KripkeModel]:
    """A base-closed Kripke countermodel with at most `bound` worlds, if
    one exists: the root forces gamma but not phi.  Exhaustive and
    deterministic; absence of a model is a normal outcome."""
    gamma = sorted(frozenset(gamma), key=_fkey)
    alphabet = frozenset().union(base.atoms, atoms_of(phi),
                                 *(atoms_of(g) for g in gamma))
    closed = []
    for k in range(len(alphabet) + 1):
        for combo in itertools.combinations(sorted(alphabet), k):
            s = frozenset(combo)
            if atom_closure(base, s) & alphabet == s:
                closed.append(s)
    for n in range(1, bound + 1):
        for le in _rooted_posets(n):
            for val in itertools.product(closed, repeat=n):
                if any((a, b) in le and not val[a] <= val[b]
                       for a in range(n) for b in range(n) if a != b):
                    continue
                if mode.allows_efq:
                    bot_options = [frozenset()]
                else:
                    bot_options = sorted(
                        (frozenset(c) for k in range(n + 1)
                         for c in itertools.combinations(range(n), k)
                         if all((a, b) not in le or a not in frozenset(c)
                                or b in frozenset(c)
                                for a in range(n) for b in range(n))),
                        key=lambda s: (len(s), sorted(s)))
                for bots in bot_options:
                    model = KripkeModel(tuple(range(n)), le, val,
                                        base_closure=True, bot_worlds=bots)
                    if all(model.forces(0, g) for g in gamma) \
                            and not model.forces(0, phi):
                        return model
    return None


# ----------------------------------------------------------------------
# The backward search
# ----------------------------------------------------------------------

class _Search:
    """One decision engine per (base, mode), with cross-call memo.

    Level-1 bases are handled entirely by the atomic saturation engine:
    at an irreducible context, an atom is provable exactly when it is in
    the closure of the context's atoms.  Level-2 rules additionally fire
    as choice-point sequent rules, with obligations Σi, Γ ⊢ pi, because
    their minors may use the context's implications under the discharged
    hypotheses.  Those re-entries can revisit a sequent, so they are
    guarded by an in-progress stack read as a least fixed point: a
    sequent currently under computation counts as unproven, and results
    tainted by such a block are not memoized.
    """

    def __init__(self, base: Base, mode: CalculusMode):
        self.base = base
        self.efq = mode.allows_efq
        self.level2 = any(r.level == 2 for r in base.rules)
        self.memo: dict[tuple[frozenset[Formula], Formula], bool] = {}
        self.build_memo: dict[tuple[frozenset[Formula], Formula], Argument] = {}
        self.stack: set = set()
        self.block_hits: list = []
        self.build_stack: set = set()
        self.nodes = 0
        self.budget = DEFAULT_NODE_BUDGET

    def _tick(self):
        self.nodes += 1
        if self.nodes > self.budget:
            raise BudgetExceededError(
                f"search exceeded {self.budget} nodes")

    def _satisfied(self, antecedent: Formula,
                   ctx: frozenset[Formula]) -> bool:
        if antecedent == BOT:
            if BOT in ctx:
                return True
            return self.level2 and not self.efq and self.decide(ctx, BOT)
        if derivable_atom(self.base, _ctx_atoms(ctx), antecedent.atom):
            return True
        return self.level2 and self.decide(ctx, antecedent)

    def decide(self, ctx: frozenset[Formula], goal: Formula) -> bool:
        key = (ctx, goal)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if key in self.stack:
            self.block_hits.append(key)
            return False
        self._tick()
        self.stack.add(key)
        mark = len(self.block_hits)
        try:
            out = self._step(ctx, goal)
        except BaseException:
            del self.block_hits[mark:]
            raise
        finally:
            self.stack.discard(key)
        sub = self.block_hits[mark:]
        del self.block_hits[mark:]
        foreign = [k for k in sub if k != key]
        self.block_hits.extend(foreign)
        if out or not foreign:
            self.memo[key] = out
        return out

    def _step(self, ctx: frozenset[Formula], goal: Formula) -> bool:
        if self.efq and BOT in ctx:
            return True
        # invertible left rules
        for f in sorted(ctx, key=_fkey):
            if isinstance(f, And):
                return self.decide(ctx - {f} | {f.left, f.right}, goal)
            if isinstance(f, Or):
                return self.decide(ctx - {f} | {f.left}, goal) \
                    and self.decide(ctx - {f} | {f.right}, goal)
            if isinstance(f, Imp):
                a, b = f.left, f.right
                if isinstance(a, And):
                    return self.decide(
                        ctx - {f} | {Imp(a.left, Imp(a.right, b))}, goal)
                if isinstance(a, Or):
                    return self.decide(
                        ctx - {f} | {Imp(a.left, b), Imp(a.right, b)}, goal)
                if a == BOT and self.efq:
                    return self.decide(ctx - {f}, goal)
                if isinstance(a, (AtomRef, Bot)) and self._satisfied(a, ctx):
                    return self.decide(ctx - {f} | {b}, goal)
        # invertible right rules
        if isinstance(goal, And):
            return self.decide(ctx, goal.left) and self.decide(ctx, goal.right)
        if isinstance(goal, Imp):
            return self.decide(ctx | {goal.left}, goal.right)
        # axioms
        if isinstance(goal, AtomRef) and \
                derivable_atom(self.base, _ctx_atoms(ctx), goal.atom):
            return True
        if goal == BOT and BOT in ctx:
            return True
        # choice points
        if isinstance(goal, Or):
            if self.decide(ctx, goal.left) or self.decide(ctx, goal.right):
                return True
        for f in sorted(ctx, key=_fkey):
            if isinstance(f, Imp) and isinstance(f.left, Imp):
                rest = ctx - {f}
                d, b = f.left.right, f.right
                if self.decide(rest | {Imp(d, b)}, f.left) \
                        and self.decide(rest | {b}, goal):
                    return True
        if self.level2 and isinstance(goal, AtomRef):
            for schema in self.base.ordered_rules:
                if schema.conclusion != goal.atom:
                    continue
                if all(self.decide(ctx | {AtomRef(h) for h in prem.hypotheses},
                                   AtomRef(prem.atom))
                       for prem in schema.premises):
                    return True
        return False

    # ------------------------------------------------------------------
    # Witness reconstruction, mirroring the search rule by rule
    # ------------------------------------------------------------------

    def build(self, ctx: frozenset[Formula], goal: Formula,
              gensym: _Gensym) -> Optional[Argument]:
        key = (ctx, goal)
        if key in self.build_memo:
            return _freshen_bound(self.build_memo[key], gensym)
        if key in self.build_stack:
            return None  # circular support; the caller tries another route
        self._tick()
        self.build_stack.add(key)
        try:
            out = self._build_step(ctx, goal, gensym)
        finally:
            self.build_stack.discard(key)
        if out is not None:
            self.build_memo[key] = out
            return _freshen_bound(out, gensym)
        return None

    def _antecedent_witness(self, ctx: frozenset[Formula], at: Formula,
                            gensym: _Gensym) -> Optional[Argument]:
        """A witness for an atomic (or falsum) implication antecedent."""
        if at == BOT and BOT in ctx:
            return assume(BOT)
        if isinstance(at, AtomRef) and \
                derivable_atom(self.base, _ctx_atoms(ctx), at.atom):
            d = derivation_in_base(self.base, _ctx_atoms(ctx), at.atom)
            return _freshen_bound(d, gensym)
        if self.level2:
            return self.build(ctx, at, gensym)
        return None

    def _imp_i(self, body: Argument, antecedent: Formula,
               gensym: _Gensym) -> Argument:
        lab = gensym.fresh()
        bound, _ = bind_open_leaves(body, antecedent, lab)
        return Argument(Imp(antecedent, body.conclusion), NjRule.IMP_I,
                        (bound,), discharges=(frozenset({lab}),))

    def _build_step(self, ctx: frozenset[Formula], goal: Formula,
                    gensym: _Gensym) -> Optional[Argument]:
        if self.efq and BOT in ctx:
            if goal == BOT:
                return assume(BOT)
            return Argument(goal, NjRule.BOT_E, (assume(BOT),))
        for f in sorted(ctx, key=_fkey):
            if isinstance(f, And):
                w = self.build(ctx - {f} | {f.left, f.right}, goal, gensym)
                if w is None:
                    return None
                w = graft(w, f.left,
                          Argument(f.left, NjRule.AND_E1, (assume(f),)), gensym)
                if f.right != f.left:
                    w = graft(w, f.right,
                              Argument(f.right, NjRule.AND_E2, (assume(f),)),
                              gensym)
                return w
            if isinstance(f, Or):
                w1 = self.build(ctx - {f} | {f.left}, goal, gensym)
                if w1 is None:
                    return None
                w2 = self.build(ctx - {f} | {f.right}, goal, gensym)
                if w2 is None:
                    return None
                l1, l2 = gensym.fresh(), gensym.fresh()
                w1, _ = bind_open_leaves(w1, f.left, l1)
                w2, _ = bind_open_leaves(w2, f.right, l2)
                return Argument(goal, NjRule.OR_E, (assume(f), w1, w2),
                                discharges=(frozenset(), frozenset({l1}),
                                            frozenset({l2})))
            if isinstance(f, Imp):
                a, b = f.left, f.right
                if isinstance(a, And):
                    curried = Imp(a.left, Imp(a.right, b))
                    w = self.build(ctx - {f} | {curried}, goal, gensym)
                    if w is None:
                        return None
                    lc, ld = gensym.fresh(), gensym.fresh()
                    pair = Argument(a, NjRule.AND_I,
                                    (assume(a.left, lc), assume(a.right, ld)))
                    body = Argument(b, NjRule.IMP_E, (pair, assume(f)))
                    inner = Argument(Imp(a.right, b), NjRule.IMP_I, (body,),
                                     discharges=(frozenset({ld}),))
                    closure = Argument(curried, NjRule.IMP_I, (inner,),
                                       discharges=(frozenset({lc}),))
                    return graft(w, curried, closure, gensym)
                if isinstance(a, Or):
                    f1, f2 = Imp(a.left, b), Imp(a.right, b)
                    w = self.build(ctx - {f} | {f1, f2}, goal, gensym)
                    if w is None:
                        return None
                    for part, inj, disjunct in ((f1, NjRule.OR_I1, a.left),
                                                (f2, NjRule.OR_I2, a.right)):
                        lab = gensym.fresh()
                        injected = Argument(a, inj, (assume(disjunct, lab),))
                        body = Argument(b, NjRule.IMP_E, (injected, assume(f)))
                        closure = Argument(part, NjRule.IMP_I, (body,),
                                           discharges=(frozenset({lab}),))
                        w = graft(w, part, closure, gensym)
                    return w
                if a == BOT and self.efq:
                    return self.build(ctx - {f}, goal, gensym)
                if isinstance(a, (AtomRef, Bot)):
                    minor = self._antecedent_witness(ctx, a, gensym)
                    if minor is None:
                        continue
                    w = self.build(ctx - {f} | {b}, goal, gensym)
                    if w is None:
                        return None
                    closure = Argument(b, NjRule.IMP_E, (minor, assume(f)))
                    return graft(w, b, closure, gensym)
        if isinstance(goal, And):
            w1 = self.build(ctx, goal.left, gensym)
            if w1 is None:
                return None
            w2 = self.build(ctx, goal.right, gensym)
            if w2 is None:
                return None
            return Argument(goal, NjRule.AND_I, (w1, w2))
        if isinstance(goal, Imp):
            w = self.build(ctx | {goal.left}, goal.right, gensym)
            if w is None:
                return None
            return self._imp_i(w, goal.left, gensym)
        if isinstance(goal, AtomRef) and \
                derivable_atom(self.base, _ctx_atoms(ctx), goal.atom):
            d = derivation_in_base(self.base, _ctx_atoms(ctx), goal.atom)
            return _freshen_bound(d, gensym)
        if goal == BOT and BOT in ctx:
            return assume(BOT)
        if isinstance(goal, Or):
            w = self.build(ctx, goal.left, gensym)
            if w is not None:
                return Argument(goal, NjRule.OR_I1, (w,))
            w = self.build(ctx, goal.right, gensym)
            if w is not None:
                return Argument(goal, NjRule.OR_I2, (w,))
        for f in sorted(ctx, key=_fkey):
            if isinstance(f, Imp) and isinstance(f.left, Imp):
                rest = ctx - {f}
                c, d, b = f.left.left, f.left.right, f.right
                db = Imp(d, b)
                w1 = self.build(rest | {db}, f.left, gensym)
                if w1 is None:
                    continue
                w2 = self.build(rest | {b}, goal, gensym)
                if w2 is None:
                    continue
                # D -> B from (C -> D) -> B: assume D, weaken to C -> D,
                # then apply the hypothesis
                ld = gensym.fresh()
                weak = self._imp_i(assume(d, ld), c, gensym)  # binds nothing
                mid = Argument(b, NjRule.IMP_E, (weak, assume(f)))
                z = Argument(db, NjRule.IMP_I, (mid,),
                             discharges=(frozenset({ld}),))
                w1 = graft(w1, db, z, gensym)
                x = Argument(b, NjRule.IMP_E, (w1, assume(f)))
                return graft(w2, b, x, gensym)
        if self.level2 and isinstance(goal, AtomRef):
            for idx, schema in enumerate(self.base.ordered_rules):
                if schema.conclusion != goal.atom:
                    continue
                minors, slots = [], []
                for prem in schema.premises:
                    sub = ctx | {AtomRef(h) for h in prem.hypotheses}
                    w = self.build(sub, AtomRef(prem.atom), gensym)
                    if w is None:
                        break
                    labels = set()
                    for h in sorted(prem.hypotheses):
                        lab = gensym.fresh()
                        w, n = bind_open_leaves(w, AtomRef(h), lab)
                        if n:
                            labels.add(lab)
                    minors.append(w)
                    slots.append(frozenset(labels))
                else:
                    return Argument(goal, BaseRuleRef(idx), tuple(minors),
                                    discharges=tuple(slots))
        return None


_SEARCHES: dict[tuple[Base, CalculusMode], _Search] = {}


def _search_for(base: Base, mode: CalculusMode) -> _Search:
    key = (base, mode)
    s = _SEARCHES.get(key)
    if s is None:
        s = _SEARCHES[key] = _Search(base, mode)
    return s


# ----------------------------------------------------------------------
# Public interface
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ProverVerdict:
    """decided is the provability verdict; at most one certificate is
    attached, and only on request."""

    decided: bool
    witness: Optional[Argument] = None
    countermodel: Optional[KripkeModel] = None


def decide(base: Base, gamma: Iterable[Formula], phi: Formula,
           mode: CalculusMode = CalculusMode.INTUITIONISTIC,
           budget: Optional[int] = None) -> bool:
    """Does an NJ+base derivation witness gamma : phi?"""
    search = _search_for(base, mode)
    search.budget = budget if budget is not None else default_budget()
    search.nodes = 0
    return search.decide(frozenset(gamma), phi)


def derivation_for(base: Base, gamma: Iterable[Formula], phi: Formula,
                   mode: CalculusMode = CalculusMode.INTUITIONISTIC,
                   budget: Optional[int] = None) -> Optional[Argument]:
    """An explicit NJ+base argument witnessing gamma : phi, when provable."""
    gamma = frozenset(gamma)
    if not decide(base, gamma, phi, mode, budget):
        return None
    search = _search_for(base, mode)
    return search.build(gamma, phi, _Gensym())


def proves(base: Base, gamma: Iterable[Formula], phi: Formula,
           mode: CalculusMode = CalculusMode.INTUITIONISTIC, *,
           witness: bool = False, countermodel_worlds: int = 0,
           budget: Optional[int] = None) -> ProverVerdict:
    """Decide gamma : phi over the base; optionally attach a checked
    certificate (a derivation when provable, a Kripke countermodel when
    refuted and a world bound is given)."""
    gamma = frozenset(gamma)
    ok = decide(base, gamma, phi, mode, budget)
    w = cm = None
    if ok and witness:
        w = derivation_for(base, gamma, phi, mode, budget)
    if not ok and countermodel_worlds:
        cm = refute(base, gamma, phi, countermodel_worlds, mode)
    return ProverVerdict(ok, w, cm)
