import itertools

import pytest

from ptsem.bases import EMPTY_BASE, enumerate_extensions, parse_base
from ptsem.proofs import (
    BaseRuleRef, CalculusMode, NjRule, check_derivation, iter_nodes,
    open_assumptions, witnesses,
)
from ptsem.prover import (
    BudgetExceededError, decide, derivation_for, proves, refute,
    verify_countermodel,
)
from ptsem.syntax import (
    BOT, And, Atom, Imp, Or, atom, enumerate_formulas, neg, parse_formula,
    parse_sequent, sequent,
)

NJ = CalculusMode.INTUITIONISTIC
MIN = CalculusMode.MINIMAL
p, q, r = atom("p"), atom("q"), atom("r")
PEIRCE = parse_formula("((p -> q) -> p) -> p")
LEM = parse_formula("p | ~p")


def test_disjunctive_syllogism_decided():
    v = proves(EMPTY_BASE, {Or(p, q), neg(p)}, q, NJ)
    assert v.decided


def test_peirce_refuted_with_countermodel():
    v = proves(EMPTY_BASE, set(), PEIRCE, NJ, countermodel_worlds=2)
    assert not v.decided
    assert v.countermodel is not None
    assert len(v.countermodel.worlds) == 2
    assert verify_countermodel(v.countermodel, EMPTY_BASE, set(), PEIRCE, NJ)


def test_axiom_base_proves_disjunction():
    base = parse_base("=> p\n")
    assert decide(base, set(), Or(p, q), NJ)
    assert not decide(EMPTY_BASE, set(), Or(p, q), NJ)


def test_derivation_for_identity():
    d = derivation_for(EMPTY_BASE, set(), Imp(p, p), NJ)
    assert d.rule is NjRule.IMP_I
    assert d.premises[0].rule is NjRule.ASSUME
    assert check_derivation(d)
    assert witnesses(d, sequent(set(), Imp(p, p)))


def test_derivation_for_disjunctive_syllogism():
    gamma = {Or(p, q), neg(p)}
    d = derivation_for(EMPTY_BASE, gamma, q, NJ)
    assert check_derivation(d, EMPTY_BASE, NJ)
    assert witnesses(d, sequent(gamma, q))
    # the paper's shape: OrE whose left branch passes through EFQ
    assert d.rule is NjRule.OR_E
    rules = {str(n.rule) for _, n in iter_nodes(d)}
    assert "BotE" in rules


def test_derivation_for_chained_base_rules():
    base = parse_base("=> p\np => q\n")
    d = derivation_for(base, set(), q, NJ)
    assert check_derivation(d, base)
    base_nodes = [n for _, n in iter_nodes(d) if isinstance(n.rule, BaseRuleRef)]
    assert len(base_nodes) == 2
    assert open_assumptions(d) == frozenset()


def test_refute_lem():
    m = refute(EMPTY_BASE, set(), LEM, 2)
    assert m is not None
    assert len(m.worlds) == 2
    assert verify_countermodel(m, EMPTY_BASE, set(), LEM)
    # root forces nothing, the successor forces p
    assert m.valuation[0] == frozenset()
    assert m.valuation[1] == {Atom("p")}


def test_refute_efq_unrefutable():
    assert refute(EMPTY_BASE, set(), Imp(BOT, p), 3) is None


def test_refute_respects_base_closure():
    base = parse_base("=> p\n")
    assert refute(base, set(), atom("p"), 3) is None
    m = refute(base, set(), q, 2)
    assert m is not None
    assert verify_countermodel(m, base, set(), q)


def test_refute_minimal_mode_uses_bot_atom():
    # with falsum inert, {bot} : p is refutable; with EFQ it is not
    m = refute(EMPTY_BASE, {BOT}, p, 2, mode=MIN)
    assert m is not None
    assert verify_countermodel(m, EMPTY_BASE, {BOT}, p, MIN)
    assert refute(EMPTY_BASE, {BOT}, p, 2, mode=NJ) is None


def test_mode_coherence():
    # minimal provability implies full provability; the converse fails
    # on disjunctive syllogism
    ds = parse_sequent("p|q, ~p : q")
    assert not decide(EMPTY_BASE, ds.context, ds.extract, MIN)
    assert decide(EMPTY_BASE, ds.context, ds.extract, NJ)
    assert not decide(EMPTY_BASE, {BOT}, p, MIN)
    assert decide(EMPTY_BASE, {BOT}, p, NJ)
    fs = enumerate_formulas(frozenset({Atom("p"), Atom("q")}), 2)
    for f in fs:
        for g in fs[:10]:
            if decide(EMPTY_BASE, {g}, f, MIN):
                assert decide(EMPTY_BASE, {g}, f, NJ)


def test_deduction_property():
    fs = enumerate_formulas(frozenset({Atom("p"), Atom("q")}), 2)
    base = parse_base("p => q\n")
    for f in fs:
        for g in fs[::3]:
            assert decide(base, {f}, g, NJ) == decide(base, set(), Imp(f, g), NJ)


def test_conjunction_property():
    fs = enumerate_formulas(frozenset({Atom("p"), Atom("q")}), 2)
    base = parse_base("=> p\n")
    for f in fs:
        for g in fs[::3]:
            assert decide(base, set(), And(f, g), NJ) == (
                decide(base, set(), f, NJ) and decide(base, set(), g, NJ))


def test_atom_conservativity():
    from ptsem.bases import derivable_atom
    from ptsem.syntax import AtomRef
    alphabet = frozenset({Atom("p"), Atom("q")})
    for base in enumerate_extensions(EMPTY_BASE, alphabet, 2, 1, level=2,
                                     max_hyps=1):
        for a in alphabet:
            want = derivable_atom(base, frozenset(), a)
            assert decide(base, set(), AtomRef(a), NJ) == want, (base, a)


def test_level2_base_in_search():
    # rule (p > q) => c plus p => q makes c provable outright
    base = parse_base("(p > q) => c\np => q\n")
    c = atom("c")
    assert decide(base, set(), c, NJ)
    d = derivation_for(base, set(), c, NJ)
    assert check_derivation(d, base)
    assert open_assumptions(d) == frozenset()
    # without the auxiliary rule, c needs the hypothesis to be met
    base2 = parse_base("(p > q) => c\n")
    assert not decide(base2, set(), c, NJ)
    assert decide(base2, {Imp(p, q)}, c, NJ)


def test_witnesses_check_on_random_tautologies():
    fs = enumerate_formulas(frozenset({Atom("p"), Atom("q")}), 2)
    base = parse_base("p => q\n")
    checked = 0
    for f in fs:
        for g in fs[::4]:
            if decide(base, {f}, g, NJ):
                d = derivation_for(base, {f}, g, NJ)
                assert check_derivation(d, base, NJ), (f, g)
                assert witnesses(d, sequent({f}, g))
                checked += 1
    assert checked > 50


def test_budget_exceeded():
    hard = parse_formula("((p -> q) -> p) -> ((q -> p) -> q) -> p & q")
    with pytest.raises(BudgetExceededError):
        decide(EMPTY_BASE, set(), hard, NJ, budget=3)


def test_budget_env_override(monkeypatch):
    from ptsem import prover
    fresh = parse_formula("((z1 -> z2) -> z1) -> z1")  # unmemoized sequent
    monkeypatch.setenv(prover.BUDGET_ENV_VAR, "2")
    with pytest.raises(BudgetExceededError):
        decide(EMPTY_BASE, set(), fresh, NJ)
    monkeypatch.delenv(prover.BUDGET_ENV_VAR)
    assert not decide(EMPTY_BASE, set(), fresh, NJ)


def test_certificate_coherence_mini():
    suite = ["p|q, ~p : q", ": ((p->q)->p)->p", ": p|~p", ": ~~p -> p",
             ": p -> p", ": bot -> p", "p & q : p", ": ~~(p | ~p)"]
    for text in suite:
        s = parse_sequent(text)
        v = proves(EMPTY_BASE, s.context, s.extract, NJ, witness=True,
                   countermodel_worlds=3)
        assert (v.witness is None) != (v.countermodel is None)
        if v.witness is not None:
            assert check_derivation(v.witness, EMPTY_BASE, NJ)
            assert witnesses(v.witness, s)
        else:
            assert verify_countermodel(v.countermodel, EMPTY_BASE,
                                       s.context, s.extract, NJ)
