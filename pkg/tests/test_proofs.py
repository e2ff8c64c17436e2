import pytest

from ptsem.bases import Base, parse_base
from ptsem.proofs import (
    AmbiguityError, Argument, BareTree, BaseRuleRef, CalculusMode, CutError,
    DischargeError, NjRule, alpha_equal, apply_rule, assume, canonical_relabel,
    check_derivation, cut, derivation_defect, dump_argument, infer_rules,
    load_argument, open_assumptions, well_labeled, witnesses,
)
from ptsem.syntax import (
    BOT, And, Imp, Or, atom, neg, parse_formula, parse_sequent, sequent,
)

p, q, r = atom("p"), atom("q"), atom("r")
NJ = CalculusMode.INTUITIONISTIC
MIN = CalculusMode.MINIMAL


def imp_i(body, antecedent, label):
    (out,) = apply_rule(NjRule.IMP_I, [body], other=antecedent, labels=[label])
    return out


def bot_to_bot():
    # the one-step derivation of bot -> bot, discharging its [bot] leaf
    return imp_i(assume(BOT, "x"), BOT, "x")


def conj_detour(left=p, right=q):
    # an I-rule immediately eliminated: AndE1(AndI(p, q))
    (pair,) = apply_rule(NjRule.AND_I, [assume(left), assume(right)])
    (out,) = apply_rule(NjRule.AND_E1, [pair])
    return out


def disjunctive_syllogism():
    # OrE over p|q with an EFQ step in the left branch, concluding q
    (bot_arg,) = apply_rule(NjRule.IMP_E, [assume(p, "a"), assume(neg(p))])
    (left,) = apply_rule(NjRule.BOT_E, [bot_arg], other=q)
    (out,) = apply_rule(NjRule.OR_E, [assume(Or(p, q)), left, assume(q, "b")],
                        labels=["a", "b"])
    return out


def test_open_assumptions():
    assert open_assumptions(assume(p)) == {p}
    assert open_assumptions(bot_to_bot()) == frozenset()
    assert open_assumptions(conj_detour()) == {p, q}
    assert open_assumptions(disjunctive_syllogism()) == {Or(p, q), neg(p)}


def test_open_assumptions_rejects_malformed_binding():
    # the same label bound by two nodes
    inner = imp_i(assume(p, "x"), p, "x")
    outer = Argument(Imp(p, inner.conclusion), NjRule.IMP_I, (inner,),
                     discharges=(frozenset({"x"}),))
    with pytest.raises(DischargeError) as e:
        open_assumptions(outer)
    assert e.value.label == "x"
    assert not well_labeled(outer)


def test_witnesses():
    assert witnesses(assume(p), sequent({p, q}, p))
    assert not witnesses(assume(p), sequent(set(), p))
    assert witnesses(disjunctive_syllogism(), parse_sequent("p|q, ~p : q"))


def test_apply_rule_examples():
    (a,) = apply_rule(NjRule.AND_I, [assume(p), assume(q)])
    assert a.conclusion == And(p, q)
    assert a.premises == (assume(p), assume(q))

    (b,) = apply_rule(NjRule.IMP_E, [assume(p), assume(Imp(p, q))])
    assert b.conclusion == q

    (c,) = apply_rule(NjRule.OR_I1, [assume(p)], other=q)
    assert c.conclusion == Or(p, q)


def test_apply_rule_schema_errors():
    with pytest.raises(Exception):
        apply_rule(NjRule.IMP_E, [assume(p), assume(q)])  # major not an imp
    with pytest.raises(Exception):
        apply_rule(NjRule.AND_E1, [assume(p)])
    with pytest.raises(Exception):
        apply_rule(NjRule.OR_I1, [assume(p)])  # missing the other disjunct
    # discharge label reuse across nested ImpI
    body = imp_i(assume(p, "x"), p, "x")
    with pytest.raises(DischargeError):
        apply_rule(NjRule.IMP_I, [body], other=p, labels=["x"])


def test_check_derivation():
    assert check_derivation(conj_detour())  # non-canonical but well-built
    assert check_derivation(bot_to_bot())
    assert check_derivation(disjunctive_syllogism())
    # a tree claiming q from p by a single unlabeled step
    bogus = Argument(q, NjRule.IMP_E, (assume(p),))
    assert not check_derivation(bogus)
    d = derivation_defect(bogus)
    assert d is not None and d.path == ()


def test_check_derivation_mode():
    ds = disjunctive_syllogism()
    assert check_derivation(ds, mode=NJ)
    assert not check_derivation(ds, mode=MIN)
    d = derivation_defect(ds, mode=MIN)
    assert "BotE" in d.reason


def test_base_rule_checking():
    base = parse_base("p => c\n")
    (ax,) = apply_rule(BaseRuleRef(0), [assume(p)], base=base)
    assert ax.conclusion == atom("c")
    assert check_derivation(ax, base)
    assert not check_derivation(ax, Base())  # no such rule in the empty base


def test_level2_base_rule_discharges_hypothesis():
    # rule (p > q) => c : its premise q may hypothesize p
    base = parse_base("(p > q) => c\np => q\n")
    idx = [str(r) for r in base.ordered_rules].index("(p > q) => c")
    qidx = [str(r) for r in base.ordered_rules].index("p => q")
    q_from_p = apply_rule(BaseRuleRef(qidx), [assume(p, "h")], base=base)
    (q_from_p,) = q_from_p
    (c_arg,) = apply_rule(BaseRuleRef(idx), [q_from_p], base=base,
                          labels=[("h",)])
    assert check_derivation(c_arg, base)
    assert open_assumptions(c_arg) == frozenset()


def test_cut_identity_on_leaf():
    closed = bot_to_bot()
    out = cut([closed], assume(Imp(BOT, BOT)))
    assert alpha_equal(out, closed)


def test_cut_closes_disjunctive_syllogism():
    ds = disjunctive_syllogism()
    base = parse_base("=> p\n")
    from ptsem.bases import derivation_in_base
    proof_p = derivation_in_base(base, frozenset(), atom("p").atom)
    (proof_pq,) = apply_rule(NjRule.OR_I1, [proof_p], other=q)
    # ~p has no closed proof here; close only the disjunction leaf
    out = cut([proof_pq], ds)
    assert out.conclusion == q
    assert open_assumptions(out) == {neg(p)}
    assert check_derivation(out, base)


def test_cut_open_assumption_equation():
    # closure with its own open assumption r
    (cl,) = apply_rule(NjRule.AND_E1, [assume(And(p, r))])
    host = apply_rule(NjRule.AND_I, [assume(p), assume(q)])
    (host,) = host
    out = cut([cl], host, targets=[p])
    assert open_assumptions(out) == {And(p, r), q}
    assert out.conclusion == And(p, q)


def test_cut_errors():
    with pytest.raises(CutError):
        cut([assume(p)], assume(q))  # q leaf, p closure: target mismatch
    closed = bot_to_bot()
    with pytest.raises(CutError):
        cut([assume(BOT)], closed)  # the bot leaf is discharged


def test_cut_grafted_closure_keeps_checking():
    # grafting a detour-producing closure above an ImpE major premise:
    # well-constructed but non-canonical
    from ptsem.reduction import is_canonical
    host = Argument(q, NjRule.IMP_E, (assume(p), assume(Imp(p, q))))
    (pair,) = apply_rule(NjRule.AND_I, [assume(Imp(p, q)), assume(r)])
    (detour_pq,) = apply_rule(NjRule.AND_E1, [pair])
    out = cut([detour_pq], host, targets=[Imp(p, q)])
    assert check_derivation(out)
    assert not is_canonical(out)


def test_alpha_invariance():
    a = imp_i(assume(p, "x"), p, "x")
    b = imp_i(assume(p, "y"), p, "y")
    assert a != b
    assert alpha_equal(a, b)
    assert canonical_relabel(a) == canonical_relabel(b)
    assert open_assumptions(a) == open_assumptions(b)


def test_exchange_format_roundtrip():
    for arg in (assume(p), bot_to_bot(), conj_detour(), disjunctive_syllogism()):
        text = dump_argument(arg)
        back = load_argument(text)
        assert back == arg
        assert dump_argument(back) == text


def test_exchange_format_golden(tmp_path):
    import pathlib
    golden = pathlib.Path(__file__).parent / "data" / "ds_proof.json"
    text = dump_argument(disjunctive_syllogism())
    assert text == golden.read_text()
    assert dump_argument(load_argument(golden.read_text())) == golden.read_text()


def test_infer_rules_bare_tree():
    t = BareTree(And(p, q), (BareTree(p), BareTree(q)))
    arg = infer_rules(t)
    assert arg.rule is NjRule.AND_I
    assert check_derivation(arg)

    # bot -> bot with its discharged [bot] leaf
    t2 = BareTree(Imp(BOT, BOT), (BareTree(BOT, discharged=True),))
    arg2 = infer_rules(t2)
    assert open_assumptions(arg2) == frozenset()

    # ambiguous: p | p from p could be OrI1 or OrI2
    with pytest.raises(AmbiguityError):
        infer_rules(BareTree(Or(p, p), (BareTree(p),)))
    # no rule at all
    with pytest.raises(AmbiguityError):
        infer_rules(BareTree(q, (BareTree(p),)))
