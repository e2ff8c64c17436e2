import pytest

from ptsem.proofs import (
    NjRule, alpha_equal, apply_rule, assume, canonical_relabel,
    check_derivation, open_assumptions,
)
from ptsem.reduction import (
    DIRECT, PERMUTATIVE, NormalizationBudgetError, ends_with_intro,
    find_detours, is_canonical, normalize, reduce_step,
    reduction_graph_normal_forms,
)
from ptsem.syntax import BOT, And, Imp, Or, atom, neg

p, q, r = atom("p"), atom("q"), atom("r")


def imp_i(body, antecedent, label):
    (out,) = apply_rule(NjRule.IMP_I, [body], other=antecedent, labels=[label])
    return out


def bot_to_bot():
    return imp_i(assume(BOT, "x"), BOT, "x")


def conj_detour():
    (pair,) = apply_rule(NjRule.AND_I, [assume(p), assume(q)])
    (out,) = apply_rule(NjRule.AND_E1, [pair])
    return out


def imp_detour():
    # ImpE(q, ImpI [a:q] p -> ... ) : proof of p from {q, p} via a detour
    body = assume(p)
    major = imp_i(body, q, "a")            # q -> p, vacuous discharge
    (out,) = apply_rule(NjRule.IMP_E, [assume(q), major])
    return out


def detour_tower(height):
    # closed proof of p -> p wrapped in `height` stacked ->-detours
    d = imp_i(assume(p, "w"), p, "w")
    for k in range(height):
        btb = imp_i(assume(BOT, f"x{k}"), BOT, f"x{k}")
        wrap = imp_i(d, Imp(BOT, BOT), f"v{k}")
        (d,) = apply_rule(NjRule.IMP_E, [btb, wrap])
    return d


def test_find_detours_conjunction():
    sites = find_detours(conj_detour())
    assert len(sites) == 1
    assert sites[0].path == ()
    assert sites[0].connective == "&"
    assert sites[0].kind == DIRECT


def test_find_detours_on_canonical():
    assert find_detours(assume(p)) == []
    assert find_detours(bot_to_bot()) == []
    assert is_canonical(bot_to_bot())


def test_find_detours_implication():
    sites = find_detours(imp_detour())
    assert [s.connective for s in sites] == ["->"]


def test_reduce_conjunction_detour():
    out = reduce_step(conj_detour(), find_detours(conj_detour())[0])
    assert out == assume(p)


def test_reduce_imp_detour_grafts():
    d = imp_detour()
    out = reduce_step(d, find_detours(d)[0])
    # vacuous discharge: the minor proof of q is dropped entirely
    assert out == assume(p)
    assert open_assumptions(out) <= open_assumptions(d)


def test_reduce_imp_detour_with_use():
    body = assume(p, "a")
    major = imp_i(body, p, "a")            # p -> p discharging its leaf
    (d,) = apply_rule(NjRule.IMP_E, [assume(p), major])
    out = normalize(d)
    assert out == assume(p)


def test_or_detour():
    # OrE over an OrI1 injection of q into q | r; the right branch
    # discharges its [r] hypothesis vacuously
    minor1 = assume(q, "l1")
    (inj,) = apply_rule(NjRule.OR_I1, [assume(q)], other=r)
    (d,) = apply_rule(NjRule.OR_E, [inj, minor1, assume(q)],
                      labels=["l1", "l2"])
    sites = find_detours(d)
    assert [s.connective for s in sites] == ["|"]
    out = normalize(d)
    assert out == assume(q)


def test_permutative_conversion():
    dis = assume(Or(And(p, q), And(p, q)))
    ore = apply_rule(NjRule.OR_E,
                     [dis, assume(And(p, q), "m1"), assume(And(p, q), "m2")],
                     labels=["m1", "m2"])
    (ore,) = ore
    (d,) = apply_rule(NjRule.AND_E1, [ore])
    sites = find_detours(d)
    assert [s.kind for s in sites] == [PERMUTATIVE]
    out = normalize(d)
    assert out.rule is NjRule.OR_E
    assert out.conclusion == p
    assert check_derivation(out)
    assert is_canonical(out)
    assert open_assumptions(out) == {Or(And(p, q), And(p, q))}


def test_botE_permutation():
    (be,) = apply_rule(NjRule.BOT_E, [assume(BOT)], other=And(p, q))
    (d,) = apply_rule(NjRule.AND_E1, [be])
    out = normalize(d)
    assert out.rule is NjRule.BOT_E
    assert out.conclusion == p


def test_normalize_tower():
    for h in (1, 2, 3):
        d = detour_tower(h)
        assert not is_canonical(d)
        out = normalize(d)
        assert is_canonical(out)
        assert out.conclusion == d.conclusion
        assert open_assumptions(out) <= open_assumptions(d)
        assert check_derivation(out)
    assert normalize(bot_to_bot()) == bot_to_bot()


def test_all_strategies_confluent_small():
    cases = [conj_detour(), imp_detour(), detour_tower(1), detour_tower(2)]
    for d in cases:
        nfs = reduction_graph_normal_forms(d)
        assert len(nfs) == 1
        assert canonical_relabel(normalize(d)) in nfs


def test_budget():
    with pytest.raises(NormalizationBudgetError):
        normalize(detour_tower(3), budget=1)


def test_ends_with_intro():
    assert ends_with_intro(bot_to_bot())
    assert not ends_with_intro(assume(p))
    # closed normal proofs of compound formulas end with an introduction
    closed = normalize(detour_tower(2))
    assert ends_with_intro(closed)


def test_subject_preservation():
    d = detour_tower(2)
    while True:
        sites = find_detours(d)
        if not sites:
            break
        nxt = reduce_step(d, sites[0])
        assert nxt.conclusion == d.conclusion
        assert open_assumptions(nxt) <= open_assumptions(d)
        assert check_derivation(nxt)
        d = nxt
