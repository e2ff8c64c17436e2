"""Detour detection, the reduction relation, and normalization.

A direct detour is a formula obtained by an introduction rule and then
used as the major premise of the matching elimination.  On top of the
direct contractions we include the permutative conversions that push an
elimination through the minor premises of OrE (and through BotE): the
closed-normal-proofs-end-with-an-introduction property fails without
them once OrE is in play.

Simplification conversions (vacuous-discharge cleanup) are not applied;
normal forms may retain vacuous ImpI discharges.

The strategy is deterministic leftmost-innermost: the first site in
post-order.  Reduction is normalizing, so the step budget only guards
against bugs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

from .proofs import (
    Argument, NjRule, _Gensym, _freshen_bound, _rename_labels, all_labels,
)

DEFAULT_STEP_BUDGET = 50_000

DIRECT = "direct-detour"
PERMUTATIVE = "permutative"

_MAJOR_INDEX = {
    NjRule.AND_E1: 0,
    NjRule.AND_E2: 0,
    NjRule.OR_E: 0,
    NjRule.IMP_E: 1,
    NjRule.BOT_E: 0,
}

_DETOUR_CONNECTIVE = {
    NjRule.AND_E1: "&",
    NjRule.AND_E2: "&",
    NjRule.OR_E: "|",
    NjRule.IMP_E: "->",
}


class NormalizationBudgetError(RuntimeError):
    """The step budget ran out; reduction is normalizing, so this
    signals a bug rather than a long computation."""


@dataclass(frozen=True)
class DetourSite:
    path: tuple[int, ...]
    connective: str  # one of "&", "|", "->", or "bot" for BotE permutations
    kind: str        # DIRECT or PERMUTATIVE

    def __str__(self):
        where = ".".join(map(str, self.path)) or "root"
        return f"{self.kind}({self.connective}) at {where}"


def _site_at(node: Argument, path: tuple[int, ...]) -> Optional[DetourSite]:
    r = node.rule
    if r not in _MAJOR_INDEX:
        return None
    major = node.premises[_MAJOR_INDEX[r]]
    if r in (NjRule.AND_E1, NjRule.AND_E2) and major.rule is NjRule.AND_I:
        return DetourSite(path, "&", DIRECT)
    if r is NjRule.IMP_E and major.rule is NjRule.IMP_I:
        return DetourSite(path, "->", DIRECT)
    if r is NjRule.OR_E and major.rule in (NjRule.OR_I1, NjRule.OR_I2):
        return DetourSite(path, "|", DIRECT)
    if major.rule is NjRule.OR_E:
        return DetourSite(path, "|", PERMUTATIVE)
    if major.rule is NjRule.BOT_E:
        return DetourSite(path, "bot", PERMUTATIVE)
    return None


def find_detours(a: Argument) -> list[DetourSite]:
    """All direct detour and permutative conversion sites, in
    leftmost-innermost (post-)order."""
    sites: list[DetourSite] = []

    def walk(node: Argument, path: tuple[int, ...]):
        for i, prem in enumerate(node.premises):
            walk(prem, path + (i,))
        site = _site_at(node, path)
        if site:
            sites.append(site)

    walk(a, ())
    return sites


def is_canonical(a: Argument) -> bool:
    return not find_detours(a)


def ends_with_intro(a: Argument) -> bool:
    return a.rule in (NjRule.AND_I, NjRule.OR_I1, NjRule.OR_I2, NjRule.IMP_I)


def _replace_at(a: Argument, path: tuple[int, ...], new: Argument) -> Argument:
    if not path:
        return new
    i = path[0]
    prems = list(a.premises)
    prems[i] = _replace_at(prems[i], path[1:], new)
    return Argument(a.conclusion, a.rule, tuple(prems), label=a.label,
                    discharges=a.discharges)


def _graft_labeled(body: Argument, labels: frozenset[str],
                   closure: Argument, gensym: _Gensym) -> Argument:
    """Replace each leaf marked by one of `labels` with a freshened copy
    of `closure`; a label marking no leaves drops the closure."""

    def rebuild(node: Argument) -> Argument:
        if node.rule is NjRule.ASSUME:
            if node.label in labels:
                return _freshen_bound(closure, gensym)
            return node
        return Argument(node.conclusion, node.rule,
                        tuple(rebuild(p) for p in node.premises),
                        discharges=node.discharges)

    return rebuild(body)


def _contract(node: Argument, gensym: _Gensym) -> Argument:
    """The contractum of the redex rooted at `node`."""
    r = node.rule
    major = node.premises[_MAJOR_INDEX[r]]

    # direct detours
    if r is NjRule.AND_E1 and major.rule is NjRule.AND_I:
        return major.premises[0]
    if r is NjRule.AND_E2 and major.rule is NjRule.AND_I:
        return major.premises[1]
    if r is NjRule.IMP_E and major.rule is NjRule.IMP_I:
        minor = node.premises[0]
        return _graft_labeled(major.premises[0], major.slot_labels[0],
                              minor, gensym)
    if r is NjRule.OR_E and major.rule in (NjRule.OR_I1, NjRule.OR_I2):
        branch = 1 if major.rule is NjRule.OR_I1 else 2
        return _graft_labeled(node.premises[branch],
                              node.slot_labels[branch],
                              major.premises[0], gensym)

    # permutative conversions: E(..., OrE(D, C1, C2), ...) becomes
    # OrE(D, E(..., C1, ...), E(..., C2, ...)); for BotE majors the
    # outer elimination collapses into BotE itself.
    if major.rule is NjRule.BOT_E:
        return Argument(node.conclusion, NjRule.BOT_E, major.premises)
    if major.rule is NjRule.OR_E:
        mi = _MAJOR_INDEX[r]

        def push(branch: int, freshen: bool) -> Argument:
            prems = list(node.premises)
            prems[mi] = major.premises[branch]
            slots = list(node.slot_labels)
            slots[mi] = frozenset()
            if freshen:
                # the second copy duplicates the outer minors and the
                # outer binder labels; rename both
                rename = {lab: gensym.fresh() for s in slots for lab in sorted(s)}
                for i in range(len(prems)):
                    if i != mi:
                        prems[i] = _rename_labels(
                            _freshen_bound(prems[i], gensym), rename)
                slots = [frozenset(rename.get(l, l) for l in s) for s in slots]
            return Argument(node.conclusion, r, tuple(prems),
                            discharges=tuple(slots))

        left = push(1, freshen=False)
        right = push(2, freshen=True)
        return Argument(node.conclusion, NjRule.OR_E,
                        (major.premises[0], left, right),
                        discharges=major.discharges)

    raise ValueError(f"no redex at this node: {node.rule}")


def reduce_step(a: Argument, site: DetourSite) -> Argument:
    """One contraction at the given site.  Conclusion is preserved and
    open assumptions never grow."""
    node = a.at(site.path)
    if _site_at(node, site.path) != site:
        raise ValueError(f"stale detour site {site}")
    gensym = _Gensym(all_labels(a))
    return _replace_at(a, site.path, _contract(node, gensym))


def normalize(a: Argument, budget: int = DEFAULT_STEP_BUDGET,
              trace: Optional[list[DetourSite]] = None) -> Argument:
    """Reduce at the first leftmost-innermost site until canonical."""
    steps = 0
    while True:
        sites = find_detours(a)
        if not sites:
            return a
        if steps >= budget:
            raise NormalizationBudgetError(
                f"no normal form within {budget} steps")
        site = sites[0]
        if trace is not None:
            trace.append(site)
        a = reduce_step(a, site)
        steps += 1


def reduction_graph_normal_forms(a: Argument, limit: int = 100_000) -> set:
    """Normal forms reachable by every reduction strategy, compared up to
    canonical relabeling.  Brute force; only for small arguments."""
    from .proofs import canonical_relabel

    seen = set()
    normal = set()
    stack = [a]
    while stack:
        x = stack.pop()
        key = canonical_relabel(x)
        if key in seen:
            continue
        seen.add(key)
        if len(seen) > limit:
            raise RuntimeError("reduction graph too large")
        sites = find_detours(x)
        if not sites:
            normal.add(key)
            continue
        for site in sites:
            stack.append(reduce_step(x, site))
    return normal
