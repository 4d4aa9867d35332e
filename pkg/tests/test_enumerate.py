"""Exhaustive small-space enumeration: soundness, completeness, censuses.

Oracles: class counts over the tiny (1,2) spaces are verified against a
Burnside orbit count computed from first principles in the test (the space
is closed under state relabeling, and relabel-fixed tables are counted
directly); the deeper stage counts rest on library primitives (checked in
their own suites) plus facts pinned here: the one-state non-degenerate
census is exactly {identity, flip}, and the two-state injective survivors
are the xor-differentiators, whose non-invertibility has a pencil-and-paper
proof (their functional inverses never forget their state, so no
synchronizing machine realizes them).
"""

import itertools
import random

import pytest

from dvn.words import WordD
from dvn.machine import (
    Diagram,
    behavior_equal,
    injectivity,
    is_complete_response,
    is_nondegenerate,
    is_synchronizing,
    minimize,
    core,
)
from dvn.outer import CoreElement, canonicalize, identity_core, multiply, sig
from dvn.enumerate import (
    FILTER_ORDER,
    EnumerationSpec,
    SpecTooLarge,
    census,
    enumerate_elements,
    passes_filters,
)

from helpers import FIG3, rand_d1_diagram


def w12(s):
    return WordD.parse(s, 1, 2)


# ----------------------------------------------------------------- spec type


def test_spec_validation():
    with pytest.raises(ValueError):
        EnumerationSpec(d=0, n=2, max_states=1)
    with pytest.raises(ValueError):
        EnumerationSpec(d=1, n=1, max_states=1)
    with pytest.raises(ValueError):
        EnumerationSpec(d=1, n=2, max_states=0)
    with pytest.raises(ValueError):
        EnumerationSpec(d=1, n=2, max_states=1, filters=("non-degenerate",))
    with pytest.raises(ValueError):
        EnumerationSpec(d=1, n=2, max_states=1, filters=())
    with pytest.raises(ValueError):
        EnumerationSpec(
            d=1, n=2, max_states=1, filters=("well-defined", "synchronizing")
        )


def test_spec_modes():
    raw = EnumerationSpec(d=1, n=2, max_states=1, filters=FILTER_ORDER[:3])
    assert not raw.emits_core_elements
    deep = EnumerationSpec(d=1, n=2, max_states=1, filters=FILTER_ORDER[:7])
    assert deep.emits_core_elements
    assert EnumerationSpec(d=1, n=2, max_states=1).emits_core_elements


# ------------------------------------------------------------ tiny raw space


def test_one_state_binary_nondegenerate_is_identity_and_flip():
    spec = EnumerationSpec(
        d=1, n=2, max_states=1, max_out_len=1, filters=FILTER_ORDER[:2]
    )
    els = enumerate_elements(spec)
    assert len(els) == 2
    tables = {
        tuple(tuple(w.coords[0] for w in row) for row in T.outs) for T in els
    }
    assert tables == {
        (((0,), (1,)),),  # identity
        (((1,), (0,)),),  # flip
    }


def test_census_one_state_binary_length_one():
    spec = EnumerationSpec(
        d=1, n=2, max_states=1, max_out_len=1, filters=FILTER_ORDER[:2]
    )
    counts = census(spec)
    # 3 output choices (empty, 0, 1) per letter: 9 well-defined tables;
    # non-degenerate survivors are exactly identity and flip -- the all-empty
    # and single-empty tables have silent cycles, and (0,0), (1,1) are
    # constant maps
    assert counts == {"well-defined": 9, "non-degenerate": 2}


def _burnside_two_state_classes(n_choices: int) -> int:
    """Orbit count for two-state (1,2) tables under state relabeling."""
    total = 16 * n_choices**4
    # tables fixed by the swap: delta[1] determined by delta[0] (4 ways),
    # output rows equal (n_choices^2 ways)
    fixed = 4 * n_choices**2
    return (total + fixed) // 2


def test_census_well_defined_matches_burnside():
    for max_len, n_choices in [(1, 3), (2, 7)]:
        spec = EnumerationSpec(
            d=1,
            n=2,
            max_states=2,
            max_out_len=max_len,
            filters=FILTER_ORDER[:1],
        )
        counts = census(spec)
        want = n_choices**2 + _burnside_two_state_classes(n_choices)
        assert counts["well-defined"] == want


def test_census_full_chain_small_binary():
    counts = census(EnumerationSpec(d=1, n=2, max_states=2, max_out_len=1))
    assert counts == {
        "well-defined": 675,
        "non-degenerate": 198,
        "synchronizing": 46,
        "core": 28,
        "minimal": 26,
        "complete-response": 12,
        "injective-states": 4,
        "invertible": 2,
    }


def test_census_counts_non_increasing():
    counts = census(EnumerationSpec(d=1, n=2, max_states=2, max_out_len=1))
    values = list(counts.values())
    assert values == sorted(values, reverse=True)
    assert list(counts) == list(FILTER_ORDER)


# --------------------------------------------------- deep pipeline survivors


def test_binary_injective_survivors_are_known():
    spec = EnumerationSpec(
        d=1, n=2, max_states=2, max_out_len=2, filters=FILTER_ORDER[:7]
    )
    els = enumerate_elements(spec)
    assert len(els) == 4
    assert all(isinstance(E, CoreElement) for E in els)
    flip = canonicalize(Diagram((1, 2), (1, 2), [[0, 0]], [[w12("1"), w12("0")]]))
    diff = canonicalize(
        Diagram(
            (1, 2),
            (1, 2),
            [[0, 1], [0, 1]],
            [[w12("0"), w12("1")], [w12("1"), w12("0")]],
        )
    )
    diff_flipped = canonicalize(
        Diagram(
            (1, 2),
            (1, 2),
            [[0, 1], [0, 1]],
            [[w12("1"), w12("0")], [w12("0"), w12("1")]],
        )
    )
    assert set(els) == {identity_core(1, 2), flip, diff, diff_flipped}


def test_binary_invertible_survivors_are_identity_and_flip():
    spec = EnumerationSpec(d=1, n=2, max_states=2, max_out_len=2)
    els = enumerate_elements(spec)
    flip = canonicalize(Diagram((1, 2), (1, 2), [[0, 0]], [[w12("1"), w12("0")]]))
    assert set(els) == {identity_core(1, 2), flip}


def test_ternary_one_state_elements_are_letter_permutations():
    els = enumerate_elements(EnumerationSpec(d=1, n=3, max_states=1))
    assert len(els) == 6
    perms = set()
    for E in els:
        row = E.diagram.outs[0]
        assert all(w.total_length == 1 for w in row)
        perms.add(tuple(w.coords[0][0] for w in row))
    assert perms == set(itertools.permutations(range(3)))
    assert all(sig(E) == 1 for E in els)


def test_ternary_two_state_census_frozen():
    els = enumerate_elements(
        EnumerationSpec(d=1, n=3, max_states=2, filters=FILTER_ORDER[:7])
    )
    assert len(els) == 96
    by_states = {1: 0, 2: 0}
    for E in els:
        by_states[E.n_states] += 1
    assert by_states == {1: 6, 2: 90}
    # the one-state survivors coincide with the one-state enumeration
    ones = enumerate_elements(EnumerationSpec(d=1, n=3, max_states=1))
    assert set(ones) <= set(els)


def test_emitted_elements_satisfy_library_invariants():
    """Survivors re-checked against the library predicates at full caps."""
    els = enumerate_elements(
        EnumerationSpec(d=1, n=2, max_states=2, filters=FILTER_ORDER[:7])
    )
    for E in els:
        T = E.diagram
        assert is_nondegenerate(T)
        assert is_synchronizing(T)
        assert core(T).n_states == T.n_states
        assert minimize(T)[0].n_states == T.n_states
        assert is_complete_response(T)
        assert all(
            injectivity(T, q).status == "yes" for q in range(T.n_states)
        )


def test_enumeration_deterministic():
    spec = EnumerationSpec(d=1, n=3, max_states=1)
    a = enumerate_elements(spec)
    b = enumerate_elements(spec)
    assert a == b
    assert isinstance(a, tuple)


def test_elements_pairwise_distinct():
    els = enumerate_elements(
        EnumerationSpec(d=1, n=2, max_states=2, filters=FILTER_ORDER[:7])
    )
    assert len(set(els)) == len(els)


# -------------------------------------------------------------- passes_filters


def test_fig3_class_passes_full_chain_at_four_states():
    spec = EnumerationSpec(d=1, n=2, max_states=4, max_out_len=2)
    assert passes_filters(canonicalize(FIG3).diagram, spec)


def test_fig3_raw_table_passes_and_respects_state_bound():
    spec = EnumerationSpec(d=1, n=2, max_states=4, max_out_len=2)
    assert passes_filters(FIG3, spec)
    tight = EnumerationSpec(d=1, n=2, max_states=2, max_out_len=2)
    assert not passes_filters(FIG3, tight)  # four states exceed the bound


def test_passes_filters_domain_and_bounds():
    spec = EnumerationSpec(d=1, n=2, max_states=1, max_out_len=2)
    assert not passes_filters(identity_core(1, 3).diagram, spec)
    two_state = identity_core(1, 2).diagram
    wide = Diagram(
        (1, 2), (1, 2), [[0, 0]], [[w12("000"), w12("1")]]
    )
    assert not passes_filters(wide, spec)  # output longer than the cap


def test_completeness_against_passes_filters_seeded():
    """Random tables inside the bounds: passes_filters iff class enumerated."""
    spec = EnumerationSpec(
        d=1, n=2, max_states=2, max_out_len=2, filters=FILTER_ORDER[:7]
    )
    pool = set(enumerate_elements(spec))
    rng = random.Random(23)
    hits = 0
    for _ in range(400):
        T = rand_d1_diagram(rng, rng.choice([1, 2]), n=2, max_out=2)
        if passes_filters(T, spec):
            hits += 1
            assert canonicalize(T) in pool
    assert hits  # the sample must exercise the positive branch


def test_survivor_tables_pass_their_own_spec():
    spec = EnumerationSpec(
        d=1, n=2, max_states=2, max_out_len=2, filters=FILTER_ORDER[:7]
    )
    for E in enumerate_elements(spec):
        assert passes_filters(E.diagram, spec)


# -------------------------------------------------------------- work budget


def test_spec_too_large_full_binary_four_states():
    spec = EnumerationSpec(d=1, n=2, max_states=4, max_out_len=2, budget=20_000)
    with pytest.raises(SpecTooLarge):
        enumerate_elements(spec)


def test_spec_too_large_raw_mode():
    spec = EnumerationSpec(
        d=1, n=3, max_states=3, max_out_len=2, filters=FILTER_ORDER[:2]
    )
    with pytest.raises(SpecTooLarge):
        enumerate_elements(spec)


def test_budget_is_respected():
    spec = EnumerationSpec(
        d=1, n=3, max_states=2, filters=FILTER_ORDER[:7], budget=500
    )
    with pytest.raises(SpecTooLarge):
        enumerate_elements(spec)


# ------------------------------------------------------------ raw-mode output


def test_raw_mode_emits_diagrams_up_to_relabeling():
    spec = EnumerationSpec(
        d=1, n=2, max_states=1, max_out_len=1, filters=FILTER_ORDER[:2]
    )
    els = enumerate_elements(spec)
    assert all(isinstance(T, Diagram) for T in els)
    ident = Diagram((1, 2), (1, 2), [[0, 0]], [[w12("0"), w12("1")]])
    assert any(behavior_equal(T, ident, 6) for T in els)


def test_raw_mode_respects_filter_prefix():
    # with only well-definedness selected, degenerate tables survive
    spec = EnumerationSpec(
        d=1, n=2, max_states=1, max_out_len=1, filters=FILTER_ORDER[:1]
    )
    els = enumerate_elements(spec)
    assert len(els) == 9
    assert any(not is_nondegenerate(T) for T in els)


# ---------------------------------------------------------- product behavior


def test_multiplying_enumerated_elements_stays_lawful():
    els = enumerate_elements(
        EnumerationSpec(d=1, n=2, max_states=2, filters=FILTER_ORDER[:7])
    )
    ident = identity_core(1, 2)
    for A in els:
        assert multiply(A, ident) == A
        assert multiply(ident, A) == A
    # sig is constantly 0 over n = 2 (the target group is trivial)
    assert all(sig(A) == 0 for A in els)
