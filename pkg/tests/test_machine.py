"""Machine layer: evaluation, composition, products, minimization, images,
complete response, degeneracy, synchronization, injectivity, behavior probes.

Oracles are brute force (tests/helpers.py) or hand-computed frozen values;
the library's optimized paths are always checked against one of those.
"""

import itertools
import random

import pytest

from dvn.machine import (
    BoundExceeded,
    CapExceeded,
    Diagram,
    IncoherentOutput,
    IncoherentTransition,
    MachineHandle,
    NotSynchronizing,
    behavior_equal,
    complete_response,
    compose,
    core,
    distinct_states_lower_bound,
    freeze_handle,
    gens,
    identity_diagram,
    image,
    image_all,
    injectivity,
    is_complete_response,
    is_nondegenerate,
    is_synchronizing,
    level1_squares,
    minimal_for_homeomorphism,
    minimize,
    outputs_agree,
    probe_words,
    product,
    reachable_states,
    strong_iso,
    synchronizing_level,
    trim,
)
from dvn.machine import ComposedHandle, ProductHandle
from dvn.words import ConeSet, WordD, lcp_all

from helpers import (
    level_outputs_coneset,
    make_fig3_left,
    rand_d1_diagram,
    rand_injective_d1_diagram,
    rand_word,
    run_interleaved,
)


def w1(s: str, n: int = 2) -> WordD:
    return WordD.parse(s, 1, n)


FIG3 = make_fig3_left()
Q0, A, C, B = 0, 1, 2, 3


# ---------------------------------------------------------------- validation


def test_identity_diagram_runs_words_through():
    rng = random.Random(7)
    for d, n in [(1, 2), (2, 2), (1, 3), (3, 2)]:
        ident = identity_diagram(d, n)
        for _ in range(20):
            w = rand_word(rng, d, n, 4)
            state, out = ident.run(0, w)
            assert state == 0 and out == w
            assert ident.eval_prefix(w) == w


def test_any_total_d1_table_is_valid():
    rng = random.Random(11)
    for _ in range(50):
        T = rand_d1_diagram(rng, rng.randrange(1, 5), n=rng.choice([2, 3]))
        T.validate()  # no error


def test_incoherent_output_detected():
    # one-state d=2 machine whose two coordinate outputs do not commute:
    # (0,eps)*(1,eps) = (01,eps) but (1,eps)*(0,eps) = (10,eps)
    eps = WordD.epsilon(2, 2)
    o00 = WordD(2, 2, ((0,), ()))
    o01 = WordD(2, 2, ((1,), ()))
    outs = [[o00, o01, o01, o00]]  # coord0: letters 0,1; coord1: letters 0,1
    with pytest.raises(IncoherentOutput):
        Diagram((2, 2), (2, 2), [[0, 0, 0, 0]], outs)
    assert eps.is_epsilon


def test_incoherent_transition_detected():
    # coord-0 letter-0 swaps the two states; coord-1 letter-0 maps both to 1.
    # Reading 0@0 then 0@1 from state 0 gives 1; the other order gives 0.
    eps = WordD.epsilon(2, 2)
    trans = [
        [1, 0, 1, 0],  # state 0: 0@0 -> 1, 1@0 -> 0, 0@1 -> 1, 1@1 -> 0
        [0, 1, 1, 1],  # state 1: 0@0 -> 0, 1@0 -> 1, 0@1 -> 1, 1@1 -> 1
    ]
    outs = [[eps] * 4, [eps] * 4]
    with pytest.raises(IncoherentTransition):
        Diagram((2, 2), (2, 2), trans, outs)


def test_products_of_d1_machines_are_coherent():
    rng = random.Random(13)
    for _ in range(10):
        f = rand_d1_diagram(rng, 2, n=2)
        g = rand_d1_diagram(rng, 3, n=2)
        P = product([f, g])
        P.validate()  # no error


# ---------------------------------------------------------------- fig3 behavior


def test_fig3_single_block_runs():
    # reading 0 then 1 from q0 emits 0 then 01
    state, out = FIG3.run(Q0, w1("01"))
    assert state == Q0 and out == w1("001")
    # three zeros then a one come back unchanged
    state, out = FIG3.run(Q0, w1("0001"))
    assert state == Q0 and out == w1("0001")


def test_fig3_swaps_leading_zero_blocks_of_length_one_and_two():
    def s(k: int) -> int:
        return {1: 2, 2: 1}.get(k, k)

    for n0 in range(1, 4):
        for m0 in range(1, 3):
            for n1 in range(1, 4):
                word = "0" * n0 + "1" * m0 + "0" * n1 + "1"
                expect = "0" * s(n0) + "1" * m0 + "0" * s(n1) + "1"
                assert FIG3.eval_prefix(w1(word)) == w1(expect)


# ---------------------------------------------------------------- transducer law


def test_transducer_law_random_d1():
    rng = random.Random(17)
    for _ in range(60):
        T = rand_d1_diagram(rng, rng.randrange(1, 4), n=rng.choice([2, 3]))
        q = rng.randrange(T.n_states)
        s = rand_word(rng, 1, T.domain[1], 4)
        t = rand_word(rng, 1, T.domain[1], 4)
        mid, out_s = T.run(q, s)
        end, out_t = T.run(mid, t)
        end2, out_st = T.run(q, s * t)
        assert end2 == end and out_st == out_s * out_t


def test_transducer_law_random_d2_products():
    rng = random.Random(19)
    for _ in range(40):
        P = product([rand_d1_diagram(rng, 2), rand_d1_diagram(rng, 2)])
        q = rng.randrange(P.n_states)
        s = rand_word(rng, 2, 2, 3)
        t = rand_word(rng, 2, 2, 3)
        mid, out_s = P.run(q, s)
        end, out_t = P.run(mid, t)
        end2, out_st = P.run(q, s * t)
        assert end2 == end and out_st == out_s * out_t


def test_run_order_independence_on_coherent_machines():
    rng = random.Random(23)
    for _ in range(30):
        P = product([rand_d1_diagram(rng, 2), rand_d1_diagram(rng, 3)])
        q = rng.randrange(P.n_states)
        w = rand_word(rng, 2, 2, 4)
        expect = P.run(q, w)
        for _ in range(3):
            assert run_interleaved(P, q, w, rng) == expect


# ---------------------------------------------------------------- compose


def test_compose_diagrams_matches_lazy_handle():
    rng = random.Random(29)
    for _ in range(25):
        A = rand_d1_diagram(rng, 2, n=2, m=2)
        B = rand_d1_diagram(rng, 2, n=2, m=3)
        D = compose(A, B)
        assert isinstance(D, Diagram)
        D.validate()
        H = ComposedHandle(A, B)
        assert behavior_equal(D, H, 5)


def test_compose_with_identity_is_behaviorally_neutral():
    rng = random.Random(31)
    ident = identity_diagram(1, 2)
    for _ in range(10):
        A = rand_d1_diagram(rng, 3, n=2, m=2)
        assert behavior_equal(compose(A, ident), A, 6)


def test_compose_cross_alphabet_output_prefix_property():
    rng = random.Random(37)
    for _ in range(25):
        A = rand_d1_diagram(rng, 2, n=2, m=3)
        B = rand_d1_diagram(rng, 2, n=3, m=2)
        D = compose(A, B)
        for _ in range(12):
            w = rand_word(rng, 1, 2, 6)
            via_a = A.run(A.base, w)[1]
            direct = D.eval_prefix(w)
            staged = B.run(B.base, via_a)[1]
            assert direct.is_prefix_of(staged)


def test_compose_signature_mismatch_raises():
    from dvn.words import AlphabetMismatch

    A = rand_d1_diagram(random.Random(1), 2, n=2, m=3)
    B = rand_d1_diagram(random.Random(2), 2, n=2, m=2)
    with pytest.raises(AlphabetMismatch):
        compose(A, B)


def test_fig5_like_three_stage_composition_types():
    # (1,4) -> (2,2) one-state splitter composed with a (2,2) product machine
    hi = [WordD(2, 2, ((x >> 1,), ())) for x in range(4)]
    lo = [WordD(2, 2, ((), (x & 1,))) for x in range(4)]
    outs = [[WordD(2, 2, ((x >> 1,), (x & 1,))) for x in range(4)]]
    T = Diagram((1, 4), (2, 2), [[0, 0, 0, 0]], outs)
    assert hi and lo
    P = product([identity_diagram(1, 2), identity_diagram(1, 2)])
    D = compose(T, P)
    assert D.domain == (1, 4) and D.codomain == (2, 2)
    got = D.eval_prefix(WordD.parse("02", 1, 4))
    assert got == WordD.parse("(01,00)", 2, 2)


# ---------------------------------------------------------------- product


def test_product_eval_is_componentwise():
    rng = random.Random(41)
    for _ in range(20):
        f = rand_d1_diagram(rng, 2, n=2)
        g = rand_d1_diagram(rng, 3, n=2)
        P = product([f, g])
        for _ in range(10):
            wf = rand_word(rng, 1, 2, 4)
            wg = rand_word(rng, 1, 2, 4)
            w = WordD(2, 2, (wf.coords[0], wg.coords[0]))
            out = P.eval_prefix(w)
            assert out.coords[0] == f.eval_prefix(wf).coords[0]
            assert out.coords[1] == g.eval_prefix(wg).coords[0]


def test_product_of_identities_is_identity():
    P = product([identity_diagram(1, 2), identity_diagram(1, 2)])
    assert behavior_equal(P, identity_diagram(2, 2), 4)


def test_product_state_set_is_full_cartesian():
    P = product([FIG3, FIG3])
    assert P.n_states == 16
    P.validate()


def test_product_handle_matches_product_diagram():
    rng = random.Random(43)
    f = rand_d1_diagram(rng, 2)
    g = rand_d1_diagram(rng, 2)
    assert behavior_equal(ProductHandle([f, g]), product([f, g]), 4)


# ---------------------------------------------------------------- minimize


def fig3_with_duplicate_state() -> Diagram:
    """FIG3 plus a behavioral clone of state `a`, wired in from q0."""
    trans = [list(r) for r in FIG3.trans]
    outs = [list(r) for r in FIG3.outs]
    trans.append(list(FIG3.trans[A]))  # clone of a
    outs.append(list(FIG3.outs[A]))
    trans[Q0][0] = 4  # q0 reads 0 into the clone instead of a
    names = list(FIG3.names) + ["a2"]
    return Diagram((1, 2), (1, 2), trans, outs, base=0, names=names)


def test_minimize_merges_duplicate_state():
    T = fig3_with_duplicate_state()
    M, phi = minimize(T)
    assert M.n_states == 4
    assert phi[A] == phi[4]  # the two copies of `a` share a class
    assert behavior_equal(T, M, 8)


def test_minimize_is_idempotent_and_returns_identity_map_when_minimal():
    M, phi = minimize(FIG3)
    assert M.n_states == 4
    assert phi == (0, 1, 2, 3)
    M2, phi2 = minimize(M)
    assert M2 == M and phi2 == (0, 1, 2, 3)


def test_minimize_map_is_a_strong_homomorphism():
    rng = random.Random(47)
    for _ in range(30):
        T = rand_d1_diagram(rng, rng.randrange(2, 6), n=2)
        M, phi = minimize(T)
        width = T.domain[0] * T.domain[1]
        for q in range(T.n_states):
            for g in range(width):
                assert M.trans[phi[q]][g] == phi[T.trans[q][g]]
                assert M.outs[phi[q]][g] == T.outs[q][g]
        assert phi[T.base] == M.base
        assert behavior_equal(T, M, 6)
        M2, _ = minimize(M)
        assert M2 == M


def test_minimize_quotients_unreachable_duplicates_too():
    # two identity-behaving states, one unreachable: still merged
    eps_out = [[w1("0"), w1("1")], [w1("0"), w1("1")]]
    T = Diagram((1, 2), (1, 2), [[0, 0], [1, 1]], eps_out, base=0)
    M, phi = minimize(T)
    assert M.n_states == 1 and phi == (0, 0)


def test_minimized_states_pairwise_distinct_under_probing():
    rng = random.Random(53)
    for _ in range(15):
        T = rand_d1_diagram(rng, rng.randrange(2, 6), n=2)
        M, _ = minimize(T)
        probes = probe_words(1, 2, 8, cap=1024)
        sigs = [tuple(M.run(q, w)[1] for w in probes) for q in range(M.n_states)]
        assert len(set(sigs)) == M.n_states


# ---------------------------------------------------------------- images


def test_image_of_identity_is_full_space():
    for d, n in [(1, 2), (2, 2), (1, 3)]:
        img = image(identity_diagram(d, n))
        assert img == ConeSet.full(d, n)


def test_fig3_images_frozen():
    imgs = image_all(FIG3)
    full = ConeSet.full(1, 2)
    assert imgs[Q0] == full
    assert imgs[A] == full
    assert imgs[B] == full
    assert imgs[C] == ConeSet(1, 2, [w1("00"), w1("1")])


def test_image_matches_depth_unfolding_oracle():
    # on machines whose images stabilize quickly, the level-k output cones
    # equal the image exactly once k passes the stabilization depth
    for T, q, k in [
        (FIG3, Q0, 6),
        (FIG3, A, 6),
        (FIG3, C, 6),
        (identity_diagram(1, 2), 0, 3),
        (identity_diagram(2, 2), 0, 3),
    ]:
        assert level_outputs_coneset(T, q, k) == image(T, q)


def test_image_contained_in_output_cones_on_random_injectives():
    rng = random.Random(59)
    for _ in range(10):
        T = rand_injective_d1_diagram(rng, rng.randrange(1, 4), n=2)
        img = image(T, T.base)
        bound = level_outputs_coneset(T, T.base, 4)
        assert img.union(bound) == bound  # img subset of bound


def test_image_cap_exceeded_on_nonclopen_image():
    # letter doubling: the image is the (closed, not open) set of doubled
    # sequences, so the fixpoint approximants shrink forever
    T = Diagram(
        (1, 2),
        (1, 2),
        [[0, 0]],
        [[w1("00"), w1("11")]],
        base=0,
    )
    with pytest.raises(CapExceeded):
        image(T, 0, depth_cap=12)


def test_ssig_image_recursion_over_three_letters():
    # ssig(image(q)) = sum over level-1 squares of ssig(image(next)) mod n-1
    rng = random.Random(61)
    machines = [identity_diagram(1, 3)]
    prepend0 = Diagram(
        (1, 3),
        (1, 3),
        [[1, 1, 1], [1, 1, 1]],
        [
            [WordD.parse("00", 1, 3), WordD.parse("01", 1, 3), WordD.parse("02", 1, 3)],
            [WordD.parse("0", 1, 3), WordD.parse("1", 1, 3), WordD.parse("2", 1, 3)],
        ],
    )
    machines.append(prepend0)
    for _ in range(8):
        machines.append(rand_injective_d1_diagram(rng, rng.randrange(1, 4), n=3))
    for T in machines:
        assert is_nondegenerate(T)
        imgs = image_all(T)
        for q in range(T.n_states):
            rhs = 0
            for u in level1_squares(1, 3):
                rhs += imgs[T.run(q, u)[0]].ssig()
            assert imgs[q].ssig() == rhs % 2


# ---------------------------------------------------------------- complete response


def prepend_zero_machine() -> Diagram:
    """Two states: emit 0 before the first letter, then copy verbatim."""
    return Diagram(
        (1, 2),
        (1, 2),
        [[1, 1], [1, 1]],
        [[w1("00"), w1("01")], [w1("0"), w1("1")]],
        base=0,
        names=["fresh", "copy"],
    )


def delayed_identity_machine() -> Diagram:
    """Identity map emitted one letter late (remember the pending letter)."""
    return Diagram(
        (1, 2),
        (1, 2),
        [[1, 2], [1, 2], [1, 2]],
        [
            [w1(""), w1("")],
            [w1("0"), w1("0")],
            [w1("1"), w1("1")],
        ],
        base=0,
        names=["start", "held0", "held1"],
    )


def test_complete_response_strips_common_prefix():
    P0 = prepend_zero_machine()
    cr = complete_response(P0)
    assert cr.outs[0] == (w1("0"), w1("1"))
    assert cr.outs[1] == (w1("0"), w1("1"))
    assert is_complete_response(cr)
    assert not is_complete_response(P0)
    M, _ = minimize(cr)
    assert M.n_states == 1


def test_complete_response_shifts_outputs_by_state_lcp():
    # lambda_CR(q, w) = lcp(q)^-1 * lambda(q, w) * lcp(end state)
    rng = random.Random(67)
    P0 = prepend_zero_machine()
    for T in [P0, FIG3, compose(FIG3, P0), delayed_identity_machine()]:
        imgs = image_all(T)
        g = {q: lcp_all(imgs[q].roots) for q in range(T.n_states)}
        cr = complete_response(T)
        for _ in range(20):
            q = rng.randrange(T.n_states)
            w = rand_word(rng, 1, 2, 5)
            end, out = T.run(q, w)
            _, out_cr = cr.run(q, w)
            assert g[q] * out_cr == out * g[end]


def test_complete_response_idempotent_on_fig3():
    assert complete_response(FIG3) == FIG3
    assert is_complete_response(FIG3)


# ---------------------------------------------------------------- degeneracy


def test_nondegeneracy_cases():
    assert is_nondegenerate(FIG3)
    assert is_nondegenerate(identity_diagram(2, 2))
    all_eps = Diagram((1, 2), (1, 2), [[0, 0]], [[w1(""), w1("")]])
    assert not is_nondegenerate(all_eps)
    half_eps = Diagram((1, 2), (1, 2), [[0, 0]], [[w1(""), w1("1")]])
    assert not is_nondegenerate(half_eps)  # the 0-loop emits nothing forever
    const = Diagram((1, 2), (1, 2), [[0, 0]], [[w1("0"), w1("0")]])
    assert is_nondegenerate(const)  # constant map is degenerate nowhere


def test_degenerate_coordinate_in_product():
    # second factor never emits: degenerate in codomain coordinate 1
    silent = Diagram((1, 2), (1, 2), [[0, 0]], [[w1(""), w1("")]])
    P = product([identity_diagram(1, 2), silent])
    assert not is_nondegenerate(P)


# ---------------------------------------------------------------- synchronization


def test_fig3_synchronizing_level_exactly_three():
    assert synchronizing_level(FIG3) == 3
    # minimality: some length-2 word leaves two possible end states
    ends = {FIG3.run(q, w1("00"))[0] for q in range(4)}
    assert len(ends) > 1
    # and every length-3 word collapses the state set
    for combo in itertools.product(range(2), repeat=3):
        word = WordD(1, 2, (combo,))
        assert len({FIG3.run(q, word)[0] for q in range(4)}) == 1


def test_identity_synchronizes_at_level_zero():
    assert synchronizing_level(identity_diagram(1, 2)) == 0
    assert synchronizing_level(identity_diagram(2, 3)) == 0


def test_permutation_automaton_is_not_synchronizing():
    # letter 0 swaps the two states, letter 1 fixes them; outputs copy input
    T = Diagram(
        (1, 2),
        (1, 2),
        [[1, 0], [0, 1]],
        [[w1("0"), w1("1")], [w1("0"), w1("1")]],
    )
    with pytest.raises(NotSynchronizing):
        synchronizing_level(T)
    assert not is_synchronizing(T)


def test_core_of_fig3_is_fig3():
    assert core(FIG3) == FIG3


def test_core_drops_transient_states():
    # identity state 0; states 1 and 2 feed into it and are never returned to
    T = Diagram(
        (1, 2),
        (1, 2),
        [[0, 0], [0, 0], [1, 1]],
        [[w1("0"), w1("1")], [w1("0"), w1("1")], [w1("0"), w1("1")]],
        base=2,
    )
    K = core(T)
    assert K.n_states == 1
    assert K.outs[0][0] == w1("0") and K.outs[0][1] == w1("1")
    assert core(K) == K


def test_core_idempotent_and_strongly_connected():
    rng = random.Random(71)
    found = 0
    for _ in range(200):
        T = rand_d1_diagram(rng, rng.randrange(2, 5), n=2)
        if not is_synchronizing(T, max_level=24):
            continue
        found += 1
        K = core(T)
        assert core(K) == K
        for q in range(K.n_states):
            assert len(reachable_states(K, q)) == K.n_states
        if found >= 12:
            break
    assert found >= 12


def test_core_of_composition_inside_product_of_cores():
    rng = random.Random(73)
    ident = identity_diagram(1, 2)
    pairs = [(FIG3, FIG3), (FIG3, ident), (ident, FIG3)]
    for _ in range(300):
        if len(pairs) >= 10:
            break
        A = rand_d1_diagram(rng, 2, n=2)
        B = rand_d1_diagram(rng, 2, n=2)
        if is_synchronizing(A, max_level=16) and is_synchronizing(B, max_level=16):
            if is_synchronizing(compose(A, B), max_level=16):
                pairs.append((A, B))
    assert len(pairs) >= 6
    for A, B in pairs:
        AB = compose(A, B)
        core_names = set(core(AB).names)
        allowed = {f"{p}|{q}" for p in core(A).names for q in core(B).names}
        assert core_names <= allowed


# ---------------------------------------------------------------- injectivity


def test_injectivity_yes_for_identity_and_fig3():
    assert injectivity(identity_diagram(1, 2)).status == "yes"
    assert injectivity(identity_diagram(2, 2)).status == "yes"
    assert injectivity(FIG3, Q0).status == "yes"


def test_injectivity_no_for_constant_map_with_replayable_witness():
    T = Diagram((1, 2), (1, 2), [[0, 0]], [[w1("0"), w1("0")]])
    report = injectivity(T, 0)
    assert report.status == "no"
    origin, (pre1, per1), (pre2, per2) = report.witness
    assert per1 and per2

    def replay(pre, per, rounds):
        word = WordD.epsilon(1, 2)
        for u in pre + per * rounds:
            word = word * u
        return T.run(origin, word)

    w_a = replay(pre1, per1, 3)
    w_b = replay(pre2, per2, 3)
    # different inputs, outputs stay equal on the common (full) length
    in_a = WordD.epsilon(1, 2)
    for u in pre1 + per1 * 3:
        in_a = in_a * u
    in_b = WordD.epsilon(1, 2)
    for u in pre2 + per2 * 3:
        in_b = in_b * u
    assert in_a != in_b
    assert w_a[1] == w_b[1]


def test_injectivity_unknown_when_lag_grows_without_bound():
    # f(0x) = x while f(1x) doubles every letter of x: the two branches give
    # equal outputs only in the limit, so the offset grows past any cap.
    T = Diagram(
        (1, 2),
        (1, 2),
        [[1, 2], [1, 1], [2, 2]],
        [
            [w1(""), w1("")],
            [w1("0"), w1("1")],
            [w1("00"), w1("11")],
        ],
    )
    report = injectivity(T, 0)
    assert report.status == "unknown"


def test_injectivity_yes_on_random_synchronous_permutation_machines():
    rng = random.Random(79)
    for _ in range(15):
        T = rand_injective_d1_diagram(rng, rng.randrange(1, 4), n=rng.choice([2, 3]))
        assert injectivity(T, T.base).status == "yes"


# ---------------------------------------------------------------- strong iso


def test_strong_iso_identity_on_self():
    assert strong_iso(FIG3, FIG3) == {0: 0, 1: 1, 2: 2, 3: 3}


def test_strong_iso_recovers_random_relabeling():
    rng = random.Random(83)
    for _ in range(10):
        perm = list(range(4))
        rng.shuffle(perm)
        # relabeled[perm[q]] = original q
        trans = [None] * 4
        outs = [None] * 4
        names = [None] * 4
        for q in range(4):
            trans[perm[q]] = [perm[p] for p in FIG3.trans[q]]
            outs[perm[q]] = list(FIG3.outs[q])
            names[perm[q]] = FIG3.names[q]
        R = Diagram((1, 2), (1, 2), trans, outs, base=perm[0], names=names)
        got = strong_iso(FIG3, R)
        assert got == {q: perm[q] for q in range(4)}
        back = strong_iso(R, FIG3)
        assert back == {perm[q]: q for q in range(4)}


def test_strong_iso_none_on_mismatch():
    assert strong_iso(FIG3, identity_diagram(1, 2)) is None
    flipped = Diagram(
        (1, 2), (1, 2), [[0, 0]], [[w1("1"), w1("0")]]
    )
    assert strong_iso(identity_diagram(1, 2), flipped) is None


def test_strong_iso_requires_core_inputs():
    # state 1 unreachable from state 0's component in both directions
    T = Diagram(
        (1, 2),
        (1, 2),
        [[0, 0], [0, 0]],
        [[w1("0"), w1("1")], [w1("1"), w1("0")]],
    )
    with pytest.raises(ValueError):
        strong_iso(T, T)


# ---------------------------------------------------------------- minimal machine


class _WrapHandle(MachineHandle):
    """Pass-through lazy handle around a Diagram (states renamed)."""

    def __init__(self, T: Diagram):
        self.T = T
        self.domain = T.domain
        self.codomain = T.codomain
        self.base = ("wrap", T.base)

    def step(self, state, coord, letter):
        nxt, out = self.T.step(state[1], coord, letter)
        return ("wrap", nxt), out


class _CounterHandle(MachineHandle):
    """Infinitely many states, one per step count."""

    def __init__(self):
        self.domain = (1, 2)
        self.codomain = (1, 2)
        self.base = 0

    def step(self, state, coord, letter):
        return state + 1, WordD(1, 2, ((letter,),))


def test_freeze_handle_recovers_diagram_tables():
    F = freeze_handle(_WrapHandle(FIG3))
    assert F.trans == FIG3.trans and F.outs == FIG3.outs and F.base == FIG3.base


def test_minimal_for_homeomorphism_on_identity_with_junk():
    T = Diagram(
        (1, 2),
        (1, 2),
        [[0, 0], [0, 0], [1, 1]],
        [[w1("0"), w1("1")], [w1("0"), w1("1")], [w1("0"), w1("1")]],
        base=0,
    )
    M, base = minimal_for_homeomorphism(T, 0)
    assert M.n_states == 1 and base == 0
    assert behavior_equal(M, identity_diagram(1, 2), 4)
    # from a junk start the reachable part still minimizes to one state,
    # because the junk states already behave like the identity
    M2, _ = minimal_for_homeomorphism(T, 2)
    assert M2.n_states == 1


def test_minimal_for_homeomorphism_merges_duplicates():
    T = fig3_with_duplicate_state()
    M, base = minimal_for_homeomorphism(T, Q0)
    assert M.n_states == 4
    assert behavior_equal(M, FIG3, 7) or outputs_agree(M, FIG3, 7)


def test_minimal_for_homeomorphism_bound_exceeded_on_infinite_handle():
    with pytest.raises(BoundExceeded):
        minimal_for_homeomorphism(_CounterHandle(), 0, bound=10)


def test_minimal_for_homeomorphism_collapses_wrapped_identity_chain():
    class ChainHandle(MachineHandle):
        # states 0..3 all behave like the identity; 3 absorbs
        def __init__(self):
            self.domain = (1, 2)
            self.codomain = (1, 2)
            self.base = 0

        def step(self, state, coord, letter):
            return min(state + 1, 3), WordD(1, 2, ((letter,),))

    M, base = minimal_for_homeomorphism(ChainHandle(), 0, bound=16)
    assert M.n_states == 1 and base == 0


# ---------------------------------------------------------------- behavior probes


def test_distinct_states_lower_bound_identity_is_one():
    assert distinct_states_lower_bound(identity_diagram(1, 2), 0, depth=4) == 1


def test_distinct_states_lower_bound_fig3_reaches_four():
    assert distinct_states_lower_bound(FIG3, Q0, depth=6) == 4


def test_behavior_equal_detects_difference():
    assert behavior_equal(FIG3, FIG3, 6)
    assert not behavior_equal(FIG3, identity_diagram(1, 2), 4)


def test_outputs_agree_tolerates_lag():
    lagged = delayed_identity_machine()
    cr = complete_response(lagged)
    # the base state's image has trivial lcp, so CR keeps the boundary map
    # but shifts outputs one step earlier: stepwise different, same map
    assert not behavior_equal(lagged, cr, 4)
    assert outputs_agree(lagged, cr, 5, lag_floor=0)
    assert outputs_agree(lagged, identity_diagram(1, 2), 5, lag_floor=0)
    assert not outputs_agree(FIG3, identity_diagram(1, 2), 5)
    # CR removes the lag entirely: the quotient is the one-state identity
    M, _ = minimize(cr)
    assert M == identity_diagram(1, 2)


def test_probe_words_deterministic_and_bounded():
    words = probe_words(2, 2, 2, cap=100)
    assert words == probe_words(2, 2, 2, cap=100)
    assert all(w.max_len <= 2 for w in words)
    assert len(words) <= 100
    assert len(set(words)) == len(words)


# ---------------------------------------------------------------- serialization


def test_to_dict_from_dict_roundtrip():
    for T in [FIG3, product([FIG3, identity_diagram(1, 2)]), compose(FIG3, FIG3)]:
        data = T.to_dict()
        back = Diagram.from_dict(data)
        assert back == T
        assert back.names == T.names


def test_from_dict_rejects_broken_tables():
    data = FIG3.to_dict()
    data["edges"] = data["edges"][:-1]  # drop one edge
    with pytest.raises(ValueError):
        Diagram.from_dict(data)
    dup = FIG3.to_dict()
    dup["edges"].append(dict(dup["edges"][0]))
    with pytest.raises(ValueError):
        Diagram.from_dict(dup)


def test_render_dot_smoke():
    dot = FIG3.render_dot()
    assert dot.startswith("digraph")
    assert dot.count("{") == dot.count("}")
    assert '"q0" -> "a"' in dot
    assert "0/0" in dot


def test_trim_drops_unreachable():
    T = Diagram(
        (1, 2),
        (1, 2),
        [[0, 0], [1, 1]],
        [[w1("0"), w1("1")], [w1("1"), w1("0")]],
        base=0,
    )
    assert trim(T).n_states == 1
