"""Shared brute-force oracles and seeded random generators for the test suite.

Everything here is written independently of the library's optimized code
paths: set semantics are computed by exhaustive square enumeration, so that
library results can be checked against first-principles definitions.
"""

import itertools
import random

from dvn.words import WordD


def cone_squares(w: WordD, k: int):
    """All level-k squares under w, as raw coordinate tuples (brute force)."""
    assert w.max_len <= k
    per_coord = []
    for c in w.coords:
        exts = [c + tail for tail in itertools.product(range(w.n), repeat=k - len(c))]
        per_coord.append(exts)
    return {combo for combo in itertools.product(*per_coord)}


def square_set(roots, d: int, n: int, k: int):
    """Union of root cones at square level k (brute force)."""
    out = set()
    for r in roots:
        out |= cone_squares(r, k)
    return out


def all_squares(d: int, n: int, k: int):
    per_coord = list(itertools.product(range(n), repeat=k))
    return {combo for combo in itertools.product(per_coord, repeat=d)}


def rand_word(rng: random.Random, d: int, n: int, max_len: int) -> WordD:
    coords = []
    for _ in range(d):
        ln = rng.randrange(max_len + 1)
        coords.append(tuple(rng.randrange(n) for _ in range(ln)))
    return WordD(d, n, coords)


def rand_roots(rng: random.Random, d: int, n: int, count: int, max_len: int):
    return [rand_word(rng, d, n, count and max_len) for _ in range(count)]


def rand_prefix_code(rng: random.Random, d: int, n: int, split_count: int):
    """A complete prefix code built by repeatedly splitting one member."""
    members = [WordD.epsilon(d, n)]
    for _ in range(split_count):
        idx = rng.randrange(len(members))
        target = members.pop(idx)
        coord = rng.randrange(d)
        for x in range(n):
            members.append(target.append(coord, x))
    rng.shuffle(members)
    return members


def split_some_roots(rng: random.Random, roots, rounds: int):
    """Replace random roots by their n children at a random coordinate.

    Preserves the union of cones (and preserves disjointness if the input
    family was pairwise disjoint).
    """
    out = list(roots)
    for _ in range(rounds):
        if not out:
            break
        idx = rng.randrange(len(out))
        target = out.pop(idx)
        coord = rng.randrange(target.d)
        for x in range(target.n):
            out.append(target.append(coord, x))
    rng.shuffle(out)
    return out


# ---------------------------------------------------------------- machines

from dvn.machine import Diagram, MachineHandle, gens  # noqa: E402


def make_fig3_left() -> Diagram:
    """The 4-state binary machine swapping leading-zero block lengths 1 and 2.

    States q0, a, c, b; reading a zero advances q0 -> a -> c -> b (b loops),
    reading a one returns to q0.  Outputs: q0 copies; a holds its zero back
    (empty output) and flushes 01 on a one; c emits 00; b copies.
    """
    Q = ["q0", "a", "c", "b"]
    i = {name: k for k, name in enumerate(Q)}
    w = lambda s: WordD.parse(s, 1, 2)  # noqa: E731
    trans = [
        [i["a"], i["q0"]],  # q0: 0 -> a, 1 -> q0
        [i["c"], i["q0"]],  # a : 0 -> c, 1 -> q0
        [i["b"], i["q0"]],  # c : 0 -> b, 1 -> q0
        [i["b"], i["q0"]],  # b : 0 -> b, 1 -> q0
    ]
    outs = [
        [w("0"), w("1")],
        [w(""), w("01")],
        [w("00"), w("1")],
        [w("0"), w("1")],
    ]
    return Diagram((1, 2), (1, 2), trans, outs, base=0, names=Q)


FIG3 = make_fig3_left()


def rand_d1_diagram(
    rng: random.Random,
    n_states: int,
    n: int = 2,
    m: int | None = None,
    max_out: int = 2,
    allow_empty: bool = True,
) -> Diagram:
    """Random total d=1 tables (always coherent)."""
    if m is None:
        m = n
    trans = []
    outs = []
    for _ in range(n_states):
        trow = []
        orow = []
        for _ in range(n):
            trow.append(rng.randrange(n_states))
            lo = 0 if allow_empty else 1
            ln = rng.randrange(lo, max_out + 1)
            orow.append(WordD(1, m, (tuple(rng.randrange(m) for _ in range(ln)),)))
        trans.append(trow)
        outs.append(orow)
    return Diagram((1, n), (1, m), trans, outs, base=rng.randrange(n_states))


def rand_injective_d1_diagram(
    rng: random.Random, n_states: int, n: int = 2
) -> Diagram:
    """Random synchronous machine whose per-state letter maps are bijections.

    Distinct inputs diverge at their first differing letter, so every state's
    boundary map is injective (and surjective: each step is a bijection).
    """
    trans = []
    outs = []
    for _ in range(n_states):
        perm = list(range(n))
        rng.shuffle(perm)
        trans.append([rng.randrange(n_states) for _ in range(n)])
        outs.append([WordD(1, n, ((perm[x],),)) for x in range(n)])
    return Diagram((1, n), (1, n), trans, outs, base=rng.randrange(n_states))


def run_interleaved(H: MachineHandle, state, w: WordD, rng: random.Random):
    """Feed w generator by generator in a random interleaving order.

    Within each coordinate the letters keep their order; across coordinates
    the interleaving is random.  For a coherent machine the result must match
    H.run's coordinate-major order.
    """
    remaining = [list(c) for c in w.coords]
    out = None
    while any(remaining):
        live = [c for c, letters in enumerate(remaining) if letters]
        coord = rng.choice(live)
        letter = remaining[coord].pop(0)
        state, piece = H.step(state, coord, letter)
        out = piece if out is None else out * piece
    if out is None:
        from dvn.words import WordD as _W

        out = _W.epsilon(*H.codomain)
    return state, out


def level_outputs_coneset(T: Diagram, q: int, k: int):
    """Union of output cones over all level-k square inputs (brute force).

    Always contains the true image of state q; equals it whenever the image
    computation has stabilized by unfolding depth k.
    """
    from dvn.machine import level1_squares
    from dvn.words import ConeSet

    states = [q]
    outs = [WordD.epsilon(*T.codomain)]
    for _ in range(k):
        nxt_states = []
        nxt_outs = []
        for s, o in zip(states, outs):
            for u in level1_squares(*T.domain):
                s2, piece = T.run(s, u)
                nxt_states.append(s2)
                nxt_outs.append(o * piece)
        states, outs = nxt_states, nxt_outs
    return ConeSet(T.codomain[0], T.codomain[1], outs)


def rand_refinement_code(rng, d, n, splits):
    """A prefix code built by repeatedly splitting a random member."""
    from dvn.words import WordD as _W

    code = [_W.epsilon(d, n)]
    for _ in range(splits):
        w = code.pop(rng.randrange(len(code)))
        i = rng.randrange(d)
        code.extend(w.append(i, x) for x in range(n))
    return code


def rand_exchange(rng, d, n, splits=3):
    """A random prefix exchange from two random refinement codes."""
    from dvn.homeo import PrefixExchange

    f1 = rand_refinement_code(rng, d, n, splits)
    f2 = rand_refinement_code(rng, d, n, splits)
    shuffled = f2[:]
    rng.shuffle(shuffled)
    return PrefixExchange(f1, f2, dict(zip(f1, shuffled)))


def digit_pairing_diagram():
    """One-state machine reading 4-ary digits and writing bit pairs."""
    from dvn.words import WordD as _W

    outs = [[
        _W(2, 2, ((v // 2,), (v % 2,)))
        for v in range(4)
    ]]
    return Diagram((1, 4), (2, 2), [[0, 0, 0, 0]], outs)
