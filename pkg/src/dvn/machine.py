"""Finite transducers between powers of Cantor spaces, and lazy machine handles.

A *diagram* is a finite-state transducer whose input alphabet is the set of
generators of a d-fold shift over {0..n-1} -- one generator per (coordinate,
letter) pair -- and whose outputs are word tuples over a (possibly different)
e-fold space over {0..m-1}.  Feeding a point of the domain space through the
machine letter by letter produces a point of the codomain space; validity
(`validate`) requires the cross-coordinate steps to commute, so the result
does not depend on the interleaving order.

A *handle* is the lazy counterpart: anything with `domain`, `codomain`,
`base`, and a `step(state, coord, letter) -> (state, output)` method, where
states may come from an infinite set.  Diagrams are handles; compositions and
products of handles are handles; a composition or product of diagrams is
again a diagram.

Everything composes left to right: ``compose(f, g)`` feeds f's output into g.
"""

from __future__ import annotations

import itertools
from typing import Hashable, Iterable, Iterator, Sequence

from .words import (
    AlphabetMismatch,
    ConeSet,
    DvnError,
    PrefixViolation,
    WordD,
    canonical_roots,
    lcp_all,
)

Signature = tuple[int, int]


class CoherenceError(DvnError):
    """Cross-coordinate steps fail to commute at some state."""


class IncoherentTransition(CoherenceError):
    """Transitions at two coordinates do not commute at some state."""


class IncoherentOutput(CoherenceError):
    """Output products at two coordinates do not commute at some state."""


class NotSynchronizing(DvnError):
    """The machine's state family never collapses to singletons."""


class CapExceeded(DvnError):
    """An iterative computation exceeded its depth cap (e.g. non-clopen image)."""


class BoundExceeded(DvnError):
    """A search or budget limit was exceeded before reaching an answer."""


def gen_index(n: int, coord: int, letter: int) -> int:
    """Generator index: coordinate-major, ``coord * n + letter``."""
    return coord * n + letter


def gens(d: int, n: int) -> Iterator[tuple[int, int]]:
    """All (coordinate, letter) pairs in generator-index order."""
    for coord in range(d):
        for letter in range(n):
            yield (coord, letter)


def level1_squares(d: int, n: int) -> list[WordD]:
    """All word tuples with every coordinate of length exactly 1."""
    return [
        WordD(d, n, tuple((x,) for x in combo))
        for combo in itertools.product(range(n), repeat=d)
    ]


class MachineHandle:
    """Base class for machines evaluated step by step from hashable states."""

    domain: Signature
    codomain: Signature
    base: Hashable

    def step(self, state: Hashable, coord: int, letter: int) -> tuple[Hashable, WordD]:
        raise NotImplementedError

    def run(self, state: Hashable, w: WordD) -> tuple[Hashable, WordD]:
        """Feed a word tuple coordinate-major; return (end state, output)."""
        if (w.d, w.n) != self.domain:
            raise AlphabetMismatch(
                f"word shape ({w.d},{w.n}) vs machine domain {self.domain}"
            )
        out = WordD.epsilon(*self.codomain)
        for coord, letter in w.letters():
            state, piece = self.step(state, coord, letter)
            out = out * piece
        return state, out

    def eval_prefix(self, w: WordD) -> WordD:
        """Output produced from the base state on input w."""
        return self.run(self.base, w)[1]


class Diagram(MachineHandle):
    """A finite transducer given by explicit transition and output tables.

    States are 0..len-1; `trans[q][g]` and `outs[q][g]` are indexed by the
    generator index g = coord * n + letter.  `base` is the start state used
    by `eval_prefix` and by canonical relabeling.
    """

    __slots__ = ("domain", "codomain", "trans", "outs", "base", "names")

    def __init__(
        self,
        domain: Signature,
        codomain: Signature,
        trans: Sequence[Sequence[int]],
        outs: Sequence[Sequence[WordD]],
        base: int = 0,
        names: Sequence[str] | None = None,
        check: bool = True,
    ) -> None:
        d, n = domain
        e, m = codomain
        self.domain = (d, n)
        self.codomain = (e, m)
        self.trans = tuple(tuple(row) for row in trans)
        self.outs = tuple(tuple(row) for row in outs)
        self.base = base
        if names is None:
            names = tuple(f"q{i}" for i in range(len(self.trans)))
        self.names = tuple(names)
        if check:
            self.validate()

    # --- structure -----------------------------------------------------

    @property
    def n_states(self) -> int:
        return len(self.trans)

    def state_name(self, q: int) -> str:
        return self.names[q]

    def validate(self) -> None:
        """Check table shapes, alphabets, and cross-coordinate coherence."""
        d, n = self.domain
        e, m = self.codomain
        width = d * n
        if len(self.outs) != len(self.trans) or len(self.names) != len(self.trans):
            raise ValueError("tables and names must have one row per state")
        if not self.trans:
            raise ValueError("a diagram needs at least one state")
        if not 0 <= self.base < len(self.trans):
            raise ValueError(f"base state {self.base} out of range")
        for q, (trow, orow) in enumerate(zip(self.trans, self.outs)):
            if len(trow) != width or len(orow) != width:
                raise ValueError(
                    f"state {q}: expected {width} generator columns"
                )
            for g, (p, out) in enumerate(zip(trow, orow)):
                if not 0 <= p < len(self.trans):
                    raise ValueError(f"state {q} gen {g}: target {p} out of range")
                if (out.d, out.n) != (e, m):
                    raise AlphabetMismatch(
                        f"state {q} gen {g}: output {out} not over codomain ({e},{m})"
                    )
        # cross-coordinate coherence: steps at different coordinates commute
        for q in range(len(self.trans)):
            for i in range(d):
                for j in range(i + 1, d):
                    for x in range(n):
                        for y in range(n):
                            p1, u1 = self.step(q, i, x)
                            p2, u2 = self.step(p1, j, y)
                            r1, v1 = self.step(q, j, y)
                            r2, v2 = self.step(r1, i, x)
                            where = f"at state {self.names[q]}, gens ({x}@{i}, {y}@{j})"
                            if p2 != r2:
                                raise IncoherentTransition(where)
                            if u1 * u2 != v1 * v2:
                                raise IncoherentOutput(where)

    def step(self, state: int, coord: int, letter: int) -> tuple[int, WordD]:
        g = coord * self.domain[1] + letter
        return self.trans[state][g], self.outs[state][g]

    # --- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        """JSON-ready description of the machine."""
        d, n = self.domain
        edges = []
        for q in range(self.n_states):
            for coord, letter in gens(d, n):
                g = gen_index(n, coord, letter)
                edges.append(
                    {
                        "from": self.names[q],
                        "coord": coord,
                        "letter": letter,
                        "to": self.names[self.trans[q][g]],
                        "out": self.outs[q][g].text(),
                    }
                )
        return {
            "kind": "diagram",
            "domain": {"d": d, "n": n},
            "codomain": {"d": self.codomain[0], "n": self.codomain[1]},
            "states": list(self.names),
            "base": self.names[self.base],
            "edges": edges,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Diagram":
        try:
            d, n = data["domain"]["d"], data["domain"]["n"]
            cod = data.get("codomain", data["domain"])
            e, m = cod["d"], cod["n"]
            names = list(data["states"])
            index = {name: i for i, name in enumerate(names)}
            if len(index) != len(names):
                raise ValueError("duplicate state names")
            width = d * n
            trans = [[None] * width for _ in names]
            outs = [[None] * width for _ in names]
            for edge in data["edges"]:
                q = index[edge["from"]]
                g = gen_index(n, edge["coord"], edge["letter"])
                if trans[q][g] is not None:
                    raise ValueError(
                        f"duplicate edge from {edge['from']} on {edge['letter']}@{edge['coord']}"
                    )
                trans[q][g] = index[edge["to"]]
                outs[q][g] = WordD.parse(edge["out"], e, m)
            for q, name in enumerate(names):
                for g in range(width):
                    if trans[q][g] is None:
                        raise ValueError(f"missing edge from {name} (gen {g})")
            base = index[data.get("base", names[0])]
        except KeyError as exc:
            raise ValueError(f"machine description missing key {exc}") from exc
        return cls((d, n), (e, m), trans, outs, base=base, names=names)

    def render_dot(self) -> str:
        """GraphViz source: one edge per generator, labeled input/output."""
        d, n = self.domain
        lines = ["digraph machine {", "  rankdir=LR;", "  node [shape=circle];"]
        lines.append(f'  "{self.names[self.base]}" [shape=doublecircle];')
        for q in range(self.n_states):
            for coord, letter in gens(d, n):
                g = gen_index(n, coord, letter)
                out = self.outs[q][g]
                if d == 1:
                    in_label = str(letter)
                else:
                    in_label = f"{letter}@{coord}"
                out_label = out.text() if (out.d > 1 or not out.is_epsilon) else "ε"
                if out.d == 1 and not out.is_epsilon:
                    out_label = "".join(str(x) for x in out.coords[0])
                lines.append(
                    f'  "{self.names[q]}" -> "{self.names[self.trans[q][g]]}"'
                    f' [label="{in_label}/{out_label}"];'
                )
        lines.append("}")
        return "\n".join(lines)

    def __repr__(self) -> str:
        return (
            f"Diagram(domain={self.domain}, codomain={self.codomain}, "
            f"states={self.n_states}, base={self.names[self.base]})"
        )

    # --- equality is structural ------------------------------------------

    def table_key(self):
        return (self.domain, self.codomain, self.base, self.trans, self.outs)

    def __eq__(self, other) -> bool:
        return isinstance(other, Diagram) and self.table_key() == other.table_key()

    def __hash__(self) -> int:
        return hash(self.table_key())


def identity_diagram(d: int, n: int) -> Diagram:
    """The one-state machine copying input to output."""
    width = d * n
    outs = [[WordD.gen(d, n, coord, letter) for coord, letter in gens(d, n)]]
    return Diagram((d, n), (d, n), [[0] * width], outs, check=False)


class ComposedHandle(MachineHandle):
    """Lazy left-to-right composition: feed f's output into g."""

    def __init__(self, f: MachineHandle, g: MachineHandle) -> None:
        if f.codomain != g.domain:
            raise AlphabetMismatch(
                f"cannot compose: codomain {f.codomain} vs domain {g.domain}"
            )
        self.f = f
        self.g = g
        self.domain = f.domain
        self.codomain = g.codomain
        self.base = (f.base, g.base)

    def step(self, state, coord, letter):
        sf, sg = state
        sf, piece = self.f.step(sf, coord, letter)
        sg, out = self.g.run(sg, piece)
        return (sf, sg), out


class ProductHandle(MachineHandle):
    """Lazy product acting on disjoint coordinate blocks."""

    def __init__(self, factors: Sequence[MachineHandle]) -> None:
        if not factors:
            raise ValueError("product of zero machines is undefined")
        n = factors[0].domain[1]
        m = factors[0].codomain[1]
        for f in factors:
            if f.domain[1] != n or f.codomain[1] != m:
                raise AlphabetMismatch("product factors must share alphabets")
        self.factors = tuple(factors)
        self.domain = (sum(f.domain[0] for f in factors), n)
        self.codomain = (sum(f.codomain[0] for f in factors), m)
        self.base = tuple(f.base for f in factors)
        self._in_offsets = []
        self._out_offsets = []
        din = dout = 0
        for f in factors:
            self._in_offsets.append(din)
            self._out_offsets.append(dout)
            din += f.domain[0]
            dout += f.codomain[0]

    def _owner(self, coord: int) -> tuple[int, int]:
        for idx in reversed(range(len(self.factors))):
            if coord >= self._in_offsets[idx]:
                return idx, coord - self._in_offsets[idx]
        raise ValueError(f"coordinate {coord} out of range")  # pragma: no cover

    def step(self, state, coord, letter):
        idx, local = self._owner(coord)
        sub, piece = self.factors[idx].step(state[idx], local, letter)
        new_state = state[:idx] + (sub,) + state[idx + 1:]
        e, mm = self.codomain
        coords = [()] * e
        off = self._out_offsets[idx]
        for j, c in enumerate(piece.coords):
            coords[off + j] = c
        return new_state, WordD(e, mm, coords)


def compose(f: MachineHandle, g: MachineHandle) -> MachineHandle:
    """f then g.  Returns a Diagram when both inputs are Diagrams."""
    if isinstance(f, Diagram) and isinstance(g, Diagram):
        return _compose_diagrams(f, g)
    return ComposedHandle(f, g)


def _compose_diagrams(f: Diagram, g: Diagram) -> Diagram:
    if f.codomain != g.domain:
        raise AlphabetMismatch(
            f"cannot compose: codomain {f.codomain} vs domain {g.domain}"
        )
    d, n = f.domain
    width = d * n
    start = (f.base, g.base)
    index = {start: 0}
    order = [start]
    trans: list[list[int]] = []
    outs: list[list[WordD]] = []
    names: list[str] = []
    i = 0
    while i < len(order):
        p, q = order[i]
        trow = []
        orow = []
        for coord, letter in gens(d, n):
            gidx = gen_index(n, coord, letter)
            p2 = f.trans[p][gidx]
            piece = f.outs[p][gidx]
            q2, out = g.run(q, piece)
            key = (p2, q2)
            if key not in index:
                index[key] = len(order)
                order.append(key)
            trow.append(index[key])
            orow.append(out)
        trans.append(trow)
        outs.append(orow)
        names.append(f"{f.names[p]}|{g.names[q]}")
        i += 1
    return Diagram(f.domain, g.codomain, trans, outs, base=0, names=names, check=False)


def product(factors: Sequence[MachineHandle]) -> MachineHandle:
    """Machine acting factor-by-factor on blocks of coordinates.

    Returns a Diagram (reachable product states) when all factors are
    Diagrams, else a lazy handle.
    """
    if all(isinstance(f, Diagram) for f in factors):
        return _product_diagrams(factors)
    return ProductHandle(factors)


def _product_diagrams(factors: Sequence[Diagram]) -> Diagram:
    """Full cartesian-product tables (no reachability restriction)."""
    handle = ProductHandle(factors)
    d, n = handle.domain
    order = list(itertools.product(*(range(f.n_states) for f in factors)))
    index = {state: i for i, state in enumerate(order)}
    trans: list[list[int]] = []
    outs: list[list[WordD]] = []
    names: list[str] = []
    for state in order:
        trow = []
        orow = []
        for coord, letter in gens(d, n):
            nxt, out = handle.step(state, coord, letter)
            trow.append(index[nxt])
            orow.append(out)
        trans.append(trow)
        outs.append(orow)
        names.append(
            "(" + ",".join(f.names[s] for f, s in zip(factors, state)) + ")"
        )
    return Diagram(
        handle.domain,
        handle.codomain,
        trans,
        outs,
        base=index[handle.base],
        names=names,
        check=False,
    )


# ---------------------------------------------------------------- reachability


def reachable_states(T: Diagram, start: int | None = None) -> list[int]:
    """States reachable from start (default base), in BFS generator order."""
    if start is None:
        start = T.base
    seen = {start}
    order = [start]
    i = 0
    while i < len(order):
        q = order[i]
        for p in T.trans[q]:
            if p not in seen:
                seen.add(p)
                order.append(p)
        i += 1
    return order


def restrict(T: Diagram, states: Sequence[int], base: int) -> Diagram:
    """The sub-diagram on a transition-closed state set, relabeled 0..k-1."""
    index = {q: i for i, q in enumerate(states)}
    if base not in index:
        raise ValueError("base must belong to the restricted state set")
    trans = []
    outs = []
    names = []
    for q in states:
        try:
            trans.append([index[p] for p in T.trans[q]])
        except KeyError as exc:
            raise ValueError(f"state set not transition-closed at {q}") from exc
        outs.append(list(T.outs[q]))
        names.append(T.names[q])
    return Diagram(
        T.domain, T.codomain, trans, outs, base=index[base], names=names, check=False
    )


def trim(T: Diagram) -> Diagram:
    """Drop states unreachable from the base."""
    order = reachable_states(T)
    return restrict(T, order, T.base)


def bfs_relabel(T: Diagram) -> Diagram:
    """Deterministic relabeling: BFS from base in generator order."""
    return trim(T)


def strong_iso(A: Diagram, B: Diagram) -> dict[int, int] | None:
    """State bijection matching transitions and outputs exactly, or None.

    Seed-and-propagate: fix state 0 of A, try each state of B as its image,
    and propagate the forced images along generators.  Requires both inputs
    to have every state reachable from every state (e.g. cores); raises
    ValueError otherwise, since propagation could not certify an answer.
    """
    if A.domain != B.domain or A.codomain != B.codomain:
        return None
    if A.n_states != B.n_states:
        return None
    for T, label in ((A, "first"), (B, "second")):
        for start in range(T.n_states):
            if len(reachable_states(T, start)) != T.n_states:
                raise ValueError(
                    f"strong_iso requires every state reachable from every state; "
                    f"{label} input fails from state {T.names[start]}"
                )
    width = len(A.trans[0]) if A.trans else 0
    for b0 in range(B.n_states):
        mapping = {0: b0}
        queue = [0]
        ok = True
        while queue and ok:
            p = queue.pop()
            q = mapping[p]
            for g in range(width):
                if A.outs[p][g] != B.outs[q][g]:
                    ok = False
                    break
                p2 = A.trans[p][g]
                q2 = B.trans[q][g]
                known = mapping.get(p2)
                if known is None:
                    mapping[p2] = q2
                    queue.append(p2)
                elif known != q2:
                    ok = False
                    break
        if ok and len(mapping) == A.n_states and len(set(mapping.values())) == A.n_states:
            return mapping
    return None


# ---------------------------------------------------------------- minimization


def minimize(T: Diagram) -> tuple[Diagram, tuple[int, ...]]:
    """Merge states with identical step-by-step behavior (exact outputs).

    Classic partition refinement: initial classes by generator-output row,
    refined by successor classes until stable.  Returns the quotient machine
    together with the quotient map (a tuple sending each old state to its
    class index in the new machine).  The quotient runs over *all* states;
    unreachable states merge into their behavioral class like any other.
    """
    n_states = T.n_states
    cls: dict[int, int] = {}
    row_ids: dict = {}
    for q in range(n_states):
        row = T.outs[q]
        if row not in row_ids:
            row_ids[row] = len(row_ids)
        cls[q] = row_ids[row]
    while True:
        new_ids: dict = {}
        new_cls: dict[int, int] = {}
        for q in range(n_states):
            s = (cls[q], tuple(cls[p] for p in T.trans[q]))
            if s not in new_ids:
                new_ids[s] = len(new_ids)
            new_cls[q] = new_ids[s]
        if new_cls == cls:
            break
        cls = new_cls
    reps: dict[int, int] = {}
    for q in range(n_states):
        reps.setdefault(cls[q], q)
    class_order = sorted(reps, key=lambda c: reps[c])
    remap = {c: i for i, c in enumerate(class_order)}
    trans = []
    outs = []
    names = []
    for c in class_order:
        q = reps[c]
        trans.append([remap[cls[p]] for p in T.trans[q]])
        outs.append(list(T.outs[q]))
        names.append(T.names[q])
    quotient = Diagram(
        T.domain,
        T.codomain,
        trans,
        outs,
        base=remap[cls[T.base]],
        names=names,
        check=False,
    )
    state_map = tuple(remap[cls[q]] for q in range(n_states))
    return quotient, state_map


# ---------------------------------------------------------------- images


def image_all(
    T: Diagram, depth_cap: int = 64, roots_budget: int = 4096
) -> dict[int, ConeSet]:
    """Image cone set of every state: the set of outputs of infinite runs.

    Greatest-fixpoint iteration I(q) <- union over level-1 squares u of
    out(q, u) * I(end state); starting from the full space the iterates
    decrease, and they stabilize exactly when every image is clopen.  Raises
    CapExceeded after depth_cap iterations without stabilizing, or as soon as
    some approximant needs more than roots_budget cones (both signal a
    non-clopen image -- the approximants of one would shrink forever).
    """
    d, n = T.domain
    e, m = T.codomain
    squares1 = level1_squares(d, n)
    steps = []
    for q in range(T.n_states):
        row = []
        for u in squares1:
            p, out = T.run(q, u)
            row.append((p, out))
        steps.append(row)
    eps = WordD.epsilon(e, m)
    current: list[tuple[WordD, ...]] = [(eps,) for _ in range(T.n_states)]
    for _ in range(depth_cap):
        nxt = []
        for q in range(T.n_states):
            roots = set()
            for p, out in steps[q]:
                for r in current[p]:
                    roots.add(out * r)
            canon = canonical_roots(e, m, frozenset(roots))
            if len(canon) > roots_budget:
                raise CapExceeded(
                    f"image approximant needs more than {roots_budget} cones; "
                    "image not clopen?"
                )
            nxt.append(canon)
        if nxt == current:
            return {q: ConeSet(e, m, current[q]) for q in range(T.n_states)}
        current = nxt
    raise CapExceeded(
        f"image iteration did not stabilize within {depth_cap} rounds; "
        "image not clopen?"
    )


def image(T: Diagram, state: int | None = None, depth_cap: int = 64) -> ConeSet:
    """Image cone set of one state (default: the base state)."""
    if state is None:
        state = T.base
    return image_all(T, depth_cap=depth_cap)[state]


def complete_response(T: Diagram, depth_cap: int = 64) -> Diagram:
    """Shift outputs as early as possible: every state's image gets trivial lcp.

    The returned machine has out'(q, g) = lcp(q)^-1 * out(q, g) * lcp(next),
    where lcp(q) is the longest common prefix of image(q).  Transitions and
    states are unchanged.
    """
    imgs = image_all(T, depth_cap=depth_cap)
    g = {q: lcp_all(imgs[q].roots) for q in range(T.n_states)}
    outs = []
    for q in range(T.n_states):
        row = []
        for gidx in range(len(T.outs[q])):
            p = T.trans[q][gidx]
            shifted = (T.outs[q][gidx] * g[p]).strip(g[q])
            row.append(shifted)
        outs.append(row)
    return Diagram(
        T.domain, T.codomain, T.trans, outs, base=T.base, names=T.names, check=False
    )


def is_complete_response(T: Diagram, depth_cap: int = 64) -> bool:
    """True when every state's image has trivial longest common prefix."""
    imgs = image_all(T, depth_cap=depth_cap)
    return all(lcp_all(imgs[q].roots).is_epsilon for q in range(T.n_states))


def freeze_handle(H: MachineHandle, start=None, bound: int = 4096) -> Diagram:
    """Materialize the part of a handle reachable from `start` as a Diagram.

    Breadth-first over generator steps in (coordinate, letter) order; raises
    BoundExceeded when more than `bound` distinct states appear.
    """
    if start is None:
        start = H.base
    d, n = H.domain
    index = {start: 0}
    order = [start]
    trans: list[list[int]] = []
    outs: list[list[WordD]] = []
    i = 0
    while i < len(order):
        s = order[i]
        trow = []
        orow = []
        for coord, letter in gens(d, n):
            t, out = H.step(s, coord, letter)
            if t not in index:
                if len(order) >= bound:
                    raise BoundExceeded(
                        f"handle has more than {bound} states reachable from {start!r}"
                    )
                index[t] = len(order)
                order.append(t)
            trow.append(index[t])
            orow.append(out)
        trans.append(trow)
        outs.append(orow)
        i += 1
    names = [str(s) for s in order]
    if len(set(names)) != len(names):
        names = [f"s{i}" for i in range(len(order))]
    return Diagram(H.domain, H.codomain, trans, outs, base=0, names=names, check=False)


def minimal_for_homeomorphism(
    M: MachineHandle, start=None, bound: int = 4096
) -> tuple[Diagram, int]:
    """The minimal machine of the boundary map at `start`, with its base state.

    Restricts to the part reachable from `start` (breadth-first, at most
    `bound` states for lazy handles), then applies complete_response and
    minimize.  When the boundary map at `start` is a homeomorphism onto a
    clopen set, the result is its unique minimal machine up to relabeling.
    Raises BoundExceeded when a lazy handle keeps producing fresh states (its
    minimal machine may be infinite).
    """
    if start is None:
        start = M.base
    if isinstance(M, Diagram):
        finite = restrict(M, reachable_states(M, start), start)
    else:
        finite = freeze_handle(M, start, bound)
    cr = complete_response(finite)
    quotient, _ = minimize(cr)
    return quotient, quotient.base


# ---------------------------------------------------------------- degeneracy


def is_nondegenerate(T: Diagram) -> bool:
    """True when every infinite run outputs infinitely much in every codomain coordinate.

    Degeneracy is witnessed by a cycle (over level-1 square steps) along which
    some codomain coordinate receives empty output only.
    """
    d, n = T.domain
    e, m = T.codomain
    squares1 = level1_squares(d, n)
    steps = []
    for q in range(T.n_states):
        row = []
        for u in squares1:
            p, out = T.run(q, u)
            row.append((p, out))
        steps.append(row)
    for j in range(e):
        adj: dict[int, set[int]] = {q: set() for q in range(T.n_states)}
        for q in range(T.n_states):
            for p, out in steps[q]:
                if not out.coords[j]:
                    adj[q].add(p)
        if _has_cycle(adj):
            return False
    return True


def _has_cycle(adj: dict[int, set[int]]) -> bool:
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {q: WHITE for q in adj}
    for root in adj:
        if color[root] != WHITE:
            continue
        stack = [(root, iter(adj[root]))]
        color[root] = GRAY
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if color[nxt] == GRAY:
                    return True
                if color[nxt] == WHITE:
                    color[nxt] = GRAY
                    stack.append((nxt, iter(adj[nxt])))
                    advanced = True
                    break
            if not advanced:
                color[node] = BLACK
                stack.pop()
    return False


# ---------------------------------------------------------------- synchronization


def synchronizing_level(T: Diagram, max_level: int | None = None) -> int:
    """Least k such that reading any level-k square forgets the start state.

    Iterates the family {end-state sets of level-k squares}; raises
    NotSynchronizing when the family of non-singleton sets revisits a previous
    value, and BoundExceeded when max_level is hit first.
    """
    d, n = T.domain
    squares1 = level1_squares(d, n)
    sq_steps = []
    for q in range(T.n_states):
        sq_steps.append([T.run(q, u)[0] for u in squares1])
    start = frozenset(range(T.n_states))
    family = {start}
    seen_families = {frozenset(family)}
    level = 0
    while True:
        if all(len(S) == 1 for S in family):
            return level
        if max_level is not None and level >= max_level:
            raise BoundExceeded(f"not synchronizing within level {max_level}")
        nxt = set()
        for S in family:
            for u_idx in range(len(squares1)):
                nxt.add(frozenset(sq_steps[q][u_idx] for q in S))
        family = nxt
        level += 1
        key = frozenset(family)
        if key in seen_families:
            raise NotSynchronizing(
                f"state family repeats at level {level} without collapsing"
            )
        seen_families.add(key)


def is_synchronizing(T: Diagram, max_level: int | None = None) -> bool:
    try:
        synchronizing_level(T, max_level=max_level)
        return True
    except (NotSynchronizing, BoundExceeded):
        return False


def core(T: Diagram) -> Diagram:
    """The sub-machine on states reachable after synchronization.

    For a synchronizing machine, deep square inputs land in a unique state
    regardless of where they started; the core is the (transition-closed) set
    of such landing states.  Raises NotSynchronizing otherwise.
    """
    k = synchronizing_level(T)
    d, n = T.domain
    squares1 = level1_squares(d, n)
    sq_steps = []
    for q in range(T.n_states):
        sq_steps.append([T.run(q, u)[0] for u in squares1])
    # landing states at the synchronization level
    family = {frozenset(range(T.n_states))}
    for _ in range(k):
        family = {
            frozenset(sq_steps[q][u] for q in S)
            for S in family
            for u in range(len(squares1))
        }
    landing = {next(iter(S)) for S in family}
    # close under transitions (landing sets already are, but keep it robust)
    order = sorted(landing)
    seen = set(order)
    i = 0
    while i < len(order):
        for p in T.trans[order[i]]:
            if p not in seen:
                seen.add(p)
                order.append(p)
        i += 1
    return restrict(T, order, order[0])


# ---------------------------------------------------------------- injectivity


class InjectivityReport:
    """Outcome of an injectivity check: yes / no (with witness) / unknown."""

    def __init__(self, status: str, witness=None, cap: int | None = None) -> None:
        assert status in ("yes", "no", "unknown")
        self.status = status
        self.witness = witness
        self.cap = cap

    def __repr__(self) -> str:
        if self.status == "no":
            return f"InjectivityReport(no, witness={self.witness})"
        if self.status == "unknown":
            return f"InjectivityReport(unknown, cap={self.cap})"
        return "InjectivityReport(yes)"


def injectivity(
    T: Diagram,
    state: int | None = None,
    offset_cap: int | None = None,
    node_cap: int = 1 << 20,
) -> InjectivityReport:
    """Decide whether the boundary map from a state is injective.

    Pairs of distinct points are tracked as pairs of level-1-square runs that
    first diverge at some state reachable from `state`; a pair of runs yields
    equal outputs iff the two output tuples remain coordinatewise comparable
    forever.  A reachable cycle in the pair graph after divergence proves
    non-injectivity (with an eventually periodic witness pair); exhausting the
    graph proves injectivity; growing the output lag past offset_cap, or
    visiting more than node_cap pair nodes, gives "unknown".
    """
    if state is None:
        state = T.base
    d, n = T.domain
    e, m = T.codomain
    if offset_cap is None:
        max_out = max(
            (w.max_len for row in T.outs for w in row), default=0
        )
        offset_cap = T.n_states * T.n_states * (1 + max_out) + 4
    squares1 = level1_squares(d, n)
    steps = []
    for q in range(T.n_states):
        steps.append([T.run(q, u) for u in squares1])

    def advance(node, ui, vi):
        """One pair step; returns the new node or None when outputs split."""
        p1, p2, exc = node
        q1, o1 = steps[p1][ui]
        q2, o2 = steps[p2][vi]
        new_exc = []
        for j in range(e):
            sign, word = exc[j]
            # side convention: sign=+1 means run 1 is ahead by `word`
            if sign >= 0:
                a = word + o1.coords[j]
                b = o2.coords[j]
            else:
                a = o1.coords[j]
                b = word + o2.coords[j]
            k = min(len(a), len(b))
            if a[:k] != b[:k]:
                return None
            if len(a) >= len(b):
                new_exc.append((1, a[len(b):]))
            else:
                new_exc.append((-1, b[len(a):]))
        return (q1, q2, tuple(new_exc))

    trivial = tuple((1, ()) for _ in range(e))
    starts = []
    for q in reachable_states(T, state):
        for ui in range(len(squares1)):
            for vi in range(len(squares1)):
                if ui == vi:
                    continue
                node = advance((q, q, trivial), ui, vi)
                if node is not None:
                    starts.append((node, q, ui, vi))

    # DFS with cycle detection over the pair graph
    seen: set = set()
    parent_edge: dict = {}
    for node0, origin, u0, v0 in starts:
        if node0 in seen:
            continue
        stack = [(node0, iter(itertools.product(range(len(squares1)), repeat=2)))]
        on_path = {node0}
        parent_edge[node0] = (None, origin, u0, v0)
        seen.add(node0)
        while stack:
            node, it = stack[-1]
            if max((len(exc[1]) for exc in node[2]), default=0) > offset_cap:
                return InjectivityReport("unknown", cap=offset_cap)
            advanced = False
            for ui, vi in it:
                nxt = advance(node, ui, vi)
                if nxt is None:
                    continue
                if nxt in on_path:
                    witness = _injectivity_witness(
                        parent_edge, node, nxt, ui, vi, squares1
                    )
                    return InjectivityReport("no", witness=witness)
                if nxt not in seen:
                    if len(seen) >= node_cap:
                        return InjectivityReport("unknown", cap=node_cap)
                    seen.add(nxt)
                    parent_edge[nxt] = (node, None, ui, vi)
                    on_path.add(nxt)
                    stack.append((nxt, iter(itertools.product(range(len(squares1)), repeat=2))))
                    advanced = True
                    break
            if not advanced:
                on_path.discard(node)
                stack.pop()
    return InjectivityReport("yes")


def _injectivity_witness(parent_edge, node, cycle_start, ui, vi, squares1):
    """Two eventually periodic inputs with equal outputs: ((pre1, per1), (pre2, per2))."""
    # walk back from `node` to the start, collecting square pairs
    chain = [(ui, vi)]
    cur = node
    origin = None
    while True:
        prev, orig, u, v = parent_edge[cur]
        chain.append((u, v))
        if prev is None:
            origin = orig
            break
        cur = prev
    chain.reverse()
    # locate the cycle: everything from the first occurrence of cycle_start
    # replay to find index of cycle_start on the path
    path_nodes = []
    cur = node
    while True:
        path_nodes.append(cur)
        prev, orig, u, v = parent_edge[cur]
        if prev is None:
            break
        cur = prev
    path_nodes.reverse()
    cycle_idx = path_nodes.index(cycle_start)
    pre1 = [squares1[u] for u, v in chain[: cycle_idx + 1]]
    pre2 = [squares1[v] for u, v in chain[: cycle_idx + 1]]
    per1 = [squares1[u] for u, v in chain[cycle_idx + 1:]]
    per2 = [squares1[v] for u, v in chain[cycle_idx + 1:]]
    return (origin, (pre1, per1), (pre2, per2))


# ---------------------------------------------------------------- behavior probes


def probe_words(d: int, n: int, max_len: int, cap: int = 4096) -> list[WordD]:
    """All word tuples with every coordinate of length <= max_len, lex-first.

    Deterministic order (length profile, then letters); truncated at `cap`.
    """
    out = []
    profiles = sorted(
        itertools.product(range(max_len + 1), repeat=d), key=lambda p: (sum(p), p)
    )
    for profile in profiles:
        pools = [
            list(itertools.product(range(n), repeat=ln)) for ln in profile
        ]
        for combo in itertools.product(*pools):
            out.append(WordD(d, n, combo))
            if len(out) >= cap:
                return out
    return out


def _reach_within_depth(H: MachineHandle, start, depth: int, state_budget: int):
    """States reachable from `start` by words with every coordinate <= depth.

    Exploration stops once `state_budget` states have been collected; a
    truncated collection is still a valid input for a lower bound.
    """
    d, n = H.domain
    best: dict = {start: (0,) * d}
    queue = [start]
    order = [start]
    while queue:
        nxt_queue = []
        for s in queue:
            lens = best[s]
            for coord in range(d):
                if lens[coord] >= depth:
                    continue
                for letter in range(n):
                    t, _ = H.step(s, coord, letter)
                    new_lens = tuple(
                        l + (1 if c == coord else 0) for c, l in enumerate(lens)
                    )
                    if t not in best:
                        if len(best) >= state_budget:
                            return order
                        best[t] = new_lens
                        order.append(t)
                        nxt_queue.append(t)
                    else:
                        merged = tuple(min(a, b) for a, b in zip(best[t], new_lens))
                        if merged != best[t]:
                            best[t] = merged
                            nxt_queue.append(t)
        queue = nxt_queue
    return order


def distinct_states_lower_bound(
    H: MachineHandle,
    start=None,
    depth: int = 4,
    state_budget: int = 4096,
    probe_cap: int = 2048,
) -> int:
    """A certified lower bound on the number of behaviorally distinct states.

    Collects the states reachable from `start` (default: the base state) by
    word tuples whose every coordinate has length at most `depth` (truncated
    at `state_budget`), then refines a partition of them round by round:
    round `ell` separates the members of each group by their outputs on probe
    words of coordinate length up to `ell`.  Groups only ever split, and a
    split always witnesses a genuine behavioral difference, so the final
    group count never overshoots the true number of distinct behaviors.

    Work is bounded: each group reads at most `max(16, probe_cap // size)`
    probes per round, rounds stop at depth + 4, when every group is a
    singleton, or after two consecutive rounds with no split.  All three
    cutoffs can only lower the count.
    """
    d, n = H.domain
    if start is None:
        start = H.base
    states = _reach_within_depth(H, start, depth, state_budget)

    run_memo: dict = {}

    def run_out(s, w: WordD):
        key = (s, w)
        got = run_memo.get(key)
        if got is None:
            got = H.run(s, w)[1]
            run_memo[key] = got
        return got

    groups = [states]
    quiet_rounds = 0
    for ell in range(1, depth + 4 + 1):
        if all(len(g) == 1 for g in groups):
            break
        next_groups = []
        split_happened = False
        for group in groups:
            if len(group) == 1:
                next_groups.append(group)
                continue
            budget = max(16, probe_cap // len(group))
            probes = probe_words(d, n, ell, cap=min(probe_cap, budget))
            buckets: dict = {}
            for s in group:
                sig = tuple(run_out(s, w) for w in probes)
                buckets.setdefault(sig, []).append(s)
            if len(buckets) > 1:
                split_happened = True
            next_groups.extend(buckets.values())
        groups = next_groups
        if split_happened:
            quiet_rounds = 0
        else:
            quiet_rounds += 1
            if quiet_rounds >= 2:
                break
    return len(groups)


def behavior_equal(A: MachineHandle, B: MachineHandle, depth: int) -> bool:
    """Exact equality of cumulative outputs on every word of coordinate depth <= depth.

    This is per-prefix equality: machines that eventually produce the same
    points but emit them with different lag are NOT equal in this sense (use
    :func:`outputs_agree` for the lag-tolerant comparison).
    """
    if A.domain != B.domain or A.codomain != B.codomain:
        return False
    d, n = A.domain

    # DFS over words in coordinate-major construction order: extend
    # coordinate i only while all later coordinates are still empty, so each
    # word tuple is visited exactly once with incremental state updates.
    def rec(sa, sb, lens):
        for coord in range(d):
            # coordinate-major: coord may only grow while later coords are empty
            if any(lens[c] for c in range(coord + 1, d)):
                continue
            if lens[coord] >= depth:
                continue
            for letter in range(n):
                na, pa = A.step(sa, coord, letter)
                nb, pb = B.step(sb, coord, letter)
                if pa != pb:
                    return False
                new_lens = tuple(
                    l + (1 if c == coord else 0) for c, l in enumerate(lens)
                )
                if not rec(na, nb, new_lens):
                    return False
        return True

    # Cumulative outputs are equal on every word iff stepwise outputs agree
    # along this construction tree (cumulative output = product of steps, and
    # equal cumulative prefixes force equal steps).
    return rec(A.base, B.base, (0,) * d)


def outputs_agree(
    A: MachineHandle, B: MachineHandle, depth: int, lag_floor: int = 0
) -> bool:
    """Lag-tolerant output comparison on all square inputs of the given depth.

    Checks that cumulative outputs stay coordinatewise comparable (one a
    prefix of the other) along every square path, and that the guaranteed
    common output length reaches `lag_floor` in every coordinate at full
    depth.  Two machines inducing the same boundary map always pass; machines
    in different cones of behavior fail quickly.
    """
    if A.domain != B.domain or A.codomain != B.codomain:
        return False
    d, n = A.domain
    e, m = A.codomain
    sq = level1_squares(d, n)
    trivial = tuple((1, ()) for _ in range(e))
    # node: (stateA, stateB, per-coordinate excess, minimum common length)
    stack = [(A.base, B.base, trivial, (0,) * e, 0)]
    while stack:
        sa, sb, exc, common, k = stack.pop()
        if k == depth:
            if any(c < lag_floor for c in common):
                return False
            continue
        for u in sq:
            na, pa = A.run(sa, u)
            nb, pb = B.run(sb, u)
            new_exc = []
            new_common = []
            dead = False
            for j in range(e):
                sign, word = exc[j]
                if sign >= 0:
                    a = word + pa.coords[j]
                    b = pb.coords[j]
                else:
                    a = pa.coords[j]
                    b = word + pb.coords[j]
                cut = min(len(a), len(b))
                if a[:cut] != b[:cut]:
                    dead = True
                    break
                new_common.append(common[j] + cut)
                if len(a) >= len(b):
                    new_exc.append((1, a[len(b):]))
                else:
                    new_exc.append((-1, b[len(a):]))
            if dead:
                return False
            stack.append((na, nb, tuple(new_exc), tuple(new_common), k + 1))
    return True
