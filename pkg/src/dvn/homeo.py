"""Prefix-exchange homeomorphisms of powers of Cantor space.

A *prefix exchange* is given by two prefix codes of equal size and a
bijection between them: the point ``u * x`` (member ``u`` of the source
code, tail ``x``) maps to ``bij(u) * x``.  These maps form a group under
composition; the group over the d-fold power of n-ary Cantor space is the
prefix-exchange group of that space.

This module provides the exchange type itself, the lazy machine a
homeomorphism induces (states are the word tuples read so far, outputs are
image-cone prefixes), a membership test for the prefix-exchange group, and
`realize`, which builds a finite machine whose behavior has a prescribed
canonical core.

Everything composes left to right: ``compose_exchanges(g, h)`` means
"g then h", and maps act on the right of points.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Mapping, Sequence

from .words import (
    AlphabetMismatch,
    DvnError,
    PrefixCode,
    WordD,
    lcp_all,
    squares,
)
from .machine import (
    BoundExceeded,
    Diagram,
    MachineHandle,
    NotSynchronizing,
    compose,
    core,
    gen_index,
    gens,
    image,
    product,
    synchronizing_level,
)


class SignatureObstruction(DvnError):
    """The required prefix-code size is not realizable over this alphabet."""


class _UndeterminedType:
    """Singleton result of applying an exchange to a word too shallow to decide."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Undetermined"

    def __bool__(self) -> bool:
        return False


Undetermined = _UndeterminedType()


def _coerce_code(code) -> PrefixCode:
    if isinstance(code, PrefixCode):
        return code
    members = tuple(code)
    if not members:
        raise ValueError("a prefix code needs at least one member")
    first = members[0]
    return PrefixCode(first.d, first.n, members)


class PrefixExchange:
    """A bijection between two prefix codes, acting by cone swaps.

    `source` and `target` are :class:`PrefixCode` values over the same
    (d, n); `bij` maps every source member to a distinct target member.
    """

    __slots__ = ("source", "target", "bij")

    def __init__(
        self,
        source: PrefixCode | Iterable[WordD],
        target: PrefixCode | Iterable[WordD],
        bij: Mapping[WordD, WordD] | Iterable[tuple[WordD, WordD]],
    ) -> None:
        source = _coerce_code(source)
        target = _coerce_code(target)
        if (source.d, source.n) != (target.d, target.n):
            raise AlphabetMismatch(
                f"source over ({source.d},{source.n}) vs target over"
                f" ({target.d},{target.n})"
            )
        if len(source) != len(target):
            raise ValueError(
                f"codes must have equal size: {len(source)} vs {len(target)}"
            )
        if not isinstance(bij, Mapping):
            bij = dict(bij)
        bij = dict(bij)
        if set(bij) != set(source.members):
            raise ValueError("bijection keys must be exactly the source members")
        if set(bij.values()) != set(target.members):
            raise ValueError("bijection values must be exactly the target members")
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "bij", bij)

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("PrefixExchange is immutable")

    @property
    def d(self) -> int:
        return self.source.d

    @property
    def n(self) -> int:
        return self.source.n

    @property
    def depth(self) -> int:
        """Greatest coordinate length over both codes' members."""
        return max(
            max(m.max_len for m in self.source.members),
            max(m.max_len for m in self.target.members),
        )

    def apply(self, w: WordD):
        """The image prefix of w, or Undetermined when w is too shallow.

        If some source member u is a prefix of w, every point under w maps
        into the cone of ``bij(u) * (w minus u)`` and that word is returned.
        """
        if (w.d, w.n) != (self.d, self.n):
            raise AlphabetMismatch(
                f"word shape ({w.d},{w.n}) vs exchange over ({self.d},{self.n})"
            )
        for u in self.source.members:
            if u.is_prefix_of(w):
                return self.bij[u] * w.strip(u)
        return Undetermined

    def invert(self) -> "PrefixExchange":
        """The inverse exchange: swap the codes and flip the bijection."""
        return PrefixExchange(
            self.target, self.source, {v: u for u, v in self.bij.items()}
        )

    def __repr__(self) -> str:
        pairs = ", ".join(
            f"{u.text()}->{self.bij[u].text()}" for u in self.source.members
        )
        return f"PrefixExchange({pairs})"

    def __eq__(self, other) -> bool:
        """Behavioral equality: the two exchanges agree as maps on points.

        The compatible joins of the two source codes form a complete prefix
        code refining both, and each map translates every cone of it by a
        fixed prefix swap, so agreement on the joins is agreement everywhere.
        """
        if not isinstance(other, PrefixExchange):
            return NotImplemented
        if (self.d, self.n) != (other.d, other.n):
            return False
        for u in self.source.members:
            for s in other.source.members:
                if not u.compatible(s):
                    continue
                v = u.join(s)
                if self.apply(v) != other.apply(v):
                    return False
        return True

    __hash__ = None  # behavioral equality is not hash-compatible


def identity_exchange(d: int, n: int) -> PrefixExchange:
    """The trivial exchange on the code {empty word tuple}."""
    eps = WordD.epsilon(d, n)
    code = PrefixCode(d, n, [eps])
    return PrefixExchange(code, code, {eps: eps})


def compose_exchanges(g: PrefixExchange, h: PrefixExchange) -> PrefixExchange:
    """The exchange acting as g followed by h.

    g's pairs are split (one coordinate at a time) until every g-image lies
    under a unique member of h's source code, then h is applied to the
    image side.
    """
    if (g.d, g.n) != (h.d, h.n):
        raise AlphabetMismatch(
            f"cannot compose exchanges over ({g.d},{g.n}) and ({h.d},{h.n})"
        )
    d, n = g.d, g.n
    result: dict[WordD, WordD] = {}
    work = deque((u, g.bij[u]) for u in g.source.members)
    while work:
        u, v = work.popleft()
        holder = h.source.member_prefixing(v)
        if holder is not None:
            result[u] = h.bij[holder] * v.strip(holder)
            continue
        live = [s for s in h.source.members if s.compatible(v)]
        for i in range(d):
            if any(len(s.coords[i]) > len(v.coords[i]) for s in live):
                for x in range(n):
                    work.append((u.append(i, x), v.append(i, x)))
                break
    return PrefixExchange(result.keys(), result.values(), result)


class LazyPrefixExchangeMachine(MachineHandle):
    """The machine a prefix exchange induces, with word tuples as states.

    The state after reading w is w itself; the output along the way is the
    longest word tuple every image point of the cone of w must extend.
    Outputs are exact: for a prefix exchange the image of a cone is a
    finite union of cones read off the codes.
    """

    def __init__(self, exchange: PrefixExchange) -> None:
        self.exchange = exchange
        self.domain = (exchange.d, exchange.n)
        self.codomain = (exchange.d, exchange.n)
        self.base = WordD.epsilon(exchange.d, exchange.n)
        # pure-function memo; concurrent duplicate computation is harmless
        self._lcp_cache: dict[WordD, WordD] = {}

    def image_lcp(self, w: WordD) -> WordD:
        """Longest common prefix (per coordinate) of the image of cone(w)."""
        got = self._lcp_cache.get(w)
        if got is not None:
            return got
        ex = self.exchange
        prefixes = [
            ex.bij[u] * u.join(w).strip(u)
            for u in ex.source.members
            if u.compatible(w)
        ]
        out = lcp_all(prefixes)
        self._lcp_cache[w] = out
        return out

    def step(self, state: WordD, coord: int, letter: int):
        nxt = state.append(coord, letter)
        out = self.image_lcp(nxt).strip(self.image_lcp(state))
        return nxt, out


def machine_of(h: PrefixExchange) -> LazyPrefixExchangeMachine:
    """The lazy machine of an exchange (states = word tuples read so far)."""
    return LazyPrefixExchangeMachine(h)


def _is_identity_core(C: Diagram) -> bool:
    if C.n_states != 1:
        return False
    d, n = C.domain
    if C.codomain != (d, n):
        return False
    for coord, letter in gens(d, n):
        g = gen_index(n, coord, letter)
        if C.outs[0][g] != WordD.gen(d, n, coord, letter):
            return False
    return True


def is_dvn_member(M, q=None) -> bool:
    """Whether the machine's homeomorphism is a prefix exchange.

    For a finite machine this is decidable: the machine must synchronize
    and its eventual-state part must be a single state copying input to
    output.  For the lazy machine of an exchange it is always true; the
    defining property -- every state at code depth copies its input -- is
    verified directly.  For other lazy handles the question is not
    decidable here, and a TypeError is raised.
    """
    if isinstance(M, PrefixExchange):
        M = machine_of(M)
    if isinstance(M, LazyPrefixExchangeMachine):
        d, n = M.domain
        k = max(m.max_len for m in M.exchange.source.members)
        for w in squares(d, n, k):
            for coord, letter in gens(d, n):
                _, out = M.step(w, coord, letter)
                if out != WordD.gen(d, n, coord, letter):
                    return False
        return True
    if isinstance(M, Diagram):
        try:
            synchronizing_level(M)
        except NotSynchronizing:
            return False
        return _is_identity_core(core(M))
    raise TypeError(
        "membership is decided for exchanges, their machines, and finite"
        f" machines, not {type(M).__name__}"
    )


# --- realization -----------------------------------------------------------


def _left_comb_code(d: int, n: int, size: int) -> list[WordD]:
    """The prefix code of the given size from repeated first-coordinate splits.

    Start at the empty tuple; repeatedly split the all-zeros member into its
    n children in coordinate 0.  Requires size = 1 mod (n-1).
    """
    if size < 1 or (size - 1) % (n - 1) != 0:
        raise SignatureObstruction(
            f"no prefix code of size {size} exists over ({d},{n}):"
            f" sizes are 1 mod {n - 1}"
        )
    comb: list[WordD] = []
    z = WordD.epsilon(d, n)
    for _ in range((size - 1) // (n - 1)):
        comb.extend(z.append(0, x) for x in range(1, n))
        z = z.append(0, 0)
    comb.append(z)
    return comb


def _min_output_lengths(T: Diagram, q: int, k: int) -> int:
    """min over length-k inputs from q of the output length (one-dimensional)."""
    width = T.domain[0] * T.domain[1]
    best = {q: 0}
    for _ in range(k):
        nxt: dict[int, int] = {}
        for s, pending in best.items():
            for g in range(width):
                t = T.trans[s][g]
                val = pending + T.outs[s][g].total_length
                cur = nxt.get(t)
                if cur is None or val < cur:
                    nxt[t] = val
        best = nxt
    return min(best.values())


def _fresh_name(word: WordD, taken: set) -> str:
    name = word.text()
    while name in taken:
        name = "." + name
    taken.add(name)
    return name


def _realize_1d(P: Diagram, q: int) -> tuple[Diagram, int]:
    """Graft a frontier of fresh states onto P so the base behaves from depth k.

    Fresh states are the words shorter than k; the word b of length k hands
    over to P's state after b, outputting phi(a_b) followed by P's output
    from q on b with its image-cone root a_b removed.
    """
    d, n = P.domain
    if d != 1:  # pragma: no cover - callers guarantee this
        raise ValueError("frontier construction is one-dimensional")
    img = image(P, q)
    A = sorted(img.disjoint_decomposition())
    size = len(A)
    B = sorted(_left_comb_code(d, n, size))
    phi = dict(zip(A, B))
    need = max(a.max_len for a in A)

    k = size + 1
    while _min_output_lengths(P, q, k) < need:
        k += 1
        if k > size + 65:
            raise BoundExceeded(
                f"outputs from state {P.names[q]} do not reach length {need}"
                f" within depth {size + 65}"
            )

    words: list[WordD] = [WordD.epsilon(d, n)]
    index = {words[0]: 0}
    for depth in range(k - 1):
        for w in [w for w in words if w.total_length == depth]:
            for x in range(n):
                wx = w.append(0, x)
                index[wx] = len(words)
                words.append(wx)
    offset = len(words)

    width = d * n
    trans: list[list[int]] = []
    outs: list[list[WordD]] = []
    eps = WordD.epsilon(d, n)
    for w in words:
        trow, orow = [], []
        for x in range(n):
            wx = w.append(0, x)
            if wx.total_length < k:
                trow.append(index[wx])
                orow.append(eps)
            else:
                p, out = P.run(q, wx)
                root = next(a for a in A if a.is_prefix_of(out))
                trow.append(offset + p)
                orow.append(phi[root] * out.strip(root))
        trans.append(trow)
        outs.append(orow)
    for s in range(P.n_states):
        trans.append([offset + t for t in P.trans[s]])
        outs.append(list(P.outs[s]))

    taken: set[str] = set()
    names = [_fresh_name(w, taken) for w in words]
    for s in range(P.n_states):
        names.append(_fresh_name_str(P.names[s], taken))
    D = Diagram((d, n), (d, n), trans, outs, base=0, names=names)
    return D, 0


def _fresh_name_str(name: str, taken: set) -> str:
    while name in taken:
        name = "." + name
    taken.add(name)
    return name


def _generator_permutation(D: Diagram) -> bool:
    """One-state machines whose outputs permute the single-letter generators."""
    if D.n_states != 1 or D.domain != D.codomain:
        return False
    d, n = D.domain
    seen = set()
    for g in range(d * n):
        out = D.outs[0][g]
        if out.total_length != 1:
            return False
        seen.add(out)
    return len(seen) == d * n


def realize(P, q: int | None = None) -> tuple[Diagram, int]:
    """A finite machine for a homeomorphism whose canonical core is P.

    P may be a canonical core element or a plain machine that is its own
    eventual-state part.  The returned pair is (machine, base state); the
    base is the state that has read nothing.

    One-dimensional cores are grafted directly (fresh states = words below
    the handover depth).  In higher dimensions the core is split into its
    coordinate permutation and d one-dimensional factors; each factor is
    grafted, the grafts act on separate coordinates, and the permutation
    machine is applied after.

    Raises SignatureObstruction when the image of P at q splits into a
    number of cones not attainable by a prefix code.
    """
    D, base_q = _coerce_core_input(P, q)
    d, n = D.domain
    if _generator_permutation(D):
        out = Diagram(
            D.domain, D.codomain, D.trans, D.outs,
            base=base_q, names=D.names, check=False,
        )
        return out, base_q
    if d == 1:
        return _realize_1d(D, base_q)

    from . import outer as _outer

    element = _outer.canonicalize(D)
    perm = _outer.psi(element)
    if perm != tuple(range(d)):
        inverse = tuple(perm.index(i) for i in range(d))
        straightened = _outer.multiply(
            element, _outer.permutation_core(inverse, d, n)
        )
    else:
        straightened = element
    factors = _outer.decompose(straightened)
    parts = []
    for factor in factors:
        Dj, bj = realize(factor)
        parts.append(
            Diagram(
                Dj.domain, Dj.codomain, Dj.trans, Dj.outs,
                base=bj, names=Dj.names, check=False,
            )
        )
    assembled = product(parts)
    if perm != tuple(range(d)):
        assembled = compose(assembled, _outer.permutation_core(perm, d, n).diagram)
    return assembled, assembled.base


def _coerce_core_input(P, q: int | None) -> tuple[Diagram, int]:
    if isinstance(P, Diagram):
        return P, P.base if q is None else q
    diagram = getattr(P, "diagram", None)
    if isinstance(diagram, Diagram):
        return diagram, diagram.base if q is None else q
    raise TypeError(f"expected a machine or core element, got {type(P).__name__}")


# --- builtin lazy machines ---------------------------------------------------


def bakers_exchange() -> PrefixExchange:
    """The exchange moving the first letter of coordinate 0 to coordinate 1."""
    f1 = [WordD(2, 2, ((a,), ())) for a in range(2)]
    f2 = [WordD(2, 2, ((), (a,))) for a in range(2)]
    return PrefixExchange(f1, f2, dict(zip(f1, f2)))


def bakers() -> LazyPrefixExchangeMachine:
    """The lazy machine of the first-letter-across exchange (infinite-state)."""
    return machine_of(bakers_exchange())


class PairingInverseHandle(MachineHandle):
    """Inverse of digit pairing: word pairs in, one 4-ary word out.

    The forward direction reads a 4-ary digit v and writes the bit pair
    (v div 2, v mod 2) across the two coordinates.  This machine undoes it
    lazily: its states are the word pairs with at least one empty
    coordinate (the unmatched surplus); every matched bit pair (a, b) is
    emitted as the digit 2a + b.
    """

    def __init__(self) -> None:
        self.domain = (2, 2)
        self.codomain = (1, 4)
        self.base = WordD.epsilon(2, 2)

    def step(self, state: WordD, coord: int, letter: int):
        w = state.append(coord, letter)
        a, b = w.coords
        k = min(len(a), len(b))
        out = WordD(1, 4, ((tuple(2 * a[i] + b[i] for i in range(k)),)))
        rest = WordD(2, 2, (a[k:], b[k:]))
        return rest, out


def inverse_digit_pairing_D() -> PairingInverseHandle:
    """The lazy machine undoing the digit-pairing homeomorphism."""
    return PairingInverseHandle()
