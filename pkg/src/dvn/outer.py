"""Canonical core elements and the coordinate calculus of their monoid.

A :class:`CoreElement` is a transducer diagram brought to a canonical form
(core, complete response, minimized, deterministically relabeled), so that
behavioral equivalence classes compare by table equality.  On top of that
representation this module provides the product (:func:`multiply`), the
coordinate homomorphism :func:`psi` with its kernel test :func:`in_dK`,
per-coordinate factorization (:func:`decompose` / :func:`recompose`),
image-size signatures (:func:`sig`), one-state permutation cores, and the
wreath coordinates that exhibit a psi-trivial element as a tuple of
one-dimensional cores twisted by a coordinate permutation.

Everything composes left to right: ``multiply(A, B)`` means "A then B", and
permutations are tuples ``g`` with ``g[i]`` the image of ``i``, composed as
``(i)(gh) = ((i)g)h``.
"""

from __future__ import annotations

from typing import Sequence

from .words import DvnError, WordD, squares
from .machine import (
    Diagram,
    NotSynchronizing,  # noqa: F401  (re-exported: multiply propagates it)
    complete_response,
    compose,
    core,
    gen_index,
    identity_diagram,
    minimize,
    product,
    reachable_states,
    restrict,
    synchronizing_level,
)
from .machine import image as _image


class Inconsistent(DvnError):
    """Outputs of one input coordinate land in two coordinates (or none)."""


class DecompositionMismatch(DvnError):
    """Factors re-assembled into something other than the input element."""


class NotInvertible(DvnError):
    """No inverse was found within the search bound (inconclusive)."""


class _NotFoundType:
    """Falsy sentinel returned by a bounded search that found nothing."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __bool__(self) -> bool:
        return False

    def __repr__(self) -> str:
        return "NotFound"


NotFound = _NotFoundType()


class CoreElement:
    """A behavior class of synchronizing cores, held in canonical form.

    The wrapped diagram is its own core, has complete response, is minimal,
    and is relabeled deterministically (see :func:`canonicalize`), so two
    CoreElements are behaviorally equal iff their tables are equal.
    """

    __slots__ = ("diagram",)

    def __init__(self, diagram: Diagram) -> None:
        object.__setattr__(self, "diagram", diagram)

    def __setattr__(self, name, value):
        raise AttributeError("CoreElement is immutable")

    @property
    def d(self) -> int:
        return self.diagram.domain[0]

    @property
    def n(self) -> int:
        return self.diagram.domain[1]

    @property
    def base(self) -> int:
        return self.diagram.base

    @property
    def n_states(self) -> int:
        return self.diagram.n_states

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoreElement):
            return NotImplemented
        return self.diagram.table_key() == other.diagram.table_key()

    def __hash__(self) -> int:
        return hash(self.diagram.table_key())

    def __repr__(self) -> str:
        d, n = self.diagram.domain
        return f"CoreElement(d={d}, n={n}, states={self.n_states})"


def canonicalize(D: Diagram | CoreElement) -> CoreElement:
    """The canonical form of a synchronizing diagram's behavior class.

    Pipeline: core, complete response, minimize, then relabel by breadth-first
    search (in generator order) from the state every run lands in after the
    lexicographically least square word at the synchronizing level.  Two
    diagrams are behaviorally equivalent after synchronization iff they
    canonicalize to table-equal CoreElements; the map is idempotent.
    """
    if isinstance(D, CoreElement):
        return D
    if not isinstance(D, Diagram):
        raise TypeError(f"canonicalize expects a Diagram, got {type(D).__name__}")
    C = core(D)
    R = complete_response(C)
    M, _ = minimize(R)
    d, n = M.domain
    k = synchronizing_level(M)
    w_star = next(squares(d, n, k))
    anchor = M.run(0, w_star)[0]
    rooted = Diagram(
        M.domain, M.codomain, M.trans, M.outs, base=anchor, names=M.names, check=False
    )
    ordered = restrict(rooted, reachable_states(rooted), rooted.base)
    final = Diagram(
        ordered.domain,
        ordered.codomain,
        ordered.trans,
        ordered.outs,
        base=ordered.base,
        names=[str(i) for i in range(ordered.n_states)],
        check=False,
    )
    return CoreElement(final)


def identity_core(d: int, n: int) -> CoreElement:
    """The class of the one-state copying machine."""
    return canonicalize(identity_diagram(d, n))


def multiply(A: CoreElement, B: CoreElement) -> CoreElement:
    """The product class "A then B" (canonical form of the composition).

    Well defined on behavior classes: composing cores, taking the core of the
    result and renormalizing yields the class of the composite map.
    """
    A = canonicalize(A) if not isinstance(A, CoreElement) else A
    B = canonicalize(B) if not isinstance(B, CoreElement) else B
    if A.diagram.domain != B.diagram.domain:
        raise ValueError(
            f"alphabet mismatch: {A.diagram.domain} vs {B.diagram.domain}"
        )
    return canonicalize(compose(A.diagram, B.diagram))


def is_identity(A: CoreElement) -> bool:
    """True iff the class is the one-state machine copying every generator."""
    D = A.diagram
    if D.n_states != 1 or D.domain != D.codomain:
        return False
    d, n = D.domain
    for coord in range(d):
        for letter in range(n):
            if D.outs[0][gen_index(n, coord, letter)] != WordD.gen(d, n, coord, letter):
                return False
    return True


# ------------------------------------------------------------- coordinates


def psi(A: CoreElement) -> tuple[int, ...]:
    """The coordinate map: input coordinate i feeds output coordinate psi[i].

    Since the element's states form a core (closed under transitions), the
    output of any single-coordinate word is the concatenation of one-letter
    outputs taken at states of the core, so scanning every (state, letter)
    pair of a coordinate is a complete scan of all its words' outputs.
    Raises Inconsistent when a coordinate's outputs touch two coordinates,
    touch none at all, or the resulting map is not a bijection.
    """
    A = canonicalize(A) if not isinstance(A, CoreElement) else A
    D = A.diagram
    d, n = D.domain
    e = D.codomain[0]
    result = []
    for i in range(d):
        targets: set[int] = set()
        for q in range(D.n_states):
            for a in range(n):
                out = D.outs[q][gen_index(n, i, a)]
                for j in range(e):
                    if out.coords[j]:
                        targets.add(j)
        if len(targets) != 1:
            raise Inconsistent(
                f"coordinate {i} outputs into coordinates {sorted(targets)}"
            )
        result.append(targets.pop())
    if sorted(result) != list(range(d)):
        raise Inconsistent(f"coordinate map {tuple(result)} is not a bijection")
    return tuple(result)


def in_dK(A: CoreElement) -> bool:
    """True iff the coordinate map is trivial (the kernel of psi)."""
    return psi(A) == tuple(range(A.d))


def permutation_core(g: Sequence[int], d: int, n: int) -> CoreElement:
    """The one-state core routing input coordinate i to output coordinate g[i].

    Satisfies psi(permutation_core(g)) == g and multiply(P_g, P_h) == P_{gh}
    under left-to-right composition (i)(gh) = ((i)g)h.
    """
    g = tuple(g)
    if sorted(g) != list(range(d)):
        raise ValueError(f"{g} is not a permutation of range({d})")
    outs = [[None] * (d * n)]
    for i in range(d):
        for a in range(n):
            outs[0][gen_index(n, i, a)] = WordD.gen(d, n, g[i], a)
    D = Diagram((d, n), (d, n), [[0] * (d * n)], outs)
    return canonicalize(D)


def _perm_compose(g: Sequence[int], h: Sequence[int]) -> tuple[int, ...]:
    """g then h, acting on the right: (i)(gh) = ((i)g)h."""
    return tuple(h[g[i]] for i in range(len(g)))


def _perm_inverse(g: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(g)
    for i, j in enumerate(g):
        inv[j] = i
    return tuple(inv)


# ------------------------------------------------------------ factorization


def decompose(A: CoreElement) -> tuple[CoreElement, ...]:
    """Split a psi-trivial element into its d one-dimensional factor cores.

    For each coordinate i, the states reachable from the base by
    coordinate-i letters form a class closed under those moves; restricting
    transitions and outputs to that class and that coordinate and re-reading
    the words over the plain n-letter alphabet yields the i-th factor, which
    is canonicalized.  The factors are verified by re-assembly:
    recompose(factors) must equal the input, else DecompositionMismatch.
    """
    A = canonicalize(A) if not isinstance(A, CoreElement) else A
    if not in_dK(A):
        raise DecompositionMismatch(
            f"coordinate map {psi(A)} is not trivial; only kernel elements split"
        )
    D = A.diagram
    d, n = D.domain
    factors = []
    for i in range(d):
        order = [D.base]
        seen = {D.base}
        for q in order:
            for a in range(n):
                t = D.trans[q][gen_index(n, i, a)]
                if t not in seen:
                    seen.add(t)
                    order.append(t)
        index = {q: m for m, q in enumerate(order)}
        trans1 = []
        outs1 = []
        for q in order:
            trans1.append([index[D.trans[q][gen_index(n, i, a)]] for a in range(n)])
            row = []
            for a in range(n):
                o = D.outs[q][gen_index(n, i, a)]
                for j in range(d):
                    if j != i and o.coords[j]:
                        raise DecompositionMismatch(
                            f"output of coordinate {i} at state {D.names[q]} "
                            f"spills into coordinate {j}"
                        )
                row.append(WordD(1, n, (o.coords[i],)))
            outs1.append(row)
        F = Diagram(
            (1, n),
            (1, n),
            trans1,
            outs1,
            base=index[D.base],
            names=[D.names[q] for q in order],
            check=False,
        )
        factors.append(canonicalize(F))
    result = tuple(factors)
    if recompose(result) != A:
        raise DecompositionMismatch("factors do not re-assemble to the input")
    return result


def recompose(factors: Sequence[CoreElement]) -> CoreElement:
    """The class of the coordinatewise product of one-dimensional factors.

    Multiplicative componentwise: recompose(A_i)·recompose(B_i) equals
    recompose(multiply(A_i, B_i)).
    """
    factors = [canonicalize(f) if not isinstance(f, CoreElement) else f for f in factors]
    if not factors:
        raise ValueError("recompose needs at least one factor")
    ns = {f.n for f in factors}
    if len(ns) != 1:
        raise ValueError(f"factors over different alphabets: {sorted(ns)}")
    for f in factors:
        if f.d != 1:
            raise ValueError("recompose expects one-dimensional factors")
    return canonicalize(product([f.diagram for f in factors]))


# ------------------------------------------------------------------- sig


def sig(A: CoreElement) -> int:
    """The image-size residue mod (n-1): |any disjoint cone cover of the image|.

    Computed from the image of the whole space at the canonical base state;
    independent of the state and of the chosen cone decomposition, and
    multiplicative under multiply.  Always 0 when n == 2 (the residue ring is
    trivial).
    """
    A = canonicalize(A) if not isinstance(A, CoreElement) else A
    return _image(A.diagram, A.diagram.base).ssig()


# ------------------------------------------------------- wreath coordinates


def wreath_coordinates(
    A: CoreElement, max_states: int | None = None
) -> tuple[tuple[CoreElement, ...], tuple[int, ...]]:
    """Exhibit an invertible element as (one-dimensional factors, permutation).

    Returns ``(factors, g)`` with ``g = psi(A)`` and ``factors =
    decompose(multiply(A, permutation_core(g^{-1})))``, so that the element
    equals recompose(factors) followed by the coordinate permutation g.  The
    assignment is multiplicative for the twisted product law:
    the product of (k0, h0) and (k1, h1) has permutation h0·h1 and factor x
    equal to multiply(k0[x], k1[(x)h0]).

    Raises NotInvertible when the bounded inverse search fails (inconclusive).
    """
    A = canonicalize(A) if not isinstance(A, CoreElement) else A
    if find_inverse(A, max_states) is NotFound:
        raise NotInvertible(
            "no inverse found within the search bound; wreath coordinates "
            "are defined for invertible elements only"
        )
    g = psi(A)
    d, n = A.d, A.n
    straight = multiply(A, permutation_core(_perm_inverse(g), d, n))
    return decompose(straight), g


# work budget for the enumeration stage of find_inverse; small enough that
# a fruitless search gives up in seconds rather than minutes
_INVERSE_SEARCH_BUDGET = 40_000


def find_inverse(A: CoreElement, max_states: int | None = None):
    """Search for B with multiply(A, B) and multiply(B, A) both identity.

    Deterministic staged search: the identity, then the powers A^2, A^3, ...
    (catching every finite-order element, with cycle detection), then the
    enumerated elements with at most ``max_states`` states (default:
    A's state count + 2) when that enumeration is within budget.  Returns
    the falsy sentinel ``NotFound`` when the bounded search is exhausted;
    NotFound is inconclusive, not a proof of non-invertibility.
    """
    A = canonicalize(A) if not isinstance(A, CoreElement) else A
    if max_states is None:
        max_states = A.n_states + 2
    ident = identity_core(A.d, A.n)
    if multiply(A, ident) == ident:
        return ident
    # powers: if A^k is the identity then A^(k-1) is the inverse.  Elements
    # of infinite order typically double their state count per step (their
    # powers remember ever longer input windows), so growth past a modest
    # cap abandons this stage before the products get expensive.
    state_cap = max(128, 8 * A.n_states)
    seen = {A}
    power = A
    previous = ident
    for _ in range(64):
        if power.n_states > state_cap:
            break
        previous, power = power, multiply(power, A)
        if is_identity(power):
            return previous
        if power in seen:
            break
        seen.add(power)
    # bounded enumeration (lazy import; enumeration may refuse large specs)
    from . import enumerate as _enumerate

    spec = _enumerate.EnumerationSpec(
        d=A.d,
        n=A.n,
        max_states=max_states,
        max_out_len=max(
            2,
            max((w.total_length for row in A.diagram.outs for w in row), default=1),
        ),
        filters=_enumerate.FILTER_ORDER[:7],  # through injective-states
        budget=_INVERSE_SEARCH_BUDGET,
    )
    try:
        candidates = _enumerate.enumerate_elements(spec)
    except _enumerate.SpecTooLarge:
        return NotFound
    for B in candidates:
        if multiply(A, B) == ident and multiply(B, A) == ident:
            return B
    return NotFound
