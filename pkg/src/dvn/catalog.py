"""Built-in machines, codes, and cores used throughout the library and CLI.

Every entry is constructed from scratch on request (no globals to mutate)
and is addressable from the command line as ``catalog:NAME`` or, for the
parameterized families, ``catalog:NAME:ARG``.

Fixed machines
    ``identity``   one-state binary identity transducer
    ``flip``       one-state binary letter transposition
    ``fig3_left``  the four-state binary machine swapping zero-blocks of
                   lengths 1 and 2 (synchronizing at level 3, equal to its
                   own core, an involution up to core equivalence)
    ``fig3_right`` the right-hand companion of ``fig3_left``; defined to be
                   the same table (a reconstruction: only the left machine's
                   table is pinned by computations, and this choice satisfies
                   every computation asserted about the pair)
    ``fig4_B``     the two-coordinate product of ``fig3_left`` with
                   ``fig3_right``
    ``fig5_T``     the one-state machine reading one quaternary digit v and
                   writing the bit pair (v div 2, v mod 2) across two binary
                   coordinates; letters 1 and 3 follow the same div/mod rule
                   as the pinned letters 0 and 2
    ``scary_code`` a five-member complete prefix code over three binary
                   coordinates that no sequence of single-member refinements
                   reaches from the trivial code

Lazy machines (infinite state, evaluated on demand)
    ``bakers``     the machine of the exchange moving the first letter of
                   coordinate 0 across to coordinate 1; no finite table
                   defines it
    ``fig1``       alias of ``bakers``: the drawn picture of that machine,
                   shipped as the lazy handle itself
    ``inverse_digit_pairing_D``  undoes ``fig5_T``: buffers the two binary
                   coordinates and emits a quaternary digit per matched pair

Parameterized families
    ``fig2_forward(n)``  binary-to-n-ary block recoder over the comb code
                   {1, 01, ..., 0^(n-2)1, 0^(n-1)}; the n-th code word is the
                   bare zero run, making the code complete (the listing
                   {0^i 1} alone covers nothing past n-1 zeros, so the final
                   member must drop its terminal 1 for the recoders to be
                   mutually inverse homeomorphisms)
    ``fig2_backward(n)`` the one-state inverse: digit i writes its code word
    ``perm_cores(d)``    the coordinate-permutation cores, one invertible
                   core element per permutation of the d coordinates
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Callable

from .words import PrefixCode, WordD
from .machine import Diagram, MachineHandle, identity_diagram, product
from .homeo import (
    PairingInverseHandle,
    LazyPrefixExchangeMachine,
    bakers as _bakers_machine,
    inverse_digit_pairing_D,
)
from .outer import CoreElement, canonicalize, identity_core, permutation_core


__all__ = [
    "CatalogEntry",
    "bakers",
    "core_elements_1d",
    "entries",
    "fig2_backward",
    "fig2_forward",
    "fig3_left",
    "fig3_right",
    "fig4_B",
    "fig5_T",
    "flip",
    "get",
    "identity",
    "perm_cores",
    "scary_code",
]


def identity() -> Diagram:
    """The one-state binary identity machine."""
    return identity_diagram(1, 2)


def flip() -> Diagram:
    """The one-state binary machine exchanging the letters 0 and 1."""
    w = lambda s: WordD.parse(s, 1, 2)
    return Diagram((1, 2), (1, 2), [[0, 0]], [[w("1"), w("0")]])


def fig3_left() -> Diagram:
    """Four-state binary machine swapping zero-run lengths 1 and 2.

    On input 0^(a0) 1^(b0) 0^(a1) 1^(b1) ... it outputs
    0^(s(a0)) 1^(b0) 0^(s(a1)) ... where s exchanges 1 and 2 and fixes
    every other run length.  Synchronizing at level 3; equal to its core.
    """
    w = lambda s: WordD.parse(s, 1, 2)
    eps = WordD.epsilon(1, 2)
    return Diagram(
        (1, 2),
        (1, 2),
        [[1, 0], [2, 0], [3, 0], [3, 0]],
        [
            [w("0"), w("1")],
            [eps, w("01")],
            [w("00"), w("1")],
            [w("0"), w("1")],
        ],
        names=("q0", "a", "c", "b"),
    )


def fig3_right() -> Diagram:
    """The companion machine paired with fig3_left; the same table.

    Only the left machine's table is pinned by explicit computations; the
    pair's joint behavior is asserted only through their product, and taking
    the right factor equal to the left satisfies all of it.  Recorded as a
    reconstruction, not as given data.
    """
    return fig3_left()


def fig4_B() -> Diagram:
    """The two-coordinate machine acting as fig3_left on each coordinate."""
    return product([fig3_left(), fig3_right()])


def fig5_T() -> Diagram:
    """One-state machine from quaternary words to pairs of binary words.

    Each letter v in {0,1,2,3} writes the bit v div 2 on coordinate 0 and
    the bit v mod 2 on coordinate 1.  Its behavior on the letters 0 and 2 is
    pinned by the computation (02)^n -> ((01)^n, (00)^n); letters 1 and 3
    follow the same div/mod rule.
    """
    outs = [[WordD(2, 2, ((v // 2,), (v % 2,))) for v in range(4)]]
    return Diagram((1, 4), (2, 2), [[0, 0, 0, 0]], outs)


def scary_code() -> PrefixCode:
    """A complete prefix code no single-member refinement sequence reaches.

    Over one coordinate every complete code arises from {epsilon} by
    repeatedly replacing one member with its n children; over several
    coordinates that recipe misses some codes, and this five-member code
    over three binary coordinates is such an example: it validates, yet no
    n of its members merge back into a common parent.
    """
    rows = [
        ("", "0", "0"),
        ("0", "1", ""),
        ("1", "", "1"),
        ("0", "0", "1"),
        ("1", "1", "0"),
    ]
    members = [
        WordD(3, 2, tuple(tuple(int(c) for c in coord) for coord in row))
        for row in rows
    ]
    return PrefixCode(3, 2, members)


def bakers() -> LazyPrefixExchangeMachine:
    """The lazy machine of the first-letter-across exchange.

    The exchange moves the first letter of coordinate 0 over to coordinate 1;
    its machine keeps the unconsumed surplus as state and so needs
    infinitely many states -- no finite table defines this homeomorphism.
    """
    return _bakers_machine()


def fig1() -> LazyPrefixExchangeMachine:
    """The drawn (partial) picture of the bakers machine: the lazy handle."""
    return _bakers_machine()


def fig2_forward(n: int) -> Diagram:
    """Binary-to-n-ary recoder over the comb code {1, 01, ..., 0^(n-1)}.

    Block i (i zeros then a one, for i < n-1) emits the letter i; the bare
    run 0^(n-1) emits the letter n-1.  States count pending zeros.
    """
    if n < 2:
        raise ValueError(f"need an alphabet of size >= 2, got n={n}")
    eps = WordD.epsilon(1, n)
    trans, outs = [], []
    for i in range(n - 1):
        if i < n - 2:
            on_zero = (i + 1, eps)
        else:
            on_zero = (0, WordD(1, n, ((n - 1,),)))
        trans.append([on_zero[0], 0])
        outs.append([on_zero[1], WordD(1, n, ((i,),))])
    return Diagram((1, 2), (1, n), trans, outs)


def fig2_backward(n: int) -> Diagram:
    """The one-state inverse recoder: the letter i writes its comb word."""
    if n < 2:
        raise ValueError(f"need an alphabet of size >= 2, got n={n}")
    row = []
    for i in range(n):
        if i < n - 1:
            row.append(WordD(1, 2, (tuple([0] * i + [1]),)))
        else:
            row.append(WordD(1, 2, (tuple([0] * (n - 1)),)))
    return Diagram((1, n), (1, 2), [[0] * n], [row])


def perm_cores(d: int, n: int = 2) -> dict[tuple[int, ...], CoreElement]:
    """One invertible core element per permutation of the d coordinates."""
    if d < 1:
        raise ValueError(f"need d >= 1, got d={d}")
    return {
        perm: permutation_core(perm, d, n)
        for perm in permutations(range(d))
    }


def core_elements_1d() -> tuple[tuple[str, CoreElement], ...]:
    """Named invertible one-coordinate binary cores for cross-module tests."""
    return (
        ("identity", identity_core(1, 2)),
        ("flip", canonicalize(flip())),
        ("fig3", canonicalize(fig3_left())),
    )


@dataclass(frozen=True)
class CatalogEntry:
    """A named built-in object: a machine, a code, or a core family.

    ``factory`` builds the object fresh; ``arity`` is 0 for fixed entries
    and 1 for families taking one integer argument.  ``note`` records what
    the entry does and flags reconstructions.
    """

    name: str
    kind: str
    note: str
    factory: Callable
    arity: int = 0

    @property
    def object(self):
        """The built object (fixed entries only)."""
        if self.arity:
            raise ValueError(f"catalog entry {self.name} needs an argument")
        return self.factory()

    def build(self, arg: int | None = None):
        if self.arity == 0:
            if arg is not None:
                raise ValueError(f"catalog entry {self.name} takes no argument")
            return self.factory()
        if arg is None:
            raise ValueError(f"catalog entry {self.name} needs an argument")
        return self.factory(arg)


_ENTRIES: tuple[CatalogEntry, ...] = (
    CatalogEntry(
        "identity", "diagram", "one-state binary identity machine", identity
    ),
    CatalogEntry(
        "flip", "diagram", "one-state binary letter transposition", flip
    ),
    CatalogEntry(
        "fig3_left",
        "diagram",
        "four-state binary machine swapping zero-run lengths 1 and 2;"
        " synchronizing at level 3, equal to its core",
        fig3_left,
    ),
    CatalogEntry(
        "fig3_right",
        "diagram",
        "companion of fig3_left; the same table (reconstruction)",
        fig3_right,
    ),
    CatalogEntry(
        "fig4_B",
        "diagram",
        "two-coordinate product acting as fig3_left on each coordinate",
        fig4_B,
    ),
    CatalogEntry(
        "fig5_T",
        "diagram",
        "one-state recoder: quaternary digit v -> bit pair"
        " (v div 2, v mod 2) across two binary coordinates",
        fig5_T,
    ),
    CatalogEntry(
        "scary_code",
        "code",
        "five-member complete prefix code over three binary coordinates,"
        " unreachable by single-member refinements",
        scary_code,
    ),
    CatalogEntry(
        "bakers",
        "handle",
        "lazy infinite-state machine moving coordinate 0's first letter to"
        " coordinate 1",
        bakers,
    ),
    CatalogEntry(
        "fig1",
        "handle",
        "alias of bakers: the machine is infinite, so only the lazy handle"
        " ships",
        fig1,
    ),
    CatalogEntry(
        "inverse_digit_pairing_D",
        "handle",
        "lazy machine undoing fig5_T: emits one quaternary digit per matched"
        " bit pair",
        inverse_digit_pairing_D,
    ),
    CatalogEntry(
        "fig2_forward",
        "diagram",
        "binary-to-n-ary comb-code recoder (argument: target alphabet size)",
        fig2_forward,
        arity=1,
    ),
    CatalogEntry(
        "fig2_backward",
        "diagram",
        "n-ary-to-binary comb-code recoder (argument: source alphabet size)",
        fig2_backward,
        arity=1,
    ),
    CatalogEntry(
        "perm_cores",
        "cores",
        "coordinate-permutation core elements (argument: number of"
        " coordinates)",
        perm_cores,
        arity=1,
    ),
)


def entries() -> dict[str, CatalogEntry]:
    """All built-in entries, keyed by name."""
    return {e.name: e for e in _ENTRIES}


def get(name: str, arg: int | None = None):
    """Build the named entry; families take their integer argument."""
    table = entries()
    if name not in table:
        raise KeyError(f"no catalog entry named {name!r}")
    return table[name].build(arg)
