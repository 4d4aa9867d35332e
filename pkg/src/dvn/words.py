"""Tuples of words over a digit alphabet, cones, and prefix codes.

The basic space is the d-fold power of the Cantor space of infinite strings
over the alphabet {0, ..., n-1} (letters are single decimal digits, so n <= 10).
A *word tuple* (`WordD`) is a d-tuple of finite words; it names the *cone* of
points that extend it coordinatewise.  Clopen subsets are finite unions of
cones (`ConeSet`), and a *prefix code* (`PrefixCode`) is a finite family of
word tuples whose cones tile the whole space: every point extends exactly one
member.

Conventions used throughout the package:

- functions act on the right and words read left to right;
- a word tuple ``u`` is a prefix of ``w`` when each coordinate of ``u`` is a
  prefix of the corresponding coordinate of ``w``;
- the *square level* of a finite family is the maximum coordinate length that
  occurs in it; a word tuple is a *square* at level k when every coordinate
  has length exactly k.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
import itertools
import re
from typing import Iterable, Iterator, Sequence


class DvnError(Exception):
    """Base class for all errors raised by this package."""


class AlphabetMismatch(DvnError):
    """Two objects with incompatible (d, n) shapes were combined."""


class PrefixViolation(DvnError):
    """A word was asked to strip a prefix it does not extend."""


class CodeError(DvnError):
    """A family of word tuples failed prefix-code validation.

    Attributes:
        problems: list of :class:`Overlap` / :class:`Gap` findings.
    """

    def __init__(self, problems: list) -> None:
        self.problems = problems
        super().__init__("; ".join(str(p) for p in problems))


class Overlap:
    """Two code members whose cones intersect."""

    def __init__(self, first: "WordD", second: "WordD") -> None:
        self.first = first
        self.second = second

    def __repr__(self) -> str:
        return f"Overlap({self.first}, {self.second})"


class Gap:
    """A square word tuple covered by no code member."""

    def __init__(self, witness: "WordD") -> None:
        self.witness = witness

    def __repr__(self) -> str:
        return f"Gap({self.witness})"


Coord = tuple[int, ...]


def _check_digits(word: Sequence[int], n: int) -> Coord:
    w = tuple(word)
    for x in w:
        if not isinstance(x, int) or not 0 <= x < n:
            raise ValueError(f"letter {x!r} outside alphabet 0..{n - 1}")
    return w


class WordD:
    """A d-tuple of finite words over {0..n-1}; names a cone of the d-fold space.

    Immutable and hashable.  ``u * w`` is coordinatewise concatenation,
    ``u.is_prefix_of(w)`` the coordinatewise prefix order, ``w.strip(u)`` the
    unique t with ``u * t == w``.
    """

    __slots__ = ("d", "n", "coords", "_hash")

    def __init__(self, d: int, n: int, coords: Sequence[Sequence[int]]) -> None:
        if not (1 <= n <= 10):
            raise ValueError("alphabet size n must be between 1 and 10")
        if d < 1:
            raise ValueError("dimension d must be at least 1")
        cs = tuple(_check_digits(c, n) for c in coords)
        if len(cs) != d:
            raise ValueError(f"expected {d} coordinates, got {len(cs)}")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "coords", cs)
        object.__setattr__(self, "_hash", hash((d, n, cs)))

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("WordD is immutable")

    # --- constructors -------------------------------------------------

    @classmethod
    def epsilon(cls, d: int, n: int) -> "WordD":
        """The empty word tuple (names the whole space)."""
        return cls(d, n, ((),) * d)

    @classmethod
    def gen(cls, d: int, n: int, coord: int, letter: int) -> "WordD":
        """The generator: single letter ``letter`` at coordinate ``coord``."""
        if not 0 <= coord < d:
            raise ValueError(f"coordinate {coord} outside 0..{d - 1}")
        coords = [()] * d
        coords[coord] = (letter,)
        return cls(d, n, coords)

    @classmethod
    def single(cls, n: int, word: Sequence[int]) -> "WordD":
        """Convenience constructor for d = 1."""
        return cls(1, n, (tuple(word),))

    @classmethod
    def parse(cls, text: str, d: int, n: int) -> "WordD":
        """Parse the textual form: ``(01,1,)`` with one digit string per coordinate.

        For d = 1 a bare digit string (no parentheses) is also accepted, and
        the empty string denotes the empty word.
        """
        text = text.strip()
        if d == 1 and not text.startswith("("):
            if not re.fullmatch(r"[0-9]*", text):
                raise ValueError(f"cannot parse word {text!r}")
            return cls(1, n, ((tuple(int(c) for c in text)),))
        if not (text.startswith("(") and text.endswith(")")):
            raise ValueError(f"cannot parse word {text!r}")
        parts = text[1:-1].split(",")
        if len(parts) != d:
            raise ValueError(f"expected {d} coordinates in {text!r}, got {len(parts)}")
        coords = []
        for part in parts:
            part = part.strip()
            if not re.fullmatch(r"[0-9]*", part):
                raise ValueError(f"bad coordinate {part!r} in {text!r}")
            coords.append(tuple(int(c) for c in part))
        return cls(d, n, coords)

    # --- rendering ----------------------------------------------------

    def text(self) -> str:
        """Canonical textual form, e.g. ``(01,1,)``; inverse of :meth:`parse`."""
        return "(" + ",".join("".join(str(x) for x in c) for c in self.coords) + ")"

    def __repr__(self) -> str:
        return f"WordD({self.text()})"

    def __str__(self) -> str:
        return self.text()

    # --- equality / ordering -------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, WordD)
            and self._hash == other._hash
            and self.d == other.d
            and self.n == other.n
            and self.coords == other.coords
        )

    def __hash__(self) -> int:
        return self._hash

    def sort_key(self):
        """Deterministic order: by coordinate lengths, then letters."""
        return (tuple(len(c) for c in self.coords), self.coords)

    def __lt__(self, other: "WordD") -> bool:
        return self.sort_key() < other.sort_key()

    # --- shape ----------------------------------------------------------

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.coords)

    @property
    def total_length(self) -> int:
        return sum(len(c) for c in self.coords)

    @property
    def max_len(self) -> int:
        return max(len(c) for c in self.coords)

    @property
    def min_len(self) -> int:
        return min(len(c) for c in self.coords)

    @property
    def is_epsilon(self) -> bool:
        return all(len(c) == 0 for c in self.coords)

    def is_square(self, k: int | None = None) -> bool:
        """True when all coordinates share one length (k, if given)."""
        lens = set(self.lengths)
        if len(lens) != 1:
            return False
        return True if k is None else lens.pop() == k

    # --- algebra ----------------------------------------------------------

    def _check_same(self, other: "WordD") -> None:
        if self.d != other.d or self.n != other.n:
            raise AlphabetMismatch(
                f"shape ({self.d},{self.n}) vs ({other.d},{other.n})"
            )

    def __mul__(self, other: "WordD") -> "WordD":
        """Coordinatewise concatenation: self then other."""
        self._check_same(other)
        return WordD(
            self.d, self.n, tuple(a + b for a, b in zip(self.coords, other.coords))
        )

    def append(self, coord: int, letter: int) -> "WordD":
        """Append one letter at one coordinate."""
        cs = list(self.coords)
        cs[coord] = cs[coord] + (letter,)
        return WordD(self.d, self.n, cs)

    def is_prefix_of(self, other: "WordD") -> bool:
        self._check_same(other)
        return all(
            a == b[: len(a)] for a, b in zip(self.coords, other.coords)
        )

    def strip(self, prefix: "WordD") -> "WordD":
        """The unique t with ``prefix * t == self``; raises PrefixViolation."""
        self._check_same(prefix)
        if not prefix.is_prefix_of(self):
            raise PrefixViolation(f"{prefix} is not a prefix of {self}")
        return WordD(
            self.d,
            self.n,
            tuple(b[len(a):] for a, b in zip(prefix.coords, self.coords)),
        )

    def compatible(self, other: "WordD") -> bool:
        """True when the two cones intersect (coordinatewise comparable)."""
        self._check_same(other)
        for a, b in zip(self.coords, other.coords):
            m = min(len(a), len(b))
            if a[:m] != b[:m]:
                return False
        return True

    def join(self, other: "WordD") -> "WordD":
        """The coordinatewise deeper of two compatible words (cone intersection)."""
        if not self.compatible(other):
            raise PrefixViolation(f"{self} and {other} name disjoint cones")
        return WordD(
            self.d,
            self.n,
            tuple(a if len(a) >= len(b) else b for a, b in zip(self.coords, other.coords)),
        )

    def lcp(self, other: "WordD") -> "WordD":
        """Coordinatewise longest common prefix."""
        self._check_same(other)
        out = []
        for a, b in zip(self.coords, other.coords):
            m = 0
            for x, y in zip(a, b):
                if x != y:
                    break
                m += 1
            out.append(a[:m])
        return WordD(self.d, self.n, out)

    def letters(self) -> Iterator[tuple[int, int]]:
        """Yield (coordinate, letter) pairs, coordinate-major."""
        for i, c in enumerate(self.coords):
            for x in c:
                yield (i, x)

    def truncate(self, k: int) -> "WordD":
        """Truncate every coordinate to length at most k."""
        return WordD(self.d, self.n, tuple(c[:k] for c in self.coords))


def lcp_all(words: Iterable[WordD]) -> WordD:
    """Coordinatewise longest common prefix of a nonempty family."""
    it = iter(words)
    try:
        acc = next(it)
    except StopIteration:
        raise ValueError("lcp of an empty family is undefined")
    for w in it:
        acc = acc.lcp(w)
        if acc.is_epsilon:
            # cannot shrink further; drain nothing
            break
    return acc


def squares(d: int, n: int, k: int) -> Iterator[WordD]:
    """All level-k squares (every coordinate length exactly k), lex order."""
    alphabet = range(n)
    for combo in itertools.product(itertools.product(alphabet, repeat=k), repeat=d):
        yield WordD(d, n, combo)


def _prefixes(c: Coord) -> list[Coord]:
    return [c[:i] for i in range(len(c) + 1)]


class ConeSet:
    """A clopen subset of the d-fold space, as a finite union of cones.

    The canonical form is the family of *maximal* covered cones: every cone
    contained in the set is contained in one of them, and none of them can be
    enlarged.  Two ConeSets are equal iff they describe the same point set,
    and the canonical families of equal sets coincide.  Note that for d >= 2
    the maximal cones may overlap each other; use
    :meth:`disjoint_decomposition` when a partition is required.
    """

    __slots__ = ("d", "n", "roots", "_hash", "_level")

    def __init__(self, d: int, n: int, roots: Iterable[WordD]) -> None:
        rs = []
        for r in roots:
            if r.d != d or r.n != n:
                raise AlphabetMismatch(f"root {r} does not have shape ({d},{n})")
            rs.append(r)
        canon = canonical_roots(d, n, frozenset(rs))
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "roots", canon)
        object.__setattr__(self, "_hash", hash((d, n, canon)))
        object.__setattr__(self, "_level", max((r.max_len for r in canon), default=0))

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("ConeSet is immutable")

    # --- canonical form ---------------------------------------------------

    @staticmethod
    def _compatible_roots(w: WordD, roots: Sequence[WordD]) -> list[WordD]:
        return [r for r in roots if r.compatible(w)]

    @staticmethod
    def _covers(w: WordD, roots: Sequence[WordD]) -> bool:
        """True when cone(w) is contained in the union of the root cones."""
        live = [r for r in roots if r.compatible(w)]
        if any(r.is_prefix_of(w) for r in live):
            return True
        if not live:
            return False
        # split on the first coordinate where some live root is deeper than w
        for i in range(w.d):
            wl = len(w.coords[i])
            if any(len(r.coords[i]) > wl for r in live):
                return all(
                    ConeSet._covers(w.append(i, x), live) for x in range(w.n)
                )
        # every live root is a prefix of w in every coordinate, but none is a
        # full prefix -- impossible (a root prefix in every coordinate IS a
        # prefix), kept for safety:
        return False  # pragma: no cover

    # --- constructors -------------------------------------------------------

    @classmethod
    def from_roots(cls, d: int, n: int, roots: Iterable[WordD]) -> "ConeSet":
        return cls(d, n, roots)

    @classmethod
    def full(cls, d: int, n: int) -> "ConeSet":
        return cls(d, n, (WordD.epsilon(d, n),))

    @classmethod
    def empty(cls, d: int, n: int) -> "ConeSet":
        return cls(d, n, ())

    @classmethod
    def cone(cls, w: WordD) -> "ConeSet":
        return cls(w.d, w.n, (w,))

    # --- equality -------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ConeSet)
            and self.d == other.d
            and self.n == other.n
            and self.roots == other.roots
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        inner = ",".join(r.text() for r in self.roots)
        return f"ConeSet({self.d},{self.n};{inner})"

    # --- predicates -------------------------------------------------------

    @property
    def is_empty(self) -> bool:
        return not self.roots

    @property
    def is_full(self) -> bool:
        return len(self.roots) == 1 and self.roots[0].is_epsilon

    @property
    def square_level(self) -> int:
        """Max coordinate length over the canonical roots."""
        return self._level

    def contains_cone(self, w: WordD) -> bool:
        """True when the whole cone of w lies inside the set."""
        if w.d != self.d or w.n != self.n:
            raise AlphabetMismatch(f"{w} does not have shape ({self.d},{self.n})")
        return self._covers(w, self.roots)

    def meets_cone(self, w: WordD) -> bool:
        """True when the cone of w intersects the set."""
        return any(r.compatible(w) for r in self.roots)

    # --- algebra -------------------------------------------------------

    def union(self, other: "ConeSet") -> "ConeSet":
        self._check_same(other)
        return ConeSet(self.d, self.n, self.roots + other.roots)

    def intersect(self, other: "ConeSet") -> "ConeSet":
        self._check_same(other)
        joins = []
        for a in self.roots:
            for b in other.roots:
                if a.compatible(b):
                    joins.append(a.join(b))
        return ConeSet(self.d, self.n, joins)

    def translate(self, prefix: WordD) -> "ConeSet":
        """The set of points prefix * x for x in this set (image inside cone(prefix))."""
        if prefix.d != self.d or prefix.n != self.n:
            raise AlphabetMismatch(f"{prefix} does not have shape ({self.d},{self.n})")
        return ConeSet(self.d, self.n, tuple(prefix * r for r in self.roots))

    def _check_same(self, other: "ConeSet") -> None:
        if self.d != other.d or self.n != other.n:
            raise AlphabetMismatch(
                f"shape ({self.d},{self.n}) vs ({other.d},{other.n})"
            )

    # --- counting -------------------------------------------------------

    def covered_square_count(self, k: int | None = None) -> int:
        """Number of level-k squares contained in the set (k defaults to square_level)."""
        if k is None:
            k = self._level
        if k < self._level:
            raise ValueError(f"level {k} below the canonical square level {self._level}")
        memo: dict[WordD, int] = {}

        def count(w: WordD, roots: tuple[WordD, ...]) -> int:
            got = memo.get(w)
            if got is not None:
                return got
            live = tuple(r for r in roots if r.compatible(w))
            total = 0
            if any(r.is_prefix_of(w) for r in live):
                total = 1
                for c in w.coords:
                    total *= self.n ** (k - len(c))
            elif live:
                for i in range(w.d):
                    if len(w.coords[i]) < k and any(
                        len(r.coords[i]) > len(w.coords[i]) for r in live
                    ):
                        total = sum(
                            count(w.append(i, x), live) for x in range(self.n)
                        )
                        break
            memo[w] = total
            return total

        return count(WordD.epsilon(self.d, self.n), self.roots)

    def measure(self) -> Fraction:
        """Product-measure of the set (each letter uniform 1/n)."""
        k = self._level
        return Fraction(self.covered_square_count(k), self.n ** (self.d * k))

    def ssig(self) -> int:
        """Size residue: |any disjoint cone decomposition| mod (n-1); 0 when n <= 2.

        Well defined because splitting one cone into its n children at a
        coordinate changes the decomposition size by n - 1 == 0 (mod n - 1).
        """
        if self.n == 1:
            return 0
        return self.covered_square_count(self._level) % (self.n - 1)

    # --- decomposition -------------------------------------------------------

    def _disjoint(self, w: WordD, roots: tuple[WordD, ...]) -> list[WordD]:
        live = tuple(r for r in roots if r.compatible(w))
        if any(r.is_prefix_of(w) for r in live):
            return [w]
        if not live:
            return []
        for i in range(w.d):
            if any(len(r.coords[i]) > len(w.coords[i]) for r in live):
                out = []
                for x in range(self.n):
                    out.extend(self._disjoint(w.append(i, x), live))
                return out
        return []  # pragma: no cover

    def disjoint_decomposition(self) -> tuple[WordD, ...]:
        """A deterministic family of pairwise disjoint cones with union the set."""
        parts = self._disjoint(WordD.epsilon(self.d, self.n), self.roots)
        return tuple(sorted(parts))


class PrefixCode:
    """A finite family of word tuples whose cones partition the whole space.

    Validity: the members are pairwise disjoint (no two compatible) and their
    cones cover every point.  Constructing a PrefixCode validates; use
    :func:`validate_prefix_code` to collect findings without raising.
    """

    __slots__ = ("d", "n", "members")

    def __init__(self, d: int, n: int, members: Iterable[WordD]) -> None:
        ms = tuple(sorted(members))
        problems = validate_prefix_code(d, n, ms)
        if problems:
            raise CodeError(problems)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "members", ms)

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("PrefixCode is immutable")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PrefixCode)
            and (self.d, self.n, self.members) == (other.d, other.n, other.members)
        )

    def __hash__(self) -> int:
        return hash((self.d, self.n, self.members))

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[WordD]:
        return iter(self.members)

    def __repr__(self) -> str:
        inner = ",".join(m.text() for m in self.members)
        return f"PrefixCode({self.d},{self.n};{inner})"

    @property
    def depth(self) -> int:
        """Max coordinate length over members (the code's square level)."""
        return max((m.max_len for m in self.members), default=0)

    def size_residue(self) -> int:
        """|F| mod (n-1) -- always 1 for a prefix code when n > 2, else 0."""
        if self.n <= 2:
            return 0
        return len(self.members) % (self.n - 1)

    def member_prefixing(self, w: WordD) -> WordD | None:
        """The unique member whose cone contains cone(w), if w is deep enough."""
        for m in self.members:
            if m.is_prefix_of(w):
                return m
        return None

    def refinement_irreducible(self) -> bool:
        """True when no n sibling members can merge into one shorter member.

        A family of n members identical except for the last letter of one
        coordinate (taking all n values) could be replaced by their common
        parent; a code admitting such a family is reducible.
        """
        members = set(self.members)
        for m in self.members:
            for i in range(self.d):
                if not m.coords[i]:
                    continue
                parent = m.coords[i][:-1]
                family = []
                for x in range(self.n):
                    sib = WordD(
                        self.d,
                        self.n,
                        m.coords[:i] + (parent + (x,),) + m.coords[i + 1:],
                    )
                    family.append(sib)
                if all(s in members for s in family):
                    return False
        return True


def code_size_realizable(m: int, d: int, n: int) -> bool:
    """Whether some prefix code over (d, n) has exactly ``m`` members.

    Splitting one member into its n children grows a code by n - 1, and every
    code arises from {epsilon} by such splits, so the realizable sizes are
    exactly the positive integers congruent to 1 mod (n - 1).
    """
    if m < 1 or d < 1 or n < 2:
        raise ValueError(f"need m >= 1, d >= 1, n >= 2; got m={m}, d={d}, n={n}")
    return m % (n - 1) == 1 % (n - 1)


def validate_prefix_code(d: int, n: int, members: Sequence[WordD]) -> list:
    """Check a family for the exact-cover property.

    Returns a list of findings: :class:`Overlap` for each compatible pair
    (their cones intersect) and at most one :class:`Gap` with an uncovered
    square witness.  Empty list means the family is a valid prefix code.
    """
    problems: list = []
    for w in members:
        if w.d != d or w.n != n:
            raise AlphabetMismatch(f"member {w} does not have shape ({d},{n})")
    for a, b in itertools.combinations(members, 2):
        if a.compatible(b):
            problems.append(Overlap(a, b))
    witness = _find_uncovered(WordD.epsilon(d, n), tuple(members), n)
    if witness is not None:
        problems.append(Gap(witness))
    return problems


@lru_cache(maxsize=1 << 16)
def canonical_roots(d: int, n: int, roots: frozenset) -> tuple[WordD, ...]:
    """The maximal covered cones of the union of the given root cones.

    This is the canonical form used by :class:`ConeSet`: it depends only on
    the point set, not on its presentation.  For d = 1 a linear-time trie
    merge is used; for d >= 2 candidates are drawn from the per-coordinate
    prefix closures of the roots (a maximal cone's coordinates always lie in
    that closure, since a coordinate deeper than every root could be stripped
    without changing coverage).
    """
    if not roots:
        return ()
    root_list = sorted(roots)
    if d == 1:
        return tuple(
            WordD(1, n, (c,)) for c in _canon_words_1d(n, [r.coords[0] for r in root_list])
        )
    per_coord: list[list[Coord]] = []
    for i in range(d):
        seen = {(): None}
        for r in root_list:
            for p in _prefixes(r.coords[i]):
                seen[p] = None
        per_coord.append(sorted(seen, key=lambda c: (len(c), c)))
    out = []
    for combo in itertools.product(*per_coord):
        w = WordD(d, n, combo)
        if not ConeSet._covers(w, root_list):
            continue
        maximal = True
        for i in range(d):
            if w.coords[i]:
                parent = WordD(
                    d, n, w.coords[:i] + (w.coords[i][:-1],) + w.coords[i + 1:]
                )
                if ConeSet._covers(parent, root_list):
                    maximal = False
                    break
        if maximal:
            out.append(w)
    return tuple(sorted(out))


def _canon_words_1d(n: int, words: list[Coord]) -> list[Coord]:
    """Maximal covered cones for d = 1 via a trie merge."""
    children: dict[Coord, set[int]] = {}
    terminal: set[Coord] = set()
    nodes: set[Coord] = {()}
    for w in words:
        terminal.add(w)
        for i in range(len(w)):
            children.setdefault(w[:i], set()).add(w[i])
            nodes.add(w[: i + 1])
    covered: dict[Coord, bool] = {}
    for node in sorted(nodes, key=len, reverse=True):
        if node in terminal:
            covered[node] = True
            continue
        kids = children.get(node, ())
        covered[node] = len(kids) == n and all(
            covered.get(node + (x,), False) for x in kids
        )
    out = []
    for node in sorted(nodes, key=lambda c: (len(c), c)):
        if covered.get(node, False) and (not node or not covered.get(node[:-1], False)):
            out.append(node)
    # drop nodes dominated by a shorter canonical node (ancestor covered)
    result = []
    for node in out:
        if not any(node[: len(a)] == a and node != a for a in result):
            result.append(node)
    return result


def _find_uncovered(w: WordD, roots: tuple[WordD, ...], n: int) -> WordD | None:
    """A square word tuple under w covered by no root, or None."""
    live = tuple(r for r in roots if r.compatible(w))
    if any(r.is_prefix_of(w) for r in live):
        return None
    if not live:
        # pad w to a square with 0s
        k = w.max_len
        return WordD(w.d, n, tuple(c + (0,) * (k - len(c)) for c in w.coords))
    for i in range(w.d):
        if any(len(r.coords[i]) > len(w.coords[i]) for r in live):
            for x in range(n):
                found = _find_uncovered(w.append(i, x), live, n)
                if found is not None:
                    return found
            return None
    return None  # pragma: no cover
