"""Exact n-round conditional probability distributions ("boxes").

A :class:`Box` stores P(a|x) for a in {0..l-1}^n and x in {0..m-1}^n as a
dense tensor of integer numerators over one shared denominator.  The tensor
axes are ``(a_1, ..., a_n, x_1, ..., x_n)``, so a permutation of rounds is a
plain axis transpose and normalization is a sum over the first n axes.

Bipartite boxes keep a single interface per round: the round output is the
pair code ``a_i * l_b + b_i`` and the round input is ``x_i * m_b + y_i``.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Optional, Sequence, Tuple, Union

import numpy as np

MAX_ENTRIES = 10**7
DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"

Rational = Union[Fraction, int, str]


def as_fraction(value: Rational) -> Fraction:
    """Convert ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are rejected on purpose: every quantity in this package is exact.
    """
    if isinstance(value, (bool, float, np.floating)):
        raise TypeError(f"refusing inexact value {value!r}")
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    return Fraction(value)


def format_fraction(value: Fraction) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Alphabet:
    """Round count and per-round alphabet sizes of a box.

    :param n: number of rounds.
    :param m: inputs per round.
    :param l: outputs per round.
    :param bipartite: ``(m_a, m_b, l_a, l_b)`` when every round is a pair of
        sub-systems, else ``None``.
    """

    n: int
    m: int
    l: int
    bipartite: Optional[Tuple[int, int, int, int]] = None

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.l < 2:
            raise ValueError(f"need n >= 1, m >= 1, l >= 2, got {self}")
        if self.bipartite is not None:
            m_a, m_b, l_a, l_b = self.bipartite
            if m_a * m_b != self.m or l_a * l_b != self.l:
                raise ValueError(f"bipartite factors {self.bipartite} do not match m={self.m}, l={self.l}")
        if self.size > MAX_ENTRIES:
            raise ValueError(f"{self.size} entries exceeds the dense limit {MAX_ENTRIES}")

    @classmethod
    def pairs(cls, n: int, m_a: int = 2, m_b: int = 2, l_a: int = 2, l_b: int = 2) -> "Alphabet":
        return cls(n, m_a * m_b, l_a * l_b, (m_a, m_b, l_a, l_b))

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.l,) * self.n + (self.m,) * self.n

    @property
    def size(self) -> int:
        return (self.l * self.m) ** self.n

    def with_rounds(self, n: int) -> "Alphabet":
        return Alphabet(n, self.m, self.l, self.bipartite)

    def a_strings(self) -> Iterator[Tuple[int, ...]]:
        return itertools.product(range(self.l), repeat=self.n)

    def x_strings(self) -> Iterator[Tuple[int, ...]]:
        return itertools.product(range(self.m), repeat=self.n)

    def x_index(self, x: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(x), (self.m,) * self.n))

    def a_index(self, a: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(a), (self.l,) * self.n))

    def to_dict(self) -> dict:
        bip = None
        if self.bipartite is not None:
            bip = dict(zip(("m_a", "m_b", "l_a", "l_b"), self.bipartite))
        return {"n": self.n, "m": self.m, "l": self.l, "bipartite": bip}

    @classmethod
    def from_dict(cls, data: dict) -> "Alphabet":
        bip = data.get("bipartite")
        if bip is not None:
            bip = (bip["m_a"], bip["m_b"], bip["l_a"], bip["l_b"])
        return cls(int(data["n"]), int(data["m"]), int(data["l"]), bip)


class Box:
    """Exact conditional distribution ``P(a|x)`` over an :class:`Alphabet`.

    Entries are ``numerators / denominator``; the pair is kept in lowest terms
    so equal boxes compare equal.  Construction does not enforce
    normalization: use :func:`validate` for that, so that invalid inputs can
    still be represented and reported.
    """

    __slots__ = ("alphabet", "_num", "_den")

    def __init__(self, alphabet: Alphabet, numerators, denominator: int = 1):
        num = np.array(numerators, dtype=object)
        if num.shape != alphabet.shape:
            raise ValueError(f"numerators have shape {num.shape}, expected {alphabet.shape}")
        den = int(denominator)
        if den <= 0:
            raise ValueError("denominator must be positive")
        g = math.gcd(den, *[int(v) for v in num.flat])
        if g > 1:
            num = num // g
            den //= g
        num.flags.writeable = False
        self.alphabet = alphabet
        self._num = num
        self._den = den

    @classmethod
    def from_fractions(cls, alphabet: Alphabet, values) -> "Box":
        arr = np.asarray(values, dtype=object)
        fracs = [as_fraction(v) for v in arr.flat]
        den = math.lcm(*[f.denominator for f in fracs]) if fracs else 1
        num = np.array([f.numerator * (den // f.denominator) for f in fracs], dtype=object)
        return cls(alphabet, num.reshape(arr.shape), den)

    @classmethod
    def from_function(cls, alphabet: Alphabet, fn: Callable[[tuple, tuple], Rational]) -> "Box":
        values = np.empty(alphabet.shape, dtype=object)
        for a in alphabet.a_strings():
            for x in alphabet.x_strings():
                values[a + x] = fn(a, x)
        return cls.from_fractions(alphabet, values)

    @property
    def numerators(self) -> np.ndarray:
        return self._num

    @property
    def denominator(self) -> int:
        return self._den

    @property
    def n(self) -> int:
        return self.alphabet.n

    @property
    def entries(self) -> np.ndarray:
        """Entries as an object array of Fractions (shape ``alphabet.shape``)."""
        den = self._den
        return np.vectorize(lambda v: Fraction(v, den), otypes=[object])(self._num)

    def prob(self, a: Sequence[int], x: Sequence[int]) -> Fraction:
        return Fraction(self._num[tuple(a) + tuple(x)], self._den)

    def matrix(self) -> np.ndarray:
        """Numerators as an ``(l**n, m**n)`` matrix, rows and columns in lexicographic order."""
        a = self.alphabet
        return self._num.reshape(a.l**a.n, a.m**a.n)

    def column_sums(self) -> np.ndarray:
        sums = self._num.sum(axis=tuple(range(self.n)))
        return np.vectorize(lambda v: Fraction(v, self._den), otypes=[object])(sums)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Box):
            return NotImplemented
        return (
            self.alphabet == other.alphabet
            and self._den == other._den
            and bool(np.array_equal(self._num, other._num))
        )

    __hash__ = None

    def __repr__(self) -> str:
        a = self.alphabet
        kind = "bipartite " if a.bipartite else ""
        return f"<Box {kind}n={a.n} m={a.m} l={a.l} den={self._den}>"

    def to_dict(self) -> dict:
        data = self.alphabet.to_dict()
        rows = []
        for a in self.alphabet.a_strings():
            for x in self.alphabet.x_strings():
                rows.append([encode_string(a), encode_string(x), format_fraction(self.prob(a, x))])
        data["entries"] = rows
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "Box":
        alphabet = Alphabet.from_dict(data)
        values = np.empty(alphabet.shape, dtype=object)
        seen = np.zeros(alphabet.shape, dtype=bool)
        for a_str, x_str, p in data["entries"]:
            idx = decode_string(a_str, alphabet.n, alphabet.l) + decode_string(x_str, alphabet.n, alphabet.m)
            values[idx] = as_fraction(p)
            seen[idx] = True
        if not seen.all():
            raise ValueError("box entries are not fully populated")
        return cls.from_fractions(alphabet, values)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Box":
        return cls.from_dict(json.loads(text))


def encode_string(symbols: Sequence[int]) -> str:
    return "".join(DIGITS[s] for s in symbols)


def decode_string(text: str, n: int, base: int) -> Tuple[int, ...]:
    if len(text) != n:
        raise ValueError(f"string {text!r} does not have {n} rounds")
    out = tuple(DIGITS.index(ch) for ch in text.lower())
    if any(s >= base for s in out):
        raise ValueError(f"string {text!r} has a symbol outside 0..{base - 1}")
    return out


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def uniform_box(alphabet: Alphabet) -> Box:
    return Box(alphabet, np.full(alphabet.shape, 1, dtype=object), alphabet.l**alphabet.n)


def tensor(first: Box, second: Box) -> Box:
    """Round-wise product: the rounds of ``first`` followed by those of ``second``."""
    a1, a2 = first.alphabet, second.alphabet
    if (a1.m, a1.l, a1.bipartite) != (a2.m, a2.l, a2.bipartite):
        raise ValueError("per-round alphabets differ")
    n1, n2 = a1.n, a2.n
    outer = np.multiply.outer(first.numerators, second.numerators)
    # outer axes: a(1..n1), x(1..n1), a(n1+1..), x(n1+1..)
    order = (
        list(range(n1))
        + list(range(2 * n1, 2 * n1 + n2))
        + list(range(n1, 2 * n1))
        + list(range(2 * n1 + n2, 2 * n1 + 2 * n2))
    )
    return Box(a1.with_rounds(n1 + n2), outer.transpose(order), first.denominator * second.denominator)


def power(box: Box, n: int) -> Box:
    """``box`` repeated over ``n`` rounds (i.i.d. product)."""
    out = box
    for _ in range(n - 1):
        out = tensor(out, box)
    return out


def chsh_box(p: Rational) -> Box:
    """One-round bipartite box with ``1/2 - p`` on CHSH-satisfying entries and ``p`` elsewhere."""
    p = as_fraction(p)
    if not 0 <= p <= Fraction(1, 2):
        raise ValueError("p must lie in [0, 1/2]")
    alphabet = Alphabet.pairs(1)

    def entry(ab, xy):
        a, b = divmod(ab[0], 2)
        x, y = divmod(xy[0], 2)
        return Fraction(1, 2) - p if a ^ b == x & y else p

    return Box.from_function(alphabet, entry)


def pr_box() -> Box:
    return chsh_box(0)


def combine(coefficients: Sequence[Rational], boxes: Sequence[Box]) -> Box:
    """Linear combination ``sum_i c_i * boxes[i]`` (not validated; may be unnormalized)."""
    if not boxes or len(coefficients) != len(boxes):
        raise ValueError("need one coefficient per box")
    alphabet = boxes[0].alphabet
    if any(b.alphabet != alphabet for b in boxes):
        raise ValueError("alphabets differ")
    coeffs = [as_fraction(c) for c in coefficients]
    den = math.lcm(*[c.denominator * b.denominator for c, b in zip(coeffs, boxes)])
    total = np.zeros(alphabet.shape, dtype=object)
    for c, b in zip(coeffs, boxes):
        scale = c.numerator * (den // (c.denominator * b.denominator))
        total = total + b.numerators * scale
    return Box(alphabet, total, den)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Validation:
    """Outcome of :func:`validate`; truthy iff the box is a valid distribution."""

    ok: bool
    problem: Optional[str] = None
    x: Optional[Tuple[int, ...]] = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def validate(box: Box) -> Validation:
    """Check nonnegativity and exact per-input normalization.

    The report names the lexicographically first offending x-string; a
    negative entry takes precedence over a normalization failure in the same
    column.
    """
    n = box.n
    num = box.numerators
    negative = np.vectorize(lambda v: v < 0, otypes=[bool])(num)
    neg_cols = negative.any(axis=tuple(range(n)))
    sums = num.sum(axis=tuple(range(n)))
    bad_cols = np.vectorize(lambda v: v != box.denominator, otypes=[bool])(sums)
    for x in box.alphabet.x_strings():
        if neg_cols[x]:
            a = next(a for a in box.alphabet.a_strings() if negative[a + x])
            return Validation(False, "negative", x, f"P({encode_string(a)}|{encode_string(x)}) < 0")
        if bad_cols[x]:
            total = Fraction(sums[x], box.denominator)
            return Validation(False, "normalization", x, f"column {encode_string(x)} sums to {total}")
    return Validation(True)


# ---------------------------------------------------------------------------
# Permutations of rounds
# ---------------------------------------------------------------------------

def _check_permutation(perm: Sequence[int], n: int) -> Tuple[int, ...]:
    perm = tuple(int(p) for p in perm)
    if len(perm) != n:
        raise ValueError(f"permutation has length {len(perm)}, box has {n} rounds")
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm} is not a permutation of 0..{n - 1}")
    return perm


def permute(box: Box, perm: Sequence[int]) -> Box:
    """Return ``P o pi`` with ``(P o pi)(a|x) = P(pi(a)|pi(x))`` and ``pi(a)_i = a_{pi(i)}``.

    Rounds are 0-based.  For bipartite boxes the pair ``(a_i b_i | x_i y_i)``
    moves as one unit.
    """
    n = box.n
    perm = _check_permutation(perm, n)
    inverse = [0] * n
    for i, p in enumerate(perm):
        inverse[p] = i
    axes = inverse + [n + k for k in inverse]
    return Box(box.alphabet, box.numerators.transpose(axes), box.denominator)


def _generators(n: int) -> list:
    if n == 1:
        return []
    cycle = tuple(list(range(1, n)) + [0])
    swap = (1, 0) + tuple(range(2, n))
    return [cycle, swap] if n > 2 else [swap]


def is_permutation_invariant(box: Box, exhaustive_limit: int = 6) -> bool:
    """True iff ``P o pi == P`` for every permutation of rounds.

    Up to ``exhaustive_limit`` rounds every permutation is tried; above it
    the n-cycle and one transposition suffice since they generate the
    symmetric group.
    """
    n = box.n
    perms = itertools.permutations(range(n)) if n <= exhaustive_limit else _generators(n)
    return all(permute(box, p) == box for p in perms)


def symmetrize(box: Box) -> Box:
    """Average of ``P o pi`` over all ``n!`` permutations."""
    n = box.n
    total = np.zeros(box.alphabet.shape, dtype=object)
    for perm in itertools.permutations(range(n)):
        axes = list(perm) + [n + k for k in perm]
        total = total + box.numerators.transpose(axes)
    return Box(box.alphabet, total, box.denominator * math.factorial(n))


# ---------------------------------------------------------------------------
# Marginals and signalling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Undefined:
    """Marginal that does not exist because the discarded inputs signal."""

    keep: object
    detail: str

    def __bool__(self) -> bool:
        return False


def _split_view(box: Box):
    """Numerators reshaped to axes ``a_1 b_1 ... a_n b_n x_1 y_1 ... x_n y_n``."""
    alpha = box.alphabet
    if alpha.bipartite is None:
        raise ValueError("box is not bipartite; no A/B split")
    m_a, m_b, l_a, l_b = alpha.bipartite
    n = alpha.n
    return box.numerators.reshape((l_a, l_b) * n + (m_a, m_b) * n)


def _sum_and_check(arr: np.ndarray, out_keep, out_drop, in_keep, in_drop):
    """Sum over ``out_drop`` axes; check the result ignores ``in_drop`` axes."""
    arr = arr.transpose(list(out_keep) + list(in_keep) + list(out_drop) + list(in_drop))
    k = len(out_keep) + len(in_keep)
    drop_out = len(out_drop)
    kept_shape = arr.shape[:k]
    in_shape = arr.shape[k + drop_out:]
    summed = arr.reshape(kept_shape + (-1,) + in_shape).sum(axis=k)
    flat = summed.reshape(kept_shape + (-1,))
    ref = flat[..., :1]
    consistent = bool(np.all(flat == ref))
    return flat[..., 0], consistent


def marginal(box: Box, keep) -> Union[Box, Undefined]:
    """Marginal on the kept interface.

    :param keep: ``"A"`` or ``"B"`` for bipartite boxes, or a sequence of
        round indices to keep.
    :return: the marginal box, or :class:`Undefined` when summing out the
        discarded outputs leaves a dependence on the discarded inputs.
    """
    alpha = box.alphabet
    n = alpha.n
    if isinstance(keep, str):
        if keep not in ("A", "B"):
            raise ValueError(f"unknown interface {keep!r}")
        arr = _split_view(box)
        m_a, m_b, l_a, l_b = alpha.bipartite
        a_axes = [2 * i for i in range(n)]
        b_axes = [2 * i + 1 for i in range(n)]
        x_axes = [2 * n + 2 * i for i in range(n)]
        y_axes = [2 * n + 2 * i + 1 for i in range(n)]
        if keep == "A":
            kept, ok = _sum_and_check(arr, a_axes, b_axes, x_axes, y_axes)
            new = Alphabet(n, m_a, l_a)
        else:
            kept, ok = _sum_and_check(arr, b_axes, a_axes, y_axes, x_axes)
            new = Alphabet(n, m_b, l_b)
        if not ok:
            other = "B" if keep == "A" else "A"
            return Undefined(keep, f"marginal on {keep} depends on the inputs of {other}")
        return Box(new, kept, box.denominator)

    rounds = sorted(set(int(r) for r in keep))
    if not rounds or rounds[0] < 0 or rounds[-1] >= n or len(rounds) != len(list(keep)):
        raise ValueError(f"bad round selection {keep!r} for n={n}")
    dropped = [r for r in range(n) if r not in rounds]
    kept, ok = _sum_and_check(
        box.numerators, rounds, dropped, [n + r for r in rounds], [n + r for r in dropped]
    )
    if not ok:
        return Undefined(tuple(rounds), f"marginal on rounds {rounds} depends on inputs of rounds {dropped}")
    return Box(alpha.with_rounds(len(rounds)), kept, box.denominator)


def is_nonsignalling(box: Box, split: str = "AB") -> bool:
    """True iff both the A and the B marginals are well defined."""
    if split != "AB":
        raise ValueError(f"unsupported split {split!r}")
    return bool(marginal(box, "A")) and bool(marginal(box, "B"))


# ---------------------------------------------------------------------------
# Random boxes
# ---------------------------------------------------------------------------

RESOLUTION = 2**16


def random_box(
    alphabet: Alphabet,
    rng: np.random.Generator,
    support: Optional[np.ndarray] = None,
    sparse: bool = False,
    resolution: int = RESOLUTION,
) -> Box:
    """Random exact box on the grid ``k / resolution``.

    Each column is a uniformly random composition of ``resolution`` into the
    allowed outputs, so it sums to one exactly with no renormalization.

    :param support: boolean array of shape ``alphabet.shape``; entries
        outside it are zero.  Every column must keep at least one entry.
    :param sparse: additionally restrict each column to a random nonempty
        subset of its support.
    """
    rows, cols = alphabet.l**alphabet.n, alphabet.m**alphabet.n
    mask = np.ones((rows, cols), dtype=bool) if support is None else np.asarray(support).reshape(rows, cols)
    num = np.zeros((rows, cols), dtype=np.int64)
    for col in range(cols):
        allowed = np.flatnonzero(mask[:, col])
        if allowed.size == 0:
            raise ValueError(f"column {col} has empty support")
        if sparse:
            keep = rng.integers(1, allowed.size + 1)
            allowed = np.sort(rng.choice(allowed, size=keep, replace=False))
        cuts = np.sort(rng.integers(0, resolution + 1, size=allowed.size - 1))
        num[allowed, col] = np.diff(np.concatenate(([0], cuts, [resolution])))
    return Box(alphabet, num.astype(object).reshape(alphabet.shape), resolution)
