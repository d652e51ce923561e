"""Classical channels acting on boxes, extensions, and the extension-based distance.

A :class:`Channel` draws a setting ``s`` from a fixed distribution, feeds
the first n coordinates to the box as its input string and maps the box
output ``a`` together with ``s`` to an outcome ``k`` in ``{0, ..., 2^t - 1}``.
Extra setting coordinates act as private randomness.  Everything the channel
does to a box is captured by its weight tensor
``W[a, x, k] = sum_{s : s[:n] = x} Pr(s) [E(a, s) = k]``, and the output
distribution is linear in the box.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .boxes import (
    Alphabet,
    Box,
    Rational,
    as_fraction,
    combine,
    decode_string,
    encode_string,
    format_fraction,
    is_permutation_invariant,
    random_box,
    validate,
)
from .definetti import DeFinettiState
from .symmetry import (
    SymmetryTemplate,
    chsh_template,
    color_counts,
    color_transpositions,
    has_symmetry,
    mapping_index,
    no_symmetry_template,
    pair_axes,
)


class Channel:
    """Classical channel ``E`` with ``t`` output bits.

    :param alphabet: alphabet of the boxes the channel accepts.
    :param inputs: distribution over settings; each setting is a tuple whose
        first ``n`` entries are the box input.
    :param outcome: ``outcome(a, setting) -> int`` or a mapping keyed by
        ``(a, setting)``.
    :param t: number of output bits.
    """

    def __init__(
        self,
        alphabet: Alphabet,
        inputs: Mapping[tuple, Rational],
        outcome: Union[Callable[[tuple, tuple], int], Mapping],
        t: int,
        name: Optional[str] = None,
    ):
        if t < 0:
            raise ValueError("t must be nonnegative")
        settings, weights = [], []
        for s, w in inputs.items():
            s = tuple(int(v) for v in s)
            w = as_fraction(w)
            if len(s) < alphabet.n or any(not 0 <= v < alphabet.m for v in s[: alphabet.n]):
                raise ValueError(f"setting {s} does not start with an input string of length {alphabet.n}")
            if w < 0:
                raise ValueError(f"negative input probability for setting {s}")
            if w > 0:
                settings.append(s)
                weights.append(w)
        if sum(weights) != 1:
            raise ValueError(f"input distribution sums to {sum(weights)}")
        self.alphabet = alphabet
        self.settings: Tuple[tuple, ...] = tuple(settings)
        self.weights: Tuple[Fraction, ...] = tuple(weights)
        self.t = t
        self.name = name
        self._outcome = outcome

    @property
    def num_outcomes(self) -> int:
        return 2**self.t

    def outcome(self, a: Sequence[int], setting: Sequence[int]) -> int:
        key = (tuple(a), tuple(setting))
        k = self._outcome[key] if isinstance(self._outcome, Mapping) else self._outcome(*key)
        k = int(k)
        if not 0 <= k < self.num_outcomes:
            raise ValueError(f"outcome {k} for {key} is outside 0..{self.num_outcomes - 1}")
        return k

    @cached_property
    def weight_denominator(self) -> int:
        return math.lcm(*[w.denominator for w in self.weights])

    @cached_property
    def weights_tensor(self) -> np.ndarray:
        """Integer tensor ``W`` of shape ``(l,)*n + (m,)*n + (2^t,)`` over :attr:`weight_denominator`."""
        alpha = self.alphabet
        den = self.weight_denominator
        rows = alpha.l**alpha.n
        W = np.zeros((rows, alpha.m**alpha.n, self.num_outcomes), dtype=object)
        W[...] = 0
        a_strings = list(alpha.a_strings())
        for s, w in zip(self.settings, self.weights):
            col = alpha.x_index(s[: alpha.n])
            scaled = w.numerator * (den // w.denominator)
            for r, a in enumerate(a_strings):
                W[r, col, self.outcome(a, s)] += scaled
        W = W.reshape(alpha.shape + (self.num_outcomes,))
        W.flags.writeable = False
        return W

    def to_dict(self) -> dict:
        width = max(self.t, 1)
        inputs = [[encode_string(s), format_fraction(w)] for s, w in zip(self.settings, self.weights)]
        table = []
        for s in self.settings:
            for a in self.alphabet.a_strings():
                table.append([encode_string(a), encode_string(s), format(self.outcome(a, s), f"0{width}b")])
        return {"alphabet": self.alphabet.to_dict(), "t": self.t, "inputs": inputs, "map": table}

    @classmethod
    def from_dict(cls, data: Mapping, alphabet: Optional[Alphabet] = None) -> "Channel":
        alphabet = alphabet or Alphabet.from_dict(data["alphabet"])
        t = int(data["t"])

        def setting(text):
            return tuple(int(ch, 36) for ch in text)

        inputs = {setting(s): as_fraction(w) for s, w in data["inputs"]}
        table = {}
        for a, s, k in data["map"]:
            table[(decode_string(a, alphabet.n, alphabet.l), setting(s))] = int(k, 2) if k else 0
        for s in inputs:
            for a in alphabet.a_strings():
                if (a, s) not in table:
                    raise ValueError(f"channel map misses output {encode_string(a)} at setting {encode_string(s)}")
        return cls(alphabet, inputs, table, t)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str, alphabet: Optional[Alphabet] = None) -> "Channel":
        return cls.from_dict(json.loads(text), alphabet)


def channel_output(channel: Channel, box: Box) -> Tuple[Fraction, ...]:
    """Exact output distribution ``E(P)`` over ``2^t`` outcomes."""
    if box.alphabet.shape != channel.alphabet.shape:
        raise ValueError("box and channel alphabets differ")
    n = box.n
    W = channel.weights_tensor
    totals = (box.numerators[..., None] * W).sum(axis=tuple(range(2 * n)))
    den = box.denominator * channel.weight_denominator
    return tuple(Fraction(v, den) for v in totals)


# ---------------------------------------------------------------------------
# Partitions and extensions
# ---------------------------------------------------------------------------

class Partition:
    """Weighted decomposition ``{(p_c, P^c)}`` of a box into valid boxes."""

    def __init__(self, elements: Sequence[Tuple[Rational, Box]]):
        if not elements:
            raise ValueError("a partition needs at least one element")
        elems = tuple((as_fraction(p), b) for p, b in elements)
        alphabet = elems[0][1].alphabet
        for p, b in elems:
            if p < 0:
                raise ValueError("partition weights must be nonnegative")
            if b.alphabet != alphabet:
                raise ValueError("partition elements have different alphabets")
            report = validate(b)
            if not report:
                raise ValueError(f"partition element is not a valid box: {report.detail}")
        if sum(p for p, _ in elems) != 1:
            raise ValueError("partition weights do not sum to one")
        self.elements = elems
        self.alphabet = alphabet

    def __len__(self) -> int:
        return len(self.elements)

    def mixture(self) -> Box:
        return combine([p for p, _ in self.elements], [b for _, b in self.elements])

    def reconstitutes(self, parent: Box) -> bool:
        return self.mixture() == parent

    @classmethod
    def trivial(cls, box: Box) -> "Partition":
        return cls([(1, box)])


class Extension:
    """Extension of ``parent``: one partition per setting ``z`` of the extra input.

    Every partition must mix back to ``parent`` exactly, which is the
    non-signalling condition from the extra interface to the box.
    """

    def __init__(self, parent: Box, settings: Sequence[Partition]):
        if not settings:
            raise ValueError("an extension needs at least one setting")
        for z, part in enumerate(settings):
            if part.alphabet != parent.alphabet:
                raise ValueError(f"setting {z} has a different alphabet")
            if not part.reconstitutes(parent):
                raise ValueError(f"setting {z} does not reconstitute the parent box")
        self.parent = parent
        self.settings: Tuple[Partition, ...] = tuple(settings)

    @classmethod
    def trivial(cls, box: Box) -> "Extension":
        return cls(box, [Partition.trivial(box)])

    def post_select(self, z: int, c: int) -> Tuple[Fraction, Box]:
        return self.settings[z].elements[c]

    def joint(self) -> Box:
        """The extension as a one-round bipartite box ``P(a, c | x, z) = p_{c|z} P^c(a|x)``.

        Settings with fewer elements are padded with zero-weight outcomes.
        """
        alpha = self.parent.alphabet
        L, M = alpha.l**alpha.n, alpha.m**alpha.n
        C, Z = max(len(p) for p in self.settings), len(self.settings)
        C = max(C, 2)  # keep at least two outcomes on the extra interface
        values = np.zeros((L, C, M, Z), dtype=object)
        values[...] = Fraction(0)
        for z, part in enumerate(self.settings):
            for c, (p, b) in enumerate(part.elements):
                values[:, c, :, z] = p * b.entries.reshape(L, M)
        joint_alpha = Alphabet(1, M * Z, L * C, (M, Z, L, C))
        return Box.from_fractions(joint_alpha, values.reshape(L * C, M * Z))


def partition_check(parent: Box, weight: Rational, component: Box) -> bool:
    """True iff ``weight * component <= parent`` entrywise, i.e. some partition of
    ``parent`` contains ``(weight, component)``."""
    if parent.alphabet != component.alphabet:
        raise ValueError("alphabets differ")
    w = as_fraction(weight)
    lhs = component.numerators * (w.numerator * parent.denominator)
    rhs = parent.numerators * (w.denominator * component.denominator)
    return all(bool(v) for v in (lhs <= rhs).flat)


def split_partition(box: Box, component: Box, weight: Optional[Rational] = None) -> Partition:
    """``{(w, component), (1 - w, remainder)}`` with the largest safe weight halved by default."""
    if weight is None:
        ratios = [
            Fraction(int(p) * component.denominator, int(q) * box.denominator)
            for p, q in zip(box.numerators.flat, component.numerators.flat)
            if q > 0
        ]
        weight = min(min(ratios) / 2, Fraction(1, 2))
    weight = as_fraction(weight)
    if not 0 <= weight < 1:
        raise ValueError("weight must lie in [0, 1)")
    rest = combine([Fraction(1) / (1 - weight), -weight / (1 - weight)], [box, component])
    return Partition([(weight, component), (1 - weight, rest)])


def random_partition(box: Box, rng: np.random.Generator, parts: int = 2) -> Partition:
    """Random partition whose components live on the support of ``box``."""
    support = np.vectorize(lambda v: v > 0, otypes=[bool])(box.numerators)
    elements: List[Tuple[Fraction, Box]] = []
    remaining, mass = box, Fraction(1)
    for _ in range(parts - 1):
        comp = random_box(box.alphabet, rng, support=support, sparse=True)
        split = split_partition(remaining, comp)
        (w, c), (w_rest, rest) = split.elements
        elements.append((mass * w, c))
        remaining, mass = rest, mass * w_rest
    elements.append((mass, remaining))
    return Partition(elements)


def random_extension(box: Box, rng: np.random.Generator, settings: int = 2, parts: int = 2) -> Extension:
    return Extension(box, [random_partition(box, rng, parts) for _ in range(settings)])


def trace_distance(chan_e: Channel, chan_f: Channel, extension: Extension) -> Fraction:
    """``1/2 * sum_k max_z sum_c p_{c|z} |E_{K|C}(k|c) - F_{K|C}(k|c)|``."""
    if chan_e.alphabet != chan_f.alphabet or chan_e.t != chan_f.t:
        raise ValueError("channels must share alphabet and output size")
    K = chan_e.num_outcomes
    per_setting = []
    for part in extension.settings:
        acc = [Fraction(0)] * K
        for p, b in part.elements:
            if p == 0:
                continue
            e_out, f_out = channel_output(chan_e, b), channel_output(chan_f, b)
            for k in range(K):
                acc[k] += p * abs(e_out[k] - f_out[k])
        per_setting.append(acc)
    return sum(max(acc[k] for acc in per_setting) for k in range(K)) / 2


def diamond_gap(chan_e: Channel, chan_f: Channel, family: Sequence[Extension]) -> Fraction:
    """Largest :func:`trace_distance` over an explicit family of extensions."""
    if not family:
        raise ValueError("empty extension family")
    return max(trace_distance(chan_e, chan_f, ext) for ext in family)


# ---------------------------------------------------------------------------
# Building tau-extensions
# ---------------------------------------------------------------------------

def _template_for(template, alphabet: Alphabet) -> Tuple[SymmetryTemplate, str]:
    if template is None:
        return no_symmetry_template(alphabet.m, alphabet.l), "plain"
    if template == "chsh":
        return chsh_template(), "chsh"
    return template, "general"


def tau_for(template, alphabet: Alphabet) -> Tuple[Box, SymmetryTemplate]:
    tmpl, kind = _template_for(template, alphabet)
    state = DeFinettiState("chsh" if kind == "chsh" else tmpl, alphabet.n)
    return state.materialize(alphabet.bipartite), tmpl


def remainder_state(tau: Box, box: Box, d: int) -> Box:
    """``R`` with ``tau = (n+1)^-d box + (1 - (n+1)^-d) R``.

    Requires ``box <= (n+1)^d tau`` entrywise so that ``R`` is a valid box.
    """
    if d < 1:
        raise ValueError("the remainder needs d >= 1")
    if tau.alphabet != box.alphabet:
        raise ValueError("alphabets differ")
    pref = (box.n + 1) ** d
    lhs = box.numerators * tau.denominator
    rhs = tau.numerators * (pref * box.denominator)
    if not all(bool(v) for v in (lhs <= rhs).flat):
        raise ValueError(f"box is not dominated by {pref} * tau")
    w = Fraction(1, pref)
    return combine([1 / (1 - w), -w / (1 - w)], [tau, box])


def build_definetti_extension(
    items: Sequence[Union[Box, Partition, Extension]],
    template: Union[SymmetryTemplate, str, None] = None,
) -> Extension:
    """tau-extension matching the given settings of boxes symmetric under ``template``.

    Setting ``z`` of the result is ``{(p_c / (n+1)^d, P^c)}`` together with
    ``(1 - (n+1)^-d, R_z)``, where ``R_z`` is the remainder for the parent of
    item ``z``.  A bare box or partition counts as one setting.
    ``template=None`` means no symmetry beyond permutations, ``"chsh"`` the
    builtin CHSH template.
    """
    if not items:
        raise ValueError("need at least one item")
    partitions: List[Tuple[Box, Partition]] = []
    for item in items:
        if isinstance(item, Extension):
            partitions.extend((item.parent, part) for part in item.settings)
        elif isinstance(item, Partition):
            partitions.append((item.mixture(), item))
        else:
            partitions.append((item, Partition.trivial(item)))
    alphabet = partitions[0][0].alphabet
    tau, tmpl = tau_for(template, alphabet)
    d = tmpl.d
    pref = (alphabet.n + 1) ** d
    remainders = {}
    settings = []
    for parent, part in partitions:
        if parent.alphabet != alphabet:
            raise ValueError("all items need the same alphabet")
        key = parent.to_json()
        if key not in remainders:
            if not is_permutation_invariant(parent) or not has_symmetry(parent, tmpl):
                raise ValueError("every parent box must be permutation invariant and have the template symmetry")
            remainders[key] = remainder_state(tau, parent, d)
        elements = [(p / pref, b) for p, b in part.elements]
        elements.append((1 - Fraction(1, pref), remainders[key]))
        settings.append(Partition(elements))
    return Extension(tau, settings)


# ---------------------------------------------------------------------------
# Invariance
# ---------------------------------------------------------------------------

def _round_permutations(n: int):
    if n <= 4:
        return list(itertools.permutations(range(n)))
    return [tuple(list(range(1, n)) + [0]), (1, 0) + tuple(range(2, n))]


def is_invariant_channel(channel: Channel, group) -> bool:
    """Whether ``E(P o g) = E(P)`` for every box ``P`` and every ``g`` in ``group``.

    :param group: ``"permutation"`` (round permutations), ``"chsh"``, a
        :class:`SymmetryTemplate` (color-preserving relabelings of one-round
        pairs), or a sequence of explicit pair mappings ``{(a, x): (a', x')}``.

    By linearity it suffices that the weight tensor is unchanged by ``g``.
    """
    alpha = channel.alphabet
    n = alpha.n
    W = channel.weights_tensor
    if group == "permutation":
        for perm in _round_permutations(n):
            inverse = [0] * n
            for i, p in enumerate(perm):
                inverse[p] = i
            axes = inverse + [n + k for k in inverse] + [2 * n]
            if not np.array_equal(W.transpose(axes), W):
                return False
        return True
    if group == "chsh":
        group = chsh_template()
    if isinstance(group, SymmetryTemplate):
        if (group.m, group.l) != (alpha.m, alpha.l):
            raise ValueError("template does not match the channel alphabet")
        mappings = color_transpositions(group)
    else:
        mappings = list(group)
    paired = pair_axes(W, n, alpha.l, alpha.m)
    for mapping in mappings:
        index = mapping_index(mapping, alpha.l, alpha.m)
        for axis in range(n):
            if not np.array_equal(np.take(paired, index, axis=axis), paired):
                return False
    return True


# ---------------------------------------------------------------------------
# Bound check and grid search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiamondReport:
    n: int
    d: int
    prefactor: int
    gap_box: Fraction
    gap_tau: Fraction
    worst_ratio: Optional[Fraction]
    instances: int
    holds: bool

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "prefactor": self.prefactor,
            "gap_box": format_fraction(self.gap_box),
            "gap_tau": format_fraction(self.gap_tau),
            "worst_ratio": None if self.worst_ratio is None else format_fraction(self.worst_ratio),
            "instances": self.instances,
            "holds": self.holds,
        }


class PreconditionError(ValueError):
    """Input does not satisfy the hypotheses of the check that was requested."""


def verify_diamond_bound(
    chan_e: Channel,
    chan_f: Channel,
    family: Sequence[Extension],
    template: Union[SymmetryTemplate, str, None] = None,
) -> DiamondReport:
    """Check ``TD(P-extension) <= (n+1)^d * TD(tau-extension)`` on each family member.

    The tau-extension of each member comes from
    :func:`build_definetti_extension`.  Both channels must be invariant under
    round permutations and under the template.
    """
    tmpl, _ = _template_for(template, chan_e.alphabet)
    for ch in (chan_e, chan_f):
        if not is_invariant_channel(ch, "permutation"):
            raise PreconditionError(f"channel {ch.name or ''} is not permutation invariant")
        if template is not None and not is_invariant_channel(ch, tmpl):
            raise PreconditionError(f"channel {ch.name or ''} is not invariant under the template")
    n = chan_e.alphabet.n
    pref = (n + 1) ** tmpl.d
    gap_box, gap_tau, worst = Fraction(0), Fraction(0), None
    holds = True
    for ext in family:
        tau_ext = build_definetti_extension([ext], template)
        lhs = trace_distance(chan_e, chan_f, ext)
        rhs = trace_distance(chan_e, chan_f, tau_ext)
        holds &= lhs <= pref * rhs
        gap_box, gap_tau = max(gap_box, lhs), max(gap_tau, rhs)
        if rhs > 0:
            ratio = lhs / rhs
            worst = ratio if worst is None else max(worst, ratio)
    holds &= gap_box <= pref * gap_tau
    return DiamondReport(n, tmpl.d, pref, gap_box, gap_tau, worst, len(family), holds)


@dataclass(frozen=True)
class GridResult:
    level: int
    value: Fraction
    extension: Extension
    candidates: int


def _compositions(total: int, parts: int) -> np.ndarray:
    out = []
    for cuts in itertools.combinations(range(total + parts - 1), parts - 1):
        bounds = (-1,) + cuts + (total + parts - 1,)
        out.append([bounds[i + 1] - bounds[i] - 1 for i in range(parts)])
    return np.array(out, dtype=np.int64)


def grid_extension_search(
    chan_e: Channel,
    chan_f: Channel,
    box: Box,
    max_level: int = 2,
    budget: int = 2 * 10**6,
) -> List[GridResult]:
    """Lower bounds on the extension distance from two-element splits on a grid.

    Level ``L`` tries splits ``(lam, Q), (1 - lam, R)`` with ``lam`` a
    multiple of ``2^-L`` and Q on the grid of multiples of ``2^-(L-1)``.
    Because the max over settings sits inside the sum over outcomes, the best
    extension built from these splits uses, for each outcome, the split that
    is best for that outcome; so it has at most ``2^t`` settings.  The grids
    are nested and the running best is kept, so values never decrease with
    the level.  Only one-round boxes are supported, and the search stops at
    the first level whose candidate count exceeds ``budget``.
    """
    alpha = box.alphabet
    if alpha.n != 1:
        raise ValueError("grid search supports one-round boxes only")
    L, M = alpha.l, alpha.m
    D = (chan_e.weights_tensor.astype(float) / chan_e.weight_denominator) - (
        chan_f.weights_tensor.astype(float) / chan_f.weight_denominator
    )
    P = box.numerators.astype(float) / box.denominator
    dP = np.einsum("ax,axk->k", P, D)
    best_ext = Extension.trivial(box)
    best_value = trace_distance(chan_e, chan_f, best_ext)
    results = []
    for level in range(1, max_level + 1):
        r = 2 ** (level - 1)
        comps = _compositions(r, L)
        n_q = len(comps) ** M
        lams = np.arange(1, 2**level) / 2**level
        if n_q * len(lams) > budget:
            break
        idx = np.array(list(itertools.product(range(len(comps)), repeat=M)), dtype=np.int64)
        Q = comps[idx].transpose(0, 2, 1) / r  # (n_q, L, M)
        dQ = np.einsum("qax,axk->qk", Q, D)
        # per outcome k: best (value, lam, q) over feasible splits
        top = [(abs(dP[k]) / 2, None) for k in range(len(dP))]
        for lam in lams:
            feasible = np.all(lam * Q <= P[None] + 1e-12, axis=(1, 2))
            if not feasible.any():
                continue
            vals = 0.5 * (lam * np.abs(dQ) + np.abs(dP[None] - lam * dQ))
            vals[~feasible] = -1.0
            for k in range(vals.shape[1]):
                q = int(np.argmax(vals[:, k]))
                if vals[q, k] > top[k][0]:
                    top[k] = (vals[q, k], (lam, q))
        chosen = sorted({c for _, c in top if c is not None})
        settings = []
        for lam, q in chosen:
            lam_exact = Fraction(int(round(lam * 2**level)), 2**level)
            comp = Box(alpha, comps[idx[q]].T.astype(object), r)
            if partition_check(box, lam_exact, comp):
                settings.append(split_partition(box, comp, lam_exact))
        if len(settings) < len(top):
            settings.append(Partition.trivial(box))
        ext = Extension(box, settings)
        value = trace_distance(chan_e, chan_f, ext)
        if value > best_value:
            best_value, best_ext = value, ext
        results.append(GridResult(level, best_value, best_ext, n_q * len(lams)))
    return results


# ---------------------------------------------------------------------------
# Fixture channels
# ---------------------------------------------------------------------------

def _uniform_inputs(alphabet: Alphabet) -> dict:
    total = alphabet.m**alphabet.n
    return {x: Fraction(1, total) for x in alphabet.x_strings()}


def count_channel(
    template: SymmetryTemplate,
    n: int,
    fn: Callable[[tuple], int],
    t: int,
    bipartite=None,
    name: Optional[str] = None,
) -> Channel:
    """Uniform inputs; the outcome is ``fn(color counts)``.

    Such channels are invariant under round permutations and under the
    template's relabelings.
    """
    alphabet = Alphabet(n, template.m, template.l, bipartite)
    return Channel(alphabet, _uniform_inputs(alphabet), lambda a, s: fn(color_counts(template, a, s)), t, name)


def chsh_score_channel(n: int, threshold: Rational = Fraction(3, 4)) -> Channel:
    """Outputs 1 when fewer than ``threshold * n`` rounds satisfy CHSH."""
    threshold = as_fraction(threshold)
    return count_channel(
        chsh_template(), n, lambda c: int(c[1] < threshold * n), 1, (2, 2, 2, 2), f"chsh-score-{threshold}"
    )


def chsh_count_channel(n: int) -> Channel:
    """Outputs the number of CHSH-satisfying rounds in binary."""
    return count_channel(chsh_template(), n, lambda c: c[1], max(n.bit_length(), 1), (2, 2, 2, 2), "chsh-count")


def chsh_parity_channel(n: int) -> Channel:
    return count_channel(chsh_template(), n, lambda c: c[1] % 2, 1, (2, 2, 2, 2), "chsh-parity")


def seeded_count_channels(
    template: SymmetryTemplate, n: int, rng: np.random.Generator, count: int, t: int = 1, bipartite=None
) -> List[Channel]:
    """Channels whose outcome is a random function of the color counts."""
    out = []
    for j in range(count):
        table = {}

        def fn(c, table=table):
            if c not in table:
                table[c] = int(rng.integers(0, 2**t))
            return table[c]

        ch = count_channel(template, n, fn, t, bipartite, f"seeded-{j}")
        ch.weights_tensor  # freeze the random table now, in a fixed order
        out.append(ch)
    return out


def constant_channel(alphabet: Alphabet, value: int = 0, t: int = 1) -> Channel:
    return Channel(alphabet, _uniform_inputs(alphabet), lambda a, s: value, t, f"constant-{value}")
