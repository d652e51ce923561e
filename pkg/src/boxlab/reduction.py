"""Entrywise domination of symmetric boxes by the de Finetti box, and test bounds.

A box that is invariant under round permutations (and, optionally, has the
symmetry of a template) satisfies ``P <= (n+1)^d tau`` entry by entry.  The
check is exact: both boxes are integer tensors over a denominator and the
comparison is done by cross-multiplication.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import FrozenSet, Sequence, Tuple, Union

import numpy as np

from .boxes import Alphabet, Box, format_fraction, is_permutation_invariant, random_box, symmetrize, validate
from .channels import (
    Channel,
    PreconditionError,
    channel_output,
    chsh_score_channel,
    count_channel,
    is_invariant_channel,
    tau_for,
)
from .definetti import multinomial
from .symmetry import (
    SymmetryTemplate,
    chsh_template,
    color_counts,
    has_symmetry,
    no_symmetry_template,
    s_project,
)

TemplateArg = Union[SymmetryTemplate, str, None]


def upper_bound_chsh(n: int, n_chsh: int) -> Fraction:
    """Largest value a CHSH-symmetric box can put on one ``(a, x)`` with ``n_chsh`` satisfied rounds."""
    if not 0 <= n_chsh <= n:
        raise ValueError(f"need 0 <= N_chsh <= n, got {n_chsh}, n={n}")
    return Fraction(1, 2**n * math.comb(n, n_chsh))


def _class_split(template: SymmetryTemplate, counts: Sequence[int]):
    for params, unfree in template.class_colors:
        colors = params + (unfree,)
        yield colors, [counts[c] for c in colors]


def upper_bound_general(template: SymmetryTemplate, n: int, counts: Sequence[int]) -> Fraction:
    """``prod_j t_j^(-N_j) / prod_k multinomial(n_k; N^k)`` over classes k."""
    template.require_valid()
    counts = tuple(int(c) for c in counts)
    if len(counts) != template.num_colors or sum(counts) != n or min(counts) < 0:
        raise ValueError(f"bad color counts {counts} for n={n}")
    t = template.t_counts
    value = Fraction(1)
    for colors, part in _class_split(template, counts):
        for c in colors:
            value /= t[c] ** counts[c]
        value /= multinomial(part)
    return value


def counting_bound(template: SymmetryTemplate, n: int, counts: Sequence[int]) -> int:
    """Number of output strings forced to share the value of an ``(a, x)`` with these counts."""
    t = template.t_counts
    value = 1
    for colors, part in _class_split(template, counts):
        for c in colors:
            value *= t[c] ** counts[c]
        value *= multinomial(part)
    return value


def counting_oracle(box: Box, template: SymmetryTemplate, a: Sequence[int], x: Sequence[int], limit: int = 4**8) -> int:
    """Count output strings ``a'`` with ``box(a'|x) == box(a|x)`` by enumeration."""
    alpha = box.alphabet
    if alpha.l**alpha.n > limit:
        raise ValueError(f"enumeration of {alpha.l ** alpha.n} outputs exceeds the limit {limit}")
    col = box.matrix()[:, alpha.x_index(x)]
    target = box.numerators[tuple(a) + tuple(x)]
    return int(sum(1 for v in col if v == target))


@dataclass(frozen=True)
class ReductionReport:
    """Result of :func:`verify_reduction`.

    ``max_ratio`` is the largest ``P(a|x) / tau(a|x)`` and ``witness`` an
    ``(a, x)`` where it is attained.
    """

    kind: str
    n: int
    d: int
    prefactor: int
    max_ratio: Fraction
    witness: Tuple[Tuple[int, ...], Tuple[int, ...]]
    violations: int
    entries: int

    @property
    def holds(self) -> bool:
        return self.violations == 0

    @property
    def tight(self) -> bool:
        return self.max_ratio == self.prefactor

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "d": self.d,
            "prefactor": self.prefactor,
            "max_ratio": format_fraction(self.max_ratio),
            "witness": {"a": list(self.witness[0]), "x": list(self.witness[1])},
            "violations": self.violations,
            "entries": self.entries,
            "holds": self.holds,
        }


def _resolve(template: TemplateArg, alphabet: Alphabet) -> Tuple[SymmetryTemplate, str]:
    if template is None:
        return no_symmetry_template(alphabet.m, alphabet.l), "plain"
    if template == "chsh":
        return chsh_template(), "chsh"
    return template, "general"


def check_preconditions(box: Box, template: TemplateArg = None) -> SymmetryTemplate:
    tmpl, kind = _resolve(template, box.alphabet)
    if (tmpl.m, tmpl.l) != (box.alphabet.m, box.alphabet.l):
        raise PreconditionError(f"template needs m={tmpl.m}, l={tmpl.l}; box has m={box.alphabet.m}, l={box.alphabet.l}")
    report = validate(box)
    if not report:
        raise PreconditionError(f"not a valid box: {report.detail}")
    if not is_permutation_invariant(box):
        raise PreconditionError("box is not invariant under permutations of rounds")
    if kind != "plain" and not has_symmetry(box, tmpl):
        raise PreconditionError(f"box does not have the symmetry of the {kind} template")
    return tmpl


def verify_reduction(box: Box, template: TemplateArg = None) -> ReductionReport:
    """Check ``box <= (n+1)^d tau`` at every entry.

    :param template: ``None`` (only permutation invariance, ``d = m(l-1)``),
        ``"chsh"`` (closed-form CHSH tau, ``d = 1``) or a template.
    :raises PreconditionError: when the box is invalid, not permutation
        invariant, or lacks the template symmetry.
    """
    tmpl = check_preconditions(box, template)
    _, kind = _resolve(template, box.alphabet)
    tau, _ = tau_for(template, box.alphabet)
    n, d = box.n, tmpl.d
    pref = (n + 1) ** d
    lhs = (box.numerators * tau.denominator).ravel()
    tau_num = tau.numerators.ravel()
    violations = int(sum(1 for p, q in zip(lhs, tau_num) if p > pref * box.denominator * q))
    # exact argmax of P / tau
    best, best_i = None, 0
    for i, (p, q) in enumerate(zip(box.numerators.flat, tau_num)):
        if best is None or p * best[1] > best[0] * q:
            best, best_i = (p, q), i
    max_ratio = Fraction(best[0] * tau.denominator, best[1] * box.denominator)
    idx = np.unravel_index(best_i, box.alphabet.shape)
    witness = (tuple(int(v) for v in idx[:n]), tuple(int(v) for v in idx[n:]))
    return ReductionReport(kind, n, d, pref, max_ratio, witness, violations, len(lhs))


def verify_counting(box: Box, template: TemplateArg = None) -> Tuple[bool, int]:
    """Check that every value of ``box`` is repeated at least :func:`counting_bound` times in its column.

    :return: ``(holds, checked)``.
    """
    tmpl = check_preconditions(box, template)
    alpha = box.alphabet
    mat = box.matrix()
    checked = 0
    for x in alpha.x_strings():
        col = mat[:, alpha.x_index(x)]
        values, multiplicity = np.unique(col.astype(object), return_counts=True)
        lookup = dict(zip(values.tolist(), multiplicity.tolist()))
        for r, a in enumerate(alpha.a_strings()):
            if col[r] == 0:
                continue
            checked += 1
            if lookup[col[r]] < counting_bound(tmpl, alpha.n, color_counts(tmpl, a, x)):
                return False, checked
    return True, checked


# ---------------------------------------------------------------------------
# Random symmetric boxes
# ---------------------------------------------------------------------------

def random_symmetric_box(
    alphabet: Alphabet, rng: np.random.Generator, template: TemplateArg = None, sparse: bool = False
) -> Box:
    """Random box made permutation invariant and, given a template, template symmetric."""
    box = symmetrize(random_box(alphabet, rng, sparse=sparse))
    if template is not None:
        tmpl, _ = _resolve(template, alphabet)
        box = s_project(box, tmpl)
    return box


# ---------------------------------------------------------------------------
# Tests
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InvariantTest:
    """A test: a channel plus the outcome that counts as failure.

    :param declared: invariances the test claims; ``"permutation"`` and/or
        template objects (or ``"chsh"``).  They are checked before use.
    """

    channel: Channel
    fail_outcome: int = 1
    declared: FrozenSet = field(default_factory=lambda: frozenset({"permutation"}))
    name: str = ""


def run_test(test: InvariantTest, box: Box) -> Fraction:
    """Probability that the test outputs its failure outcome on ``box``."""
    return channel_output(test.channel, box)[test.fail_outcome]


@dataclass(frozen=True)
class FailureBoundReport:
    fail_box: Fraction
    fail_tau: Fraction
    prefactor: int

    @property
    def holds(self) -> bool:
        return self.fail_box <= self.prefactor * self.fail_tau

    def to_dict(self) -> dict:
        return {
            "fail_box": format_fraction(self.fail_box),
            "fail_tau": format_fraction(self.fail_tau),
            "prefactor": self.prefactor,
            "holds": self.holds,
        }


def verify_test_bound(test: InvariantTest, box: Box, template: TemplateArg = None) -> FailureBoundReport:
    """Check ``Pr[fail | box] <= (n+1)^d Pr[fail | tau]``."""
    for inv in test.declared:
        if not is_invariant_channel(test.channel, inv):
            raise PreconditionError(f"test is not invariant under {inv!r}")
    if not is_invariant_channel(test.channel, "permutation"):
        raise PreconditionError("test is not invariant under round permutations")
    tmpl = check_preconditions(box, template)
    if template is not None and not is_invariant_channel(test.channel, tmpl):
        raise PreconditionError("test is not invariant under the template relabelings")
    tau, _ = tau_for(template, box.alphabet)
    pref = (box.n + 1) ** tmpl.d
    return FailureBoundReport(run_test(test, box), run_test(test, tau), pref)


def chsh_score_test(n: int, threshold=Fraction(3, 4)) -> InvariantTest:
    """Fails when fewer than ``threshold * n`` rounds satisfy CHSH."""
    return InvariantTest(chsh_score_channel(n, threshold), 1, frozenset({"permutation", "chsh"}), "chsh-score")


def output_weight_test(alphabet: Alphabet, threshold: int) -> InvariantTest:
    """Fails when at least ``threshold`` rounds output a nonzero symbol."""
    inputs = {x: Fraction(1, alphabet.m**alphabet.n) for x in alphabet.x_strings()}
    channel = Channel(alphabet, inputs, lambda a, s: int(sum(v != 0 for v in a) >= threshold), 1, "output-weight")
    return InvariantTest(channel, 1, frozenset({"permutation"}), "output-weight")


def coin_test(alphabet: Alphabet, fail_probability=Fraction(1, 3)) -> InvariantTest:
    """Ignores the box and fails with a fixed probability, drawn from a private coordinate."""
    p = Fraction(fail_probability)
    inputs = {}
    for x in alphabet.x_strings():
        inputs[x + (1,)] = p / alphabet.m**alphabet.n
        inputs[x + (0,)] = (1 - p) / alphabet.m**alphabet.n
    channel = Channel(alphabet, inputs, lambda a, s: s[-1], 1, "coin")
    return InvariantTest(channel, 1, frozenset({"permutation"}), "coin")


def count_test(template: SymmetryTemplate, n: int, fails, bipartite=None) -> InvariantTest:
    """Fails when the color counts satisfy ``fails(counts)``."""
    channel = count_channel(template, n, lambda c: int(bool(fails(c))), 1, bipartite, "count")
    return InvariantTest(channel, 1, frozenset({"permutation", template}), "count")

