import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from boxlab.boxes import Alphabet, Box, chsh_box, power, pr_box, random_box, uniform_box
from boxlab.channels import Channel, PreconditionError
from boxlab.definetti import DeFinettiState, count_vectors, lower_bound_general, tau_general_entry
from boxlab.reduction import (
    InvariantTest,
    chsh_score_test,
    check_preconditions,
    coin_test,
    count_test,
    counting_bound,
    counting_oracle,
    output_weight_test,
    random_symmetric_box,
    run_test,
    upper_bound_chsh,
    upper_bound_general,
    verify_counting,
    verify_reduction,
    verify_test_bound,
)
from boxlab.symmetry import BUILTIN_TEMPLATES, chsh_template, color_counts, load_template

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_chsh_upper_bound_values():
    assert upper_bound_chsh(1, 0) == Fraction(1, 2)
    assert upper_bound_chsh(3, 1) == Fraction(1, 24)
    with pytest.raises(ValueError):
        upper_bound_chsh(2, 3)


@pytest.mark.parametrize("n", range(1, 5))
def test_chsh_upper_bound_over_tau_is_n_plus_one(n):
    tau = DeFinettiState("chsh", n)
    for N in range(n + 1):
        assert upper_bound_chsh(n, N) == (n + 1) * tau.value((n - N, N))


@pytest.mark.parametrize("name", sorted(BUILTIN_TEMPLATES))
def test_general_upper_bound_over_tau_is_at_most_prefactor(name):
    tmpl = load_template(name)
    for n in (1, 2, 3):
        pref = (n + 1) ** tmpl.d
        for counts in count_vectors(tmpl, n):
            upper = upper_bound_general(tmpl, n, counts)
            assert upper <= pref * tau_general_entry(tmpl, n, counts)
            assert upper == pref * lower_bound_general(tmpl, n, counts) * _class_prefactor_gap(tmpl, n, counts)
            assert counting_bound(tmpl, n, counts) * upper == 1


def _class_prefactor_gap(tmpl, n, counts):
    # the lower bound divides by (n_k + 1)^d_k per class; the prefactor uses n overall
    gap = Fraction(1)
    for params, unfree in tmpl.class_colors:
        n_k = sum(counts[c] for c in params + (unfree,))
        gap *= Fraction((n_k + 1) ** len(params))
    return gap / (n + 1) ** tmpl.d


def test_chsh_general_upper_bound_equals_closed_form():
    tmpl = chsh_template()
    for n in (1, 2, 3, 4):
        for N in range(n + 1):
            assert upper_bound_general(tmpl, n, (n - N, N)) == upper_bound_chsh(n, N)


def test_pr_power_is_tight():
    for n in (1, 2, 3):
        report = verify_reduction(power(pr_box(), n), "chsh")
        assert report.holds
        assert report.max_ratio == n + 1
        assert report.tight
        assert report.entries == 16**n


@settings(max_examples=15, deadline=None)
@given(seed=seeds, n=st.integers(1, 2), sparse=st.booleans())
def test_random_chsh_boxes_are_dominated(seed, n, sparse):
    box = random_symmetric_box(Alphabet.pairs(n), np.random.default_rng(seed), "chsh", sparse=sparse)
    report = verify_reduction(box, "chsh")
    assert report.holds
    assert report.max_ratio <= n + 1
    a, x = report.witness
    tau_value = DeFinettiState("chsh", n).entry(a, x)
    assert box.prob(a, x) == report.max_ratio * tau_value


@settings(max_examples=10, deadline=None)
@given(seed=seeds, n=st.integers(1, 3))
def test_random_plain_boxes_are_dominated(seed, n):
    box = random_symmetric_box(Alphabet(n, 2, 2), np.random.default_rng(seed), sparse=seed % 2 == 0)
    report = verify_reduction(box)
    assert report.kind == "plain"
    assert report.prefactor == (n + 1) ** 2
    assert report.holds


@pytest.mark.parametrize("name", ["flip-2", "cyclic-3", "split-3", "mixed-3", "shuffle-4"])
def test_random_template_boxes_are_dominated(name):
    tmpl = load_template(name)
    for n in (1, 2):
        for trial in range(4):
            box = random_symmetric_box(Alphabet(n, tmpl.m, tmpl.l), np.random.default_rng([n, trial]), tmpl, trial % 2 == 1)
            assert verify_reduction(box, tmpl).holds


def test_iid_product_of_template_distribution():
    tmpl = load_template("mixed-3")
    params = [Fraction(1, 5), Fraction(1, 7), Fraction(1, 4)]
    one = Box.from_fractions(Alphabet(1, tmpl.m, tmpl.l), tmpl.allowed_distribution(params))
    report = verify_reduction(power(one, 3), tmpl)
    assert report.holds
    assert report.max_ratio < report.prefactor


def test_preconditions_raise():
    with pytest.raises(PreconditionError):
        verify_reduction(random_box(Alphabet(2, 2, 2), np.random.default_rng(0)))
    with pytest.raises(PreconditionError):
        verify_reduction(power(random_box(Alphabet.pairs(1), np.random.default_rng(1)), 2), "chsh")
    bad = Box(Alphabet(1, 2, 2), [[1, 1], [0, 0]], 2)
    with pytest.raises(PreconditionError):
        check_preconditions(bad)


def test_counting_bound_example():
    tmpl = chsh_template()
    # two rounds, one satisfied: 2^2 output strings per color string times 2 orderings
    assert counting_bound(tmpl, 2, (1, 1)) == 8
    assert counting_bound(tmpl, 3, (3, 0)) == 8


@pytest.mark.parametrize("n", [1, 2])
def test_counting_oracle_meets_bound_on_chsh_boxes(n):
    tmpl = chsh_template()
    rng = np.random.default_rng(n)
    for _ in range(3):
        box = random_symmetric_box(Alphabet.pairs(n), rng, "chsh")
        for a in itertools.product(range(4), repeat=n):
            for x in itertools.product(range(4), repeat=n):
                if box.prob(a, x) > 0:
                    found = counting_oracle(box, tmpl, a, x)
                    assert found >= counting_bound(tmpl, n, color_counts(tmpl, a, x))
        holds, checked = verify_counting(box, "chsh")
        assert holds and checked > 0


def test_counting_check_on_templates():
    for name in ("cyclic-3", "shuffle-4"):
        tmpl = load_template(name)
        box = random_symmetric_box(Alphabet(2, tmpl.m, tmpl.l), np.random.default_rng(9), tmpl)
        assert verify_counting(box, tmpl)[0]


def test_counting_oracle_limit():
    box = uniform_box(Alphabet.pairs(3))
    with pytest.raises(ValueError):
        counting_oracle(box, chsh_template(), (0, 0, 0), (0, 0, 0), limit=16)


def test_always_fail_and_always_pass_tests():
    alpha = Alphabet(2, 2, 2)
    inputs = {x: Fraction(1, 4) for x in alpha.x_strings()}
    box = random_symmetric_box(alpha, np.random.default_rng(3))
    always = InvariantTest(Channel(alpha, inputs, lambda a, s: 1, 1), name="fail")
    never = InvariantTest(Channel(alpha, inputs, lambda a, s: 0, 1), name="pass")
    assert run_test(always, box) == 1
    report = verify_test_bound(always, box)
    assert report.fail_tau == 1 and report.holds
    assert verify_test_bound(never, box).fail_box == 0


def test_coin_test_fails_at_fixed_rate():
    alpha = Alphabet.pairs(2)
    test = coin_test(alpha)
    for box in (power(pr_box(), 2), uniform_box(alpha), DeFinettiState("chsh", 2).materialize()):
        assert run_test(test, box) == Fraction(1, 3)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_chsh_score_test_never_fails_on_pr_power(n):
    test = chsh_score_test(n)
    box = power(pr_box(), n)
    report = verify_test_bound(test, box, "chsh")
    assert report.fail_box == 0
    assert report.fail_tau > 0
    assert report.holds


def test_chsh_score_fails_on_anti_box():
    assert run_test(chsh_score_test(2), power(chsh_box(Fraction(1, 2)), 2)) == 1


def test_output_weight_test_bound():
    alpha = Alphabet(3, 2, 2)
    test = output_weight_test(alpha, 2)
    for seed in range(3):
        box = random_symmetric_box(alpha, np.random.default_rng(seed))
        assert verify_test_bound(test, box).holds


def test_non_invariant_test_is_rejected():
    alpha = Alphabet(2, 2, 2)
    inputs = {x: Fraction(1, 4) for x in alpha.x_strings()}
    first_round = InvariantTest(Channel(alpha, inputs, lambda a, s: a[0], 1), name="first")
    with pytest.raises(PreconditionError):
        verify_test_bound(first_round, uniform_box(alpha))


def test_count_test_on_template():
    tmpl = load_template("cyclic-3")
    test = count_test(tmpl, 2, lambda c: c[2] == 0)
    box = random_symmetric_box(Alphabet(2, 2, 3), np.random.default_rng(4), tmpl)
    report = verify_test_bound(test, box, tmpl)
    assert report.holds
    assert report.prefactor == 9
