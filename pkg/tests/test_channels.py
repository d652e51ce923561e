import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from boxlab.boxes import Alphabet, Box, chsh_box, combine, is_nonsignalling, power, pr_box, random_box, uniform_box, validate
from boxlab.channels import (
    Channel,
    Extension,
    Partition,
    PreconditionError,
    build_definetti_extension,
    channel_output,
    chsh_count_channel,
    chsh_parity_channel,
    chsh_score_channel,
    constant_channel,
    diamond_gap,
    grid_extension_search,
    is_invariant_channel,
    partition_check,
    random_extension,
    random_partition,
    remainder_state,
    seeded_count_channels,
    split_partition,
    tau_for,
    trace_distance,
    verify_diamond_bound,
)
from boxlab.definetti import DeFinettiState
from boxlab.reduction import random_symmetric_box
from boxlab.symmetry import chsh_pair, chsh_template, load_template

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def enumerated_output(channel, box):
    """Oracle: sum over settings and outputs without the weight tensor."""
    out = [Fraction(0)] * channel.num_outcomes
    n = box.n
    for s, w in zip(channel.settings, channel.weights):
        for a in box.alphabet.a_strings():
            out[channel.outcome(a, s)] += w * box.prob(a, s[:n])
    return tuple(out)


def first_round_channel(alpha):
    inputs = {x: Fraction(1, alpha.m**alpha.n) for x in alpha.x_strings()}
    return Channel(alpha, inputs, lambda a, s: a[0] % 2, 1, "first-round")


@settings(max_examples=20, deadline=None)
@given(seed=seeds, n=st.integers(1, 2))
def test_output_matches_enumeration(seed, n):
    rng = np.random.default_rng(seed)
    box = random_box(Alphabet.pairs(n), rng)
    for channel in (chsh_score_channel(n), chsh_count_channel(n), first_round_channel(box.alphabet)):
        out = channel_output(channel, box)
        assert out == enumerated_output(channel, box)
        assert sum(out) == 1


def test_score_channel_examples():
    assert channel_output(chsh_score_channel(1), pr_box()) == (1, 0)
    assert channel_output(chsh_score_channel(1), chsh_box(Fraction(1, 8))) == (Fraction(3, 4), Fraction(1, 4))
    # the count channel reads the number of satisfied rounds
    out = channel_output(chsh_count_channel(2), power(chsh_box(Fraction(1, 8)), 2))
    assert out[:3] == (Fraction(1, 16), Fraction(6, 16), Fraction(9, 16))


@settings(max_examples=20, deadline=None)
@given(seed=seeds, num=st.integers(0, 8))
def test_output_is_affine(seed, num):
    rng = np.random.default_rng(seed)
    alpha = Alphabet.pairs(1)
    p, q = random_box(alpha, rng), random_box(alpha, rng)
    lam = Fraction(num, 8)
    mix = combine([lam, 1 - lam], [p, q])
    channel = first_round_channel(alpha)
    expected = tuple(lam * u + (1 - lam) * v for u, v in zip(channel_output(channel, p), channel_output(channel, q)))
    assert channel_output(channel, mix) == expected


def test_private_randomness_and_bad_inputs():
    alpha = Alphabet(1, 2, 2)
    coin = Channel(alpha, {(0, 0): Fraction(1, 4), (0, 1): Fraction(3, 4)}, lambda a, s: s[1], 1)
    assert channel_output(coin, uniform_box(alpha)) == (Fraction(1, 4), Fraction(3, 4))
    with pytest.raises(ValueError):
        Channel(alpha, {(0,): Fraction(1, 2)}, lambda a, s: 0, 1)
    with pytest.raises(ValueError):
        Channel(alpha, {(2,): 1}, lambda a, s: 0, 1)
    with pytest.raises(ValueError):
        channel_output(Channel(alpha, {(0,): 1}, lambda a, s: 2, 1), uniform_box(alpha))


def test_channel_json_round_trip():
    channel = chsh_score_channel(2)
    again = Channel.from_json(channel.to_json())
    assert np.array_equal(again.weights_tensor, channel.weights_tensor)
    assert again.weight_denominator == channel.weight_denominator
    data = channel.to_dict()
    data["map"] = data["map"][1:]
    with pytest.raises(ValueError):
        Channel.from_dict(data)


def test_trace_distance_basic_properties():
    alpha = Alphabet.pairs(1)
    box = pr_box()
    ext = Extension.trivial(box)
    zero, one = constant_channel(alpha, 0), constant_channel(alpha, 1)
    score = chsh_score_channel(1)
    assert trace_distance(score, score, ext) == 0
    assert trace_distance(zero, one, ext) == 1
    assert trace_distance(zero, one, ext) == trace_distance(one, zero, ext)
    # trivial extension: total variation distance of the two outputs
    other = chsh_box(Fraction(1, 8))
    tv = sum(abs(u - v) for u, v in zip(channel_output(score, other), channel_output(zero, other))) / 2
    assert trace_distance(score, zero, Extension.trivial(other)) == tv


def test_refining_a_partition_can_only_increase_distance():
    rng = np.random.default_rng(7)
    box = random_symmetric_box(Alphabet.pairs(1), rng, "chsh")
    score, parity = chsh_score_channel(1), first_round_channel(box.alphabet)
    base = trace_distance(score, parity, Extension.trivial(box))
    for _ in range(5):
        ext = random_extension(box, rng, settings=2, parts=3)
        assert trace_distance(score, parity, ext) >= base


def test_partition_check_examples():
    tau = DeFinettiState("chsh", 1).materialize()
    assert partition_check(tau, Fraction(1, 2), pr_box())
    assert not partition_check(tau, Fraction(3, 4), pr_box())
    assert partition_check(pr_box(), 1, pr_box())
    assert partition_check(pr_box(), 0, chsh_box(Fraction(1, 2)))


def test_partition_validation():
    box = uniform_box(Alphabet(1, 2, 2))
    with pytest.raises(ValueError):
        Partition([(Fraction(1, 2), box)])
    with pytest.raises(ValueError):
        Partition([(Fraction(3, 2), box), (Fraction(-1, 2), box)])
    bad = Box(Alphabet(1, 2, 2), [[2, 0], [-1, 1]], 1)
    with pytest.raises(ValueError):
        Partition([(1, bad)])
    with pytest.raises(ValueError):
        Extension(pr_box(), [Partition.trivial(chsh_box(Fraction(1, 4)))])


def test_split_and_post_select():
    tau = DeFinettiState("chsh", 1).materialize()
    part = split_partition(tau, pr_box())
    assert part.reconstitutes(tau)
    ext = Extension(tau, [part])
    weight, comp = ext.post_select(0, 0)
    assert comp == pr_box()
    assert weight == Fraction(1, 4)


@settings(max_examples=15, deadline=None)
@given(seed=seeds, parts=st.integers(2, 4))
def test_random_partitions_reconstitute(seed, parts):
    rng = np.random.default_rng(seed)
    box = random_box(Alphabet(2, 2, 2), rng, sparse=True)
    part = random_partition(box, rng, parts)
    assert len(part) == parts
    assert part.reconstitutes(box)
    for w, comp in part.elements:
        assert partition_check(box, w, comp)


def test_extension_joint_box_is_nonsignalling():
    rng = np.random.default_rng(2)
    ext = random_extension(random_box(Alphabet(1, 2, 2), rng), rng, settings=2, parts=3)
    joint = ext.joint()
    assert validate(joint)
    assert is_nonsignalling(joint)


def test_remainder_state_mixes_back():
    tau = DeFinettiState("chsh", 2).materialize()
    box = power(pr_box(), 2)
    rest = remainder_state(tau, box, 1)
    assert validate(rest)
    assert combine([Fraction(1, 3), Fraction(2, 3)], [box, rest]) == tau
    with pytest.raises(ValueError):
        remainder_state(tau, box, 0)
    assert remainder_state(tau, tau, 1) == tau


def test_definetti_extension_of_a_single_box():
    box = power(chsh_box(Fraction(1, 8)), 2)
    ext = build_definetti_extension([box], "chsh")
    tau = DeFinettiState("chsh", 2).materialize()
    assert ext.parent == tau
    weight, comp = ext.post_select(0, 0)
    assert weight == Fraction(1, 3) and comp == box


def test_definetti_extension_of_tau_itself():
    tau, _ = tau_for("chsh", Alphabet.pairs(1))
    ext = build_definetti_extension([tau], "chsh")
    assert all(b == tau for _, b in ext.settings[0].elements)


def test_definetti_extension_with_two_parents():
    first = power(chsh_box(Fraction(1, 8)), 1)
    second = pr_box()
    ext = build_definetti_extension([first, second], "chsh")
    assert len(ext.settings) == 2
    assert is_nonsignalling(ext.joint())
    with pytest.raises(ValueError):
        build_definetti_extension([random_box(Alphabet.pairs(1), np.random.default_rng(0))], "chsh")


def test_definetti_extension_for_templates():
    tmpl = load_template("cyclic-3")
    rng = np.random.default_rng(5)
    box = random_symmetric_box(Alphabet(2, 2, 3), rng, tmpl)
    ext = build_definetti_extension([random_extension(box, rng)], tmpl)
    assert ext.parent == DeFinettiState(tmpl, 2).materialize()
    assert len(ext.settings[0]) == 3


def test_invariance_decisions():
    alpha = Alphabet.pairs(2)
    assert not is_invariant_channel(first_round_channel(alpha), "permutation")
    assert is_invariant_channel(constant_channel(alpha), "permutation")
    assert is_invariant_channel(constant_channel(alpha), "chsh")
    assert is_invariant_channel(chsh_score_channel(2), "permutation")
    assert is_invariant_channel(chsh_score_channel(2), "chsh")
    a, b = chsh_pair(0, 0, 0, 0), chsh_pair(1, 0, 1, 1)
    assert is_invariant_channel(chsh_parity_channel(2), [{a: b, b: a}])


def test_output_reader_is_not_chsh_invariant():
    alpha = Alphabet.pairs(1)
    inputs = {x: Fraction(1, 4) for x in alpha.x_strings()}
    reader = Channel(alpha, inputs, lambda a, s: int(a[0] == 0), 1)
    assert is_invariant_channel(reader, "permutation")
    assert not is_invariant_channel(reader, "chsh")


def test_seeded_channels_are_reproducible_and_invariant():
    first = seeded_count_channels(chsh_template(), 2, np.random.default_rng(1), 3, 1, (2, 2, 2, 2))
    again = seeded_count_channels(chsh_template(), 2, np.random.default_rng(1), 3, 1, (2, 2, 2, 2))
    for u, v in zip(first, again):
        assert np.array_equal(u.weights_tensor, v.weights_tensor)
        assert is_invariant_channel(u, "chsh")


def test_diamond_gap_of_singleton_family():
    rng = np.random.default_rng(3)
    box = random_symmetric_box(Alphabet.pairs(1), rng, "chsh")
    ext = random_extension(box, rng)
    score, zero = chsh_score_channel(1), constant_channel(box.alphabet)
    assert diamond_gap(score, zero, [ext]) == trace_distance(score, zero, ext)
    with pytest.raises(ValueError):
        diamond_gap(score, zero, [])


@pytest.mark.parametrize("n", [1, 2])
def test_extension_distance_bound(n):
    rng = np.random.default_rng(n)
    family = [random_extension(random_symmetric_box(Alphabet.pairs(n), rng, "chsh"), rng) for _ in range(3)]
    family.append(Extension.trivial(power(pr_box(), n)))
    report = verify_diamond_bound(chsh_score_channel(n), chsh_parity_channel(n), family, "chsh")
    assert report.holds
    assert report.prefactor == n + 1
    assert report.gap_box <= report.prefactor * report.gap_tau


def test_bound_rejects_non_invariant_channels():
    alpha = Alphabet.pairs(2)
    family = [Extension.trivial(power(pr_box(), 2))]
    with pytest.raises(PreconditionError):
        verify_diamond_bound(first_round_channel(alpha), constant_channel(alpha), family)
    # a one-round reader of a single output is permutation invariant but not CHSH invariant
    one = Alphabet.pairs(1)
    reader = Channel(one, {x: Fraction(1, 4) for x in one.x_strings()}, lambda a, s: int(a[0] == 0), 1)
    with pytest.raises(PreconditionError):
        verify_diamond_bound(reader, constant_channel(one), [Extension.trivial(pr_box())], "chsh")


def test_grid_search_is_monotone_and_bounded():
    rng = np.random.default_rng(4)
    box = random_symmetric_box(Alphabet.pairs(1), rng, "chsh")
    score, zero = chsh_score_channel(1), constant_channel(box.alphabet)
    results = grid_extension_search(score, zero, box, max_level=3)
    values = [r.value for r in results]
    assert values == sorted(values)
    assert all(v <= 1 for v in values)
    for r in results:
        assert r.extension.parent == box
        assert trace_distance(score, zero, r.extension) == r.value
    with pytest.raises(ValueError):
        grid_extension_search(score, zero, power(box, 2))


def test_grid_search_respects_budget():
    box = pr_box()
    score, zero = chsh_score_channel(1), constant_channel(box.alphabet)
    assert grid_extension_search(score, zero, box, max_level=5, budget=10) == []


def test_chain_inequality_on_a_grid_extension():
    rng = np.random.default_rng(6)
    box = random_symmetric_box(Alphabet.pairs(1), rng, "chsh")
    score, parity = chsh_score_channel(1), chsh_parity_channel(1)
    best = grid_extension_search(score, parity, box, max_level=2)[-1]
    tau_ext = build_definetti_extension([best.extension], "chsh")
    assert best.value <= 2 * trace_distance(score, parity, tau_ext)


def test_weights_tensor_columns_sum_to_input_probability():
    channel = chsh_score_channel(2)
    W = channel.weights_tensor
    alpha = channel.alphabet
    for a, x in itertools.product(alpha.a_strings(), alpha.x_strings()):
        assert sum(W[a + x]) == channel.weight_denominator // 16
