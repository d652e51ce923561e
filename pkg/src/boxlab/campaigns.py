"""Seeded verification campaigns shared by the command line and the test suite.

Every trial draws from its own generator ``numpy.random.default_rng([seed,
trial])`` (PCG64 seeded through SeedSequence), so results do not depend on
how trials are scheduled across worker processes.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .boxes import Alphabet, format_fraction
from .channels import (
    Channel,
    chsh_parity_channel,
    chsh_score_channel,
    constant_channel,
    random_extension,
    seeded_count_channels,
    verify_diamond_bound,
)
from .reduction import (
    chsh_score_test,
    coin_test,
    count_test,
    output_weight_test,
    random_symmetric_box,
    verify_reduction,
    verify_test_bound,
)
from .symmetry import SymmetryTemplate, chsh_template, no_symmetry_template

THREADS_ENV = "BOXLAB_THREADS"


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _map(fn: Callable, args: Sequence) -> list:
    workers = min(worker_count(), len(args))
    if workers <= 1:
        return [fn(a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, args))


def campaign_alphabet(kind: str, n: int, template: Optional[SymmetryTemplate], m: int = 2, l: int = 2) -> Alphabet:
    if kind == "chsh":
        return Alphabet.pairs(n)
    if kind == "general":
        return Alphabet(n, template.m, template.l)
    return Alphabet(n, m, l)


def _template_arg(kind: str, template: Optional[SymmetryTemplate]):
    return {"chsh": "chsh", "plain": None}.get(kind, template)


def _reduction_trial(job) -> Dict:
    kind, alphabet, template, seed, trial = job
    arg = _template_arg(kind, template)
    box = random_symmetric_box(alphabet, trial_rng(seed, trial), arg, sparse=trial % 2 == 1)
    report = verify_reduction(box, arg)
    row = {"trial": trial}
    row.update(report.to_dict())
    row["witness"] = "".join(map(str, report.witness[0])) + "|" + "".join(map(str, report.witness[1]))
    return row


def reduction_campaign(
    kind: str,
    n: int,
    trials: int,
    seed: int,
    template: Optional[SymmetryTemplate] = None,
    m: int = 2,
    l: int = 2,
) -> List[Dict]:
    """One row per random symmetric box checked against ``(n+1)^d tau``."""
    if kind not in ("chsh", "general", "plain"):
        raise ValueError(f"unknown kind {kind!r}")
    if kind == "general" and template is None:
        raise ValueError("kind 'general' needs a template")
    alphabet = campaign_alphabet(kind, n, template, m, l)
    jobs = [(kind, alphabet, template, seed, trial) for trial in range(trials)]
    return _map(_reduction_trial, jobs)


def campaign_tests(kind: str, n: int):
    """Fixture tests and the alphabet they act on."""
    if kind == "chsh":
        alphabet = Alphabet.pairs(n)
        tests = [
            chsh_score_test(n),
            coin_test(alphabet),
            count_test(chsh_template(), n, lambda c: c[0] % 2 == 1, (2, 2, 2, 2)),
        ]
    else:
        alphabet = Alphabet(n, 2, 2)
        tests = [
            output_weight_test(alphabet, math.ceil(n / 2)),
            coin_test(alphabet),
            count_test(no_symmetry_template(2, 2), n, lambda c: (c[0] + c[1]) % 2 == 1),
        ]
    return alphabet, tests


def testbound_campaign(kind: str, n: int, trials: int, seed: int) -> List[Dict]:
    """``Pr[fail | P] <= (n+1)^d Pr[fail | tau]`` for fixture tests on random symmetric boxes."""
    alphabet, tests = campaign_tests(kind, n)
    arg = _template_arg(kind, None)
    rows = []
    for trial in range(trials):
        box = random_symmetric_box(alphabet, trial_rng(seed, trial), arg, sparse=trial % 2 == 1)
        for test in tests:
            report = verify_test_bound(test, box, arg)
            row = {"trial": trial, "test": test.name}
            row.update(report.to_dict())
            rows.append(row)
    return rows


def named_channels(names: str, n: int, seed: int) -> List[Channel]:
    """Channels from a comma-separated list of builtin names.

    Names: ``chsh-score``, ``chsh-parity``, ``constant-0``, ``constant-1`` and
    ``seeded:K`` (K channels whose outcome is a seeded random function of the
    CHSH counts).
    """
    alphabet = Alphabet.pairs(n)
    out: List[Channel] = []
    for name in [s.strip() for s in names.split(",") if s.strip()]:
        if name == "chsh-score":
            out.append(chsh_score_channel(n))
        elif name == "chsh-parity":
            out.append(chsh_parity_channel(n))
        elif name in ("constant-0", "constant-1"):
            out.append(constant_channel(alphabet, int(name[-1])))
        elif name.startswith("seeded:"):
            count = int(name.split(":", 1)[1])
            out.extend(seeded_count_channels(chsh_template(), n, trial_rng(seed, 10**6), count, 1, (2, 2, 2, 2)))
        else:
            raise ValueError(f"unknown channel {name!r}")
    return out


def channel_pairs(channels: Sequence[Channel]) -> List[Tuple[Channel, Channel]]:
    """All pairs of distinct list positions; a lone channel is paired with the constant-0 channel."""
    if len(channels) == 1:
        return [(channels[0], constant_channel(channels[0].alphabet, 0, channels[0].t))]
    return [(channels[i], channels[j]) for i in range(len(channels)) for j in range(i + 1, len(channels))]


def extension_family(n: int, size: int, seed: int):
    """``size`` random CHSH-symmetric boxes, each with a random two-setting extension."""
    family = []
    for member in range(size):
        rng = trial_rng(seed, member)
        box = random_symmetric_box(Alphabet.pairs(n), rng, "chsh", sparse=member % 2 == 1)
        family.append(random_extension(box, rng, settings=2, parts=2))
    return family


def diamond_campaign(n: int, channels: Sequence[Channel], family_size: int, seed: int) -> List[Dict]:
    family = extension_family(n, family_size, seed)
    rows = []
    for i, (chan_e, chan_f) in enumerate(channel_pairs(channels)):
        for member, ext in enumerate(family):
            report = verify_diamond_bound(chan_e, chan_f, [ext], "chsh")
            rows.append(
                {
                    "pair": f"{chan_e.name}~{chan_f.name}",
                    "member": member,
                    "td_box": format_fraction(report.gap_box),
                    "td_tau": format_fraction(report.gap_tau),
                    "prefactor": report.prefactor,
                    "holds": report.holds,
                }
            )
    return rows


def all_hold(rows: Sequence[Dict]) -> bool:
    return all(bool(r["holds"]) for r in rows)
