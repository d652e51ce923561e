"""Exact entries of the de Finetti box tau.

tau is the average of ``Q^{x n}`` over all one-round distributions Q allowed
by a template, with the nested measure that integrates the parameters in
label order: ``p_k`` runs over ``[0, c_k]`` with weight ``dp_k / c_k``, where
``c_k = (1 - sum_{j<k} t_j p_j) / t_k`` is the largest value ``p_k`` can take
once the earlier parameters are fixed.  Parameters of different classes are
independent, so tau factorizes over classes.

An entry depends on ``(a, x)`` only through its color counts.  Integrating
the innermost parameter first, every layer is a Beta integral whose upper
limit is proportional to the remaining mass, so the whole integral collapses
to a product of :func:`beta_integral` values.  :func:`tau_general_entry` also
offers direct numerical quadrature of the defining integral, which shares no
algebra with that product.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .boxes import Alphabet, Box, as_fraction
from .symmetry import SymmetryTemplate, chsh_template, color_counts, count_tensor

MAX_QUADRATURE_D = 4


def beta_integral(c, n: int, N: int) -> Fraction:
    """``(1/c) * int_0^c p^N (c - p)^(n - N) dp = c^n / ((n + 1) * C(n, N))``."""
    c = as_fraction(c)
    if c <= 0:
        raise ValueError("c must be positive")
    if n < 0 or not 0 <= N <= n:
        raise ValueError(f"need 0 <= N <= n, got N={N}, n={n}")
    return c**n / ((n + 1) * math.comb(n, N))


def tau_chsh_entry(n: int, n_chsh: int) -> Fraction:
    """tau entry for ``n`` CHSH rounds of which ``n_chsh`` satisfy the CHSH condition."""
    if not 0 <= n_chsh <= n:
        raise ValueError(f"need 0 <= N_chsh <= n, got {n_chsh}, n={n}")
    return Fraction(1, 2**n * (n + 1) * math.comb(n, n_chsh))


def _check_counts(template: SymmetryTemplate, n: int, counts: Sequence[int]) -> tuple:
    counts = tuple(int(c) for c in counts)
    if len(counts) != template.num_colors:
        raise ValueError(f"expected {template.num_colors} color counts, got {len(counts)}")
    if any(c < 0 for c in counts) or sum(counts) != n:
        raise ValueError(f"color counts {counts} must be nonnegative and sum to n={n}")
    return counts


def _exact(template: SymmetryTemplate, counts: tuple) -> Fraction:
    t = template.t_counts
    value = Fraction(1)
    for params, unfree in template.class_colors:
        value *= Fraction(1, t[unfree] ** counts[unfree])
        mass = counts[unfree]
        # innermost parameter first: each layer is a Beta integral in p_k
        for c in reversed(params):
            total = counts[c] + mass
            value *= Fraction(1, t[c] ** counts[c]) * beta_integral(1, total, counts[c])
            mass = total
    return value


def _quadrature_class(t, params, unfree, counts, order: int) -> float:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    u = (nodes + 1) / 2
    w = weights / 2  # dp / c on [0, c] becomes w/2 after p = c (u + 1) / 2
    k = len(params)
    grids = np.meshgrid(*([u] * k), indexing="ij") if k else []
    wgrid = np.ones((order,) * k)
    for j in range(k):
        shape = [1] * k
        shape[j] = order
        wgrid = wgrid * w.reshape(shape)
    used = np.zeros((order,) * k)
    integrand = np.ones((order,) * k)
    for j, c in enumerate(params):
        upper = (1 - used) / t[c]
        p = upper * grids[j]
        integrand = integrand * p ** counts[c]
        used = used + t[c] * p
    integrand = integrand * ((1 - used) / t[unfree]) ** counts[unfree]
    return float(np.sum(wgrid * integrand))


def _quadrature(template: SymmetryTemplate, counts: tuple, rtol: float) -> float:
    t = template.t_counts
    value = 1.0
    for params, unfree in template.class_colors:
        order, prev = 4, None
        while True:
            cur = _quadrature_class(t, params, unfree, counts, order)
            if prev is not None and abs(cur - prev) <= rtol * abs(cur):
                break
            if order >= 256:
                raise RuntimeError("quadrature did not converge")
            prev, order = cur, order * 2
        value *= cur
    return value


def tau_general_entry(
    template: SymmetryTemplate,
    n: int,
    counts: Sequence[int],
    method: str = "exact",
    rtol: float = 1e-10,
) -> Union[Fraction, float]:
    """tau entry for an ``(a, x)`` with the given color counts.

    :param template: a valid template.
    :param n: number of rounds; ``sum(counts)`` must equal it.
    :param counts: color counts as returned by
        :func:`boxlab.symmetry.color_counts`.
    :param method: ``"exact"`` (rational) or ``"quadrature"`` (float, nested
        Gauss-Legendre, order doubled until the relative change is below
        ``rtol``; limited to ``d <= MAX_QUADRATURE_D``).
    """
    template.require_valid()
    counts = _check_counts(template, n, counts)
    if method == "exact":
        return _exact(template, counts)
    if method == "quadrature":
        if template.d > MAX_QUADRATURE_D:
            raise ValueError(f"quadrature is limited to d <= {MAX_QUADRATURE_D}, template has d={template.d}")
        return _quadrature(template, counts, rtol)
    raise ValueError(f"unknown method {method!r}")


def lower_bound_general(template: SymmetryTemplate, n: int, counts: Sequence[int]) -> Fraction:
    """Count-only lower bound on a tau entry.

    Per class with ``n_k`` rounds and ``d_k`` parameters the factor is
    ``prod_j t_j^(-N_j) / multinomial(n_k; N) / (n_k + 1)^d_k``.  It is
    attained when every parameter except the last of each class has count 0.
    """
    template.require_valid()
    counts = _check_counts(template, n, counts)
    t = template.t_counts
    value = Fraction(1)
    for params, unfree in template.class_colors:
        colors = params + (unfree,)
        n_k = sum(counts[c] for c in colors)
        for c in colors:
            value *= Fraction(1, t[c] ** counts[c])
        value /= multinomial([counts[c] for c in colors]) * (n_k + 1) ** len(params)
    return value


def count_vectors(template: SymmetryTemplate, n: int) -> list:
    """All color-count vectors reached by some ``(a, x)`` over ``n`` rounds, sorted."""
    found = set()
    classes = template.class_colors
    for rounds in _splits(n, len(classes)):
        pieces = [
            [(params + (unfree,), s) for s in _splits(n_k, len(params) + 1)]
            for (params, unfree), n_k in zip(classes, rounds)
        ]
        for combo in itertools.product(*pieces):
            counts = [0] * template.num_colors
            for colors, split in combo:
                for c, v in zip(colors, split):
                    counts[c] = v
            found.add(tuple(counts))
    return sorted(found)


def _splits(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for k in range(total + 1):
        for rest in _splits(total - k, parts - 1):
            yield (k,) + rest


def multinomial(parts: Sequence[int]) -> int:
    out, total = 1, 0
    for k in parts:
        total += k
        out *= math.comb(total, k)
    return out


def _box_from_counts(alphabet: Alphabet, counts: np.ndarray, value_fn) -> Box:
    """Fill a box by evaluating ``value_fn`` once per distinct count vector."""
    flat = counts.reshape(-1, counts.shape[-1])
    unique, inverse = np.unique(flat, axis=0, return_inverse=True)
    values = [value_fn(tuple(int(v) for v in row)) for row in unique]
    den = math.lcm(*[v.denominator for v in values])
    table = np.array([v.numerator * (den // v.denominator) for v in values], dtype=object)
    return Box(alphabet, table[np.asarray(inverse).ravel()].reshape(alphabet.shape), den)


@lru_cache(maxsize=32)
def materialize_tau_chsh(n: int) -> Box:
    """tau over ``n`` bipartite binary CHSH rounds as an exact box."""
    alphabet = Alphabet.pairs(n)
    counts = count_tensor(chsh_template(), n)
    # chsh template colors: 0 = anti-CHSH (p1), 1 = CHSH-satisfying (unfree)
    return _box_from_counts(alphabet, counts, lambda c: tau_chsh_entry(n, c[1]))


@lru_cache(maxsize=32)
def _materialize_general(template: SymmetryTemplate, n: int, bipartite) -> Box:
    alphabet = Alphabet(n, template.m, template.l, bipartite)
    counts = count_tensor(template, n)
    return _box_from_counts(alphabet, counts, lambda c: _exact(template, c))


class DeFinettiState:
    """tau for a template over ``n`` rounds.

    :param template: a :class:`SymmetryTemplate` or ``"chsh"`` for the
        builtin CHSH template with its closed form.
    :param n: number of rounds.
    """

    def __init__(self, template: Union[SymmetryTemplate, str], n: int):
        if n < 1:
            raise ValueError("n must be at least 1")
        self.is_chsh = template == "chsh"
        self.template = chsh_template() if self.is_chsh else template.require_valid()
        self.n = n

    @property
    def d(self) -> int:
        return self.template.d

    def value(self, counts: Sequence[int]) -> Fraction:
        if self.is_chsh:
            counts = _check_counts(self.template, self.n, counts)
            return tau_chsh_entry(self.n, counts[1])
        return tau_general_entry(self.template, self.n, counts)

    def entry(self, a: Sequence[int], x: Sequence[int]) -> Fraction:
        if len(a) != self.n or len(x) != self.n:
            raise ValueError(f"a and x must have length {self.n}")
        return self.value(color_counts(self.template, a, x))

    def materialize(self, bipartite=None) -> Box:
        """All entries as a :class:`Box` (CHSH boxes are always bipartite)."""
        if self.is_chsh:
            return materialize_tau_chsh(self.n)
        return _materialize_general(self.template, self.n, bipartite)
