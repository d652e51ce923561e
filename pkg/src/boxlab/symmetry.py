"""Symmetry templates, color counts and template-symmetric boxes.

A template fixes, for every input x of one round, which outputs share a
free parameter.  Each entry of an input vector is either a parameter label
``"p1" .. "pd"`` or ``"unfree"`` (the entry is then determined by
normalization).  Input vectors must be pairwise either permutations of one
another, in which case they belong to the same *class*, or use disjoint
parameter sets.

Colors number the distinct values an allowed one-round distribution can
take: parameters are colors ``0 .. d-1`` in label order, and every class
contributes one extra color for its unfree entries.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from .boxes import Alphabet, Box

UNFREE = "unfree"
_PARAM = re.compile(r"^p([1-9][0-9]*)$")

ColorCounts = Tuple[int, ...]


class TemplateError(ValueError):
    pass


def _parse_label(label) -> Optional[int]:
    """Parameter index (1-based) of a label, or ``None`` for unfree."""
    text = str(label).strip().lower()
    if text == UNFREE:
        return None
    match = _PARAM.match(text)
    if not match:
        raise TemplateError(f"unrecognized template label {label!r}")
    return int(match.group(1))


@dataclass(frozen=True)
class TemplateReport:
    ok: bool
    problems: Tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


class SymmetryTemplate:
    """Pattern of free parameters for one round.

    :param vectors: one label sequence per input; ``vectors[x][a]`` labels
        the entry Q(a|x).
    :param name: optional display name.
    """

    def __init__(self, vectors: Sequence[Sequence[str]], name: Optional[str] = None):
        vecs = tuple(tuple(str(v).strip().lower() for v in vec) for vec in vectors)
        if not vecs:
            raise TemplateError("template needs at least one input vector")
        lengths = {len(v) for v in vecs}
        if len(lengths) != 1:
            raise TemplateError(f"input vectors have different lengths {sorted(lengths)}")
        self.vectors = vecs
        self.name = name
        self._params = tuple(tuple(_parse_label(lab) for lab in vec) for vec in vecs)

    @property
    def m(self) -> int:
        return len(self.vectors)

    @property
    def l(self) -> int:
        return len(self.vectors[0])

    def __eq__(self, other) -> bool:
        return isinstance(other, SymmetryTemplate) and self.vectors == other.vectors

    def __hash__(self) -> int:
        return hash(self.vectors)

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"<SymmetryTemplate{label} m={self.m} l={self.l} vectors={list(map(list, self.vectors))}>"

    def problems(self) -> Tuple[str, ...]:
        out = []
        if self.l < 2:
            out.append("each input vector needs at least two outputs")
        used = sorted({p for vec in self._params for p in vec if p is not None})
        if used != list(range(1, len(used) + 1)):
            out.append(f"parameter labels must be p1..pd without gaps, found {['p%d' % p for p in used]}")
        for x, vec in enumerate(self._params):
            if None not in vec:
                out.append(f"input {x} has no unfree entry")
        for x in range(self.m):
            for y in range(x + 1, self.m):
                px = sorted(p for p in self._params[x] if p is not None)
                py = sorted(p for p in self._params[y] if p is not None)
                if px != py and set(px) & set(py):
                    out.append(f"inputs {x} and {y} share parameters but are not permutations of each other")
        if len(used) > self.m * (self.l - 1):
            out.append(f"d={len(used)} exceeds m(l-1)={self.m * (self.l - 1)}")
        return tuple(out)

    def require_valid(self) -> "SymmetryTemplate":
        probs = self.problems()
        if probs:
            raise TemplateError("; ".join(probs))
        return self

    @cached_property
    def d(self) -> int:
        self.require_valid()
        return len({p for vec in self._params for p in vec if p is not None})

    @cached_property
    def classes(self) -> Tuple[Tuple[int, ...], ...]:
        """Inputs grouped by class, in order of first appearance."""
        self.require_valid()
        groups: Dict[object, list] = {}
        for x, vec in enumerate(self._params):
            key = frozenset(p for p in vec if p is not None) or "constant"
            groups.setdefault(key, []).append(x)
        return tuple(tuple(g) for g in groups.values())

    @property
    def num_colors(self) -> int:
        return self.d + len(self.classes)

    @cached_property
    def input_class(self) -> Tuple[int, ...]:
        out = [0] * self.m
        for k, members in enumerate(self.classes):
            for x in members:
                out[x] = k
        return tuple(out)

    @cached_property
    def coloring(self) -> np.ndarray:
        """Integer array ``color[a, x]`` of shape ``(l, m)``."""
        table = np.empty((self.l, self.m), dtype=np.int64)
        for x, vec in enumerate(self._params):
            for a, p in enumerate(vec):
                table[a, x] = self.d + self.input_class[x] if p is None else p - 1
        table.flags.writeable = False
        return table

    @cached_property
    def class_colors(self) -> Tuple[Tuple[Tuple[int, ...], int], ...]:
        """Per class: (parameter colors in increasing order, unfree color)."""
        out = []
        for k, members in enumerate(self.classes):
            params = sorted({p - 1 for p in self._params[members[0]] if p is not None})
            out.append((tuple(params), self.d + k))
        return tuple(out)

    @cached_property
    def t_counts(self) -> Tuple[int, ...]:
        """Multiplicity of each color within one input vector of its class."""
        t = [0] * self.num_colors
        for members in self.classes:
            x = members[0]
            for a in range(self.l):
                t[self.coloring[a, x]] += 1
        return tuple(t)

    @cached_property
    def color_pairs(self) -> Tuple[Tuple[Tuple[int, int], ...], ...]:
        """All ``(a, x)`` pairs of each color."""
        out = [[] for _ in range(self.num_colors)]
        for a in range(self.l):
            for x in range(self.m):
                out[self.coloring[a, x]].append((a, x))
        return tuple(tuple(v) for v in out)

    def allowed_distribution(self, params: Sequence) -> np.ndarray:
        """One-round Q(a|x) for parameter values ``params`` (length d), shape ``(l, m)``."""
        self.require_valid()
        values = [Fraction(p) for p in params]
        if len(values) != self.d:
            raise ValueError(f"expected {self.d} parameters")
        colors = list(values)
        for params_k, unfree in self.class_colors:
            rest = 1 - sum(self.t_counts[c] * values[c] for c in params_k)
            colors.append(rest / self.t_counts[unfree])
        return np.array([[colors[self.coloring[a, x]] for x in range(self.m)] for a in range(self.l)], dtype=object)

    def to_dict(self) -> dict:
        return {"m": self.m, "l": self.l, "d": self.d, "vectors": [list(v) for v in self.vectors]}

    @classmethod
    def from_dict(cls, data: Mapping) -> "SymmetryTemplate":
        tmpl = cls(data["vectors"], name=data.get("name"))
        if "m" in data and int(data["m"]) != tmpl.m:
            raise TemplateError(f"declared m={data['m']} but {tmpl.m} vectors given")
        if "l" in data and int(data["l"]) != tmpl.l:
            raise TemplateError(f"declared l={data['l']} but vectors have length {tmpl.l}")
        tmpl.require_valid()
        if "d" in data and int(data["d"]) != tmpl.d:
            raise TemplateError(f"declared d={data['d']} but vectors use {tmpl.d} parameters")
        return tmpl

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "SymmetryTemplate":
        return cls.from_dict(json.loads(text))


def validate_template(template: SymmetryTemplate) -> TemplateReport:
    probs = template.problems()
    return TemplateReport(not probs, probs)


def color_counts(template: SymmetryTemplate, a: Sequence[int], x: Sequence[int]) -> ColorCounts:
    """Number of rounds ``i`` with ``(a_i, x_i)`` of each color."""
    if len(a) != len(x):
        raise ValueError("a and x must have the same length")
    counts = [0] * template.num_colors
    for ai, xi in zip(a, x):
        counts[template.coloring[ai, xi]] += 1
    return tuple(counts)


def count_tensor(template: SymmetryTemplate, n: int) -> np.ndarray:
    """Color counts for every ``(a, x)``: int array of shape ``(l,)*n + (m,)*n + (colors,)``."""
    l, m, C = template.l, template.m, template.num_colors
    onehot = np.zeros((l, m, C), dtype=np.int64)
    for a in range(l):
        for x in range(m):
            onehot[a, x, template.coloring[a, x]] = 1
    total = np.zeros((l,) * n + (m,) * n + (C,), dtype=np.int64)
    for i in range(n):
        shape = [1] * (2 * n) + [C]
        shape[i] = l
        shape[n + i] = m
        total = total + onehot.reshape(shape)
    return total


# ---------------------------------------------------------------------------
# Built-in templates
# ---------------------------------------------------------------------------

def chsh_template() -> SymmetryTemplate:
    """Joint-round CHSH template: anti-CHSH entries share p1, the rest are unfree.

    Outputs and inputs use the bipartite pair codes ``2a + b`` and ``2x + y``.
    """
    vectors = []
    for xy in range(4):
        x, y = divmod(xy, 2)
        vectors.append(["unfree" if (ab >> 1) ^ (ab & 1) == x & y else "p1" for ab in range(4)])
    return SymmetryTemplate(vectors, name="chsh")


def no_symmetry_template(m: int, l: int) -> SymmetryTemplate:
    """Template with every distribution allowed: ``d = m(l-1)``, one class per input."""
    vectors = []
    for x in range(m):
        vectors.append([f"p{x * (l - 1) + a + 1}" for a in range(l - 1)] + ["unfree"])
    return SymmetryTemplate(vectors, name=f"none-{m}x{l}")


BUILTIN_TEMPLATES = {
    "chsh": chsh_template,
    # d=1, m=l=2: the two inputs are relabelings of one another
    "flip-2": lambda: SymmetryTemplate([["p1", "unfree"], ["unfree", "p1"]], name="flip-2"),
    # d=2, m=2, l=3: one class, second input a cyclic shift of the first
    "cyclic-3": lambda: SymmetryTemplate([["p1", "p2", "unfree"], ["p2", "unfree", "p1"]], name="cyclic-3"),
    # d=2, m=2, l=3: two classes, each with a repeated parameter
    "split-3": lambda: SymmetryTemplate([["p1", "p1", "unfree"], ["p2", "unfree", "p2"]], name="split-3"),
    # d=3, m=2, l=3: two classes of different size
    "mixed-3": lambda: SymmetryTemplate([["p1", "p2", "unfree"], ["p3", "unfree", "p3"]], name="mixed-3"),
    # d=2, m=2, l=4: one class with a repeated parameter
    "shuffle-4": lambda: SymmetryTemplate(
        [["p1", "p2", "unfree", "p1"], ["unfree", "p1", "p1", "p2"]], name="shuffle-4"
    ),
}


def load_template(source: str) -> SymmetryTemplate:
    """Resolve a builtin name (``chsh``, ``none-MxL``) or read a JSON file."""
    if source in BUILTIN_TEMPLATES:
        return BUILTIN_TEMPLATES[source]()
    match = re.match(r"^none-(\d+)x(\d+)$", source)
    if match:
        return no_symmetry_template(int(match.group(1)), int(match.group(2)))
    with open(source) as fh:
        return SymmetryTemplate.from_json(fh.read())


# ---------------------------------------------------------------------------
# Symmetric boxes
# ---------------------------------------------------------------------------

def _check_alphabet(box: Box, template: SymmetryTemplate):
    if (box.alphabet.m, box.alphabet.l) != (template.m, template.l):
        raise ValueError(
            f"box has m={box.alphabet.m}, l={box.alphabet.l} but template has m={template.m}, l={template.l}"
        )
    template.require_valid()


def pair_axes(arr: np.ndarray, n: int, l: int, m: int) -> np.ndarray:
    """Merge axes ``(a_1..a_n, x_1..x_n, *rest)`` into pair codes ``a_i*m + x_i``.

    The result has shape ``(l*m,)*n + rest``.
    """
    rest = arr.shape[2 * n:]
    order = [k for i in range(n) for k in (i, n + i)] + list(range(2 * n, arr.ndim))
    return arr.transpose(order).reshape((l * m,) * n + rest)


def unpair_axes(arr: np.ndarray, n: int, l: int, m: int) -> np.ndarray:
    rest = arr.shape[n:]
    arr = arr.reshape((l, m) * n + rest)
    order = [2 * i for i in range(n)] + [2 * i + 1 for i in range(n)] + list(range(2 * n, arr.ndim))
    return arr.transpose(order)


def _paired(box: Box) -> np.ndarray:
    a = box.alphabet
    return pair_axes(box.numerators, a.n, a.l, a.m)


def _unpaired(arr: np.ndarray, alphabet: Alphabet) -> np.ndarray:
    return unpair_axes(arr, alphabet.n, alphabet.l, alphabet.m)


def _color_codes(template: SymmetryTemplate):
    return [[a * template.m + x for a, x in pairs] for pairs in template.color_pairs]


def has_symmetry(box: Box, template: SymmetryTemplate) -> bool:
    """True iff, in every round, entries differing only in pairs of the same color are equal."""
    _check_alphabet(box, template)
    arr = _paired(box)
    for axis in range(box.n):
        for codes in _color_codes(template):
            if len(codes) < 2:
                continue
            block = np.take(arr, codes, axis=axis)
            ref = np.take(arr, codes[:1], axis=axis)
            if not np.all(block == ref):
                return False
    return True


def s_project(box: Box, template: SymmetryTemplate) -> Box:
    """Replace each round's entries by their average over same-colored pairs.

    The averages commute across rounds, and the result has the symmetry of
    ``template``.  Normalization is preserved because averaging happens
    within a class, whose inputs all carry the same color multiset.
    """
    _check_alphabet(box, template)
    codes = _color_codes(template)
    scale = math.lcm(*[len(c) for c in codes if c])
    arr = _paired(box)
    for axis in range(box.n):
        out = np.empty_like(arr)
        for group in codes:
            if not group:
                continue
            total = np.take(arr, group, axis=axis).sum(axis=axis) * (scale // len(group))
            for code in group:
                index = (slice(None),) * axis + (code,)
                out[index] = total
        arr = out
    return Box(box.alphabet, _unpaired(arr, box.alphabet), box.denominator * scale**box.n)


def apply_mapping(
    box: Box,
    mapping: Mapping[Tuple[int, int], Tuple[int, int]],
    template: Optional[SymmetryTemplate] = None,
    rounds: Optional[Sequence[int]] = None,
) -> Box:
    """Relabel the one-round pairs ``(a, x)`` by a bijection in the given rounds.

    ``result(..., (a_i, x_i), ...) = box(..., mapping(a_i, x_i), ...)``; pairs
    absent from ``mapping`` map to themselves.  With ``template`` given, the
    mapping must preserve colors.  The result is not validated: relabelings
    that move x only keep normalization on symmetric boxes.
    """
    alpha = box.alphabet
    if template is not None:
        _check_alphabet(box, template)
    index = mapping_index(mapping, alpha.l, alpha.m, template)
    arr = _paired(box)
    for axis in range(alpha.n) if rounds is None else rounds:
        arr = np.take(arr, index, axis=axis)
    return Box(alpha, _unpaired(arr, alpha), box.denominator)


def mapping_index(mapping, l: int, m: int, template: Optional[SymmetryTemplate] = None) -> np.ndarray:
    """Pair-code permutation array of a relabeling, checked to be a bijection."""
    index = np.arange(l * m)
    for (a, x), (a2, x2) in mapping.items():
        if not (0 <= a < l and 0 <= a2 < l and 0 <= x < m and 0 <= x2 < m):
            raise ValueError(f"pair {(a, x)} -> {(a2, x2)} outside the alphabet")
        index[a * m + x] = a2 * m + x2
    if sorted(index.tolist()) != list(range(l * m)):
        raise ValueError("mapping is not a bijection on (a, x) pairs")
    if template is not None:
        col = template.coloring
        for code, target in enumerate(index):
            a, x = divmod(code, m)
            a2, x2 = divmod(int(target), m)
            if col[a, x] != col[a2, x2]:
                raise ValueError(f"mapping sends {(a, x)} to {(a2, x2)} of a different color")
    return index


def color_transpositions(template: SymmetryTemplate):
    """Transpositions of same-colored pairs that generate all color-preserving relabelings."""
    out = []
    for pairs in template.color_pairs:
        for other in pairs[1:]:
            out.append({pairs[0]: other, other: pairs[0]})
    return out


# ---------------------------------------------------------------------------
# CHSH symmetry
# ---------------------------------------------------------------------------

def chsh_pair(a: int, b: int, x: int, y: int) -> Tuple[int, int]:
    """Pair codes ``(2a + b, 2x + y)`` of a bipartite CHSH round."""
    return 2 * a + b, 2 * x + y


@dataclass(frozen=True)
class ChshSymmetry:
    holds: bool
    p: Optional[Tuple[Fraction, ...]] = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.holds


_SAT = np.array(
    [[(ab >> 1) ^ (ab & 1) == (xy >> 1) & (xy & 1) for xy in range(4)] for ab in range(4)]
)


def is_chsh_symmetric(box: Box) -> ChshSymmetry:
    """Check that in every round all CHSH-satisfying entries agree and all others agree.

    The comparison runs per round with every other round's (a, x) held fixed.
    When it holds, ``p[i]`` is the anti-CHSH value of the round-i marginal.
    """
    alpha = box.alphabet
    if alpha.bipartite != (2, 2, 2, 2):
        raise ValueError("CHSH symmetry needs binary bipartite rounds")
    n = alpha.n
    num = box.numerators
    sat_mask = _SAT.ravel()
    ps = []
    for i in range(n):
        moved = np.moveaxis(num, (i, n + i), (2 * n - 2, 2 * n - 1)).reshape(-1, 16)
        sat = moved[:, sat_mask]
        anti = moved[:, ~sat_mask]
        if not (np.all(sat == sat[:, :1]) and np.all(anti == anti[:, :1])):
            return ChshSymmetry(False, None, f"round {i} breaks the CHSH pattern")
        other_out = tuple(j for j in range(n) if j != i)
        marg = num.sum(axis=other_out) if other_out else num
        marg = np.moveaxis(marg, (0, 1 + i), (-2, -1)).reshape(-1, 16)
        anti_vals = marg[:, ~sat_mask]
        if not np.all(anti_vals == anti_vals[0, 0]):
            return ChshSymmetry(False, None, f"round {i} marginal depends on other inputs")
        ps.append(Fraction(anti_vals[0, 0], box.denominator))
    return ChshSymmetry(True, tuple(ps))
