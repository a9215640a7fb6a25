"""Generator words, relator checks and finitely supported step distributions.

Probabilities are exact :class:`fractions.Fraction` throughout the measure
algebra; the drift-case boundaries are equalities and must not be decided
by rounding.  Floats appear only in the cumulative sampling table.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .plmaps import PLMap, compose, generator, identity

__all__ = [
    "parse_word",
    "evaluate_word",
    "relator_check",
    "StepDistribution",
    "DriftParameters",
    "EndComponent",
    "predict_end_component",
    "uniform_k",
    "delta",
    "PRESETS",
    "preset",
]

_SYMBOLS = ("A", "a", "B", "b")


def parse_word(text: str) -> tuple[str, ...]:
    """Split a word over {A, B} and inverses.  Accepts compact form 'AbA'
    (lowercase = inverse) or spaced tokens 'A B^-1 A'."""
    if " " in text:
        out = []
        for tok in text.split():
            base = tok[0]
            if tok.endswith("^-1") or tok.endswith("-1"):
                base = base.lower() if base.isupper() else base.upper()
            out.append(base)
        text = "".join(out)
    if any(ch not in _SYMBOLS for ch in text):
        raise ValueError(f"word {text!r} not over alphabet {_SYMBOLS}")
    return tuple(text)


def evaluate_word(word) -> PLMap:
    """Left-to-right product of generators (postfix convention, so the
    leftmost letter acts first)."""
    if isinstance(word, str):
        word = parse_word(word)
    g = identity()
    for sym in word:
        g = compose(g, generator(sym))
    return g


def _inverse_word(word: tuple[str, ...]) -> tuple[str, ...]:
    return tuple(s.swapcase() for s in reversed(word))


def _commutator(x: PLMap, y: PLMap) -> PLMap:
    return compose(compose(x, y), compose(x.invert(), y.invert()))


#: The defining relators, written with the leftmost letter acting first.
#: They are the standard presentation words read right-to-left: composing
#: functions "apply first letter first" reverses abstract word order.
RELATORS = (("bA", "ABa"), ("bA", "AABaa"))


def relator_check() -> bool:
    """Both defining commutator relators evaluate to the identity map."""
    return all(
        _commutator(evaluate_word(x), evaluate_word(y)).is_identity() for x, y in RELATORS
    )


@dataclass(frozen=True)
class DriftParameters:
    """Barycenters of the two homomorphisms to Z under a step distribution."""

    alpha: Fraction
    beta: Fraction

    def __add__(self, other: "DriftParameters") -> "DriftParameters":
        return DriftParameters(self.alpha + other.alpha, self.beta + other.beta)


class EndComponent(enum.Enum):
    NEG_AND_POS = "NegAndPos"
    NEG_ONLY = "NegOnly"
    POS_ONLY = "PosOnly"
    SKELETON = "Skeleton"


def predict_end_component(d: DriftParameters) -> EndComponent:
    """Which boundary components carry the limit ends, by drift signs."""
    s = d.alpha + d.beta
    if d.alpha > 0:
        return EndComponent.NEG_AND_POS if s < 0 else EndComponent.NEG_ONLY
    return EndComponent.POS_ONLY if s < 0 else EndComponent.SKELETON


class StepDistribution:
    """Finitely supported probability measure on the PL group."""

    __slots__ = ("support", "weights", "_index")

    def __init__(self, pairs):
        merged: dict[PLMap, Fraction] = {}
        for g, w in pairs:
            w = Fraction(w)
            if w < 0:
                raise ValueError("weights must be nonnegative")
            if w:
                merged[g] = merged.get(g, Fraction(0)) + w
        if sum(merged.values()) != 1:
            raise ValueError("weights must sum to exactly 1")
        self.support = tuple(merged)
        self.weights = tuple(merged.values())
        self._index = merged

    def __len__(self):
        return len(self.support)

    def __iter__(self):
        return iter(zip(self.support, self.weights))

    def weight(self, g: PLMap) -> Fraction:
        return self._index.get(g, Fraction(0))

    def __eq__(self, other):
        if not isinstance(other, StepDistribution):
            return NotImplemented
        return self._index == other._index

    def convolve(self, other: "StepDistribution") -> "StepDistribution":
        acc: dict[PLMap, Fraction] = {}
        for g, wg in self:
            for h, wh in other:
                gh = compose(g, h)
                acc[gh] = acc.get(gh, Fraction(0)) + wg * wh
        return StepDistribution(acc.items())

    def cesaro(self, n: int) -> "StepDistribution":
        """Average of the first n convolution powers."""
        if n < 1:
            raise ValueError("n must be >= 1")
        power = self
        acc: dict[PLMap, Fraction] = {}
        for _ in range(n):
            for g, w in power:
                acc[g] = acc.get(g, Fraction(0)) + w / n
            power = power.convolve(self)
        return StepDistribution(acc.items())

    def barycenters(self) -> DriftParameters:
        alpha = sum((w * g.chi_a() for g, w in self), Fraction(0))
        beta = sum((w * g.chi_b() for g, w in self), Fraction(0))
        return DriftParameters(alpha, beta)

    def cumulative(self) -> np.ndarray:
        """Float cumulative weights for sampling; last entry pinned to 1."""
        c = np.cumsum([float(w) for w in self.weights])
        c[-1] = 1.0
        return c

    # -- file format --------------------------------------------------------

    def dump(self) -> str:
        lines = [f"{w} | {g.serialize()}" for g, w in self]
        return "\n".join(lines) + "\n"

    @classmethod
    def load(cls, text: str) -> "StepDistribution":
        pairs = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            w, rec = line.split("|", 1)
            pairs.append((PLMap.deserialize(rec.strip()), Fraction(w.strip())))
        return cls(pairs)


def uniform_k() -> StepDistribution:
    """Weight 1/4 on each of the four standard generators."""
    q = Fraction(1, 4)
    return StepDistribution((generator(s), q) for s in _SYMBOLS)


def delta(g: PLMap) -> StepDistribution:
    return StepDistribution([(g, Fraction(1))])


def _preset(weights: dict[str, Fraction]) -> StepDistribution:
    return StepDistribution((generator(s), w) for s, w in weights.items())


#: One preset per drift quadrant; names reflect which boundary component
#: the limit ends should concentrate on.
PRESETS = {
    "uniform-K": uniform_k,
    "drift-neg": lambda: _preset(
        {"A": Fraction(7, 10), "a": Fraction(1, 10), "B": Fraction(1, 10), "b": Fraction(1, 10)}
    ),
    "drift-pos": lambda: _preset(
        {"A": Fraction(1, 10), "a": Fraction(7, 10), "B": Fraction(1, 10), "b": Fraction(1, 10)}
    ),
    "drift-split": lambda: _preset(
        {"A": Fraction(2, 5), "a": Fraction(1, 10), "B": Fraction(1, 20), "b": Fraction(9, 20)}
    ),
}


def preset(name: str) -> StepDistribution:
    try:
        return PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; have {sorted(PRESETS)}") from None
