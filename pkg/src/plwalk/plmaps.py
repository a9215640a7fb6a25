"""Canonical piecewise-linear homeomorphisms of the line with dyadic data.

A map is stored as its strictly increasing dyadic breakpoints, the log2
slope of each segment (one more than the number of breakpoints, leftmost
first) and the integer translation offset of the left tail.  The value
function is reconstructed left to right by continuity, so the right tail
offset is derived rather than stored and the representation cannot encode
an inconsistent pair of tails.  Both tail slopes are 1 and adjacent slopes
differ, which makes the form canonical: two maps are pointwise equal iff
their stored fields coincide.
"""

from __future__ import annotations

from bisect import bisect_right
from fractions import Fraction

from .dyadic import Dyadic, ZERO

__all__ = [
    "PLMap",
    "Configuration",
    "identity",
    "generator",
    "compose",
    "compose_all",
    "member_of_f",
    "tau",
    "tau_inv",
    "UnitIntervalMap",
    "verify_conjugation",
    "MembershipError",
    "NonDyadicBreakpoint",
    "NonPowerOf2Slope",
    "NonIntegerTailOffset",
    "NotIncreasing",
    "OutOfDomain",
]


class MembershipError(ValueError):
    """Raw PL data does not describe an element of the group."""


class NonDyadicBreakpoint(MembershipError):
    pass


class NonPowerOf2Slope(MembershipError):
    pass


class NonIntegerTailOffset(MembershipError):
    pass


class NotIncreasing(MembershipError):
    pass


class OutOfDomain(ValueError):
    pass


class PLMap:
    __slots__ = ("breakpoints", "slopes", "c_minus", "_images", "_hash")

    def __init__(self, breakpoints, slopes, c_minus: int, _images=None):
        breakpoints = tuple(breakpoints)
        slopes = tuple(slopes)
        if len(slopes) != len(breakpoints) + 1:
            raise ValueError("need one slope exponent per segment")
        if any(b >= c for b, c in zip(breakpoints, breakpoints[1:])):
            raise NotIncreasing("breakpoints must be strictly increasing")
        if any(s == t for s, t in zip(slopes, slopes[1:])):
            raise ValueError("adjacent slope exponents must differ")
        if slopes[0] != 0 or slopes[-1] != 0:
            raise NonIntegerTailOffset("tail slopes must be 1")
        object.__setattr__(self, "breakpoints", breakpoints)
        object.__setattr__(self, "slopes", slopes)
        object.__setattr__(self, "c_minus", int(c_minus))
        if _images is None:
            _images = self._compute_images()
        object.__setattr__(self, "_images", _images)
        object.__setattr__(self, "_hash", None)
        if breakpoints:
            tail = self._images[-1] - breakpoints[-1]
            if not tail.is_integer():
                raise NonIntegerTailOffset(f"right tail offset {tail} not an integer")

    def __setattr__(self, name, value):
        raise AttributeError("PLMap is immutable")

    def _compute_images(self):
        images = []
        v = None
        for i, b in enumerate(self.breakpoints):
            if i == 0:
                v = b + self.c_minus
            else:
                v = v + (b - self.breakpoints[i - 1]).mul_pow2(self.slopes[i])
            images.append(v)
        return tuple(images)

    # -- basic protocol -----------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, PLMap):
            return NotImplemented
        return (
            self.c_minus == other.c_minus
            and self.slopes == other.slopes
            and self.breakpoints == other.breakpoints
        )

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self.breakpoints, self.slopes, self.c_minus))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self):
        return f"PLMap({self.serialize()!r})"

    # -- map structure ------------------------------------------------------

    @property
    def c_plus(self) -> int:
        if not self.breakpoints:
            return self.c_minus
        d = self._images[-1] - self.breakpoints[-1]
        return d.num << -d.exp

    def tail_offsets(self) -> tuple[int, int]:
        return self.c_minus, self.c_plus

    def chi_a(self) -> int:
        return -self.c_minus

    def chi_b(self) -> int:
        return self.c_minus - self.c_plus

    def is_identity(self) -> bool:
        return not self.breakpoints and self.c_minus == 0

    def slope_exp_at_right(self, x: Dyadic) -> int:
        """log2 slope immediately to the right of x."""
        return self.slopes[bisect_right(self.breakpoints, x)]

    def __call__(self, x: Dyadic) -> Dyadic:
        i = bisect_right(self.breakpoints, x)
        if i == 0:
            return x + self.c_minus
        return self._images[i - 1] + (x - self.breakpoints[i - 1]).mul_pow2(self.slopes[i])

    evaluate = __call__

    def inverse_image(self, y: Dyadic) -> Dyadic:
        """The unique x with self(x) = y (maps are strictly increasing)."""
        i = bisect_right(self._images, y)
        if i == 0:
            return y - self.c_minus
        return self.breakpoints[i - 1] + (y - self._images[i - 1]).mul_pow2(-self.slopes[i])

    def invert(self) -> "PLMap":
        slopes = tuple(-s for s in self.slopes)
        return PLMap(self._images, slopes, -self.c_minus, _images=self.breakpoints)

    def configuration(self) -> "Configuration":
        return Configuration(
            (b, self.slopes[i + 1] - self.slopes[i]) for i, b in enumerate(self.breakpoints)
        )

    # -- text ---------------------------------------------------------------

    def serialize(self) -> str:
        """One-line record: left offset, then breakpoint:right-slope pairs."""
        parts = [str(self.c_minus)]
        parts += [f"{b}:{self.slopes[i + 1]}" for i, b in enumerate(self.breakpoints)]
        return " ".join(parts)

    @classmethod
    def deserialize(cls, text: str) -> "PLMap":
        fields = text.split()
        c_minus = int(fields[0])
        breakpoints, slopes = [], [0]
        for field in fields[1:]:
            b, s = field.rsplit(":", 1)
            breakpoints.append(Dyadic.parse(b))
            slopes.append(int(s))
        return cls(breakpoints, slopes, c_minus)


class Configuration:
    """Finite integer-valued slope-jump configuration on the dyadic line."""

    __slots__ = ("_data",)

    def __init__(self, items=()):
        data = {}
        for point, value in dict(items).items():
            if value:
                data[point] = value
        self._data = dict(sorted(data.items()))

    def __getitem__(self, point) -> int:
        return self._data.get(point, 0)

    def __len__(self):
        return len(self._data)

    def __iter__(self):
        return iter(self._data)

    def items(self):
        return self._data.items()

    def support(self):
        return tuple(self._data)

    def total(self) -> int:
        return sum(self._data.values())

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return self._data == other._data

    def __hash__(self):
        return hash(tuple(self._data.items()))

    def __add__(self, other: "Configuration") -> "Configuration":
        data = dict(self._data)
        for p, v in other.items():
            data[p] = data.get(p, 0) + v
        return Configuration(data)

    def __neg__(self) -> "Configuration":
        return Configuration({p: -v for p, v in self.items()})

    def pullback(self, g: PLMap) -> "Configuration":
        """Configuration gamma -> self(g(gamma))."""
        return Configuration({g.inverse_image(p): v for p, v in self.items()})

    def __repr__(self):
        inner = ", ".join(f"{p}: {v:+d}" for p, v in self.items())
        return f"Configuration({{{inner}}})"


def identity() -> PLMap:
    return PLMap((), (0,), 0)


_D = Dyadic
_GENERATORS = {
    "A": PLMap((), (0,), -1),
    "a": PLMap((), (0,), 1),
    "B": PLMap((_D(0), _D(2)), (0, -1, 0), 0),
    "b": PLMap((_D(0), _D(1)), (0, 1, 0), 0),
}
_ALIASES = {"A^-1": "a", "A-1": "a", "B^-1": "b", "B-1": "b", "A": "A", "B": "B", "a": "a", "b": "b"}


def generator(symbol: str) -> PLMap:
    """One of the four standard generators; lowercase means inverse."""
    try:
        return _GENERATORS[_ALIASES[symbol]]
    except KeyError:
        raise KeyError(f"unknown generator symbol {symbol!r}") from None


def _canonical(breakpoints, slopes, c_minus) -> PLMap:
    """Drop breakpoints whose two sides have equal slope."""
    bp, sl = [], [slopes[0]]
    for i, b in enumerate(breakpoints):
        s = slopes[i + 1]
        if s != sl[-1]:
            bp.append(b)
            sl.append(s)
    return PLMap(bp, sl, c_minus)


def compose(g1: PLMap, g2: PLMap) -> PLMap:
    """The map x -> g2(g1(x)), i.e. the product g1*g2 in postfix convention."""
    if g1.is_identity():
        return g2
    if g2.is_identity():
        return g1
    candidates = set(g1.breakpoints)
    candidates.update(g1.inverse_image(b) for b in g2.breakpoints)
    candidates = sorted(candidates)
    slopes = [0]
    for c in candidates:
        slopes.append(g1.slope_exp_at_right(c) + g2.slope_exp_at_right(g1(c)))
    return _canonical(candidates, slopes, g1.c_minus + g2.c_minus)


def compose_all(maps) -> PLMap:
    """Balanced product of a sequence of maps (postfix order)."""
    maps = list(maps)
    if not maps:
        return identity()
    while len(maps) > 1:
        maps = [
            compose(maps[i], maps[i + 1]) if i + 1 < len(maps) else maps[i]
            for i in range(0, len(maps), 2)
        ]
    return maps[0]


def member_of_f(breakpoints, slopes, left_offset) -> PLMap:
    """Validate raw PL data (fractional breakpoints, actual slopes, left tail
    offset) against the three membership conditions and return the canonical
    map, or raise a :class:`MembershipError` naming the violated condition."""
    breakpoints = [Fraction(b) for b in breakpoints]
    slopes = [Fraction(s) for s in slopes]
    left_offset = Fraction(left_offset)
    if len(slopes) != len(breakpoints) + 1:
        raise MembershipError("need one slope per segment")
    if any(b >= c for b, c in zip(breakpoints, breakpoints[1:])):
        raise NotIncreasing("breakpoints must be strictly increasing")

    dyadic_bp = []
    for b in breakpoints:
        try:
            dyadic_bp.append(Dyadic.from_fraction(b))
        except ValueError:
            raise NonDyadicBreakpoint(f"breakpoint {b} is not dyadic") from None

    exps = []
    for s in slopes:
        if s <= 0:
            raise NotIncreasing(f"slope {s} is not positive")
        if s.numerator == 1:
            power, e = s.denominator, None
            if power & (power - 1) == 0:
                e = -(power.bit_length() - 1)
        elif s.denominator == 1:
            power = s.numerator
            e = power.bit_length() - 1 if power & (power - 1) == 0 else None
        else:
            e = None
        if e is None:
            raise NonPowerOf2Slope(f"slope {s} is not a power of 2")
        exps.append(e)

    if exps and (exps[0] != 0 or exps[-1] != 0):
        raise NonIntegerTailOffset("tail slopes must be 1")
    if left_offset.denominator != 1:
        raise NonIntegerTailOffset(f"left tail offset {left_offset} not an integer")

    # Right tail offset by continuity; PLMap re-checks it exactly.
    v = None
    for i, b in enumerate(breakpoints):
        v = b + left_offset if i == 0 else v + (b - breakpoints[i - 1]) * slopes[i]
    if breakpoints:
        right = v - breakpoints[-1]
        if right.denominator != 1:
            raise NonIntegerTailOffset(f"right tail offset {right} not an integer")

    bp, sl = [], [0]
    for i, b in enumerate(dyadic_bp):
        if exps[i + 1] != sl[-1]:
            bp.append(b)
            sl.append(exps[i + 1])
    return PLMap(bp, sl, int(left_offset))


# -- change of variables between the unit interval and the line -------------


def tau(t: Dyadic) -> Dyadic:
    """Bijection from dyadics in (0,1) to all dyadics; piecewise linear on
    each dyadic scale interval, anchored at tau(1/2) = 0."""
    if not ZERO < t < Dyadic(1):
        raise OutOfDomain(f"tau needs 0 < t < 1, got {t}")
    if t <= Dyadic(1, 1):
        # t in [2^(k-1), 2^k] -> [k, k+1] for k <= -1
        k = _scale_exponent(t)
        return Dyadic(k) + (t - Dyadic(1, 1 - k)).mul_pow2(1 - k)
    # 1 - t in (0, 1/2): t in [1-2^-n, 1-2^-(n+1)] -> [n-1, n] for n >= 1
    n = -_scale_exponent(Dyadic(1) - t)
    return Dyadic(n - 1) + (t - (Dyadic(1) - Dyadic(1, n))).mul_pow2(n + 1)


def _scale_exponent(t: Dyadic) -> int:
    """Smallest k with t <= 2^k, for t in (0, 1/2]."""
    # t = num/2^exp with num odd lies in [2^(b-1-exp), 2^(b-exp)) for
    # b = bits(num); the left endpoint is hit exactly when num = 1.
    b = t.num.bit_length()
    return b - 1 - t.exp if t.num == 1 else b - t.exp


def tau_inv(g: Dyadic) -> Dyadic:
    if g >= ZERO:
        n = g.floor() + 1
        return (Dyadic(1) - Dyadic(1, n)) + (g - (n - 1)).mul_pow2(-(n + 1))
    k = g.floor()
    return Dyadic(1, 1 - k) + (g - k).mul_pow2(k - 1)


class UnitIntervalMap:
    """Exact PL self-map of [0,1] with dyadic breakpoints and power-of-2
    slopes, used only for checking the coordinate change."""

    __slots__ = ("breakpoints", "slope_exps", "offsets")

    def __init__(self, pieces):
        # pieces: list of (left endpoint, slope exponent, offset); the map is
        # x -> 2^s * x + offset on [left_i, left_{i+1}].
        self.breakpoints = tuple(Dyadic.from_fraction(p[0]) for p in pieces)
        self.slope_exps = tuple(p[1] for p in pieces)
        self.offsets = tuple(Dyadic.from_fraction(p[2]) for p in pieces)

    def __call__(self, t: Dyadic) -> Dyadic:
        i = bisect_right(self.breakpoints, t) - 1
        if i < 0 or t > Dyadic(1):
            raise OutOfDomain(f"{t} outside [0,1]")
        return t.mul_pow2(self.slope_exps[i]) + self.offsets[i]

    @classmethod
    def standard_a(cls) -> "UnitIntervalMap":
        return cls([(0, -1, 0), (Fraction(1, 2), 0, Fraction(-1, 4)), (Fraction(3, 4), 1, -1)])

    @classmethod
    def standard_b(cls) -> "UnitIntervalMap":
        return cls(
            [
                (0, 0, 0),
                (Fraction(1, 2), -1, Fraction(1, 4)),
                (Fraction(3, 4), 0, Fraction(-1, 8)),
                (Fraction(7, 8), 1, -1),
            ]
        )


def verify_conjugation(unit_map: UnitIntervalMap, line_map: PLMap, samples) -> bool:
    """Check tau(unit_map(t)) == line_map(tau(t)) at every sample in (0,1)."""
    for t in samples:
        if not ZERO < t < Dyadic(1):
            raise OutOfDomain(f"sample {t} not in (0,1)")
        if tau(unit_map(t)) != line_map(tau(t)):
            return False
    return True
