"""Label lattices for equation deduction.

Four commutative integral quantales are supported, each with exact-rational
elements and closed-form way-below and basis structure:

* ``bool``        two-point lattice {0, 1}, tensor = meet
* ``godel``       the unit interval with tensor = min (Goedel t-norm)
* ``metric``      [0, inf] with the *reversed* order and tensor = +
* ``ultrametric`` [0, inf] with the reversed order and tensor = max

No floating point is used anywhere.  Values are ``fractions.Fraction`` plus
the ``INF`` marker for the metric/ultrametric carriers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Union


class QuantaleError(Exception):
    """Base class for label-lattice errors."""


class SpecMismatchError(QuantaleError):
    """Raised when operands come from different quantales."""


class CarrierError(QuantaleError):
    """Raised when a raw value lies outside the instance's carrier."""


class _Infinity:
    """Singleton marker for the point at infinity of [0, inf]."""

    _instance: Optional["_Infinity"] = None

    def __new__(cls) -> "_Infinity":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "inf"

    def __deepcopy__(self, memo) -> "_Infinity":
        return self


INF = _Infinity()

Raw = Union[Fraction, _Infinity]


@dataclass(frozen=True)
class QuantaleValue:
    """An element of a fixed quantale, tagged with its spec."""

    spec: "QuantaleSpec"
    value: Raw

    def __repr__(self) -> str:
        return f"{self.value}:{self.spec.name}"

    def __str__(self) -> str:
        return "inf" if self.value is INF else str(self.value)

    @property
    def is_infinite(self) -> bool:
        return self.value is INF


def _num_leq(a: Raw, b: Raw) -> bool:
    """Numeric order on [0, inf] with INF as the largest element."""
    if b is INF:
        return True
    if a is INF:
        return False
    return a <= b


def _num_add(a: Raw, b: Raw) -> Raw:
    if a is INF or b is INF:
        return INF
    return a + b


def _num_max(a: Raw, b: Raw) -> Raw:
    return b if _num_leq(a, b) else a


def _num_min(a: Raw, b: Raw) -> Raw:
    return a if _num_leq(a, b) else b


class QuantaleSpec:
    """A commutative integral quantale with decidable basis structure.

    Subclasses fix the carrier, order, tensor, and the closed forms for the
    way-below relation and approximant schedules.  The unit ``k`` is always
    the top element (integrality).
    """

    name: str = ""

    # -- carrier -----------------------------------------------------------

    def in_carrier(self, raw: Raw) -> bool:
        raise NotImplementedError

    def value(self, raw) -> QuantaleValue:
        """Wrap a raw number (int, Fraction, or INF) as an element."""
        if raw is INF:
            coerced: Raw = INF
        else:
            coerced = Fraction(raw)
        if not self.in_carrier(coerced):
            raise CarrierError(f"{raw} is not in the carrier of {self.name}")
        return QuantaleValue(self, coerced)

    # -- distinguished elements --------------------------------------------

    @property
    def top(self) -> QuantaleValue:
        raise NotImplementedError

    @property
    def bottom(self) -> QuantaleValue:
        raise NotImplementedError

    @property
    def unit(self) -> QuantaleValue:
        """The tensor unit k; equals top by integrality."""
        return self.top

    # -- structure ---------------------------------------------------------

    def _leq(self, a: Raw, b: Raw) -> bool:
        raise NotImplementedError

    def _tensor(self, a: Raw, b: Raw) -> Raw:
        raise NotImplementedError

    def _way_below(self, a: Raw, b: Raw) -> bool:
        raise NotImplementedError

    def _approximants(self, q: Raw, count: int) -> list:
        raise NotImplementedError

    def _join2(self, a: Raw, b: Raw) -> Raw:
        return b if self._leq(a, b) else a

    def _meet2(self, a: Raw, b: Raw) -> Raw:
        return a if self._leq(a, b) else b

    def is_basis(self, q: QuantaleValue) -> bool:
        """All representable elements are basis elements (exact rationals)."""
        _check_spec(self, q)
        return True

    def parse_value(self, text: str) -> QuantaleValue:
        """Parse ``inf``, an integer, a fraction ``a/b``, or a decimal."""
        text = text.strip()
        if text in ("inf", "INF"):
            return self.value(INF)
        try:
            return self.value(Fraction(text))
        except (ValueError, ZeroDivisionError) as exc:
            raise CarrierError(f"cannot parse {text!r} as a label") from exc

    def __repr__(self) -> str:
        return f"<quantale {self.name}>"


class BooleanQuantale(QuantaleSpec):
    """({0 <= 1}, join), tensor = meet.  Finite, hence way-below = leq."""

    name = "bool"

    def in_carrier(self, raw: Raw) -> bool:
        return raw is not INF and raw in (0, 1)

    @property
    def top(self) -> QuantaleValue:
        return QuantaleValue(self, Fraction(1))

    @property
    def bottom(self) -> QuantaleValue:
        return QuantaleValue(self, Fraction(0))

    def _leq(self, a: Raw, b: Raw) -> bool:
        return a <= b

    def _tensor(self, a: Raw, b: Raw) -> Raw:
        return min(a, b)

    def _way_below(self, a: Raw, b: Raw) -> bool:
        return a <= b

    def _approximants(self, q: Raw, count: int) -> list:
        return [q] * count


class GodelQuantale(QuantaleSpec):
    """([0,1], join), tensor = min.  Way-below is < except 0 << 0."""

    name = "godel"

    def in_carrier(self, raw: Raw) -> bool:
        return raw is not INF and 0 <= raw <= 1

    @property
    def top(self) -> QuantaleValue:
        return QuantaleValue(self, Fraction(1))

    @property
    def bottom(self) -> QuantaleValue:
        return QuantaleValue(self, Fraction(0))

    def _leq(self, a: Raw, b: Raw) -> bool:
        return a <= b

    def _tensor(self, a: Raw, b: Raw) -> Raw:
        return min(a, b)

    def _way_below(self, a: Raw, b: Raw) -> bool:
        return a < b or (a == 0 and b == 0)

    def _approximants(self, q: Raw, count: int) -> list:
        # q * (1 - 2^-n) climbs to q from strictly below; constant 0 at q=0.
        return [q * (1 - Fraction(1, 2**n)) for n in range(1, count + 1)]


class MetricQuantale(QuantaleSpec):
    """([0,inf], numerical inf as join), reversed order, tensor = +."""

    name = "metric"

    def in_carrier(self, raw: Raw) -> bool:
        return raw is INF or raw >= 0

    @property
    def top(self) -> QuantaleValue:
        return QuantaleValue(self, Fraction(0))

    @property
    def bottom(self) -> QuantaleValue:
        return QuantaleValue(self, INF)

    def _leq(self, a: Raw, b: Raw) -> bool:
        # the lattice order reverses the numeric one
        return _num_leq(b, a)

    def _tensor(self, a: Raw, b: Raw) -> Raw:
        return _num_add(a, b)

    def _way_below(self, a: Raw, b: Raw) -> bool:
        if a is INF and b is INF:
            return True
        return not _num_leq(a, b)  # strictly greater numerically

    def _approximants(self, q: Raw, count: int) -> list:
        if q is INF:
            return [INF] * count
        # halving steps strictly above q, descending to q
        return [q + Fraction(1, 2 ** (n - 1)) for n in range(1, count + 1)]


class UltrametricQuantale(MetricQuantale):
    """Same carrier and order as the metric quantale, tensor = max."""

    name = "ultrametric"

    def _tensor(self, a: Raw, b: Raw) -> Raw:
        return _num_max(a, b)


BOOLEAN = BooleanQuantale()
GODEL = GodelQuantale()
METRIC = MetricQuantale()
ULTRAMETRIC = UltrametricQuantale()

_BY_NAME = {s.name: s for s in (BOOLEAN, GODEL, METRIC, ULTRAMETRIC)}


def by_name(name: str) -> QuantaleSpec:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise QuantaleError(
            f"unknown quantale {name!r}; expected one of {sorted(_BY_NAME)}"
        ) from None


def _check_spec(spec: QuantaleSpec, *values: QuantaleValue) -> None:
    for v in values:
        if v.spec is not spec:
            raise SpecMismatchError(
                f"value {v!r} does not belong to quantale {spec.name}"
            )


def tensor(q: QuantaleValue, r: QuantaleValue) -> QuantaleValue:
    """Monoid multiplication of two labels from the same quantale."""
    _check_spec(q.spec, r)
    return QuantaleValue(q.spec, q.spec._tensor(q.value, r.value))


def leq(q: QuantaleValue, r: QuantaleValue) -> bool:
    """Lattice order; for metric/ultrametric this reverses the numeric order."""
    _check_spec(q.spec, r)
    return q.spec._leq(q.value, r.value)


def join(values: Iterable[QuantaleValue], spec: Optional[QuantaleSpec] = None) -> QuantaleValue:
    """Least upper bound of finitely many labels; empty join is bottom."""
    values = list(values)
    if spec is None:
        if not values:
            raise QuantaleError("empty join needs an explicit quantale")
        spec = values[0].spec
    _check_spec(spec, *values)
    out = spec.bottom.value
    for v in values:
        out = spec._join2(out, v.value)
    return QuantaleValue(spec, out)


def meet(values: Iterable[QuantaleValue], spec: Optional[QuantaleSpec] = None) -> QuantaleValue:
    """Greatest lower bound of finitely many labels; empty meet is top."""
    values = list(values)
    if spec is None:
        if not values:
            raise QuantaleError("empty meet needs an explicit quantale")
        spec = values[0].spec
    _check_spec(spec, *values)
    out = spec.top.value
    for v in values:
        out = spec._meet2(out, v.value)
    return QuantaleValue(spec, out)


def way_below(q: QuantaleValue, r: QuantaleValue) -> bool:
    """The approximation relation, by per-instance closed form."""
    _check_spec(q.spec, r)
    return q.spec._way_below(q.value, r.value)


def approximants(q: QuantaleValue, count: int) -> list:
    """A chain of ``count`` basis elements way-below q whose join tends to q."""
    if count < 1:
        raise QuantaleError("approximant count must be positive")
    return [QuantaleValue(q.spec, raw) for raw in q.spec._approximants(q.value, count)]
