"""Finite quantale-valued spaces (generalized metric spaces / preorders).

A :class:`FinSpace` is a finite carrier with a quantale-valued distance table
a(x, y) satisfying the reflexivity bound k <= a(x,x) and the transitivity
bound a(x,y) (x) a(y,z) <= a(x,z).  Maps between spaces are stored as total
function tables and must be non-expansive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Hashable, List, Mapping, Optional, Sequence, Tuple

from . import quantale as qt
from .quantale import QuantaleSpec, QuantaleValue


class SpaceError(Exception):
    """Base class for finite-space errors."""


class InvalidSpaceError(SpaceError):
    """Distance table violates the reflexivity or transitivity bound."""


class InvalidMapError(SpaceError):
    """Function table is not total or not non-expansive."""


Elem = Hashable


@dataclass(frozen=True)
class FinSpace:
    """Finite carrier plus dense distance table over a fixed quantale."""

    spec: QuantaleSpec
    elems: Tuple[Elem, ...]
    rows: Tuple[Tuple[QuantaleValue, ...], ...]
    _index: Dict[Elem, int] = field(compare=False, hash=False, repr=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "_index", {e: i for i, e in enumerate(self.elems)})

    def dist(self, x: Elem, y: Elem) -> QuantaleValue:
        return self.rows[self._index[x]][self._index[y]]

    def __len__(self) -> int:
        return len(self.elems)

    def __repr__(self) -> str:
        return f"FinSpace({self.spec.name}, {len(self.elems)} elems)"


def make_space(
    spec: QuantaleSpec,
    elems: Sequence[Elem],
    dist: Callable[[Elem, Elem], QuantaleValue] | Mapping[Tuple[Elem, Elem], QuantaleValue],
    check: bool = True,
) -> FinSpace:
    """Build a validated FinSpace from a distance function or pair table."""
    elems = tuple(elems)
    if len(set(elems)) != len(elems):
        raise SpaceError("carrier elements must be distinct")
    if callable(dist):
        lookup = dist
    else:
        table = dict(dist)
        def lookup(x, y):
            return table[(x, y)]
    rows = tuple(tuple(lookup(x, y) for y in elems) for x in elems)
    for row in rows:
        for v in row:
            if v.spec is not spec:
                raise qt.SpecMismatchError("distance entry from a different quantale")
    space = FinSpace(spec, elems, rows)
    if check:
        validate_space(space)
    return space


def validate_space(space: FinSpace) -> None:
    """Check the reflexivity and transitivity bounds exhaustively."""
    k = space.spec.unit
    for x in space.elems:
        if not qt.leq(k, space.dist(x, x)):
            raise InvalidSpaceError(f"reflexivity bound fails at {x!r}")
    for x in space.elems:
        for y in space.elems:
            dxy = space.dist(x, y)
            for z in space.elems:
                lhs = qt.tensor(dxy, space.dist(y, z))
                if not qt.leq(lhs, space.dist(x, z)):
                    raise InvalidSpaceError(
                        f"transitivity bound fails at ({x!r}, {y!r}, {z!r})"
                    )


def discrete_space(spec: QuantaleSpec, elems: Sequence[Elem]) -> FinSpace:
    """Distance k on the diagonal, bottom off the diagonal."""
    k, bot = spec.unit, spec.bottom
    return make_space(spec, elems, lambda x, y: k if x == y else bot, check=False)


def unit_space(spec: QuantaleSpec) -> FinSpace:
    """The tensor unit: a single point at self-distance k."""
    return discrete_space(spec, [()])


@dataclass(frozen=True)
class NonexpansiveMap:
    """A total function table between two spaces over the same quantale."""

    source: FinSpace
    target: FinSpace
    mapping: Tuple[Elem, ...]  # aligned with source.elems

    def __call__(self, x: Elem) -> Elem:
        return self.mapping[self.source._index[x]]

    def as_dict(self) -> Dict[Elem, Elem]:
        return dict(zip(self.source.elems, self.mapping))

    def __repr__(self) -> str:
        return f"NonexpansiveMap({len(self.source)}->{len(self.target)})"


def make_map(
    source: FinSpace,
    target: FinSpace,
    mapping: Callable[[Elem], Elem] | Mapping[Elem, Elem],
    check: bool = True,
) -> NonexpansiveMap:
    if source.spec is not target.spec:
        raise qt.SpecMismatchError("map endpoints use different quantales")
    get = mapping if callable(mapping) else mapping.__getitem__
    images = []
    for x in source.elems:
        fx = get(x)
        if fx not in target._index:
            raise InvalidMapError(f"image {fx!r} of {x!r} is not in the target carrier")
        images.append(fx)
    f = NonexpansiveMap(source, target, tuple(images))
    if check:
        validate_map(f)
    return f


def validate_map(f: NonexpansiveMap) -> None:
    for x in f.source.elems:
        for y in f.source.elems:
            if not qt.leq(f.source.dist(x, y), f.target.dist(f(x), f(y))):
                raise InvalidMapError(f"map expands the pair ({x!r}, {y!r})")


def identity_map(space: FinSpace) -> NonexpansiveMap:
    return NonexpansiveMap(space, space, space.elems)


def compose_maps(g: NonexpansiveMap, f: NonexpansiveMap) -> NonexpansiveMap:
    """g after f."""
    if f.target is not g.source and f.target.elems != g.source.elems:
        raise InvalidMapError("maps are not composable")
    return NonexpansiveMap(f.source, g.target, tuple(g(f(x)) for x in f.source.elems))


def tensor_space(c1: FinSpace, c2: FinSpace) -> FinSpace:
    """Cartesian product carrier with pointwise-tensored distances."""
    if c1.spec is not c2.spec:
        raise qt.SpecMismatchError("tensor of spaces over different quantales")
    elems = [(x, y) for x in c1.elems for y in c2.elems]

    def dist(p, q):
        return qt.tensor(c1.dist(p[0], q[0]), c2.dist(p[1], q[1]))

    # the bounds are inherited pointwise, no re-check needed
    return make_space(c1.spec, elems, dist, check=False)


def hom_distance(f: NonexpansiveMap, g: NonexpansiveMap) -> QuantaleValue:
    """Meet over the common source of pointwise target distances."""
    if f.source.elems != g.source.elems or f.target.elems != g.target.elems:
        raise SpaceError("hom_distance needs a parallel pair of maps")
    spec = f.source.spec
    return qt.meet(
        (f.target.dist(f(x), g(x)) for x in f.source.elems), spec=spec
    )


def natural_leq(space: FinSpace, x: Elem, y: Elem) -> bool:
    """The natural order: x <= y iff k <= a(x, y)."""
    return qt.leq(space.spec.unit, space.dist(x, y))


def is_separated(space: FinSpace) -> bool:
    """True iff the natural order is anti-symmetric."""
    for i, x in enumerate(space.elems):
        for y in space.elems[i + 1 :]:
            if natural_leq(space, x, y) and natural_leq(space, y, x):
                return False
    return True


def is_symmetric(space: FinSpace) -> bool:
    for x in space.elems:
        for y in space.elems:
            if space.dist(x, y) != space.dist(y, x):
                return False
    return True


def separated_quotient(space: FinSpace) -> Tuple[FinSpace, NonexpansiveMap]:
    """Quotient by mutual natural order; classes named by least carrier index.

    The quotient distance is inherited from any representatives; the choice
    does not matter, which is verified here before returning.
    """
    n = len(space.elems)
    rep: List[int] = list(range(n))
    for i in range(n):
        if rep[i] != i:
            continue
        for j in range(i + 1, n):
            if rep[j] != j:
                continue
            xi, xj = space.elems[i], space.elems[j]
            if natural_leq(space, xi, xj) and natural_leq(space, xj, xi):
                rep[j] = i
    classes = sorted({i for i in rep})
    class_elems = [space.elems[i] for i in classes]

    members: Dict[int, List[Elem]] = {i: [] for i in classes}
    for j in range(n):
        members[rep[j]].append(space.elems[j])

    # representative independence of the induced table
    for i in classes:
        for j in classes:
            base = space.dist(space.elems[i], space.elems[j])
            for x in members[i]:
                for y in members[j]:
                    if space.dist(x, y) != base:
                        raise InvalidSpaceError(
                            "quotient distance depends on representatives"
                        )

    quotient = make_space(
        space.spec,
        class_elems,
        lambda x, y: space.dist(x, y),
        check=False,
    )
    proj = make_map(
        space,
        quotient,
        {space.elems[j]: space.elems[rep[j]] for j in range(n)},
        check=False,
    )
    return quotient, proj


def enumerate_nonexpansive_maps(
    source: FinSpace, target: FinSpace, limit: int = 4096
) -> List[NonexpansiveMap]:
    """All non-expansive tables source -> target, pruned pointwise.

    Raises :class:`SpaceError` when |target| ** |source| exceeds ``limit``.
    """
    total = len(target) ** len(source) if len(source) else 1
    if total > limit:
        raise SpaceError(
            f"{len(target)}^{len(source)} candidate tables exceed the limit {limit}"
        )
    out: List[NonexpansiveMap] = []
    elems = source.elems
    partial: List[Elem] = []

    def extend(i: int) -> None:
        if i == len(elems):
            out.append(NonexpansiveMap(source, target, tuple(partial)))
            return
        x = elems[i]
        for y in target.elems:
            ok = True
            for j in range(i):
                xj, yj = elems[j], partial[j]
                if not qt.leq(source.dist(xj, x), target.dist(yj, y)):
                    ok = False
                    break
                if not qt.leq(source.dist(x, xj), target.dist(y, yj)):
                    ok = False
                    break
            if ok and qt.leq(source.dist(x, x), target.dist(y, y)):
                partial.append(y)
                extend(i + 1)
                partial.pop()

    extend(0)
    return out
