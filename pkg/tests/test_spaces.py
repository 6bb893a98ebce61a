import random
from fractions import Fraction

import pytest

from vlam import quantale as qt
from vlam.quantale import BOOLEAN, METRIC
from vlam.spaces import (
    FinSpace,
    InvalidMapError,
    InvalidSpaceError,
    SpaceError,
    compose_maps,
    discrete_space,
    enumerate_nonexpansive_maps,
    hom_distance,
    identity_map,
    is_separated,
    is_symmetric,
    make_map,
    make_space,
    natural_leq,
    separated_quotient,
    tensor_space,
    unit_space,
    validate_space,
)


def metric_line(n, scale=1):
    """Points 0..n-1 on a line at the given spacing."""
    return make_space(
        METRIC,
        range(n),
        lambda i, j: METRIC.value(abs(i - j) * scale),
    )


def bool_chain(n):
    return make_space(
        BOOLEAN, range(n), lambda i, j: BOOLEAN.value(1 if i <= j else 0)
    )


def rand_metric_space(rng, n):
    """Random finite metric space via shortest-path completion."""
    pts = list(range(n))
    raw = {}
    for i in pts:
        for j in pts:
            raw[(i, j)] = (
                Fraction(0) if i == j else Fraction(rng.randint(1, 8), rng.randint(1, 4))
            )
    # symmetrize then Floyd-Warshall to enforce the triangle inequality
    for i in pts:
        for j in pts:
            m = min(raw[(i, j)], raw[(j, i)])
            raw[(i, j)] = raw[(j, i)] = m
    for k in pts:
        for i in pts:
            for j in pts:
                via = raw[(i, k)] + raw[(k, j)]
                if via < raw[(i, j)]:
                    raw[(i, j)] = via
    return make_space(METRIC, pts, lambda i, j: METRIC.value(raw[(i, j)]))


def rand_bool_preorder(rng, n):
    """Random reflexive-transitive boolean space."""
    rel = [[i == j for j in range(n)] for i in range(n)]
    for _ in range(n * 2):
        i, j = rng.randrange(n), rng.randrange(n)
        rel[i][j] = True
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if rel[i][k] and rel[k][j]:
                    rel[i][j] = True
    return make_space(
        BOOLEAN, range(n), lambda i, j: BOOLEAN.value(1 if rel[i][j] else 0)
    )


def test_invalid_space_rejected():
    with pytest.raises(InvalidSpaceError):
        make_space(
            METRIC,
            [0, 1, 2],
            lambda i, j: METRIC.value(0 if i == j else (10 if (i, j) == (0, 2) else 1)),
        )


def test_tensor_of_singletons_is_singleton_unit():
    u = unit_space(METRIC)
    t = tensor_space(u, u)
    assert len(t) == 1
    assert t.dist(t.elems[0], t.elems[0]) == METRIC.unit


def test_tensor_metric_table_by_hand():
    c1 = metric_line(2, scale=1)
    c2 = metric_line(2, scale=2)
    t = tensor_space(c1, c2)
    # distances add componentwise
    for (x, y) in t.elems:
        for (x2, y2) in t.elems:
            want = abs(x - x2) * 1 + abs(y - y2) * 2
            assert t.dist((x, y), (x2, y2)) == METRIC.value(want)
    validate_space(t)


def test_tensor_with_unit_isomorphic():
    c = metric_line(3)
    t = tensor_space(c, unit_space(METRIC))
    for x in c.elems:
        for y in c.elems:
            assert t.dist((x, ()), (y, ())) == c.dist(x, y)


def test_hom_distance_identity_is_unit():
    c = metric_line(3)
    assert hom_distance(identity_map(c), identity_map(c)) == METRIC.unit


def test_hom_distance_single_disagreement():
    c = metric_line(2)
    target = metric_line(4, scale=1)
    f = make_map(c, target, {0: 0, 1: 1})
    g = make_map(c, target, {0: 0, 1: 1})
    # disagree on one point at target distance 3: not non-expansive, widen source
    src = make_space(METRIC, [0, 1], lambda i, j: METRIC.value(0 if i == j else 5))
    f = make_map(src, target, {0: 0, 1: 0})
    g = make_map(src, target, {0: 0, 1: 3})
    assert hom_distance(f, g) == METRIC.value(3)


def test_hom_distance_boolean_pointwise_below():
    c = bool_chain(3)
    f = make_map(c, c, {0: 0, 1: 1, 2: 2})
    g = make_map(c, c, {0: 1, 1: 2, 2: 2})
    assert hom_distance(f, g) == BOOLEAN.value(1)


def test_natural_leq():
    c = metric_line(2)
    assert natural_leq(c, 0, 0)
    zero_gap = make_space(METRIC, [0, 1], lambda i, j: METRIC.value(0))
    assert natural_leq(zero_gap, 0, 1)
    assert not natural_leq(c, 0, 1)  # distance 1 is not below k = 0


def test_separated_quotient_collapses_zero_distance():
    c = make_space(METRIC, ["x", "y"], lambda i, j: METRIC.value(0))
    q, proj = separated_quotient(c)
    assert len(q) == 1
    assert proj("x") == proj("y") == "x"
    assert is_separated(q)


def test_separated_quotient_boolean_three_points():
    # x <= y <= x, z incomparable
    rel = {
        ("x", "x"): 1, ("y", "y"): 1, ("z", "z"): 1,
        ("x", "y"): 1, ("y", "x"): 1,
        ("x", "z"): 0, ("z", "x"): 0, ("y", "z"): 0, ("z", "y"): 0,
    }
    c = make_space(BOOLEAN, ["x", "y", "z"], lambda a, b: BOOLEAN.value(rel[(a, b)]))
    q, proj = separated_quotient(c)
    assert len(q) == 2
    assert proj("x") == proj("y")
    assert proj("z") == "z"


def test_separated_quotient_of_separated_is_bijective():
    c = metric_line(4)
    q, proj = separated_quotient(c)
    assert len(q) == len(c)
    assert sorted(proj.mapping) == sorted(c.elems)


def test_is_separated_is_symmetric():
    u = unit_space(METRIC)
    assert is_separated(u) and is_symmetric(u)
    d = discrete_space(METRIC, ["a", "b"])
    assert is_separated(d) and is_symmetric(d)
    c = make_space(METRIC, ["x", "y"], lambda i, j: METRIC.value(0))
    assert not is_separated(c)
    chain = bool_chain(2)
    assert is_separated(chain) and not is_symmetric(chain)


def test_map_validation():
    c = metric_line(3)
    target = make_space(METRIC, [0, 1], lambda i, j: METRIC.value(abs(i - j) * 5))
    with pytest.raises(InvalidMapError):
        make_map(c, target, {0: 0, 1: 1, 2: 0})
    with pytest.raises(InvalidMapError):
        make_map(c, c, {0: 0, 1: 1, 2: 99})


def test_enumerate_nonexpansive_maps_two_point():
    c = metric_line(2)
    maps = enumerate_nonexpansive_maps(c, c)
    assert len(maps) == 4  # every table between two points at distance 1


def test_enumerate_respects_limit():
    c = metric_line(3)
    with pytest.raises(SpaceError):
        enumerate_nonexpansive_maps(c, c, limit=5)


def test_enumerate_after_quotient_constant_compatible():
    c = make_space(METRIC, ["x", "y"], lambda i, j: METRIC.value(0))
    target = metric_line(2)
    maps = enumerate_nonexpansive_maps(c, target)
    # zero-distance source forces zero-distance images
    for f in maps:
        assert target.dist(f("x"), f("y")) == METRIC.value(0)
    assert len(maps) == 2


def test_tensor_space_property_random():
    rng = random.Random(11)
    for _ in range(40):
        a = rand_metric_space(rng, rng.randint(1, 3))
        b = rand_bool_preorder(rng, rng.randint(1, 3))
        validate_space(tensor_space(a, a))
        validate_space(tensor_space(b, b))


def test_quotient_idempotent_and_preserves_symmetry():
    rng = random.Random(12)
    for _ in range(60):
        if rng.random() < 0.5:
            c = rand_metric_space(rng, rng.randint(1, 5))
            # collapse some pairs to distance zero to exercise the quotient
            if len(c) >= 2 and rng.random() < 0.7:
                e = list(c.elems)
                i, j = rng.sample(range(len(e)), 2)
                rows = [list(r) for r in c.rows]
                rows[i][j] = rows[j][i] = METRIC.value(0)
                # re-close transitivity
                c = rand_metric_space(rng, len(e))
        else:
            c = rand_bool_preorder(rng, rng.randint(1, 5))
        sym_before = is_symmetric(c)
        q, proj = separated_quotient(c)
        assert is_separated(q)
        if sym_before:
            assert is_symmetric(q)
        q2, proj2 = separated_quotient(q)
        assert len(q2) == len(q)


def test_hom_distance_composition_inequality():
    rng = random.Random(13)
    for _ in range(20):
        a = rand_metric_space(rng, rng.randint(1, 3))
        b = rand_metric_space(rng, rng.randint(1, 3))
        c = rand_metric_space(rng, rng.randint(1, 3))
        fs = enumerate_nonexpansive_maps(a, b, limit=4096)
        gs = enumerate_nonexpansive_maps(b, c, limit=4096)
        if not fs or not gs:
            continue
        f, g = rng.choice(fs), rng.choice(fs)
        f2, g2 = rng.choice(gs), rng.choice(gs)
        lhs = qt.tensor(hom_distance(f, g), hom_distance(f2, g2))
        rhs = hom_distance(compose_maps(f2, f), compose_maps(g2, g))
        assert qt.leq(lhs, rhs)
