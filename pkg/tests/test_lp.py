"""Exact LP engines: simplex against brute-force vertex checks and the flow
solver against the simplex."""

import random
from fractions import Fraction

import pytest

from folnerlab.lp import LpError, min_cost_flow, simplex_max


def test_simplex_simple_box():
    # max x + y st x <= 2, y <= 3
    sol = simplex_max(
        [Fraction(1), Fraction(1)],
        [[(0, Fraction(1))], [(1, Fraction(1))]],
        [Fraction(2), Fraction(3)],
    )
    assert sol.value == 5
    assert sol.x == [Fraction(2), Fraction(3)]


def test_simplex_coupled():
    # max 2x + y st x + y <= 4, x <= 3
    sol = simplex_max(
        [Fraction(2), Fraction(1)],
        [[(0, Fraction(1)), (1, Fraction(1))], [(0, Fraction(1))]],
        [Fraction(4), Fraction(3)],
    )
    assert sol.value == 7


def test_simplex_unbounded():
    with pytest.raises(LpError):
        simplex_max([Fraction(1)], [[(0, Fraction(-1))]], [Fraction(1)])


def test_simplex_degenerate_rhs():
    sol = simplex_max(
        [Fraction(1)],
        [[(0, Fraction(1))], [(0, Fraction(1))]],
        [Fraction(0), Fraction(2)],
    )
    assert sol.value == 0


def test_simplex_random_against_vertex_enumeration():
    rng = random.Random(5150)
    for _ in range(30):
        n = rng.randint(1, 3)
        m = rng.randint(1, 4)
        c = [Fraction(rng.randint(-3, 4)) for _ in range(n)]
        rows = []
        b = []
        for _ in range(m):
            rows.append([(j, Fraction(rng.randint(-2, 3))) for j in range(n)])
            b.append(Fraction(rng.randint(0, 5)))
        # bound the box so the LP cannot be unbounded
        for j in range(n):
            rows.append([(j, Fraction(1))])
            b.append(Fraction(4))
        sol = simplex_max(c, rows, b)

        # brute force over a fine grid of the box (quarters), feasible only
        best = None
        steps = [Fraction(k, 4) for k in range(17)]

        def feasible(x):
            return all(sum(coef * x[j] for j, coef in row) <= rhs for row, rhs in zip(rows, b))

        if n == 1:
            candidates = ([x] for x in steps)
        elif n == 2:
            candidates = ([x, y] for x in steps for y in steps)
        else:
            candidates = ([x, y, z] for x in steps for y in steps for z in steps)
        for x in candidates:
            if feasible(x):
                v = sum(ci * xi for ci, xi in zip(c, x))
                if best is None or v > best:
                    best = v
        assert best is not None
        assert sol.value >= best  # grid points are feasible, optimum dominates


def test_flow_matches_simplex_on_transport():
    rng = random.Random(6007)
    for _ in range(20):
        n = rng.randint(2, 5)
        # random symmetric distances and a zero-sum integer weight vector
        d = {}
        for i in range(n):
            for j in range(i + 1, n):
                d[(i, j)] = Fraction(rng.randint(1, 5), rng.randint(1, 3))
        mu = [rng.randint(-3, 3) for _ in range(n)]

        # LP form: max mu.f with |f| <= 1, |f(i) - f(j)| <= d(i, j)
        c = [Fraction(m) for m in mu]
        rows = []
        b = []
        span = Fraction(2)
        for i in range(n):
            rows.append([(i, Fraction(1))])
            b.append(span)
        for (i, j), dist in d.items():
            rows.append([(i, Fraction(1)), (j, Fraction(-1))])
            b.append(dist)
            rows.append([(j, Fraction(1)), (i, Fraction(-1))])
            b.append(dist)
        sol = simplex_max(c, rows, b)
        lp_value = sol.value + sum(ci * Fraction(-1) for ci in c)  # shift back f = x - 1

        bank = n
        arcs = []
        for (i, j), dist in d.items():
            arcs.append((i, j, 1 << 40, dist))
            arcs.append((j, i, 1 << 40, dist))
        for v in range(n):
            arcs.append((v, bank, 1 << 40, Fraction(1)))
            arcs.append((bank, v, 1 << 40, Fraction(1)))
        supplies = mu + [-sum(mu)]
        cost, _, pot = min_cost_flow(n + 1, arcs, supplies)
        assert cost == lp_value
        f = [pot[bank] - pot[v] for v in range(n)]
        assert sum(m * fv for m, fv in zip(mu, f)) == cost


def test_flow_balance_required():
    with pytest.raises(LpError):
        min_cost_flow(2, [(0, 1, 10, Fraction(1))], [1, 0])
