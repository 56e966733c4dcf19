"""Group models: laws, metrics, entourages, windows."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from folnerlab.groups import (
    ArcMetric,
    DiscreteMetric,
    Entourage,
    FiniteWindow,
    ModelMismatchError,
    ScaledMetric,
    WindowSizeError,
    WordMetric,
    entourage_from_json,
    grid_sample,
    make_model,
    metric_from_json,
    model_from_json,
    parse_fraction,
    symmetric_closure,
    translate_window,
    window,
    word_ball,
)

Z = make_model("lattice", dim=1)
Z2 = make_model("lattice", dim=2)
F2 = make_model("free", rank=2)
H = make_model("heisenberg")
C = make_model("circle")
T2 = make_model("torus", dim=2)
Z12 = make_model("cyclic", modulus=12)

ALL_MODELS = [Z, Z2, F2, H, C, T2, Z12]


def lattice_elements(model):
    return st.tuples(*[st.integers(-6, 6)] * model.dim).map(model.element)


def free_elements():
    letters = st.sampled_from([1, -1, 2, -2])
    return st.lists(letters, max_size=6).map(F2.element)


def heis_elements():
    return st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.integers(-5, 5)).map(H.element)


def circle_elements():
    return st.fractions(min_value=0, max_value=1, max_denominator=24).map(C.element)


def torus_elements():
    q = st.fractions(min_value=0, max_value=1, max_denominator=12)
    return st.tuples(q, q).map(T2.element)


def cyclic_elements():
    return st.integers(0, 11).map(Z12.element)


MODEL_STRATEGIES = [
    (Z, lattice_elements(Z), WordMetric(Z)),
    (Z2, lattice_elements(Z2), WordMetric(Z2)),
    (F2, free_elements(), WordMetric(F2)),
    (H, heis_elements(), WordMetric(H)),
    (C, circle_elements(), ArcMetric(C)),
    (T2, torus_elements(), ArcMetric(T2)),
    (Z12, cyclic_elements(), WordMetric(Z12)),
]


@pytest.mark.parametrize("model,elements,_", MODEL_STRATEGIES)
def test_group_axioms(model, elements, _):
    @settings(max_examples=40, deadline=None)
    @given(elements, elements, elements)
    def axioms(g, h, k):
        e = model.identity()
        assert model.mul(g, e) == g
        assert model.mul(e, g) == g
        assert model.mul(g, model.inv(g)) == e
        assert model.mul(model.mul(g, h), k) == model.mul(g, model.mul(h, k))

    axioms()


@pytest.mark.parametrize("model,elements,metric", MODEL_STRATEGIES)
def test_metric_axioms_and_right_invariance(model, elements, metric):
    @settings(max_examples=40, deadline=None)
    @given(elements, elements, elements)
    def axioms(x, y, g):
        assert metric.eval(x, x) == 0
        assert metric.eval(x, y) == metric.eval(y, x)
        assert metric.eval(x, y) >= 0
        # right invariance, exactly
        assert metric.eval(model.mul(x, g), model.mul(y, g)) == metric.eval(x, y)

    axioms()


@pytest.mark.parametrize("model,elements,metric", MODEL_STRATEGIES)
def test_triangle_inequality(model, elements, metric):
    @settings(max_examples=40, deadline=None)
    @given(elements, elements, elements)
    def triangle(x, y, z):
        assert metric.eval(x, z) <= metric.eval(x, y) + metric.eval(y, z)

    triangle()


@pytest.mark.parametrize("model,elements,metric", MODEL_STRATEGIES)
def test_inverse_symmetry_at_identity(model, elements, metric):
    @settings(max_examples=40, deadline=None)
    @given(elements)
    def symmetry(g):
        e = model.identity()
        assert metric.eval(g, e) == metric.eval(model.inv(g), e)

    symmetry()


def test_lattice_mul_example():
    assert Z2.mul(Z2.element((1, 0)), Z2.element((0, 1))) == Z2.element((1, 1))


def test_free_reduction_example():
    assert F2.mul(F2.parse("a,b"), F2.parse("B,a")) == F2.parse("a,a")
    assert F2.parse("a,A") == F2.identity()


def test_circle_mul_example():
    assert C.mul(C.parse("3/4"), C.parse("1/2")) == C.parse("1/4")


def test_free_word_metric_right_invariant_form():
    d = WordMetric(F2)
    # d(x, y) = |x y^-1|: d(ab, a) crosses the conjugation, d(ba, a) does not
    assert d.eval(F2.parse("a,b"), F2.parse("a")) == 3
    assert d.eval(F2.parse("b,a"), F2.parse("a")) == 1


def test_circle_arc_examples():
    arc = ArcMetric(C)
    assert arc.eval(C.element(Fraction(9, 10)), C.element(Fraction(1, 20))) == Fraction(3, 20)
    assert arc.eval(C.element(0), C.element(Fraction(1, 2))) == Fraction(1, 2)


def test_discrete_metric():
    d = DiscreteMetric(Z)
    assert d.eval(Z.element((3,)), Z.element((3,))) == 0
    assert d.eval(Z.element((3,)), Z.element((4,))) == 1


def test_scaled_metric():
    arc = ArcMetric(C)
    scaled = ScaledMetric(arc, Fraction(3, 2))
    x, y = C.element(0), C.element(Fraction(2, 5))
    assert scaled.eval(x, y) == Fraction(3, 2) * arc.eval(x, y)


def test_entourage_membership():
    U = Entourage(ArcMetric(C), Fraction(1, 10))
    assert U.contains(C.element(Fraction(1, 12)))
    assert not U.contains(C.element(Fraction(1, 8)))
    U0 = Entourage(WordMetric(Z), Fraction(0))
    assert U0.contains(Z.identity())


def test_entourage_monotone():
    d = ArcMetric(C)
    small = Entourage(d, Fraction(1, 20))
    big = Entourage(d, Fraction(1, 5))
    for k in range(24):
        g = C.element(Fraction(k, 24))
        if small.contains(g):
            assert big.contains(g)


def test_grid_sample_circle():
    assert [C.format(g) for g in grid_sample(C, 4)] == ["0", "1/4", "1/2", "3/4"]


def test_grid_sample_free_ball_sizes():
    # |B_n| = 2 * 3^n - 1 for rank 2
    for n in range(0, 5):
        assert len(grid_sample(F2, n)) if n else 1 == 2 * 3**n - 1 if n else 1
    assert len(grid_sample(F2, 2)) == 17
    assert len(grid_sample(F2, 3)) == 53


def test_grid_sample_lattice():
    assert len(grid_sample(Z, 3)) == 7
    assert len(grid_sample(Z2, 2)) == 13  # l1 ball


def test_heisenberg_ball_growth():
    # closed form is awkward; sizes frozen from an independent BFS
    def oracle(radius):
        seen = {(0, 0, 0)}
        frontier = [(0, 0, 0)]
        gens = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)]
        for _ in range(radius):
            nxt = []
            for a, b, c in frontier:
                for da, db, _dc in gens:
                    cand = (a + da, b + db, c + a * db)
                    if cand not in seen:
                        seen.add(cand)
                        nxt.append(cand)
            frontier = nxt
        return len(seen)

    for radius in range(0, 5):
        assert len(word_ball(H, radius)) == oracle(radius)


def test_heisenberg_word_metric_matches_ball():
    ball3 = word_ball(H, 3)
    d = WordMetric(H)
    for g in ball3:
        assert d.eval(g, H.identity()) <= 3


def test_window_cap():
    with pytest.raises(WindowSizeError):
        word_ball(F2, 12, cap=1000)


def test_translate_window():
    F = window(Z, [(0,), (1,), (2,)])
    assert translate_window(Z.element((1,)), F).to_json() == ["1", "2", "3"]
    Fc = window(C, [Fraction(0), Fraction(3, 4)])
    assert translate_window(C.element(Fraction(1, 2)), Fc).to_json() == ["1/4", "1/2"]
    assert translate_window(Z.identity(), F) == F


def test_translate_preserves_cardinality():
    F = grid_sample(F2, 2)
    for g in F2.generators():
        assert len(translate_window(g, F)) == len(F)


def test_window_dedup_and_order():
    w = window(Z, [(3,), (1,), (3,), (2,)])
    assert w.to_json() == ["1", "2", "3"]
    assert FiniteWindow.from_json(w.to_json(), Z) == w


def test_symmetric_closure():
    closed = symmetric_closure(F2, [F2.parse("a")])
    assert F2.parse("A") in closed and F2.parse("a") in closed


def test_model_mismatch():
    with pytest.raises(ModelMismatchError):
        Z.mul(Z.element((0,)), C.element(Fraction(0)))


def test_model_serialization_roundtrip():
    for model in ALL_MODELS:
        restored = model_from_json(model.to_json())
        assert restored == model
        metric = metric_from_json(model.to_json()["metric"], restored)
        assert metric == model.default_metric()


def test_element_encoding_roundtrip():
    cases = [
        (Z2, "1,-2"),
        (F2, "a,B"),
        (F2, "e"),
        (C, "3/4"),
        (T2, "1/2,3/4"),
        (H, "1,0,2"),
        (Z12, "5"),
    ]
    for model, text in cases:
        assert model.format(model.parse(text)) == text


def test_entourage_serialization_roundtrip():
    U = Entourage(ScaledMetric(ArcMetric(C), Fraction(12)), Fraction(1, 2))
    restored = entourage_from_json(U.to_json(), C)
    assert restored.radius == U.radius
    assert restored.metric == U.metric


def test_parse_fraction_rejects_floats():
    with pytest.raises(ValueError):
        parse_fraction("0.25")
    assert parse_fraction("3/4") == Fraction(3, 4)


def test_cyclic_generators_reach_everything():
    reached = {Z12.identity()}
    frontier = [Z12.identity()]
    while frontier:
        nxt = []
        for g in frontier:
            for s in Z12.generators():
                h = Z12.mul(g, s)
                if h not in reached:
                    reached.add(h)
                    nxt.append(h)
        frontier = nxt
    assert len(reached) == 12
