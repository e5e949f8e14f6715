"""Forward-difference tables and truncated Newton-series reconstruction.

Reconstruction is exact on polynomial sequences once the truncation order
reaches the degree, and then the anchor drops out of the reconstruction
entirely; both facts are checked over exact arithmetic on randomized
polynomial families.
"""

import random
from fractions import Fraction

import pytest

from renormrec.newton import (DifferenceTable, difference_table,
                              difference_table_recursive, newton_reconstruct,
                              partial_delta_m, renorm_consistency_ladder)
from renormrec.scalars import QQi, scalar_eq
from renormrec.seqalg import make_term

I = QQi(0, 1)


def poly_oracle(coeffs):
    return lambda n: sum(c * n ** k for k, c in enumerate(coeffs))


def test_table_of_squares():
    t = difference_table(lambda n: n * n, 0, 3)
    assert t.values == (0, 1, 2, 0)


def test_table_of_powers_of_two():
    t = difference_table(lambda n: 2 ** n, 0, 4)
    assert t.values == (1, 1, 1, 1, 1)


def test_table_of_imaginary_powers():
    t = difference_table(lambda n: I ** n, 0, 2)
    assert t.values == (QQi(1), I - 1, QQi(0, -2))


def test_binomial_sum_matches_recursive_ladder():
    rng = random.Random(7)
    for _ in range(20):
        coeffs = [rng.randint(-9, 9) for _ in range(rng.randint(1, 6))]
        y = poly_oracle(coeffs)
        m = rng.randint(-5, 5)
        t1 = difference_table(y, m, 7)
        t2 = difference_table_recursive(y, m, 7)
        assert t1.values == t2.values


def test_reconstruct_polynomial_exact():
    t = difference_table(lambda n: n * n, 0, 2)
    assert newton_reconstruct(t, 7) == 49


def test_reconstruct_at_anchor_is_first_entry():
    y = poly_oracle([3, -2, 5, 1])
    for m in (-4, 0, 6):
        t = difference_table(y, m, 5)
        assert newton_reconstruct(t, m) == y(m) == t.values[0]


def test_reconstruct_truncation_of_exponential():
    t = difference_table(lambda n: 2 ** n, 0, 4)
    # truncated series: sum_{k<=4} C(10,k) = 386, not 2^10
    assert newton_reconstruct(t, 10) == 386


def test_partial_delta_vanishes_for_cubics():
    y = poly_oracle([1, 0, 0, 1])
    for m in range(-3, 8):
        for n in range(-3, 11):
            assert partial_delta_m(y, m, n, 3) == 0


def test_partial_delta_truncation_residual():
    y = poly_oracle([0, 0, 0, 1])
    assert partial_delta_m(y, 0, 5, 2) == 36


def test_partial_delta_constant_any_order():
    for K in range(4):
        assert partial_delta_m(lambda n: 17, 2, 9, K) == 0


def test_exactness_random_polynomials():
    rng = random.Random(20260810)
    for _ in range(60):
        deg = rng.randint(0, 8)
        coeffs = [Fraction(rng.randint(-20, 20)) for _ in range(deg + 1)]
        y = poly_oracle(coeffs)
        m = rng.randint(-10, 10)
        t = difference_table(y, m, 8)
        for n in range(-10, 21):
            assert newton_reconstruct(t, n) == y(n)


def test_consistency_with_sequence_delta():
    s = make_term(QQi(1, 1), QQi(Fraction(1, 2), Fraction(1, 3)), 0, 3) \
        + make_term(2, 3, 0, 1)
    t = difference_table(s.eval, 2, 5)
    cur = s
    for k in range(6):
        assert scalar_eq(t.values[k], cur.eval(2), 0.0)
        cur = cur.delta()


def test_table_validates_length():
    with pytest.raises(ValueError):
        DifferenceTable(0, ())
    with pytest.raises(ValueError):
        difference_table(lambda n: n, 0, -1)


def test_ladder_residuals_zero_for_true_differences():
    y = poly_oracle([2, -1, 3])
    t0 = difference_table(y, 1, 4)
    dy = lambda n: y(n + 1) - y(n)
    d2y = lambda n: dy(n + 1) - dy(n)
    t1 = difference_table(dy, 1, 2)
    t2 = difference_table(d2y, 1, 2)
    assert renorm_consistency_ladder(t0, [t1, t2]) == [0, 0]


def test_ladder_residuals_nonzero_for_mismatch():
    y = poly_oracle([2, -1, 3])
    t0 = difference_table(y, 1, 3)
    wrong = difference_table(lambda n: y(n + 1), 1, 1)
    (r,) = renorm_consistency_ladder(t0, [wrong])
    assert r != 0


def test_ladder_requires_shared_anchor():
    t0 = difference_table(lambda n: n, 0, 2)
    t1 = difference_table(lambda n: 1, 1, 1)
    with pytest.raises(ValueError):
        renorm_consistency_ladder(t0, [t1])


def test_ladder_residual_of_solved_oscillator_flows():
    """The collected series of the solved oscillator have a ladder residual
    that is exactly zero with the closed power flows and second order in the
    small parameter under the smooth identification."""
    from renormrec.cases import Illustration
    from renormrec.renorm import run_pipeline
    from renormrec.scalars import scalar_pow, to_complex

    eps = Fraction(1, 100)
    res = run_pipeline(Illustration(epsilon=eps))

    def series_fn(parts, form):
        def fn(m):
            total = 0j
            env = {name: res.flows[name].value(m, form) for name in res.flows}
            for k, byb in enumerate(parts):
                for base, poly in byb.items():
                    total += to_complex(scalar_pow(eps, k)) \
                        * to_complex(poly.substitute(env)) \
                        * to_complex(base) ** m
            return total
        return fn

    for form, bound in (("power", 1e-14), ("exp", 0.5 * float(eps) ** 2)):
        y0 = series_fn(res.collected.Y0, form)
        y1 = series_fn(res.collected.Y1, form)
        for m in (0, 3, 17, 50):
            t0 = difference_table(y0, m, 1)
            t1 = DifferenceTable(m, (y1(m),))
            (r,) = renorm_consistency_ladder(t0, [t1])
            assert abs(r) <= bound, (form, m, abs(r))
