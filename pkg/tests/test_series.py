import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from takagi import (Enclosure, PointError, SparseDigits, d_n, digits_of, dtilde_series,
                    eval_exact, eval_partial, g_n, phi_dist, tail_bound)
from takagi.errors import CycleCapError
from takagi.series import next_grid_point, partial_sum

import oracles as ora

fractions_01 = st.integers(1, 4000).flatmap(
    lambda q: st.builds(Fraction, st.integers(0, q), st.just(q)))


def test_phi_dist_examples():
    assert phi_dist(Fraction(1, 2)) == Fraction(1, 2)
    assert phi_dist(Fraction(7, 3)) == Fraction(1, 3)
    assert phi_dist(0) == 0


def test_g_n_examples():
    assert g_n(Fraction(2, 5), 2, 2) == Fraction(1, 10)
    assert g_n(Fraction(1, 3), 1, 3) == Fraction(1, 3)
    assert g_n(Fraction(1, 3), 2, 3) == 0


def test_eval_exact_examples():
    assert eval_exact(0, 2) == 0
    assert eval_exact(Fraction(1, 2), 2) == Fraction(1, 2)
    assert eval_exact(Fraction(1, 3), 2) == Fraction(2, 3)
    # the cycle-sum value is confirmed by partial sums before it is trusted
    enc = eval_partial(Fraction(1, 3), 2, 40)
    assert Fraction(2, 3) in enc


def test_eval_accepts_streams_and_strings():
    s = digits_of(Fraction(5, 17), 3)
    assert eval_exact(s, 3) == eval_exact("5/17", 3) == eval_exact(Fraction(5, 17), 3)
    assert eval_exact("0.(01)_2", 2) == Fraction(2, 3)


def test_eval_partial_examples():
    enc = eval_partial(Fraction(1, 3), 2, 30)
    assert Fraction(2, 3) in enc
    # 2 t = 2**-29, within the 2**-28 the width is allowed
    assert enc.width == 2 * tail_bound(2, 30) == Fraction(1, 2**29)
    assert enc.width <= Fraction(1, 2**28)
    assert 0 in eval_partial(0, 5, 5)
    sparse = eval_partial(SparseDigits(3, 10, 0, 1), 3, 50)
    assert sparse.width <= Fraction(3, 2 * 3**48)


def test_sparse_enclosure_nested():
    s = SparseDigits(3, 10, 0, 1)
    coarse, fine = eval_partial(s, 3, 20), eval_partial(s, 3, 60)
    assert coarse.lo <= fine.lo and fine.hi <= coarse.hi


def test_dtilde_examples():
    assert dtilde_series(0, 3) == Fraction(3, 4)
    assert dtilde_series(Fraction(1, 3), 2) == Fraction(1, 3)
    assert dtilde_series(Fraction(1, 2), 2) == Fraction(1, 2)


def test_d_n_examples():
    third = digits_of(Fraction(1, 3), 2)
    assert d_n(third, 1) == Fraction(1, 6)
    assert d_n(third, 2) == Fraction(1, 6)
    with pytest.raises(PointError):
        d_n(digits_of(Fraction(1, 4), 2), 3)
    with pytest.raises(PointError):
        d_n(digits_of(Fraction(1, 2), 3), 1)


def test_cycle_cap_error():
    with pytest.raises(CycleCapError):
        eval_exact(Fraction(1, 1000003), 2, cap=100)


def test_out_of_range():
    with pytest.raises(PointError):
        eval_exact(Fraction(5, 4), 2)
    with pytest.raises(PointError):
        g_n(Fraction(1, 2), 0, 2)


# ------------------------------------------------------------- oracles

@settings(max_examples=150, deadline=None)
@given(x=fractions_01, r=st.integers(2, 10))
def test_eval_exact_matches_orbit_oracle(x, r):
    assert eval_exact(x, r) == ora.f_exact(x, r)


@settings(max_examples=100, deadline=None)
@given(x=fractions_01, r=st.integers(2, 10))
def test_dtilde_matches_orbit_oracle(x, r):
    assert dtilde_series(x, r) == ora.f_exact(x, r, ora.mid_phi)


@settings(max_examples=100, deadline=None)
@given(x=fractions_01, r=st.integers(2, 7), N=st.integers(1, 25))
def test_partial_sum_matches_definition(x, r, N):
    assert partial_sum(x, r, N) == ora.partial(x, r, N)


@settings(max_examples=200, deadline=None)
@given(x=fractions_01, r=st.integers(2, 10), n=st.integers(1, 30))
def test_g_n_matches_definition_and_bound(x, r, n):
    v = g_n(x, n, r)
    assert v == ora.g(x, n, r)
    assert v <= Fraction(1, 2 * r ** (n - 1))


@settings(max_examples=200, deadline=None)
@given(x=fractions_01, r=st.integers(2, 10))
def test_symmetry(x, r):
    assert eval_exact(x, r) == eval_exact(1 - x, r)


@settings(max_examples=200, deadline=None)
@given(x=fractions_01, r=st.sampled_from([2, 3, 4, 5, 10]))
def test_dtilde_identity(x, r):
    assert dtilde_series(x, r) + eval_exact(x, r) == Fraction(r, 2 * (r - 1))


@settings(max_examples=150, deadline=None)
@given(x=fractions_01, r=st.integers(2, 10), N=st.sampled_from([1, 5, 10, 20, 40]))
def test_enclosure_sound(x, r, N):
    enc = eval_partial(x, r, N)
    assert eval_exact(x, r) in enc
    assert enc.width <= 2 * tail_bound(r, N)


def test_d_n_ladder_properties():
    rng = random.Random(7)
    checked = 0
    while checked < 40:
        r = rng.choice([2, 3, 4, 5])
        q = rng.randint(3, 3000)
        x = Fraction(rng.randint(1, q - 1), q)
        if ora.in_D(x, r) or ora.in_D_tilde(x, r):
            continue
        s = digits_of(x, r)
        d = [d_n(s, n) for n in range(1, 62)]
        for n in range(1, 61):
            dn, dn1 = d[n - 1], d[n]
            assert 0 < dn < Fraction(1, 2 * r ** (n - 1))
            assert dn1 <= dn
            if dn1 < dn:
                assert dn >= Fraction(1, 2 * r**n)
            # brute force over the half-grid
            y = next_grid_point(s, n)
            step = Fraction(1, 2 * r ** (n - 1))
            assert y > x and y - step <= x
        checked += 1


def test_d_n_sparse_matches_digits():
    s = SparseDigits(3, 10, 0, 1)
    for n in (1, 2, 5, 9, 10, 11, 30):
        enc = d_n(s, n)
        assert isinstance(enc, Enclosure)
        assert 0 < enc.lo and enc.hi < Fraction(1, 2 * 3 ** (n - 1))


def test_enclosure_arithmetic():
    a = Enclosure(Fraction(1), Fraction(2))
    b = Enclosure(Fraction(-3), Fraction(-1))
    assert a / b == Enclosure(Fraction(-2), Fraction(-1, 3))
    assert (a - b) == Enclosure(Fraction(2), Fraction(5))
    with pytest.raises(ZeroDivisionError):
        a / Enclosure(Fraction(-1), Fraction(1))
    with pytest.raises(ValueError):
        Enclosure(Fraction(2), Fraction(1))
