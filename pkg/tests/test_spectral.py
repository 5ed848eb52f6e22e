import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

sys.path.insert(0, str(Path(__file__).parent))
import oracles

from fracsys.spectral import (
    Domain, NodalField, SpectralField, apply_power, build_basis, dual_norm, inner_theta, invert_power,
    read_field, sample, theta_norm, to_nodal, to_spectral, write_field,
)

PI2 = np.pi**2


@pytest.fixture(scope="module")
def square():
    return build_basis(Domain.unit(2), 16)


def phi(j, k):
    return lambda x, y: 2 * np.sin(j * np.pi * x) * np.sin(k * np.pi * y)


def test_first_eigenvalue_unit_square():
    b = build_basis(Domain.unit(2), 4)
    assert b.lambda1 == pytest.approx(2 * PI2, rel=1e-15)
    assert b.lambda1 == pytest.approx(19.7392, abs=1e-4)


def test_interval_eigenvalues():
    b = build_basis(Domain.unit(1), 3)
    np.testing.assert_allclose(b.eigenvalues, [PI2, 4 * PI2, 9 * PI2], rtol=1e-15)


def test_rectangle_eigenvalue():
    b = build_basis(Domain(2, (1.0, 2.0)), 2)
    assert b.eigenvalues[0, 0] == pytest.approx(1.25 * PI2, rel=1e-15)
    assert b.eigenvalues[1, 1] == pytest.approx(oracles.eigenvalue((2, 2), (1.0, 2.0)), rel=1e-15)


@pytest.mark.parametrize("bad", [dict(dim=4, lengths=(1,) * 4), dict(dim=2, lengths=(1.0,)),
                                 dict(dim=2, lengths=(1.0, -1.0)), dict(dim=1, lengths=(np.inf,))])
def test_domain_validation(bad):
    with pytest.raises(ValueError):
        Domain(**bad)


def test_basis_validation():
    with pytest.raises(ValueError):
        build_basis(Domain.unit(2), 1)
    with pytest.raises(ValueError):
        build_basis(Domain.unit(2), 8, grid_size=4)


def test_sample_first_mode_gives_unit_vector(square):
    xi = to_spectral(sample(square, phi(1, 1)))
    expect = np.zeros(square.shape)
    expect[0, 0] = 1.0
    np.testing.assert_allclose(xi.coeffs, expect, atol=1e-13)


def test_zero_field_round_trips(square):
    assert not np.any(to_spectral(sample(square, lambda x, y: 0 * x)).coeffs)
    assert not np.any(to_nodal(square.zeros()).values)


def test_two_mode_sum_recovered(square):
    xi = to_spectral(sample(square, lambda x, y: 2 * phi(1, 1)(x, y) + 3 * phi(2, 1)(x, y)))
    assert xi.coeffs[0, 0] == pytest.approx(2, abs=1e-12)
    assert xi.coeffs[1, 0] == pytest.approx(3, abs=1e-12)
    xi.coeffs[0, 0] = xi.coeffs[1, 0] = 0
    assert np.abs(xi.coeffs).max() < 1e-12


def test_synthesis_matches_dense_sine_matrix(square):
    rng = np.random.default_rng(0)
    c = rng.standard_normal(square.shape)
    S = oracles.sine_matrix_2d(square.modes, square.grid_size)
    dense = (S @ c.ravel()).reshape((square.grid_size,) * 2)
    np.testing.assert_allclose(to_nodal(SpectralField(square, c)).values, dense, atol=1e-12)


def test_unit_vector_synthesizes_first_mode(square):
    np.testing.assert_allclose(to_nodal(square.eigenfunction(1, 1)).values,
                               sample(square, phi(1, 1)).values, atol=1e-13)


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_round_trip_random(dim):
    b = build_basis(Domain(dim, (1.0, 0.7, 1.3)[:dim]), 8)
    c = np.random.default_rng(dim).standard_normal(b.shape)
    back = to_spectral(to_nodal(SpectralField(b, c)))
    assert np.abs(back.coeffs - c).max() <= 1e-12 * np.abs(c).max()


def test_refined_grid_round_trip(square):
    c = np.random.default_rng(1).standard_normal(square.shape)
    u = SpectralField(square, c)
    np.testing.assert_allclose(to_spectral(to_nodal(u, 3 * square.modes)).coeffs, c, atol=1e-12)


def test_quadrature_of_sin4():
    b = build_basis(Domain.unit(1), 8)
    vals = to_nodal(b.eigenfunction(1)).values ** 4
    # int_0^1 (sqrt2 sin)^4 = 4 * 3/8
    assert NodalField(b, vals, b.grid_size).integrate() == pytest.approx(1.5, abs=1e-13)


def test_apply_power_examples(square):
    out = apply_power(square.eigenfunction(1, 1), 0.5)
    assert out.coeffs[0, 0] == pytest.approx(4.442883, abs=1e-6)
    u = SpectralField(square, np.random.default_rng(2).standard_normal(square.shape))
    assert apply_power(u, 0) is u
    twice = apply_power(apply_power(square.eigenfunction(2, 1), 0.7), 0.3)
    assert twice.coeffs[1, 0] == pytest.approx(5 * PI2, rel=1e-14)
    assert twice.coeffs[1, 0] == pytest.approx(49.348, abs=1e-3)


def test_negative_power_is_inverse(square):
    u = SpectralField(square, np.random.default_rng(3).standard_normal(square.shape))
    np.testing.assert_allclose(apply_power(u, -0.4).coeffs, invert_power(u, 0.4).coeffs, rtol=1e-15)


def test_invert_power_examples(square):
    out = invert_power(square.eigenfunction(1, 1), 1.0)
    assert out.coeffs[0, 0] == pytest.approx(1 / (2 * PI2), rel=1e-15)
    assert not np.any(invert_power(square.zeros(), 0.5).coeffs)
    with pytest.raises(ValueError):
        invert_power(out, 0.0)


def test_theta_norm_examples(square):
    p11 = square.eigenfunction(1, 1)
    assert theta_norm(p11, 1) == pytest.approx(4.442883, abs=1e-6)
    assert theta_norm(p11, 0) == 1.0
    two = p11 + square.eigenfunction(2, 1)
    assert theta_norm(two, 1.0) == pytest.approx(np.sqrt(7 * PI2), rel=1e-15)
    assert theta_norm(two, 1.0) == pytest.approx(8.311873, abs=1e-6)


def test_inner_theta_examples(square):
    p11, p21 = square.eigenfunction(1, 1), square.eigenfunction(2, 1)
    assert inner_theta(p11, p11, 1) == pytest.approx(2 * PI2, rel=1e-15)
    assert inner_theta(p11, p21, 0.3) == 0
    rng = np.random.default_rng(4)
    u = SpectralField(square, rng.standard_normal(square.shape))
    v = SpectralField(square, rng.standard_normal(square.shape))
    lhs = inner_theta(u, apply_power(v, 0.6), 0)
    assert lhs == pytest.approx(inner_theta(u, v, 0.6), rel=1e-12)


def test_inner_theta_rejects_other_basis(square):
    other = build_basis(Domain.unit(2), 8)
    with pytest.raises(ValueError):
        inner_theta(square.zeros(), other.zeros(), 0.5)


def test_dual_norm_examples(square):
    assert dual_norm(square.eigenfunction(1, 1), 1) == pytest.approx(0.22508, abs=1e-5)
    assert dual_norm(square.zeros(), 0.5) == 0
    with pytest.raises(ValueError):
        dual_norm(square.zeros(), 0)


def test_nonfinite_coefficients_rejected(square):
    c = np.zeros(square.shape)
    c[0, 0] = np.nan
    with pytest.raises(ValueError):
        SpectralField(square, c)


def test_field_file_round_trip(tmp_path):
    b = build_basis(Domain(2, (1.0, 2.5)), 6)
    u = SpectralField(b, np.random.default_rng(5).standard_normal(b.shape))
    write_field(tmp_path / "u.csv", u)
    back = read_field(tmp_path / "u.csv")
    assert back.basis.domain == b.domain and back.basis.modes == 6
    np.testing.assert_array_equal(back.coeffs, u.coeffs)
    with pytest.raises(ValueError):
        read_field(tmp_path / "u.csv", build_basis(Domain.unit(2), 6))


@settings(max_examples=40, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.integers(0, 2**32 - 1))
def test_semigroup_property(s1, s2, seed):
    b = build_basis(Domain(2, (1.0, 1.7)), 8)
    u = SpectralField(b, np.random.default_rng(seed).standard_normal(b.shape))
    lhs = apply_power(apply_power(u, s1), s2)
    rhs = apply_power(u, s1 + s2)
    assert theta_norm(lhs - rhs, 0) <= 1e-12 * theta_norm(rhs, 0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 2.0), st.integers(0, 2**32 - 1))
def test_dual_isometry(s, seed):
    b = build_basis(Domain.unit(2), 8)
    u = SpectralField(b, np.random.default_rng(seed).standard_normal(b.shape))
    assert dual_norm(apply_power(u, s), s) == pytest.approx(theta_norm(u, s), rel=1e-12)
