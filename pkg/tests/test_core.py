import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from maxwell_relax.core import (Grid, NSField, PhysParams, RelaxField, RelaxState,
                                StateViolation, SymTraceless3, check_field, dev_sym,
                                dev_sym_packed, frobenius_sq, tensor_matvec,
                                unpack_matrix, validate_state)

finite = st.floats(-1e3, 1e3, allow_nan=False)
mat3 = arrays(float, (3, 3), elements=finite)


def test_dev_sym_identity_is_zero():
    assert np.all(dev_sym(np.eye(3)).pack() == 0.0)


def test_dev_sym_rotation_is_zero():
    W = np.array([[0.0, 1.5, -2.0], [-1.5, 0.0, 0.3], [2.0, -0.3, 0.0]])
    assert np.all(dev_sym(W).pack() == 0.0)


def test_dev_sym_uniaxial():
    T = dev_sym(np.diag([1.0, 0.0, 0.0])).to_matrix()
    np.testing.assert_allclose(T, np.diag([4 / 3, -2 / 3, -2 / 3]), rtol=0, atol=1e-15)


@given(mat3)
def test_dev_sym_symmetric_traceless(M):
    T = dev_sym(M).to_matrix()
    assert np.array_equal(T, T.T)
    assert abs(np.trace(T)) <= 1e-15 * max(1.0, np.abs(M).max())


@given(mat3, mat3, st.floats(-10, 10), st.floats(-10, 10))
def test_dev_sym_linear(M, N, a, b):
    lhs = dev_sym(a * M + b * N).pack()
    rhs = a * dev_sym(M).pack() + b * dev_sym(N).pack()
    scale = 1.0 + abs(a) * np.abs(M).max() + abs(b) * np.abs(N).max()
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-12 * scale)


@given(arrays(float, (5,), elements=finite))
def test_pack_round_trip(v):
    assert np.array_equal(SymTraceless3.unpack(v).pack(), v)


def test_from_matrix_projects():
    M = np.arange(9.0).reshape(3, 3)
    T = SymTraceless3.from_matrix(M).to_matrix()
    S = 0.5 * (M + M.T)
    np.testing.assert_allclose(T, S - np.trace(S) / 3 * np.eye(3), atol=1e-14)


def test_unpack_rejects_wrong_length():
    with pytest.raises(ValueError):
        SymTraceless3.unpack(np.zeros(6))


def test_dev_sym_rejects_bad_shape():
    with pytest.raises(ValueError):
        dev_sym(np.zeros((2, 2)))


def test_frobenius_counts_zz():
    t = SymTraceless3(1.0, -1.0)
    assert t.frobenius_sq() == 2.0
    t = SymTraceless3(1.0, 1.0)           # zz = -2
    assert t.frobenius_sq() == 6.0


def test_vectorized_helpers_match_matrix_algebra(rng):
    packed = rng.standard_normal((5, 7))
    v = rng.standard_normal((3, 7))
    full = unpack_matrix(packed)
    np.testing.assert_allclose(tensor_matvec(packed, v), np.einsum("ijn,jn->in", full, v))
    np.testing.assert_allclose(frobenius_sq(packed), np.einsum("ijn,ijn->n", full, full))
    grad = rng.standard_normal((3, 3, 7))
    for n in range(7):
        np.testing.assert_allclose(dev_sym_packed(grad)[:, n], dev_sym(grad[:, :, n]).pack())


@pytest.mark.parametrize("field", ["nu", "kappa", "eps1", "eps2", "eos_A"])
def test_params_reject_nonpositive(field):
    with pytest.raises(ValueError, match=field):
        PhysParams(**{field: 0.0})


def test_params_reject_gamma_le_one():
    with pytest.raises(ValueError, match="eos_gamma"):
        PhysParams(eos_gamma=1.0)


def test_with_eps():
    p = PhysParams(nu=2.0).with_eps(0.05)
    assert (p.eps1, p.eps2, p.nu) == (0.05, 0.05, 2.0)
    assert PhysParams().with_eps(0.1, 0.2).eps2 == 0.2


def test_validate_state():
    assert validate_state(RelaxState(1.0)) is None
    v = validate_state(RelaxState(0.0))
    assert v is not None and v.field == "rho"
    assert validate_state(RelaxState(1e-9), floor=1e-8).field == "rho"
    assert validate_state(RelaxState(1.0, tau2=np.nan)).field == "tau2"


def test_state_vector_round_trip():
    s = RelaxState.from_primitive(2.0, [1.0, 2.0, 3.0], SymTraceless3(1, 2, 3, 4, 5), 0.5)
    np.testing.assert_array_equal(s.velocity, [1.0, 2.0, 3.0])
    r = RelaxState.from_vector(s.to_vector())
    np.testing.assert_array_equal(r.to_vector(), s.to_vector())


def test_check_field_locates_cell():
    U = np.ones((10, 6, 5))
    U[1:] = 0.0
    U[0, 4, 2] = -0.5
    bad = check_field(U)
    assert bad.cell == (4, 2) and bad.field == "rho"
    U[0, 4, 2] = 1.0
    U[7, 1, 1] = np.inf
    assert check_field(U).cell == (1, 1)
    assert check_field(np.ones((10, 6, 5))) is None


def test_state_violation_message():
    exc = StateViolation("rho", -0.1, 1e-8, (3,), 0.25)
    assert "cell (3,)" in str(exc) and "t=0.25" in str(exc)


def test_grid():
    g = Grid((8, 4))
    assert g.dim == 2 and g.dx == (0.125, 0.25) and g.cell_volume == 0.125 * 0.25
    x, y = g.centers()
    assert x.shape == (8, 4) and x[0, 0] == 0.0625 and y[0, 1] == 0.375
    assert g.refine().cells == (16, 8)
    assert Grid.uniform(3, 4).cells == (4, 4, 4)
    with pytest.raises(ValueError):
        Grid((2,))
    with pytest.raises(ValueError):
        Grid((4, 4, 4, 4))


def test_field_extents_checked():
    g = Grid((8,))
    with pytest.raises(ValueError):
        RelaxField(g, np.zeros((10, 9)))
    with pytest.raises(ValueError):
        NSField(g, np.zeros((10, 8)))


def test_fields_from_primitive():
    g = Grid((8,))
    x = g.centers()[0]
    v = np.stack([np.sin(x), np.zeros(8), np.ones(8)])
    f = RelaxField.from_primitive(g, 2.0 + x, v)
    np.testing.assert_allclose(f.velocity, v)
    assert f.state((3,)).rho == 2.0 + x[3]
    n = NSField.from_primitive(g, 2.0 + x, v)
    with pytest.raises(ValueError):
        n.as_relax()
    n.tau1_ce = np.ones((5, 8))
    n.tau2_ce = np.full(8, 2.0)
    R = n.as_relax().U
    np.testing.assert_array_equal(R[:4], n.U)
    assert np.all(R[9] == 2.0)
