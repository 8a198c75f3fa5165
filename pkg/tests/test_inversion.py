import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emutomo.inversion import (
    InformationallyIncomplete,
    design_matrix,
    eigen_report,
    hermitian_basis,
    linear_invert,
)
from emutomo.measurements import MeasurementSet, pauli_measurement_set, white_measurement_set
from emutomo.simulation import nominal_bell_state
from helpers import bloch_to_rho, ket_bloch, random_state

QUBIT6 = MeasurementSet.from_labels("HVDARL")


def _pauli_readout(f):
    """Bloch vector from per-basis probabilities: b_i = f(+) - f(-)."""
    dirs = np.array([ket_bloch(k) for k in QUBIT6.kets])
    return np.array([sum(f[j] * dirs[j, i] for j in range(6)) for i in range(3)])


def test_basis_ordering():
    b = hermitian_basis(2)
    assert b.shape == (4, 2, 2)
    np.testing.assert_array_equal(b[0], [[1, 0], [0, 0]])
    np.testing.assert_array_equal(b[1], [[0, 0], [0, 1]])
    np.testing.assert_array_equal(b[2], [[0, 1], [1, 0]])
    np.testing.assert_array_equal(b[3], [[0, 1j], [-1j, 0]])
    assert hermitian_basis(4).shape == (16, 4, 4)


def test_design_matrix_rows():
    a = design_matrix(QUBIT6)
    # row j holds <y|B|y> = (|y0|^2, |y1|^2, 2 Re y0* y1, -2 Im y0* y1)
    for j, y in enumerate(QUBIT6.kets):
        c = np.conj(y[0]) * y[1]
        np.testing.assert_allclose(a[j], [abs(y[0]) ** 2, abs(y[1]) ** 2, 2 * c.real, -2 * c.imag], atol=1e-15)


@pytest.mark.parametrize("mset", [QUBIT6, white_measurement_set(), pauli_measurement_set(2)], ids=["qubit6", "white", "pauli36"])
def test_noise_free_exact(mset, rng):
    truth = random_state(rng, mset.dimension)
    rep = linear_invert(mset.born(truth), mset)
    np.testing.assert_allclose(rep.matrix, truth, atol=1e-10)
    assert rep.physical
    assert rep.rank == mset.dimension ** 2


def test_noise_free_normalized_frequencies(rng):
    truth = random_state(rng, 2)
    p = QUBIT6.born(truth)
    np.testing.assert_allclose(linear_invert(p / p.sum(), QUBIT6).matrix, truth, atol=1e-10)


def test_qubit_physical_example():
    f = np.array([0.5, 0.5, 0.9, 0.1, 0.5, 0.5])
    rep = linear_invert(f, QUBIT6)
    np.testing.assert_allclose(_pauli_readout(f), [0.8, 0, 0], atol=1e-15)
    np.testing.assert_allclose(rep.matrix, bloch_to_rho([0.8, 0, 0]), atol=1e-12)
    np.testing.assert_allclose(rep.eigenvalues, [0.9, 0.1], atol=1e-12)
    assert rep.physical


def test_qubit_unphysical_example():
    f = np.array([0.5, 0.5, 0.95, 0.05, 0.95, 0.05])
    rep = linear_invert(f, QUBIT6)
    # R = (H - iV)/sqrt2 has Bloch y = -1, so weight on R pushes y negative
    b = _pauli_readout(f)
    np.testing.assert_allclose(b, [0.9, -0.9, 0], atol=1e-15)
    np.testing.assert_allclose(rep.matrix, bloch_to_rho(b), atol=1e-12)
    lam_min = (1 - np.sqrt(1.62)) / 2
    assert lam_min == pytest.approx(-0.136396, abs=1e-6)
    assert rep.min_eigenvalue == pytest.approx(lam_min, abs=1e-12)
    assert not rep.physical


def test_rank_deficient_rejected():
    with pytest.raises(InformationallyIncomplete, match="rank 3, need 4"):
        linear_invert([0.5, 0.5, 0.9, 0.1], MeasurementSet.from_labels("HVDA"))


def test_white_set_overdetermined(rng):
    a = design_matrix(white_measurement_set())
    assert a.shape == (16, 16)
    assert np.linalg.matrix_rank(a) == 16


def test_eigen_report_examples():
    vals, physical = eigen_report(nominal_bell_state(0.038, (0.05, -0.03)))
    np.testing.assert_allclose(vals, [0.962, 0.038, 0, 0], atol=1e-12)
    assert physical
    vals, physical = eigen_report(np.eye(4) / 4)
    np.testing.assert_allclose(vals, [0.25] * 4)
    assert physical
    vals, physical = eigen_report(np.diag([1.022, 0.068, -0.065, -0.024]))
    assert vals[0] > 1 and (vals < 0).sum() == 2
    assert not physical


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_unit_trace_on_noisy_data(seed):
    rng = np.random.default_rng(seed)
    ws = white_measurement_set()
    counts = rng.poisson(200 * ws.born(random_state(rng, 4))).astype(float) + 1
    rep = linear_invert(counts / counts.sum(), ws)
    assert np.trace(rep.matrix).real == pytest.approx(1.0, abs=1e-9)
    assert rep.eigenvalues.sum() == pytest.approx(1.0, abs=1e-9)
    assert np.max(np.abs(rep.matrix - rep.matrix.conj().T)) <= 1e-10
    assert np.all(np.diff(rep.eigenvalues) <= 0)
