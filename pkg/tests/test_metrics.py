import numpy as np
import pytest

from ionbath.errors import NonPhysicalStateError
from ionbath.fock import DensityMatrix, FockSpace, coherent_state, number_state, thermal_state, vacuum_state
from ionbath.metrics import fidelity, mean_occupation, tail_mass, trace_distance

""" Tests for ionbath.metrics
Test naming convention
test_MethodName_ExpectedBehavior_StateUnderTest
"""


#------------------------
# fidelity
#------------------------

def test_fidelity_one_sameState(space40):
    rho = coherent_state(space40, 0.6j)
    assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-9)


def test_fidelity_vacuumPopulation_vacuumAgainstThermal(space40):
    assert fidelity(vacuum_state(space40), thermal_state(space40, 0.25)) == pytest.approx(0.8, abs=1e-9)


def test_fidelity_zero_orthogonalStates(space40):
    assert fidelity(number_state(space40, 0), number_state(space40, 1)) == pytest.approx(0.0, abs=1e-12)


def test_fidelity_symmetric_randomPairs(random_pairs):
    for rho, sigma in random_pairs:
        assert abs(fidelity(rho, sigma) - fidelity(sigma, rho)) <= 1e-9


def test_fidelity_fuchsVanDeGraafSandwich_randomPairs(random_pairs):
    for rho, sigma in random_pairs:
        f = fidelity(rho, sigma)
        d = trace_distance(rho, sigma)
        assert 1 - np.sqrt(f) <= d + 1e-9
        assert d <= np.sqrt(1 - f) + 1e-9


def test_fidelity_ERROR_negativeEigenvalue():
    broken = DensityMatrix(np.diag([1.5, -0.5]))
    with pytest.raises(NonPhysicalStateError):
        fidelity(broken, DensityMatrix(np.eye(2) / 2))


def test_fidelity_ERROR_differentSpaces():
    with pytest.raises(ValueError):
        fidelity(vacuum_state(FockSpace(3)), vacuum_state(FockSpace(4)))


#------------------------
# occupation, distance, tail
#------------------------

def test_meanOccupation_zero_vacuum(space40):
    assert mean_occupation(vacuum_state(space40)) == 0.0


def test_meanOccupation_alphaSquared_coherent(space40):
    assert mean_occupation(coherent_state(space40, 0.6j)) == pytest.approx(0.36, abs=1e-9)


def test_meanOccupation_nbar_thermal(space40):
    assert mean_occupation(thermal_state(space40, 0.25)) == pytest.approx(0.25, abs=1e-6)


def test_traceDistance_zero_sameState(space40):
    rho = thermal_state(space40, 0.5)
    assert trace_distance(rho, rho) == 0.0


def test_traceDistance_one_orthogonalStates(space40):
    assert trace_distance(number_state(space40, 0), number_state(space40, 1)) == pytest.approx(1.0)


def test_tailMass_negligible_coherent06i(space40):
    assert tail_mass(coherent_state(space40, 0.6j), 2) <= 1e-10
