import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmrecover.analytic import (
    CoeffTable,
    analytic_cm,
    compute_coeffs,
    damped_qubit_matrix,
    recovery_residuals,
)
from cmrecover.fock import AtomState, DensityMatrix, embed
from cmrecover.jc import CmOutcome, CmParams, JcTime, apply_cm
from cmrecover.metrics import distance

from conftest import EX1_AMPS, atoms, random_atom, seeds

EX1_PARAMS = CmParams.from_vector((3 * np.pi / 8, 5 * np.pi / 4, 3 * np.pi / 8, np.pi / 4, 37.95))


def random_qubit(rng):
    c = rng.normal(size=2) + 1j * rng.normal(size=2)
    return c / np.linalg.norm(c)


class TestDampedQubit:
    def test_vacuum(self):
        np.testing.assert_array_equal(damped_qubit_matrix(1, 0, 0.8).data, np.diag([1, 0]))

    def test_no_damping(self):
        c = EX1_AMPS
        np.testing.assert_allclose(damped_qubit_matrix(*c, 0.0).data, np.outer(c, c.conj()), atol=1e-15)

    def test_excited_population(self):
        rho = damped_qubit_matrix(1 / np.sqrt(2), 1 / np.sqrt(2), 0.3)
        assert rho[1, 1].real == pytest.approx(np.exp(-0.6) / 2, abs=1e-15)
        assert rho[1, 1].real == pytest.approx(0.27441, abs=1e-5)


class TestCoeffs:
    def test_excited_atom_kills_beta_terms(self, rng):
        rho = damped_qubit_matrix(*random_qubit(rng), 0.4)
        k = compute_coeffs(rho, AtomState(0.0), 2.3)
        assert k.O == 0
        assert k.C == 0

    def test_no_interaction(self, rng):
        rho = damped_qubit_matrix(*random_qubit(rng), 0.4)
        k = compute_coeffs(rho, random_atom(rng), 0.0)
        assert k.Z == 0
        assert k.L == 0

    @given(seeds, atoms, st.floats(0, 40))
    def test_conjugation_relations(self, seed, atom, lt):
        rng = np.random.default_rng(seed)
        rho = damped_qubit_matrix(*random_qubit(rng), rng.uniform(0, 2))
        k = compute_coeffs(rho, atom, lt)
        assert max(k.relation_errors().values()) < 1e-14

    def test_table_has_all_letters(self, rng):
        k = compute_coeffs(damped_qubit_matrix(*random_qubit(rng), 0.2), random_atom(rng), 1.0)
        assert set(k.as_dict()) == set("ABCDEFGHIJKLMNOQRSTUVWXYZ")
        assert len(CoeffTable.RELATIONS) == 15

    def test_wrong_dimension_rejected(self):
        with pytest.raises(ValueError):
            compute_coeffs(DensityMatrix(np.eye(3) / 3), AtomState(0.1), 1.0)


class TestAnalyticCm:
    def test_identity(self, rng):
        rho = damped_qubit_matrix(*random_qubit(rng), 0.5)
        atom = random_atom(rng)
        out = analytic_cm(rho, atom, 0.0, atom)
        assert out.probability == pytest.approx(1.0, abs=1e-14)
        np.testing.assert_allclose(out.field.data, embed(rho, 3).data, atol=1e-14)

    def test_example_one_matches_general_path(self):
        rho = damped_qubit_matrix(*EX1_AMPS, 0.3)
        p = EX1_PARAMS
        a = analytic_cm(rho, p.atom_i, p.t, p.atom_f)
        g = apply_cm(rho, p)
        np.testing.assert_allclose(a.field.data, g.field.data, atol=1e-12)
        assert a.probability == pytest.approx(g.probability, abs=1e-12)
        assert a.probability == pytest.approx(0.74, abs=0.005)

    @given(seeds)
    def test_random_draws_match_general_path(self, seed):
        rng = np.random.default_rng(seed)
        rho = damped_qubit_matrix(*random_qubit(rng), rng.uniform(0, 2))
        p = CmParams(random_atom(rng), random_atom(rng), JcTime(rng.uniform(0, 40)))
        a = analytic_cm(rho, p.atom_i, p.t, p.atom_f)
        g = apply_cm(rho, p)
        assert a.probability == pytest.approx(g.probability, abs=1e-12)
        assert 0 <= a.probability <= 1 + 1e-12
        np.testing.assert_allclose(a.field.data, g.field.data, atol=1e-12)

    def test_impossible_outcome(self, rng):
        rho = damped_qubit_matrix(*random_qubit(rng), 0.5)
        atom = random_atom(rng)
        assert not analytic_cm(rho, atom, 0.0, atom.orthogonal()).succeeded


class TestResiduals:
    def test_exact_target(self):
        target = DensityMatrix(np.outer(EX1_AMPS, EX1_AMPS.conj()))
        out = CmOutcome(embed(target, 3), 1.0)
        assert recovery_residuals(out, target) == [0.0] * 9

    def test_conjugate_pairs_agree(self):
        rho = damped_qubit_matrix(*EX1_AMPS, 0.3)
        target = DensityMatrix(np.outer(EX1_AMPS, EX1_AMPS.conj()))
        r = recovery_residuals(apply_cm(rho, EX1_PARAMS), target)
        # order: 00, 01, 10, 11, 02, 20, 12, 21, 22
        assert r[1] == pytest.approx(r[2], abs=1e-15)
        assert r[4] == pytest.approx(r[5], abs=1e-15)
        assert r[6] == pytest.approx(r[7], abs=1e-15)

    def test_norm_is_distance(self):
        rho = damped_qubit_matrix(*EX1_AMPS, 0.3)
        target = DensityMatrix(np.outer(EX1_AMPS, EX1_AMPS.conj()))
        out = apply_cm(rho, EX1_PARAMS)
        assert np.linalg.norm(recovery_residuals(out, target)) == pytest.approx(distance(out.field, target), abs=1e-15)

    def test_impossible_outcome_rejected(self):
        with pytest.raises(ValueError):
            recovery_residuals(CmOutcome(None, 0.0), DensityMatrix(np.eye(2) / 2))
