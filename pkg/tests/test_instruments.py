import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from measchain import instruments as inst
from measchain import sampling
from measchain.linalg import is_isometry

s2 = 1 / np.sqrt(2)
KET0, KET1, PLUS = np.array([1, 0]), np.array([0, 1]), np.array([s2, s2])


def ket(i, d=2):
    v = np.zeros(d, dtype=complex)
    v[i] = 1
    return v


def nonideal_plus():
    return inst.NonIdeal(np.eye(2), np.column_stack([KET0, PLUS]))


class TestValidate:
    def test_ideal_qubit(self):
        assert inst.validate(inst.IdealNonDegenerate.computational(2)).passed

    def test_reset_kraus_set_is_complete(self):
        rep = inst.validate(inst.Generalized((np.outer(KET0, KET0), np.outer(KET0, KET1))))
        assert rep.passed

    def test_doubled_identity_fails_completeness(self):
        rep = inst.validate(inst.Generalized((np.eye(2), np.eye(2))))
        assert not rep.passed
        [failure] = rep.failures
        assert failure.name == "Kraus completeness"
        # sum is 2I, so the residual is |I|_F
        assert failure.residual == pytest.approx(np.sqrt(2))

    def test_non_orthonormal_basis(self):
        rep = inst.validate(inst.IdealNonDegenerate(np.array([[1, 1], [0, 1]])))
        assert not rep.passed

    def test_unnormalized_disturbed_state(self):
        rep = inst.validate(inst.NonIdeal(np.eye(2), np.column_stack([KET0, 2 * KET1])))
        assert [c.name for c in rep.failures] == ["disturbed states normalized"]

    def test_degenerate_projectors_must_resolve_identity(self):
        good = inst.IdealDegenerate.from_partition(np.eye(3), [[0], [1, 2]])
        assert good.degeneracies == (1, 2)
        assert inst.validate(good).passed
        missing = inst.IdealDegenerate((np.diag([1, 0, 0]), np.diag([0, 1, 0])))
        assert "projectors resolve identity" in [c.name for c in inst.validate(missing).failures]
        overlapping = inst.IdealDegenerate((np.diag([1, 1, 0]), np.diag([0, 1, 1])))
        assert "projectors mutually orthogonal" in [c.name for c in inst.validate(overlapping).failures]

    def test_macroscopic_images_normalized(self):
        u = np.zeros((2, 1, 2, 1))
        u[0, 0, 0, 0] = 1
        u[1, 0, 1, 0] = 0.5
        rep = inst.validate(inst.Macroscopic(u))
        assert [c.name for c in rep.failures] == ["images normalized"]

    def test_macroscopic_m0_range(self):
        u = np.ones((2, 1, 2, 1)) * s2
        assert not inst.validate(inst.Macroscopic(u, m0=3)).passed

    def test_downstream_rejects_invalid(self):
        with pytest.raises(inst.InvalidInstrument, match="Kraus completeness"):
            inst.isometry(inst.Generalized((np.eye(2), np.eye(2))))


class TestIsometry:
    def test_ideal_qubit_action(self):
        v = inst.isometry(inst.IdealNonDegenerate.computational(2))
        # |0> -> |0> (x) |a for q=0>, which sits at pointer index 1
        np.testing.assert_array_equal(v @ KET0, np.kron(KET0, ket(1, 3)))
        np.testing.assert_array_equal(v @ KET1, np.kron(KET1, ket(2, 3)))

    def test_non_ideal_disturbs_system(self):
        v = inst.isometry(nonideal_plus())
        np.testing.assert_allclose(v @ KET1, np.kron(PLUS, ket(2, 3)))
        # images of |0> and |1> differ in the pointer, so they stay orthogonal
        assert abs(np.vdot(v @ KET0, v @ KET1)) == 0
        assert is_isometry(v)[0]

    def test_reset_kraus_isometry_preserves_norm(self):
        v = inst.isometry(inst.Generalized((np.outer(KET0, KET0), np.outer(KET0, KET1))))
        assert np.linalg.norm(v @ PLUS) == pytest.approx(1, abs=1e-15)

    def test_degenerate_keeps_eigenspace_vectors(self):
        spec = inst.IdealDegenerate.from_partition(np.eye(3), [[0], [1, 2]])
        v = inst.isometry(spec)
        np.testing.assert_array_equal(v @ ket(2, 3), np.kron(ket(2, 3), ket(2, 3)))

    def test_macroscopic_spreads_over_microscopic_labels(self):
        u = np.zeros((2, 2, 2, 2))
        u[0, 0, 0, 0] = u[0, 0, 1, 1] = s2
        u[1, 0, 1, 0] = 1
        v = inst.isometry(inst.Macroscopic(u, m0=0))
        # pointer index a*mu + m: outcome 0 -> a=1 -> indices 2, 3
        expected = s2 * (np.kron(KET0, ket(2, 6)) + np.kron(KET1, ket(3, 6)))
        np.testing.assert_allclose(v @ KET0, expected)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.sampled_from(sampling.CLASSES), st.integers(2, 4))
    def test_every_random_instrument_is_isometric(self, seed, kind, d):
        spec = sampling.random_instrument(np.random.default_rng(seed), kind, d)
        ok, residual = is_isometry(inst.isometry(spec))
        assert ok and residual <= 1e-10


class TestKrausExtraction:
    def test_ideal_gives_eigenprojectors_and_zero_ready_slot(self):
        spec = inst.IdealNonDegenerate.computational(2)
        ks = inst.kraus_from_isometry(inst.isometry(spec), spec.pointer_dim)
        np.testing.assert_array_equal(ks[0], np.zeros((2, 2)))
        np.testing.assert_array_equal(ks[1], np.outer(KET0, KET0))
        np.testing.assert_array_equal(ks[2], np.outer(KET1, KET1))

    def test_non_ideal_gives_mu_q_bra_q(self):
        spec = nonideal_plus()
        ks = inst.kraus_from_isometry(inst.isometry(spec), spec.pointer_dim)
        np.testing.assert_allclose(ks[2], np.outer(PLUS, KET1))
        np.testing.assert_allclose(ks[1], np.outer(KET0, KET0))

    def test_rejects_non_isometry(self):
        with pytest.raises(ValueError, match="not an isometry"):
            inst.kraus_from_isometry(2 * np.eye(4)[:, :2], 2)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 4), st.integers(1, 4))
    def test_round_trip(self, seed, d, n):
        spec = sampling.random_generalized(np.random.default_rng(seed), d, n)
        back = inst.kraus_from_isometry(inst.isometry(spec), spec.pointer_dim)
        for a, b in zip(back, spec.kraus):
            assert np.abs(a - b).max() <= 1e-12
        assert np.linalg.norm(sum(m.conj().T @ m for m in back) - np.eye(d)) <= 1e-10


class TestPointerProjector:
    def test_ideal_rank_one(self):
        p = inst.pointer_projector(inst.IdealNonDegenerate.computational(2), 0)
        np.testing.assert_array_equal(p.matrix, np.diag([0, 1, 0]))
        assert p.rank == 1

    def test_macroscopic_coarse_rank(self):
        u = sampling.random_macroscopic(np.random.default_rng(1), 2, micro_dim=2)
        assert inst.pointer_projector(u, 1).rank == 2

    def test_unknown_outcome(self):
        with pytest.raises(inst.UnknownOutcome):
            inst.pointer_projector(inst.IdealNonDegenerate.computational(2), 2)
        with pytest.raises(inst.UnknownOutcome):
            inst.effect(inst.Generalized((np.eye(2),)), -1)

    @pytest.mark.parametrize("kind", sampling.CLASSES)
    def test_orthogonal_and_resolve_identity(self, kind):
        spec = sampling.random_instrument(np.random.default_rng(3), kind, 3)
        ps = [inst.pointer_projector(spec, k).matrix for k in range(spec.n_outcomes)]
        for i, a in enumerate(ps):
            for j, b in enumerate(ps):
                if i != j:
                    assert not (a @ b).any()
        ready = np.zeros(spec.pointer_dim)
        ready[inst.ready_indices(spec)] = 1
        np.testing.assert_array_equal(sum(ps) + np.diag(ready), np.eye(spec.pointer_dim))


@pytest.mark.parametrize("kind", sampling.CLASSES)
def test_effects_match_isometry(kind):
    """The analytic effect equals V^dag (I (x) P_q) V."""
    spec = sampling.random_instrument(np.random.default_rng(11), kind, 3)
    v = inst.isometry(spec)
    for q in range(spec.n_outcomes):
        lifted = np.kron(np.eye(3), inst.pointer_projector(spec, q).matrix)
        np.testing.assert_allclose(inst.effect(spec, q), v.conj().T @ lifted @ v, atol=1e-12)
