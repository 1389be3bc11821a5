import numpy as np
import pytest

from darkmode_lab.applications import (AtomSystem, ChainSpec, DfsSystem, atom_dark_states,
                                       atom_form, build_chain_network, chain_cooling,
                                       chain_dark_prediction, chain_frequencies, dfs_form,
                                       dfs_single_excitation, numeric_chain_frequencies,
                                       single_excitation_matrix)
from darkmode_lab.darkmode import count_dark_modes, mode_coefficients
from darkmode_lab.spectral import ArrowheadForm


def phase_aligned(u, v):
    """``|<u, v>| == |u| |v|`` up to rounding: same ray."""
    return abs(abs(np.vdot(u, v)) - np.linalg.norm(u) * np.linalg.norm(v)) < 1e-10


class TestChains:
    @pytest.mark.parametrize("n", range(1, 33))
    def test_closed_form_frequencies(self, n):
        np.testing.assert_allclose(numeric_chain_frequencies(n, 1.0, 0.2),
                                   chain_frequencies(n, 1.0, 0.2), atol=1e-10)

    def test_short_chain_spectra(self):
        eta = 0.2
        np.testing.assert_allclose(chain_frequencies(2, 1, eta), [1 - eta, 1 + eta], atol=1e-15)
        s3 = np.sqrt(3) * eta
        np.testing.assert_allclose(chain_frequencies(5, 1, eta),
                                   [1 - s3, 1 - eta, 1, 1 + eta, 1 + s3], atol=1e-15)
        assert chain_frequencies(1, 1, eta)[0] == pytest.approx(1.0)
        f8 = chain_frequencies(8, 1, eta)
        assert np.isclose(f8, 1 - eta).any() and np.isclose(f8, 1 + eta).any()

    @pytest.mark.parametrize("nl,nr,dark", [(2, 5, 2), (2, 8, 2), (1, 1, 1)])
    def test_dark_counts(self, nl, nr, dark):
        p = chain_dark_prediction(ChainSpec(nl, nr))
        assert p.dark_count == dark and p.agree

    def test_parity_rule_against_rank(self):
        for nl in range(1, 16):
            for nr in range(1, 17 - nl):
                if nl == nr:
                    continue
                p = chain_dark_prediction(ChainSpec(nl, nr))
                assert p.agree, (nl, nr, p.dark_count, p.predicted)
                assert "gcd" in p.rationale

    def test_network_layout(self):
        net = build_chain_network(ChainSpec(2, 3))
        spec = net.spec
        assert (spec.M, spec.N) == (1, 5)
        assert np.count_nonzero(spec.g) == 2 and spec.g[0, 0] == spec.g[0, 2] == -0.2
        assert spec.eta[1, 2] == 0 and spec.eta[0, 1] == 0.2

    def test_chain_with_dark_modes_does_not_cool(self):
        res = chain_cooling(ChainSpec(2, 5))
        assert res.stable and res.n_f.max() > 1

    def test_rejects_empty_chain(self):
        with pytest.raises(ValueError):
            ChainSpec(0, 3)


class TestAtoms:
    def test_three_equal_drives(self):
        rep = atom_dark_states(AtomSystem([1, 1, 1], [0.2, 0.2, 0.2]))
        assert rep.dark_count == 2
        assert phase_aligned(rep.bright_coefficients[0], np.ones(3) / np.sqrt(3))

    def test_single_level(self):
        assert atom_dark_states(AtomSystem([0.3], [0.0])).dark_count == 0

    def test_distinct_detunings(self):
        rep = atom_dark_states(AtomSystem([0.1, 0.2, 0.3, 0.4], [0.0, 0.1, 0.2, 0.3]))
        assert rep.dark_count == 0

    def test_complex_drives(self, rng):
        Om = rng.normal(size=5) + 1j * rng.normal(size=5)
        rep = atom_dark_states(AtomSystem(Om, [0.5] * 5))
        assert rep.dark_count == 4
        assert phase_aligned(rep.bright_coefficients[0], Om)
        for d in rep.dark_states:
            assert abs(Om @ d) < 1e-12

    def test_detuning_shift_invariance(self, rng):
        Om = rng.normal(size=4)
        a = atom_dark_states(AtomSystem(Om, [0.1, 0.1, 0.3, 0.3]))
        b = atom_dark_states(AtomSystem(Om, [0.6, 0.6, 0.8, 0.8]))
        assert a.dark_count == b.dark_count == 2

    def test_unsorted_detunings_restore_level_order(self):
        rep = atom_dark_states(AtomSystem([1, 2, 1], [0.5, 0.1, 0.5]))
        assert rep.dark_count == 1
        d = rep.dark_states[0]
        assert abs(d[1]) < 1e-15 and abs(abs(d[0]) - abs(d[2])) < 1e-12

    def test_adapter_equals_core(self, rng):
        Om = rng.normal(size=4) + 1j * rng.normal(size=4)
        det = [0.3, 0.1, 0.3, 0.2]
        form, order = atom_form(AtomSystem(Om, det))
        direct = count_dark_modes(ArrowheadForm.from_arrowhead(
            [0.0], -np.asarray(det)[order], Om[order][None, :]))
        rep = atom_dark_states(AtomSystem(Om, det))
        assert rep.report.dark_count == direct.dark_count
        np.testing.assert_array_equal(rep.report.dark_vectors, direct.dark_vectors)


class TestDfs:
    def _system(self, lam, M=4, w=(1.0, 1.0), seed=0):
        r = np.random.default_rng(seed)
        J1 = r.normal(size=M) + 1j * r.normal(size=M)
        return DfsSystem(w[0], w[1], r.uniform(0.5, 1.5, M), J1, lam * J1)

    def test_symmetric_pair(self):
        rep = dfs_single_excitation(self._system(1.0))
        assert rep.dark_count == 1
        assert phase_aligned(rep.dark_states[0], np.array([1, -1]) / np.sqrt(2))

    def test_nondegenerate_atoms(self):
        sysm = DfsSystem(1.0, 1.3, [1.0, 1.2], [0.1, 0.2], [0.3, -0.1])
        assert dfs_single_excitation(sysm).dark_count == 0

    def test_complex_ratio_twelve_modes(self):
        lam = 0.7 - 1.3j
        sysm = self._system(lam, M=12, seed=3)
        rep = dfs_single_excitation(sysm)
        assert rep.dark_count == 1
        H = single_excitation_matrix(sysm)
        d = np.concatenate([np.zeros(12), rep.dark_states[0]])
        assert np.linalg.norm(H[:12] @ d) <= 1e-10
        # amplitude form (lam, -1); operator form (conj(lam), -1)
        assert phase_aligned(rep.dark_states[0], [lam, -1])
        assert phase_aligned(rep.dark_coefficients[0], [np.conj(lam), -1])

    def test_adapter_equals_core(self):
        sysm = self._system(0.4 + 0.2j, M=5)
        form, _ = dfs_form(sysm)
        direct = count_dark_modes(form)
        np.testing.assert_array_equal(dfs_single_excitation(sysm).report.dark_vectors,
                                      direct.dark_vectors)

    def test_mode_coefficients_is_involution(self, rng):
        x = rng.normal(size=3) + 1j * rng.normal(size=3)
        np.testing.assert_array_equal(mode_coefficients(mode_coefficients(x)), x)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            DfsSystem(1.0, 1.0, [1.0, 2.0], [0.1], [0.1])
