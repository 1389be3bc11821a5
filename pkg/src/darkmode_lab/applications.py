"""Adapters expressing auxiliary systems through the core dark-mode machinery.

* two mechanical chains hanging off one optical mode,
* a driven atom with one excited level and N lower levels,
* two two-level atoms sharing a bosonic bath (single-excitation sector).

Every report here is produced by :func:`darkmode.count_dark_modes`; the
adapters only build the arrowhead form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .darkmode import DarkModeReport, Tolerances, count_dark_modes, mode_coefficients
from .dynamics import CoolingResult, final_phonon_numbers
from .network import NetworkSpec
from .spectral import ArrowheadForm, to_normal_form


# Mechanical chains

@dataclass(frozen=True)
class ChainSpec:
    """Optical mode coupled to the first site of two open mechanical chains.

    Mechanical modes are ordered left chain (sites 1..N_l) then right chain.
    The optomechanical couplings enter with a minus sign, as in the chain
    Hamiltonian; this does not affect any dark-mode count.
    """

    N_l: int
    N_r: int
    omega_m: float = 1.0
    eta: float = 0.2
    g_l1: float = 0.2
    g_r1: float = 0.2
    delta: float = 1.0
    kappa: float = 0.2
    gamma: float = 1e-5
    nbar: float = 1e3

    def __post_init__(self):
        if self.N_l < 1 or self.N_r < 1:
            raise ValueError("chain lengths must be at least 1")


def chain_frequencies(n: int, omega_m: float, eta: float) -> np.ndarray:
    """Closed-form normal frequencies ``omega_m + 2 eta cos(k pi / (n + 1))``, ascending."""
    k = np.arange(1, n + 1)
    return np.sort(omega_m + 2.0 * eta * np.cos(k * np.pi / (n + 1)))


def _chain_hopping(n: int, eta: float) -> np.ndarray:
    return eta * (np.eye(n, k=1) + np.eye(n, k=-1))


@dataclass(frozen=True, eq=False)
class ChainNetwork:
    spec: NetworkSpec
    omega_left: np.ndarray
    omega_right: np.ndarray


def build_chain_network(chain: ChainSpec) -> ChainNetwork:
    """Network spec of the two-chain system plus closed-form chain spectra."""
    nl, nr = chain.N_l, chain.N_r
    N = nl + nr
    eta = np.zeros((N, N))
    eta[:nl, :nl] = _chain_hopping(nl, chain.eta)
    eta[nl:, nl:] = _chain_hopping(nr, chain.eta)
    g = np.zeros((1, N))
    g[0, 0] = -chain.g_l1
    g[0, nl] = -chain.g_r1
    spec = NetworkSpec.create(delta=[chain.delta], omega=np.full(N, chain.omega_m), g=g,
                              eta=eta, kappa=chain.kappa, gamma=chain.gamma,
                              nbar=chain.nbar)
    return ChainNetwork(spec, chain_frequencies(nl, chain.omega_m, chain.eta),
                        chain_frequencies(nr, chain.omega_m, chain.eta))


def numeric_chain_frequencies(n: int, omega_m: float, eta: float) -> np.ndarray:
    H = omega_m * np.eye(n) + _chain_hopping(n, eta)
    return np.linalg.eigvalsh(H)


@dataclass(frozen=True)
class ChainPrediction:
    """Dark count from the rank analysis and from the closed-form spectra."""

    dark_count: int
    predicted: int
    rationale: str
    report: DarkModeReport

    @property
    def agree(self) -> bool:
        return self.dark_count == self.predicted


def chain_dark_prediction(chain: ChainSpec, tolerances: Tolerances | None = None) -> ChainPrediction:
    """Count chain dark modes two ways.

    Every chain normal mode overlaps the first site, so all effective
    couplings are nonzero.  A dark mode appears for each frequency shared by
    both chains, i.e. ``k / (N_l + 1) == k' / (N_r + 1)``, which has
    ``gcd(N_l + 1, N_r + 1) - 1`` solutions.
    """
    nl, nr = chain.N_l, chain.N_r
    report = count_dark_modes(to_normal_form(build_chain_network(chain).spec), tolerances)
    shared = math.gcd(nl + 1, nr + 1) - 1
    if nl == nr:
        predicted = nl
        why = "equal lengths: every frequency is shared, one dark mode per level"
    else:
        predicted = shared
        parity = {(1, 1): "both lengths odd: omega_m is shared, so at least one dark mode",
                  (0, 0): "both lengths even: omega_m is absent from both spectra",
                  }.get((nl % 2, nr % 2), "mixed parity: omega_m lies in one spectrum only")
        why = (f"{parity}; shared levels k/(N_l+1) = k'/(N_r+1) number "
               f"gcd({nl + 1}, {nr + 1}) - 1 = {shared}")
    return ChainPrediction(report.dark_count, predicted, why, report)


def chain_cooling(chain: ChainSpec) -> CoolingResult:
    return final_phonon_numbers(build_chain_network(chain).spec)


# Driven multi-level atom

@dataclass(frozen=True)
class AtomSystem:
    """Excited level driven to ``N`` lower levels with amplitudes ``Omega`` and detunings ``Delta``."""

    drives: tuple
    detunings: tuple

    def __post_init__(self):
        object.__setattr__(self, "drives", tuple(complex(x) for x in self.drives))
        object.__setattr__(self, "detunings", tuple(float(x) for x in self.detunings))
        if len(self.drives) < 1 or len(self.drives) != len(self.detunings):
            raise ValueError("need N >= 1 drives and matching detunings")

    @property
    def N(self) -> int:
        return len(self.drives)


@dataclass(frozen=True, eq=False)
class StateReport:
    """Dark/bright states in the original level order.

    ``dark_states`` and ``bright_states`` are amplitude vectors annihilated
    by (respectively spanning) the coupling.  The ``*_coefficients`` fields
    are the same states in mode-operator form (complex conjugates).
    """

    dark_count: int
    dark_states: np.ndarray
    bright_states: np.ndarray
    report: DarkModeReport
    form: ArrowheadForm
    order: np.ndarray

    @property
    def dark_coefficients(self) -> np.ndarray:
        return mode_coefficients(self.dark_states)

    @property
    def bright_coefficients(self) -> np.ndarray:
        return mode_coefficients(self.bright_states)


def _unsort(vectors: np.ndarray, order: np.ndarray) -> np.ndarray:
    out = np.zeros_like(vectors)
    out[:, order] = vectors
    return out


def atom_form(atoms: AtomSystem) -> tuple[ArrowheadForm, np.ndarray]:
    """Arrowhead with apex 0, border ``Omega_j`` and diagonal ``-Delta_j`` (sorted)."""
    diag = -np.asarray(atoms.detunings)
    order = np.argsort(diag, kind="stable")
    C = np.asarray(atoms.drives)[order][None, :]
    return ArrowheadForm.from_arrowhead([0.0], diag[order], C), order


def _state_report(form, order, tolerances) -> StateReport:
    rep = count_dark_modes(form, tolerances)
    return StateReport(rep.dark_count, _unsort(rep.dark_vectors, order),
                       _unsort(rep.all_bright_vectors(), order), rep, form, order)


def atom_dark_states(atoms: AtomSystem, tolerances: Tolerances | None = None) -> StateReport:
    """Dark and bright lower-level superpositions of a driven atom."""
    form, order = atom_form(atoms)
    return _state_report(form, order, tolerances)


# Two atoms in a common bath

@dataclass(frozen=True)
class DfsSystem:
    """Two two-level atoms coupled to ``M`` bath modes.

    ``J1[k]`` and ``J2[k]`` couple atom 1 and atom 2 to bath mode ``k``.
    """

    omega01: float
    omega02: float
    bath: tuple
    J1: tuple
    J2: tuple

    def __post_init__(self):
        for name in ("J1", "J2"):
            object.__setattr__(self, name, tuple(complex(x) for x in getattr(self, name)))
        object.__setattr__(self, "bath", tuple(float(x) for x in self.bath))
        if not (len(self.bath) == len(self.J1) == len(self.J2) >= 1):
            raise ValueError("bath, J1 and J2 must have the same positive length")


def single_excitation_matrix(dfs: DfsSystem) -> np.ndarray:
    """Hamiltonian in the basis (bath photons..., |eg>, |ge>)."""
    M = len(dfs.bath)
    H = np.zeros((M + 2, M + 2), dtype=complex)
    H[:M, :M] = np.diag(dfs.bath)
    H[:M, M] = dfs.J1
    H[:M, M + 1] = dfs.J2
    H[M:, :M] = H[:M, M:].conj().T
    H[M, M] = dfs.omega01
    H[M + 1, M + 1] = dfs.omega02
    return H


def dfs_form(dfs: DfsSystem) -> tuple[ArrowheadForm, np.ndarray]:
    """Bath modes as the type-a side, the atomic pair as the type-b side."""
    atoms = np.array([dfs.omega01, dfs.omega02])
    order = np.argsort(atoms, kind="stable")
    C = np.column_stack([dfs.J1, dfs.J2])[:, order]
    Delta = np.asarray(dfs.bath)
    return ArrowheadForm(Delta, atoms[order], C, np.eye(len(Delta), dtype=complex),
                         np.eye(2, dtype=complex)), order


def dfs_single_excitation(dfs: DfsSystem, tolerances: Tolerances | None = None) -> StateReport:
    """Atomic states decoupled from every bath mode.

    With ``omega01 == omega02`` and ``J2 = lam * J1`` the dark amplitude
    vector over ``(|eg>, |ge>)`` is ``(lam, -1)`` up to phase; its
    mode-operator form is ``(conj(lam), -1)``.
    """
    form, order = dfs_form(dfs)
    return _state_report(form, order, tolerances)
