"""Linearized Langevin dynamics: drift, diffusion, stability, covariance.

Fluctuation operators are ordered ``u = (a_1..a_M, b_1..b_N, a_1^+..a_M^+,
b_1^+..b_N^+)``.  The equations of motion read ``du/dt = A u + noise`` with

    A = -[[E, F], [F*, E*]],
    E = i H + diag(kappa, gamma),
    F = [[0, i g], [i g^T, 0]],

where ``H`` is the bare-mode coefficient matrix.  ``F`` holds the
counter-rotating optomechanical terms that the dark-mode analysis drops.  The
symmetrized covariance ``V`` solves ``A V + V A^T = -Q`` with a plain
transpose and ``n_j = V[b_j^+, b_j] - 1/2``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (EigensolverFailure, NoConvergence, PreconditionViolated,
                     SingularKroneckerSystem, UnstableSystem)
from .network import NetworkSpec, build_coefficient_matrix

log = logging.getLogger(__name__)

TOL_STAB = 1e-12
LYAP_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class DriftMatrix:
    """Drift matrix ``A`` with its blocks and mode counts."""

    A: np.ndarray
    E: np.ndarray
    F: np.ndarray
    M: int
    N: int

    @property
    def dim(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True, eq=False)
class DiffusionMatrix:
    """``Q = [[0, P], [P, 0]]`` with ``P = diag(kappa, gamma (2 nbar + 1))``."""

    Q: np.ndarray
    P: np.ndarray


def build_drift(spec: NetworkSpec) -> DriftMatrix:
    """Drift matrix of the linearized model. Raises ``InvalidSpec``."""
    cm = build_coefficient_matrix(spec)
    M, N = spec.M, spec.N
    n = M + N
    E = 1j * cm.H + np.diag(np.concatenate([spec.kappa, spec.gamma]))
    F = np.zeros((n, n), dtype=complex)
    F[:M, M:] = 1j * spec.g
    F[M:, :M] = 1j * spec.g.T
    A = -np.block([[E, F], [F.conj(), E.conj()]])
    return DriftMatrix(A, E, F, M, N)


def build_diffusion(spec: NetworkSpec) -> DiffusionMatrix:
    P = np.diag(np.concatenate([spec.kappa, spec.gamma * (2.0 * spec.nbar + 1.0)]))
    Z = np.zeros_like(P)
    return DiffusionMatrix(np.block([[Z, P], [P, Z]]), P)


@dataclass(frozen=True)
class StabilityResult:
    stable: bool
    max_real_eig: float


def _eigvals(A: np.ndarray) -> np.ndarray:
    try:
        w = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc)) from exc
    if not np.all(np.isfinite(w)):
        raise EigensolverFailure("non-finite eigenvalues")
    return w


def stability(A, tol_stab: float = TOL_STAB) -> StabilityResult:
    """Stable when every eigenvalue has real part below ``-tol_stab``.

    Accepts a :class:`DriftMatrix` or a plain array.
    """
    A = getattr(A, "A", A)
    margin = float(_eigvals(np.asarray(A)).real.max())
    return StabilityResult(margin < -tol_stab, margin)


def lyapunov_residual(A: np.ndarray, V: np.ndarray, Q: np.ndarray) -> float:
    """``||A V + V A^T + Q||_F``."""
    return float(np.linalg.norm(A @ V + V @ A.T + Q))


def _kronecker_solve(A: np.ndarray, Q: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    w = _eigvals(A)
    pair = np.abs(w[:, None] + w[None, :]).min()
    if pair <= 1e-13 * max(np.linalg.norm(A, 2), 1.0):
        raise SingularKroneckerSystem(f"min |lambda_i + lambda_j| = {pair:.3e}")
    eye = np.eye(n)
    K = np.kron(A, eye) + np.kron(eye, A)
    rhs = -Q.reshape(-1)
    try:
        lu = scipy.linalg.lu_factor(K, check_finite=False)
        x = scipy.linalg.lu_solve(lu, rhs, check_finite=False)
        # one step of iterative refinement
        x = x + scipy.linalg.lu_solve(lu, rhs - K @ x, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularKroneckerSystem(str(exc)) from exc
    return x.reshape(n, n)


def solve_lyapunov(A, Q, method: str = "kronecker", check_stability: bool = True,
                   tol_stab: float = TOL_STAB) -> np.ndarray:
    """Solve ``A V + V A^T = -Q`` for ``V``.

    Parameters
    ----------
    A : ndarray or DriftMatrix
    Q : ndarray or DiffusionMatrix
    method : {"kronecker", "schur"}
        ``"kronecker"`` solves the vectorized system of size ``dim**2``;
        ``"schur"`` uses Bartels-Stewart via :func:`scipy.linalg.solve_sylvester`.
    check_stability : bool
        Reject unstable ``A`` up front.

    Raises
    ------
    UnstableSystem
    SingularKroneckerSystem
        When ``A`` is numerically marginal.
    """
    A = np.asarray(getattr(A, "A", A))
    Q = np.asarray(getattr(Q, "Q", Q))
    if check_stability:
        st = stability(A, tol_stab)
        if not st.stable:
            raise UnstableSystem(f"max Re(eig) = {st.max_real_eig:.3e}")
    if method == "kronecker":
        V = _kronecker_solve(A, Q)
    elif method == "schur":
        V = scipy.linalg.solve_sylvester(A, A.T, -Q)
    else:
        raise ValueError(f"unknown method {method!r}")
    res = lyapunov_residual(A, V, Q)
    qn = np.linalg.norm(Q)
    if res > LYAP_RTOL * qn:
        log.warning("Lyapunov residual %.3e exceeds %.1e * ||Q||", res, LYAP_RTOL)
    return V


@dataclass(frozen=True, eq=False)
class CoolingResult:
    """Steady state of the linearized model.

    ``V`` and ``n_f`` are ``None`` when the system is unstable.
    """

    stable: bool
    max_real_eig: float
    drift: DriftMatrix
    V: np.ndarray | None
    n_f: np.ndarray | None
    imag_residual: float
    lyapunov_residual: float

    def to_dict(self) -> dict:
        return {
            "stable": self.stable,
            "max_real_eig": self.max_real_eig,
            "n_f": None if self.n_f is None else [float(x) for x in self.n_f],
            "imag_residual": self.imag_residual,
            "lyapunov_residual": self.lyapunov_residual,
        }


def phonon_numbers_from_covariance(V: np.ndarray, M: int, N: int) -> tuple[np.ndarray, float]:
    """Read ``n_j = V[2M+N+j, M+j] - 1/2`` (1-based) and the dropped imaginary part."""
    n = M + N
    j = np.arange(N)
    vals = V[n + M + j, M + j]
    return vals.real - 0.5, float(np.abs(vals.imag).max(initial=0.0))


def final_phonon_numbers(spec: NetworkSpec, method: str = "kronecker",
                         tol_stab: float = TOL_STAB) -> CoolingResult:
    """Drift, stability, Lyapunov solve and phonon numbers in one call.

    Instability is reported through ``stable=False``, not raised.
    """
    drift = build_drift(spec)
    diff = build_diffusion(spec)
    st = stability(drift.A, tol_stab)
    if not st.stable:
        return CoolingResult(False, st.max_real_eig, drift, None, None, 0.0, float("nan"))
    V = solve_lyapunov(drift.A, diff.Q, method=method, check_stability=False)
    n_f, im = phonon_numbers_from_covariance(V, spec.M, spec.N)
    res = lyapunov_residual(drift.A, V, diff.Q)
    return CoolingResult(True, st.max_real_eig, drift, V, n_f, im, res)


# Mean-value fixed point of the driven, pre-linearized model

@dataclass(frozen=True, eq=False)
class SteadyStateMeans:
    """Fixed point of the mean-value equations.

    Attributes
    ----------
    a, b : ndarray
        Mean amplitudes of the optical and mechanical modes.
    delta : ndarray
        Detunings shifted by the static mechanical displacement.
    g : ndarray
        Linearized couplings ``g_kj = g_tilde_kj * a_k``.
    residual : float
        Largest absolute residual of the stationary equations.
    iterations : int
    alternatives : tuple
        Distinct fixed points reached from extra initial conditions.
    """

    a: np.ndarray
    b: np.ndarray
    delta: np.ndarray
    g: np.ndarray
    residual: float
    iterations: int
    alternatives: tuple = ()

    @property
    def multistable(self) -> bool:
        return len(self.alternatives) > 0


def _mean_field_map(a, b, Lam, dtil, omega, gt, kappa, gamma, xi, eta):
    delta = dtil + gt @ (2.0 * b.real)
    a_new = np.linalg.solve(np.diag(kappa + 1j * delta) + 1j * xi, -1j * Lam)
    src = gt.T @ (np.abs(a_new) ** 2)
    b_new = np.linalg.solve(np.diag(gamma + 1j * omega) + 1j * eta, -1j * src)
    return a_new, b_new


def mean_field_residual(a, b, Lam, dtil, omega, gt, kappa, gamma, xi, eta) -> float:
    """Max absolute value of the right-hand sides of the mean-value equations."""
    delta = dtil + gt @ (2.0 * b.real)
    ra = -(kappa + 1j * delta) * a - 1j * (xi @ a) - 1j * Lam
    rb = -(gamma + 1j * omega) * b - 1j * (gt.T @ np.abs(a) ** 2) - 1j * (eta @ b)
    return float(np.abs(np.concatenate([ra, rb])).max(initial=0.0))


def _iterate(a, b, args, damping, max_iter, tol):
    resid = np.inf
    for it in range(1, max_iter + 1):
        a1, b1 = _mean_field_map(a, b, *args)
        a = (1 - damping) * a + damping * a1
        b = (1 - damping) * b + damping * b1
        resid = mean_field_residual(a, b, *args)
        if resid <= tol:
            return a, b, resid, it
    raise NoConvergence(f"no fixed point after {max_iter} iterations "
                        f"(residual {resid:.3e})", residual=resid, iterations=max_iter)


def steady_state_means(Lam, delta_tilde, omega, g_tilde, kappa, gamma, xi=None, eta=None,
                       damping: float = 0.5, max_iter: int = 100_000,
                       probes: int = 0, seed=None) -> SteadyStateMeans:
    """Solve the stationary mean-value equations by damped fixed-point iteration.

    Parameters
    ----------
    Lam : array_like, shape (M,)
        Drive amplitudes.
    delta_tilde : array_like, shape (M,)
        Bare detunings from the drive.
    omega : array_like, shape (N,)
    g_tilde : array_like, shape (M, N)
        Single-photon couplings (real).
    kappa, gamma : array_like
        Positive decay rates.
    xi, eta : array_like, optional
        Hermitian hopping matrices.
    damping : float
        Weight of the new iterate.
    probes : int
        Extra random initial conditions used to detect other fixed points.

    Raises
    ------
    PreconditionViolated
        Non-positive dissipation.
    NoConvergence
        Iteration cap hit from the primary initial condition.
    """
    Lam = np.atleast_1d(np.asarray(Lam, dtype=complex))
    dtil = np.atleast_1d(np.asarray(delta_tilde, dtype=float))
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    M, N = len(Lam), len(omega)
    gt = np.asarray(g_tilde, dtype=float).reshape(M, N)
    kappa = np.broadcast_to(np.asarray(kappa, dtype=float), (M,))
    gamma = np.broadcast_to(np.asarray(gamma, dtype=float), (N,))
    if np.any(kappa <= 0) or np.any(gamma <= 0):
        raise PreconditionViolated("mean-value iteration needs positive dissipation")
    xi = np.zeros((M, M), complex) if xi is None else np.asarray(xi, dtype=complex)
    eta = np.zeros((N, N), complex) if eta is None else np.asarray(eta, dtype=complex)
    args = (Lam, dtil, omega, gt, kappa, gamma, xi, eta)
    tol = 1e-10 * max(float(np.abs(Lam).max(initial=0.0)), 1.0)

    a0 = np.linalg.solve(np.diag(kappa + 1j * dtil) + 1j * xi, -1j * Lam)
    b0 = np.zeros(N, dtype=complex)
    a, b, resid, it = _iterate(a0, b0, args, damping, max_iter, tol)

    alts = []
    rng = np.random.default_rng(seed)
    scale = max(float(np.abs(a).max(initial=0.0)), 1.0)
    for _ in range(probes):
        ai = a0 + scale * (rng.normal(size=M) + 1j * rng.normal(size=M))
        bi = scale * (rng.normal(size=N) + 1j * rng.normal(size=N))
        try:
            ap, bp, _, _ = _iterate(ai, bi, args, damping, max_iter, tol)
        except NoConvergence:
            continue
        cand = np.concatenate([ap, bp])
        known = [np.concatenate([a, b])] + [np.concatenate(x) for x in alts]
        if all(np.abs(cand - k).max() > 1e-6 * max(np.abs(k).max(), 1.0) for k in known):
            alts.append((ap, bp))
    delta = dtil + gt @ (2.0 * b.real)
    return SteadyStateMeans(a, b, delta, gt * a[:, None], resid, it, tuple(alts))
