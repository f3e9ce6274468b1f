"""Numerical evidence that no single observable measures entanglement.

For any orthonormal measurement basis ``|O_0> .. |O_3>`` of the two-qubit
space, define three 4x4 matrices built from the spin-flip operator
``Y = sigma_y (x) sigma_y``:

    K_ij     = <O_i| Y |O_j*>      (asterisk: componentwise conjugation)
    S_ij     = <O_j*|O_i>          (change of basis to the conjugate basis)
    sigma_ij = <O_i| Y |O_j>

``K`` is symmetric, ``S`` is unitary, ``det(sigma) = 1``, and
``K = sigma S^дagger``, so ``|det K| = 1`` and in particular ``det K`` can
never vanish. Writing the squared concurrence of a state with basis
coefficients ``m_i exp(i phi_i)`` as the quadruple sum

    C^2 = sum_ijkl m_i m_j m_k m_l exp(i(phi_k + phi_l - phi_i - phi_j)) K_ij conj(K_kl)

shows that outcome probabilities ``p_i = m_i^2`` alone cannot determine
C^2: this module constructs, for any basis, pairs of states with identical
probabilities and widely different concurrence by sweeping the relative
phases at fixed moduli.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.stats import qmc

from .sampling import SeededStream, haar_unitary
from .states import PAULI_Y, PureState, concurrence_sq, normalize

__all__ = [
    "ORTHONORMALITY_ATOL",
    "SIGMA_YY",
    "CounterexampleSearchError",
    "ObservableBasis",
    "KMatrixReport",
    "Counterexample",
    "k_matrix",
    "s_matrix",
    "sigma_matrix",
    "verify_lemma",
    "concurrence_sq_phase_expansion",
    "state_from_basis_coefficients",
    "counterexample",
]

ORTHONORMALITY_ATOL = 1e-10

SIGMA_YY = np.kron(PAULI_Y, PAULI_Y)


class CounterexampleSearchError(RuntimeError):
    """Raised when the phase sweep cannot separate the concurrence values."""


@dataclass(frozen=True, eq=False)
class ObservableBasis:
    """Orthonormal basis of the two-qubit space, stored as matrix columns."""

    vectors: np.ndarray

    def __post_init__(self) -> None:
        b = np.array(self.vectors, dtype=complex)
        if b.shape != (4, 4):
            raise ValueError(f"expected a 4x4 basis matrix, got {b.shape}")
        gram = b.conj().T @ b
        residual = float(np.max(np.abs(gram - np.eye(4))))
        if residual > ORTHONORMALITY_ATOL:
            raise ValueError(
                f"basis vectors are not orthonormal (max Gram residual {residual:.3g})"
            )
        b.setflags(write=False)
        object.__setattr__(self, "vectors", b)

    @classmethod
    def standard(cls) -> "ObservableBasis":
        return cls(np.eye(4, dtype=complex))

    @classmethod
    def haar(cls, stream: SeededStream) -> "ObservableBasis":
        return cls(haar_unitary(4, stream.generator()))

    def coefficients(self, state: PureState) -> np.ndarray:
        """Expansion coefficients ``<O_i|psi>`` of a state in this basis."""
        return self.vectors.conj().T @ state.amplitudes

    def probabilities(self, state: PureState) -> np.ndarray:
        """Outcome probabilities ``p_i = |<O_i|psi>|^2``."""
        return np.abs(self.coefficients(state)) ** 2


@dataclass(frozen=True, eq=False)
class KMatrixReport:
    """The three spin-flip matrices of a basis with their diagnostics."""

    k: np.ndarray
    s: np.ndarray
    sigma: np.ndarray
    det_k_abs: float
    det_s_abs: float
    det_sigma: complex
    symmetry_residual: float
    factorization_residual: float
    unitarity_residual: float


def k_matrix(basis: ObservableBasis) -> np.ndarray:
    """``K_ij = <O_i| Y |O_j*>`` for the given orthonormal basis."""
    b = basis.vectors
    return b.conj().T @ SIGMA_YY @ b.conj()


def s_matrix(basis: ObservableBasis) -> np.ndarray:
    """``S_ij = <O_j*|O_i>``, the change of basis to the conjugated basis."""
    b = basis.vectors
    return b.T @ b


def sigma_matrix(basis: ObservableBasis) -> np.ndarray:
    """``sigma_ij = <O_i| Y |O_j>``, the spin-flip operator in the basis."""
    b = basis.vectors
    return b.conj().T @ SIGMA_YY @ b


def verify_lemma(basis: ObservableBasis) -> KMatrixReport:
    """Compute K, S, sigma and the residuals behind ``det K != 0``.

    The report carries the Frobenius residuals of the symmetry ``K = K^T``,
    the factorization ``K = sigma S^dagger`` and the unitarity of ``S``,
    plus the three determinants. For a valid orthonormal basis all
    residuals vanish to numerical precision and ``|det K| = 1``.
    """
    k = k_matrix(basis)
    s = s_matrix(basis)
    sigma = sigma_matrix(basis)
    return KMatrixReport(
        k=k,
        s=s,
        sigma=sigma,
        det_k_abs=float(abs(np.linalg.det(k))),
        det_s_abs=float(abs(np.linalg.det(s))),
        det_sigma=complex(np.linalg.det(sigma)),
        symmetry_residual=float(np.linalg.norm(k - k.T)),
        factorization_residual=float(np.linalg.norm(k - sigma @ s.conj().T)),
        unitarity_residual=float(np.linalg.norm(s.conj().T @ s - np.eye(4))),
    )


def concurrence_sq_phase_expansion(
    basis: ObservableBasis, moduli: np.ndarray, phases: np.ndarray
) -> float:
    """Squared concurrence via the literal quadruple sum over K elements.

    Kept as an explicit four-index loop so it is an independent route to
    the amplitude-level formula; used as a cross-check, not a hot path.
    """
    m = np.asarray(moduli, dtype=float).reshape(4)
    phi = np.asarray(phases, dtype=float).reshape(4)
    k = k_matrix(basis)
    total = 0.0 + 0.0j
    for i in range(4):
        for j in range(4):
            for kk in range(4):
                for ll in range(4):
                    total += (
                        m[i]
                        * m[j]
                        * m[kk]
                        * m[ll]
                        * np.exp(1j * (phi[kk] + phi[ll] - phi[i] - phi[j]))
                        * k[i, j]
                        * np.conj(k[kk, ll])
                    )
    return float(total.real)


def state_from_basis_coefficients(
    basis: ObservableBasis, moduli: np.ndarray, phases: np.ndarray
) -> PureState:
    """Assemble the state with coefficients ``m_i exp(i phi_i)`` in the basis."""
    coeffs = np.asarray(moduli, dtype=float) * np.exp(1j * np.asarray(phases, dtype=float))
    return normalize(basis.vectors @ coeffs)


@dataclass(frozen=True, eq=False)
class Counterexample:
    """Two states the candidate observable cannot tell apart."""

    state_low: PureState
    state_high: PureState
    phases_low: np.ndarray
    phases_high: np.ndarray
    probabilities: np.ndarray
    concurrence_sq_low: float
    concurrence_sq_high: float

    @property
    def gap(self) -> float:
        return self.concurrence_sq_high - self.concurrence_sq_low


def _c_sq_of_phases(k: np.ndarray, moduli: np.ndarray, phases: np.ndarray) -> np.ndarray:
    """|quadratic form|^2 giving C^2 for a batch of phase rows."""
    e = np.asarray(moduli) * np.exp(-1j * np.atleast_2d(phases))
    z = np.einsum("ni,nj,ij->n", e, e, k)
    return np.abs(z) ** 2


def counterexample(
    basis: ObservableBasis,
    stream: SeededStream,
    moduli: np.ndarray | None = None,
    samples: int = 10_000,
    min_gap: float = 0.1,
) -> Counterexample:
    """Find two states with identical outcome probabilities but different C^2.

    The moduli (default ``1/2`` each, so every outcome probability is 1/4)
    are held fixed while the three relative phases are swept: a quasi-random
    scan of the phase torus followed by local refinement of the best and
    worst points. The two returned states have bitwise-identical outcome
    probabilities and a concurrence-squared gap of at least ``min_gap``.

    Raises
    ------
    CounterexampleSearchError
        If the sweep cannot separate the two concurrence values. This does
        not occur for orthonormal bases and the default moduli.
    """
    m = (
        np.full(4, 0.5)
        if moduli is None
        else np.asarray(moduli, dtype=float).reshape(4)
    )
    if abs(float(np.sum(m**2)) - 1.0) > 1e-9:
        raise ValueError("moduli must satisfy sum m_i^2 = 1")
    k = k_matrix(basis)

    sampler = qmc.Halton(d=3, scramble=True, seed=stream.generator())
    grid = np.zeros((samples, 4))
    grid[:, 1:] = sampler.random(samples) * 2.0 * math.pi
    values = _c_sq_of_phases(k, m, grid)

    def refine(phases: np.ndarray, sign: float) -> tuple[np.ndarray, float]:
        result = optimize.minimize(
            lambda x: sign * _c_sq_of_phases(k, m, np.concatenate([[0.0], x]))[0],
            phases[1:],
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 2000},
        )
        best = np.concatenate([[0.0], result.x])
        return best, float(_c_sq_of_phases(k, m, best[None, :])[0])

    phases_high, c_high = refine(grid[int(np.argmax(values))], -1.0)
    phases_low, c_low = refine(grid[int(np.argmin(values))], 1.0)
    if c_high - c_low < min_gap:
        raise CounterexampleSearchError(
            f"phase sweep separated C^2 by only {c_high - c_low:.4g} "
            f"(minimum required {min_gap})"
        )
    state_low = state_from_basis_coefficients(basis, m, phases_low)
    state_high = state_from_basis_coefficients(basis, m, phases_high)
    return Counterexample(
        state_low=state_low,
        state_high=state_high,
        phases_low=phases_low,
        phases_high=phases_high,
        probabilities=m**2,
        concurrence_sq_low=concurrence_sq(state_low),
        concurrence_sq_high=concurrence_sq(state_high),
    )
