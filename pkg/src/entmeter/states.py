"""Exact ground-truth algebra for two-qubit pure states.

Amplitude-level state handling, reduced density operators with their Bloch
parametrization, and the entanglement measures used throughout the package:
squared concurrence, determinant of the reduced state, and entanglement
entropy in bits. Everything here is deterministic closed-form linear
algebra; statistical estimation lives in the strategy modules.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PureState",
    "ReducedState",
    "EntanglementValues",
    "normalize",
    "bell_state",
    "basis_state",
    "concurrence_sq",
    "reduced_density",
    "det_from_bloch",
    "entropy_from_concurrence_sq",
    "entropy_slope_vs_det",
    "entanglement",
    "bloch_vectors_batch",
    "concurrence_sq_batch",
]

NORM_ATOL = 1e-12
TWO_PI = 2.0 * math.pi

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized two-qubit pure state ``a0|00> + a1|01> + a2|10> + a3|11>``.

    The constructor expects amplitudes that are already normalized to unit
    norm (within ``NORM_ATOL``); use :func:`normalize` to build a state from
    an arbitrary nonzero amplitude vector.
    """

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape != (4,):
            raise ValueError(f"expected 4 amplitudes, got shape {amps.shape}")
        if not np.all(np.isfinite(amps.view(float))):
            raise ValueError("amplitudes must be finite")
        norm_sq = float(np.sum(np.abs(amps) ** 2))
        if abs(norm_sq - 1.0) > NORM_ATOL:
            raise ValueError(
                f"amplitudes are not normalized (|psi|^2 = {norm_sq!r}); "
                "use normalize() for raw vectors"
            )
        object.__setattr__(self, "amplitudes", _readonly(amps))

    @property
    def moduli(self) -> np.ndarray:
        """Amplitude magnitudes ``m_i = |a_i|``."""
        return np.abs(self.amplitudes)

    @property
    def phases(self) -> np.ndarray:
        """Amplitude phases in ``[0, 2*pi)``; zero where the modulus vanishes."""
        phi = np.mod(np.angle(self.amplitudes), TWO_PI)
        phi[self.moduli == 0.0] = 0.0
        return phi

    def polar(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(moduli, phases)`` such that ``m * exp(1j*phi)`` rebuilds the state."""
        return self.moduli, self.phases

    def __repr__(self) -> str:
        amps = ", ".join(f"{a:.6g}" for a in self.amplitudes)
        return f"PureState([{amps}])"


@dataclass(frozen=True, eq=False)
class ReducedState:
    """Single-qubit reduced density operator and its Bloch vector.

    Satisfies ``rho = (I + bloch . sigma) / 2`` with ``|bloch| <= 1``.
    """

    rho: np.ndarray
    bloch: np.ndarray

    def __post_init__(self) -> None:
        rho = np.array(self.rho, dtype=complex)
        if rho.shape != (2, 2):
            raise ValueError(f"expected a 2x2 density matrix, got {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > NORM_ATOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > NORM_ATOL:
            raise ValueError("density matrix does not have unit trace")
        bloch = np.array(self.bloch, dtype=float).reshape(3)
        if float(np.linalg.norm(bloch)) > 1.0 + NORM_ATOL:
            raise ValueError("Bloch vector lies outside the unit ball")
        object.__setattr__(self, "rho", _readonly(rho))
        object.__setattr__(self, "bloch", _readonly(bloch))

    @classmethod
    def from_rho(cls, rho: np.ndarray) -> "ReducedState":
        rho = np.asarray(rho, dtype=complex)
        sx = 2.0 * rho[1, 0].real
        sy = 2.0 * rho[1, 0].imag
        sz = (rho[0, 0] - rho[1, 1]).real
        return cls(rho=rho, bloch=np.array([sx, sy, sz]))

    @property
    def det(self) -> float:
        """Determinant of the reduced state, ``(1 - |bloch|^2) / 4``."""
        return det_from_bloch(self.bloch)


@dataclass(frozen=True)
class EntanglementValues:
    """The three equivalent entanglement readouts of a two-qubit pure state."""

    concurrence_sq: float
    det_reduced: float
    entropy: float


def normalize(raw: np.ndarray) -> PureState:
    """Build a :class:`PureState` from any nonzero complex 4-vector.

    Raises
    ------
    ValueError
        If the input vector is zero or non-finite.
    """
    amps = np.asarray(raw, dtype=complex).reshape(-1)
    if amps.shape != (4,):
        raise ValueError(f"expected 4 amplitudes, got shape {amps.shape}")
    if not np.all(np.isfinite(amps.view(float))):
        raise ValueError("amplitudes must be finite")
    norm = float(np.linalg.norm(amps))
    if norm == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return PureState(amps / norm)


def bell_state() -> PureState:
    """The maximally entangled state ``(|00> + |11>) / sqrt(2)``."""
    return normalize(np.array([1.0, 0.0, 0.0, 1.0]))


def basis_state(index: int) -> PureState:
    """Computational basis state ``|index>`` with ``index`` in 0..3."""
    amps = np.zeros(4, dtype=complex)
    amps[index] = 1.0
    return PureState(amps)


def concurrence_sq(state: PureState) -> float:
    """Squared concurrence ``4 |a0*a3 - a1*a2|^2`` in ``[0, 1]``."""
    a = state.amplitudes
    value = 4.0 * abs(a[0] * a[3] - a[1] * a[2]) ** 2
    return float(min(max(value, 0.0), 1.0))


def reduced_density(state: PureState, subsystem: str = "A") -> ReducedState:
    """Partial trace of ``|psi><psi|`` onto one qubit.

    Parameters
    ----------
    state : PureState
    subsystem : str
        ``"A"`` keeps the first qubit, ``"B"`` the second.
    """
    m = state.amplitudes.reshape(2, 2)
    if subsystem == "A":
        rho = m @ m.conj().T
    elif subsystem == "B":
        rho = m.T @ m.conj()
    else:
        raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")
    return ReducedState.from_rho(rho)


def det_from_bloch(bloch: np.ndarray) -> float:
    """Determinant ``(1 - |S|^2) / 4`` of the qubit state with Bloch vector S.

    No clamping is applied: estimated Bloch vectors with ``|S| > 1`` yield a
    negative value and the caller decides how to handle it.
    """
    s = np.asarray(bloch, dtype=float).reshape(3)
    return float((1.0 - s @ s) / 4.0)


def entropy_from_concurrence_sq(c_sq):
    """Entanglement entropy in bits as a function of the squared concurrence.

    Evaluates the binary entropy of the reduced eigenvalues
    ``(1 +- sqrt(1 - C^2)) / 2`` with the ``x*log2(x) -> 0`` convention at
    the endpoints. Inputs are clamped to ``[0, 1]`` first, so noisy
    estimates outside the physical range are mapped to the boundary.
    Accepts scalars or arrays.
    """
    c = np.clip(np.asarray(c_sq, dtype=float), 0.0, 1.0)
    root = np.sqrt(np.clip(1.0 - c, 0.0, 1.0))
    lam_plus = (1.0 + root) / 2.0
    lam_minus = (1.0 - root) / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ent = -lam_plus * np.log2(lam_plus) - np.where(
            lam_minus > 0.0, lam_minus * np.log2(lam_minus), 0.0
        )
    ent = np.clip(ent, 0.0, 1.0)
    if np.isscalar(c_sq) or np.ndim(c_sq) == 0:
        return float(ent)
    return ent


def entropy_slope_vs_det(c_sq: float) -> float:
    """Derivative of the entropy with respect to the reduced determinant.

    Used to translate an uncertainty on ``det rho_A`` into an entropy
    uncertainty. Diverges logarithmically as ``C^2 -> 0`` and approaches
    ``2 / ln 2`` as ``C^2 -> 1``.
    """
    c = min(max(float(c_sq), 0.0), 1.0)
    if c == 0.0:
        return math.inf
    root = math.sqrt(1.0 - c)
    if root == 0.0:
        return 2.0 / math.log(2.0)
    lam_plus = (1.0 + root) / 2.0
    lam_minus = (1.0 - root) / 2.0
    return math.log2(lam_plus / lam_minus) / root


def entanglement(state: PureState) -> EntanglementValues:
    """Full entanglement readout of a state, with internal cross-checks.

    The squared concurrence from the amplitudes must agree with four times
    the determinant of either reduced state; a disagreement indicates
    numerical corruption and raises.
    """
    c_sq = concurrence_sq(state)
    det_a = reduced_density(state, "A").det
    det_b = reduced_density(state, "B").det
    if abs(c_sq - 4.0 * det_a) > 1e-10 or abs(c_sq - 4.0 * det_b) > 1e-10:
        raise RuntimeError(
            f"inconsistent entanglement readouts: C^2={c_sq!r}, "
            f"4 det A={4.0 * det_a!r}, 4 det B={4.0 * det_b!r}"
        )
    det = min(max(c_sq / 4.0, 0.0), 0.25)
    return EntanglementValues(
        concurrence_sq=c_sq,
        det_reduced=det,
        entropy=entropy_from_concurrence_sq(c_sq),
    )


def bloch_vectors_batch(amplitudes: np.ndarray) -> np.ndarray:
    """Bloch vectors of the first qubit for a batch of amplitude rows.

    Parameters
    ----------
    amplitudes : array of shape (n, 4)

    Returns
    -------
    array of shape (n, 3)
    """
    m = np.asarray(amplitudes, dtype=complex).reshape(-1, 2, 2)
    rho = np.einsum("nij,nkj->nik", m, m.conj())
    sx = 2.0 * rho[:, 1, 0].real
    sy = 2.0 * rho[:, 1, 0].imag
    sz = (rho[:, 0, 0] - rho[:, 1, 1]).real
    return np.stack([sx, sy, sz], axis=1)


def concurrence_sq_batch(amplitudes: np.ndarray) -> np.ndarray:
    """Squared concurrence for a batch of amplitude rows of shape (n, 4)."""
    a = np.asarray(amplitudes, dtype=complex)
    return np.clip(4.0 * np.abs(a[:, 0] * a[:, 3] - a[:, 1] * a[:, 2]) ** 2, 0.0, 1.0)
