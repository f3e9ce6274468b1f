"""Entanglement estimation by single-side tomography of the reduced state.

One observer measures spin projections along three linearly independent
directions. The three spin-up probabilities determine the Bloch vector of
the reduced state by solving a 3x3 linear system, which yields the reduced
determinant, the squared concurrence and the entropy.

The module also carries the first-order uncertainty analysis: the standard
deviation of the determinant estimate is propagated from the binomial
variance ``P(1-P)/n`` of each direction's probability estimate through the
linear reconstruction. For mutually orthogonal directions the partial
derivative of the determinant with respect to each probability reduces to
minus the corresponding Bloch component.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .sampling import CountVector, SeededStream, multinomial_counts, sample_amplitudes
from .states import (
    EntanglementValues,
    PureState,
    bloch_vectors_batch,
    det_from_bloch,
    entropy_from_concurrence_sq,
    entropy_slope_vs_det,
    reduced_density,
)

__all__ = [
    "CONDITION_LIMIT",
    "DegenerateGeometryError",
    "DirectionTriple",
    "LocalProbabilities",
    "LocalEstimate",
    "UncertaintyReport",
    "split_budget",
    "outcome_probabilities",
    "reconstruct_bloch",
    "estimate_from_probabilities",
    "estimate_entanglement_local",
    "detrho_partials",
    "analytic_uncertainty",
    "average_uncertainty",
    "delta_batch",
    "ensemble_bloch",
    "simulate_local_counts",
]

CONDITION_LIMIT = 1e8

UNIT_ATOL = 1e-12


class DegenerateGeometryError(ValueError):
    """Measurement directions too close to coplanar for a stable reconstruction."""


@dataclass(frozen=True, eq=False)
class DirectionTriple:
    """Three measurement directions, the first fixed to the z-axis.

    ``matrix`` holds the unit direction vectors as rows ``(d0, dm, dn)``.
    The triple is usable for reconstruction only if the rows are linearly
    independent; ``condition_number`` quantifies how close to coplanar the
    geometry is.
    """

    matrix: np.ndarray

    def __post_init__(self) -> None:
        mat = np.array(self.matrix, dtype=float)
        if mat.shape != (3, 3):
            raise ValueError(f"expected a 3x3 direction matrix, got {mat.shape}")
        norms = np.linalg.norm(mat, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_ATOL):
            raise ValueError(f"direction rows must be unit vectors, norms {norms}")
        if np.max(np.abs(mat[0] - np.array([0.0, 0.0, 1.0]))) > UNIT_ATOL:
            raise ValueError("the first direction is fixed to the z-axis")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def from_angles(cls, theta_m: float, theta_n: float, phi_nm: float) -> "DirectionTriple":
        """Build the triple from polar angles of the two free directions.

        ``theta_m`` and ``theta_n`` are the polar angles of the second and
        third direction (both in ``[0, pi]``); only the relative azimuth
        ``phi_nm`` matters for isotropic ensembles, so the third direction
        is placed at azimuth zero and the second at ``phi_nm``.
        """
        for name, theta in (("theta_m", theta_m), ("theta_n", theta_n)):
            if not -1e-12 <= theta <= math.pi + 1e-12:
                raise ValueError(f"{name} must lie in [0, pi], got {theta!r}")
        phi = math.fmod(phi_nm, 2.0 * math.pi)
        d_m = np.array(
            [math.sin(theta_m) * math.cos(phi), math.sin(theta_m) * math.sin(phi), math.cos(theta_m)]
        )
        d_n = np.array([math.sin(theta_n), 0.0, math.cos(theta_n)])
        return cls(np.vstack([[0.0, 0.0, 1.0], d_m / np.linalg.norm(d_m), d_n / np.linalg.norm(d_n)]))

    @classmethod
    def orthogonal(cls) -> "DirectionTriple":
        """The mutually orthogonal triple (z, y, x)."""
        return cls.from_angles(math.pi / 2.0, math.pi / 2.0, math.pi / 2.0)

    @classmethod
    def from_directions(cls, d_m: np.ndarray, d_n: np.ndarray) -> "DirectionTriple":
        d_m = np.asarray(d_m, dtype=float)
        d_n = np.asarray(d_n, dtype=float)
        return cls(
            np.vstack(
                [[0.0, 0.0, 1.0], d_m / np.linalg.norm(d_m), d_n / np.linalg.norm(d_n)]
            )
        )

    @property
    def condition_number(self) -> float:
        return float(np.linalg.cond(self.matrix))

    @property
    def angles(self) -> tuple[float, float, float]:
        """``(theta_m, theta_n, phi_nm)`` recovered from the direction rows."""
        d_m, d_n = self.matrix[1], self.matrix[2]
        theta_m = math.acos(min(max(d_m[2], -1.0), 1.0))
        theta_n = math.acos(min(max(d_n[2], -1.0), 1.0))
        phi_nm = math.atan2(d_m[1], d_m[0]) - math.atan2(d_n[1], d_n[0])
        return theta_m, theta_n, phi_nm % (2.0 * math.pi)


@dataclass(frozen=True)
class LocalProbabilities:
    """Spin-up probabilities along the three directions, with optional shots."""

    p: np.ndarray
    shots: np.ndarray | None = None

    def __post_init__(self) -> None:
        p = np.array(self.p, dtype=float).reshape(3)
        if np.any(p < -1e-12) or np.any(p > 1.0 + 1e-12):
            raise ValueError(f"probabilities must lie in [0, 1], got {p}")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)
        if self.shots is not None:
            shots = np.array(self.shots, dtype=np.int64).reshape(3)
            if np.any(shots < 1):
                raise ValueError("per-direction shots must be positive")
            shots.setflags(write=False)
            object.__setattr__(self, "shots", shots)


@dataclass(frozen=True)
class LocalEstimate:
    """Result of the tomography estimator on one set of counts."""

    values: EntanglementValues
    bloch: np.ndarray
    probabilities: LocalProbabilities
    det_raw: float
    clamped: bool

    @property
    def clamp_events(self) -> int:
        return int(self.clamped)


@dataclass(frozen=True)
class UncertaintyReport:
    """Per-state and ensemble-averaged determinant uncertainties."""

    deltas: np.ndarray
    shots_per_direction: int
    clamp_events: int = 0

    @property
    def delta_av(self) -> float:
        return float(np.mean(self.deltas))

    @property
    def stderr(self) -> float:
        n = self.deltas.size
        if n < 2:
            return 0.0
        return float(np.std(self.deltas, ddof=1) / math.sqrt(n))

    @property
    def ensemble_size(self) -> int:
        return int(self.deltas.size)


def split_budget(total: int, parts: int) -> np.ndarray:
    """Split ``total`` shots over ``parts`` meters, remainders round-robin."""
    if total < parts:
        raise ValueError(f"cannot split {total} pairs across {parts} meters")
    base, rem = divmod(total, parts)
    out = np.full(parts, base, dtype=np.int64)
    out[:rem] += 1
    return out


def outcome_probabilities(state: PureState, dirs: DirectionTriple) -> LocalProbabilities:
    """Exact spin-up probabilities ``(1 + S . d_k) / 2`` for each direction."""
    bloch = reduced_density(state, "A").bloch
    p = (1.0 + dirs.matrix @ bloch) / 2.0
    return LocalProbabilities(p=np.clip(p, 0.0, 1.0))


def reconstruct_bloch(probs: LocalProbabilities, dirs: DirectionTriple) -> np.ndarray:
    """Solve the linear system mapping probabilities back to the Bloch vector.

    Raises
    ------
    DegenerateGeometryError
        If the triple's condition number exceeds ``CONDITION_LIMIT``.
    """
    cond = dirs.condition_number
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise DegenerateGeometryError(
            f"direction triple is numerically degenerate (condition number {cond:.3g})"
        )
    return np.linalg.solve(dirs.matrix, 2.0 * probs.p - 1.0)


def estimate_from_probabilities(
    probs: LocalProbabilities, dirs: DirectionTriple
) -> LocalEstimate:
    """Estimator chain on (empirical or exact) spin-up probabilities.

    The reconstructed determinant is clamped to the physical range
    ``[0, 1/4]`` (with the clamp event flagged) before conversion to
    squared concurrence and entropy. Fed exact probabilities, the chain
    reproduces the exact entanglement values.
    """
    bloch = reconstruct_bloch(probs, dirs)
    det_raw = det_from_bloch(bloch)
    det = min(max(det_raw, 0.0), 0.25)
    clamped = det != det_raw
    c_sq = 4.0 * det
    values = EntanglementValues(
        concurrence_sq=c_sq,
        det_reduced=det,
        entropy=entropy_from_concurrence_sq(c_sq),
    )
    return LocalEstimate(
        values=values, bloch=bloch, probabilities=probs, det_raw=det_raw, clamped=clamped
    )


def estimate_entanglement_local(
    counts: Sequence[CountVector], dirs: DirectionTriple
) -> LocalEstimate:
    """Run the full estimator chain on three binomial count records."""
    if len(counts) != 3:
        raise ValueError(f"expected counts for 3 directions, got {len(counts)}")
    p = np.array([c.counts[0] / c.shots for c in counts])
    shots = np.array([c.shots for c in counts], dtype=np.int64)
    return estimate_from_probabilities(LocalProbabilities(p=p, shots=shots), dirs)


def detrho_partials(state: PureState, dirs: DirectionTriple) -> np.ndarray:
    """Partial derivatives of the reduced determinant w.r.t. the probabilities.

    With ``S = D^-1 (2P - 1)`` and ``det = (1 - |S|^2)/4`` the gradient is
    ``-S^T D^-1``; for an orthogonal triple this is minus the Bloch
    component along each measurement direction.
    """
    bloch = reduced_density(state, "A").bloch
    return -np.linalg.solve(dirs.matrix.T, bloch)


def analytic_uncertainty(
    state: PureState,
    dirs: DirectionTriple,
    shots_per_direction: int | Sequence[int] | np.ndarray,
) -> float:
    """First-order standard deviation of the determinant estimate.

    ``shots_per_direction`` is the number of pairs consumed by each meter
    (a scalar applies to all three). Each probability contributes variance
    ``P(1-P)/n`` weighted by its squared partial derivative.
    """
    shots = np.broadcast_to(np.asarray(shots_per_direction, dtype=float), (3,))
    if np.any(shots < 1):
        raise ValueError("shots_per_direction must be at least 1")
    p = outcome_probabilities(state, dirs).p
    grad = detrho_partials(state, dirs)
    var = np.sum(grad**2 * p * (1.0 - p) / shots)
    return float(math.sqrt(var))


def delta_batch(
    bloch: np.ndarray,
    dirs: DirectionTriple,
    shots_per_direction: int | Sequence[int] | np.ndarray,
) -> np.ndarray:
    """Vectorized :func:`analytic_uncertainty` over rows of Bloch vectors."""
    shots = np.broadcast_to(np.asarray(shots_per_direction, dtype=float), (3,))
    d_inv = np.linalg.inv(dirs.matrix)
    p = (1.0 + bloch @ dirs.matrix.T) / 2.0
    grad = -(bloch @ d_inv)
    return np.sqrt(np.sum(grad**2 * p * (1.0 - p) / shots, axis=1))


def ensemble_bloch(seed: int, count: int) -> np.ndarray:
    """Bloch vectors of an isotropic state ensemble on streams ``(seed, 0..count-1)``."""
    return bloch_vectors_batch(sample_amplitudes(seed, count))


def average_uncertainty(
    dirs: DirectionTriple,
    ensemble_size: int,
    shots_per_direction: int,
    stream: SeededStream,
) -> UncertaintyReport:
    """Ensemble average of :func:`analytic_uncertainty` over isotropic states."""
    if ensemble_size < 1:
        raise ValueError("ensemble_size must be at least 1")
    bloch = ensemble_bloch(stream.seed, ensemble_size)
    deltas = delta_batch(bloch, dirs, shots_per_direction)
    return UncertaintyReport(deltas=deltas, shots_per_direction=int(shots_per_direction))


def simulate_local_counts(
    state: PureState, dirs: DirectionTriple, total_pairs: int, stream: SeededStream
) -> list[CountVector]:
    """Simulate one tomography run, splitting the pair budget over directions."""
    shots = split_budget(total_pairs, 3)
    p = outcome_probabilities(state, dirs).p
    rng = stream.generator()
    return [
        multinomial_counts(np.array([p[k], 1.0 - p[k]]), int(shots[k]), rng)
        for k in range(3)
    ]


def entropy_delta(state: PureState, delta_det: float) -> float:
    """Entropy uncertainty implied by a determinant uncertainty, chain rule."""
    from .states import concurrence_sq

    return delta_det * entropy_slope_vs_det(concurrence_sq(state))
