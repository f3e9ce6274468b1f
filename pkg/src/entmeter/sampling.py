"""Reproducible randomness: isotropic state ensembles and finite-shot counts.

Random draws are keyed by ``(seed, index)`` streams so that every item of an
ensemble owns its own substream. Results are therefore identical no matter
how the work is ordered or partitioned across workers.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .states import PureState, normalize

__all__ = [
    "SeededStream",
    "CountVector",
    "derive_seed",
    "sample_state",
    "sample_amplitudes",
    "sample_states",
    "multinomial_counts",
    "haar_unitary",
]

_SEED_MASK = (1 << 64) - 1

PROB_SUM_ATOL = 1e-9


@dataclass(frozen=True)
class SeededStream:
    """Handle for one reproducible random substream.

    The same ``(seed, index)`` pair always yields the same draw sequence;
    distinct indices yield statistically independent streams.
    """

    seed: int
    index: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.seed <= _SEED_MASK:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.index < 0:
            raise ValueError("stream index must be nonnegative")

    def generator(self) -> np.random.Generator:
        return np.random.default_rng((self.seed, self.index))

    def with_index(self, index: int) -> "SeededStream":
        return SeededStream(self.seed, index)


def derive_seed(seed: int, label: str) -> int:
    """Derive an independent 64-bit seed for a named purpose.

    Keeps draws for different roles (ensemble states, measurement shots,
    search starts, ...) on non-overlapping streams under one master seed.
    """
    digest = hashlib.sha256(f"{seed}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def sample_state(stream: SeededStream) -> PureState:
    """Draw one pure state from the isotropic (unitarily invariant) ensemble.

    Eight independent standard normals form the real and imaginary parts of
    the four amplitudes; normalizing the resulting Gaussian vector is the
    standard construction of the unitarily invariant measure on unit
    vectors.
    """
    z = stream.generator().standard_normal(8)
    return normalize(z[0::2] + 1j * z[1::2])


def sample_amplitudes(seed: int, count: int, start_index: int = 0) -> np.ndarray:
    """Amplitude rows for ``count`` isotropic states on streams ``start_index ..``.

    Row ``i`` depends only on ``(seed, start_index + i)``, so an ensemble can
    be produced in chunks, in any order, with identical results.
    """
    out = np.empty((count, 4), dtype=complex)
    for i in range(count):
        rng = np.random.default_rng((seed, start_index + i))
        z = rng.standard_normal(8)
        amps = z[0::2] + 1j * z[1::2]
        out[i] = amps / np.linalg.norm(amps)
    return out


def sample_states(seed: int, count: int, start_index: int = 0) -> list[PureState]:
    """Like :func:`sample_amplitudes` but wrapped as :class:`PureState` objects."""
    return [PureState(row) for row in sample_amplitudes(seed, count, start_index)]


@dataclass(frozen=True)
class CountVector:
    """Outcome counts of repeated measurements with a fixed shot budget."""

    counts: np.ndarray
    shots: int

    def __post_init__(self) -> None:
        counts = np.array(self.counts, dtype=np.int64).reshape(-1)
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")
        if self.shots < 1:
            raise ValueError("shots must be a positive integer")
        if int(counts.sum()) != self.shots:
            raise ValueError(
                f"counts sum to {int(counts.sum())}, expected shots = {self.shots}"
            )
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def frequencies(self) -> np.ndarray:
        """Empirical outcome probabilities ``counts / shots``."""
        return self.counts / self.shots


def multinomial_counts(
    probabilities: np.ndarray,
    shots: int,
    stream: SeededStream | np.random.Generator,
) -> CountVector:
    """Draw multinomially distributed outcome counts.

    Parameters
    ----------
    probabilities : array
        Nonnegative outcome probabilities summing to 1 within 1e-9.
    shots : int
        Number of independent repetitions, at least 1.
    stream : SeededStream or numpy Generator
        Substream (consumed from the start) or live generator supplying
        the randomness.
    """
    p = np.asarray(probabilities, dtype=float).reshape(-1)
    if p.size < 2:
        raise ValueError("need at least two outcomes")
    if np.any(p < 0.0) or not np.all(np.isfinite(p)):
        raise ValueError(f"invalid probability vector {p!r}")
    total = float(p.sum())
    if abs(total - 1.0) > PROB_SUM_ATOL:
        raise ValueError(f"probabilities sum to {total!r}, expected 1")
    if shots < 1:
        raise ValueError("shots must be a positive integer")
    rng = stream if isinstance(stream, np.random.Generator) else stream.generator()
    counts = rng.multinomial(shots, p / total)
    return CountVector(counts=counts, shots=shots)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed ``dim x dim`` unitary via QR of a Ginibre matrix.

    The QR phases are fixed by normalizing the diagonal of R, which removes
    the sign ambiguity and makes the distribution exactly Haar.
    """
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))
