"""Entanglement estimation from two rounds of correlated local measurements.

Both observers measure in each round and share results classically. In the
first round both read out the z-axis, giving the four joint probabilities
``P_i = m_i^2`` (the squared amplitude moduli). In the second round one
side switches to the x-axis, giving four probabilities that mix the moduli
with the phase differences inside the index pairs {0,1} and {2,3}:

    P_++ = (P0 + P1 + 2 sqrt(P0 P1) cos(phi0 - phi1)) / 2
    P_+- = (P0 + P1 - 2 sqrt(P0 P1) cos(phi0 - phi1)) / 2
    P_-+ = (1 - P0 - P1 + 2 sqrt(P2 P3) cos(phi2 - phi3)) / 2
    P_-- = (1 - P0 - P1 - 2 sqrt(P2 P3) cos(phi2 - phi3)) / 2

Inverting these gives the two phase cosines, and the squared concurrence
follows from

    C^2 = 4 (P1 P2 + P0 P3 - 2 sqrt(P0 P1 P2 P3) cos(phi0 - phi1 + phi3 - phi2)).

The combined cosine is reconstructed from the two measured cosines up to
the sign of the product of the two sines (the "branch"): the measurements
determine ``cos`` but not ``sin``, so two phase configurations remain
indistinguishable. The estimator therefore exposes both branch values; the
uncertainty analysis evaluates the branch realized by the true state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sampling import CountVector, SeededStream, multinomial_counts
from .states import EntanglementValues, PureState, entropy_from_concurrence_sq

__all__ = [
    "RoundOneProbs",
    "RoundTwoProbs",
    "PhaseCosines",
    "CCEstimate",
    "round1_probabilities",
    "round2_probabilities",
    "phase_cosines",
    "combined_cosine",
    "concurrence_sq_cc",
    "true_branch_sign",
    "estimate_entanglement_cc",
    "cc_det_estimate",
    "cc_det_gradients",
    "analytic_uncertainty_cc",
    "delta_cc_batch",
    "simulate_cc_counts",
]


@dataclass(frozen=True)
class RoundOneProbs:
    """Joint z/z outcome probabilities ``(++, +-, -+, --)``, i.e. ``|a_i|^2``."""

    p: np.ndarray
    shots: int | None = None

    def __post_init__(self) -> None:
        p = np.array(self.p, dtype=float).reshape(4)
        if np.any(p < -1e-12):
            raise ValueError(f"probabilities must be nonnegative, got {p}")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValueError(f"probabilities must sum to 1, got {p.sum()!r}")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)


@dataclass(frozen=True)
class RoundTwoProbs:
    """Joint z/x outcome probabilities ``(++, +-, -+, --)``."""

    p: np.ndarray
    shots: int | None = None

    def __post_init__(self) -> None:
        p = np.array(self.p, dtype=float).reshape(4)
        if np.any(p < -1e-12):
            raise ValueError(f"probabilities must be nonnegative, got {p}")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValueError(f"probabilities must sum to 1, got {p.sum()!r}")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)


@dataclass(frozen=True)
class PhaseCosines:
    """The two measurable phase cosines with definedness and clamp flags.

    A cosine is undefined when the corresponding amplitude-modulus product
    vanishes; its contribution to the concurrence vanishes with it. Noisy
    inputs can push the raw ratio outside ``[-1, 1]``; the value is clamped
    and flagged.
    """

    cos01: float
    cos23: float
    defined01: bool = True
    defined23: bool = True
    clamped01: bool = False
    clamped23: bool = False

    @property
    def clamp_events(self) -> int:
        return int(self.clamped01) + int(self.clamped23)


@dataclass(frozen=True)
class CCEstimate:
    """Both branch readouts of the correlated-rounds estimator."""

    values_plus: EntanglementValues
    values_minus: EntanglementValues
    cosines: PhaseCosines
    round1: RoundOneProbs
    round2: RoundTwoProbs
    det_raw_plus: float
    det_raw_minus: float
    branch_disagreement: float
    clamp_events: int

    def values(self, branch: int) -> EntanglementValues:
        return self.values_plus if branch >= 0 else self.values_minus


def round1_probabilities(state: PureState) -> RoundOneProbs:
    """Exact first-round probabilities ``P_i = |a_i|^2``."""
    return RoundOneProbs(p=np.abs(state.amplitudes) ** 2)


def round2_probabilities(state: PureState) -> RoundTwoProbs:
    """Exact second-round probabilities from the amplitudes.

    Computed directly as ``|a_0 +- a_1|^2 / 2`` and ``|a_2 +- a_3|^2 / 2``,
    which is algebraically identical to the cosine form quoted in the
    module docstring.
    """
    a = state.amplitudes
    p = np.array(
        [
            0.5 * abs(a[0] + a[1]) ** 2,
            0.5 * abs(a[0] - a[1]) ** 2,
            0.5 * abs(a[2] + a[3]) ** 2,
            0.5 * abs(a[2] - a[3]) ** 2,
        ]
    )
    return RoundTwoProbs(p=p)


def phase_cosines(r1: RoundOneProbs, r2: RoundTwoProbs) -> PhaseCosines:
    """Invert the second-round probabilities for the two phase cosines.

    ``cos(phi0 - phi1) = (2 P_++ - P0 - P1) / (2 sqrt(P0 P1))`` and
    ``cos(phi2 - phi3) = (2 P_-+ - (1 - P0 - P1)) / (2 sqrt(P2 P3))``.
    """
    p0, p1, p2, p3 = (float(x) for x in r1.p)
    prod01 = p0 * p1
    prod23 = p2 * p3
    defined01 = prod01 > 0.0
    defined23 = prod23 > 0.0
    cos01, clamped01 = 0.0, False
    cos23, clamped23 = 0.0, False
    if defined01:
        raw = (2.0 * r2.p[0] - p0 - p1) / (2.0 * math.sqrt(prod01))
        cos01 = min(max(raw, -1.0), 1.0)
        clamped01 = cos01 != raw
    if defined23:
        raw = (2.0 * r2.p[2] - (1.0 - p0 - p1)) / (2.0 * math.sqrt(prod23))
        cos23 = min(max(raw, -1.0), 1.0)
        clamped23 = cos23 != raw
    return PhaseCosines(
        cos01=cos01,
        cos23=cos23,
        defined01=defined01,
        defined23=defined23,
        clamped01=clamped01,
        clamped23=clamped23,
    )


def combined_cosine(cos: PhaseCosines, branch: int) -> float:
    """``cos(phi0 - phi1 + phi3 - phi2)`` reconstructed from the two cosines.

    ``branch`` is the sign of ``sin(phi0 - phi1) * sin(phi2 - phi3)``, which
    the measurements leave undetermined.
    """
    s = 1.0 if branch >= 0 else -1.0
    u = math.sqrt(max(1.0 - cos.cos01**2, 0.0))
    v = math.sqrt(max(1.0 - cos.cos23**2, 0.0))
    return cos.cos01 * cos.cos23 + s * u * v


def concurrence_sq_cc(r1: RoundOneProbs, cos: PhaseCosines, branch: int) -> float:
    """Squared concurrence from first-round probabilities and phase cosines.

    The cross term carries the factor ``sqrt(P0 P1 P2 P3)``, which vanishes
    exactly when either cosine is undefined, so undefined cosines are
    harmless. The result is clamped to ``[0, 1]``.
    """
    p0, p1, p2, p3 = r1.p
    value = p1 * p2 + p0 * p3
    root = math.sqrt(max(p0 * p1 * p2 * p3, 0.0))
    if root > 0.0 and cos.defined01 and cos.defined23:
        value -= 2.0 * root * combined_cosine(cos, branch)
    return min(max(4.0 * value, 0.0), 1.0)


def true_branch_sign(state: PureState) -> int:
    """Sign of ``sin(phi0 - phi1) * sin(phi2 - phi3)`` for the true state."""
    phi = np.angle(state.amplitudes)
    product = math.sin(phi[0] - phi[1]) * math.sin(phi[2] - phi[3])
    return 1 if product >= 0.0 else -1


def estimate_entanglement_cc(
    counts1: CountVector, counts2: CountVector
) -> CCEstimate:
    """Run the estimator chain on the two rounds' counts, both branches.

    The determinant-equivalent readout is ``C^2 / 4``; clamping of cosines
    and of the concurrence is flagged and counted.
    """
    r1 = RoundOneProbs(p=counts1.frequencies, shots=counts1.shots)
    r2 = RoundTwoProbs(p=counts2.frequencies, shots=counts2.shots)
    cos = phase_cosines(r1, r2)
    out = {}
    clamp_events = cos.clamp_events
    for branch in (1, -1):
        p0, p1, p2, p3 = r1.p
        raw = p1 * p2 + p0 * p3
        root = math.sqrt(max(p0 * p1 * p2 * p3, 0.0))
        if root > 0.0 and cos.defined01 and cos.defined23:
            raw -= 2.0 * root * combined_cosine(cos, branch)
        c_sq = min(max(4.0 * raw, 0.0), 1.0)
        if c_sq != 4.0 * raw:
            clamp_events += 1
        out[branch] = (
            EntanglementValues(
                concurrence_sq=c_sq,
                det_reduced=c_sq / 4.0,
                entropy=entropy_from_concurrence_sq(c_sq),
            ),
            raw,
        )
    values_plus, det_raw_plus = out[1]
    values_minus, det_raw_minus = out[-1]
    return CCEstimate(
        values_plus=values_plus,
        values_minus=values_minus,
        cosines=cos,
        round1=r1,
        round2=r2,
        det_raw_plus=det_raw_plus,
        det_raw_minus=det_raw_minus,
        branch_disagreement=abs(values_plus.concurrence_sq - values_minus.concurrence_sq),
        clamp_events=clamp_events,
    )


def cc_det_estimate(q: np.ndarray, r: np.ndarray, branch: int) -> float:
    """Determinant-equivalent ``C^2/4`` as a plain function of probabilities.

    ``q`` holds the four first-round probabilities and ``r`` the four
    second-round probabilities. No clamping is applied; this is the smooth
    map whose gradient :func:`cc_det_gradients` returns, kept separate so
    the gradient can be checked against finite differences.
    """
    q0, q1, q2, q3 = q
    c01 = (2.0 * r[0] - q0 - q1) / (2.0 * math.sqrt(q0 * q1))
    c23 = (2.0 * r[2] - (1.0 - q0 - q1)) / (2.0 * math.sqrt(q2 * q3))
    s = 1.0 if branch >= 0 else -1.0
    w = c01 * c23 + s * math.sqrt(max(1.0 - c01**2, 0.0)) * math.sqrt(
        max(1.0 - c23**2, 0.0)
    )
    return q1 * q2 + q0 * q3 - 2.0 * math.sqrt(q0 * q1 * q2 * q3) * w


def cc_det_gradients(
    q: np.ndarray, r: np.ndarray, branch: int
) -> tuple[float, np.ndarray, np.ndarray]:
    """Value and analytic gradients of :func:`cc_det_estimate`.

    Returns ``(value, d/dq, d/dr)``. Only the ``++`` and ``-+`` components
    of the second round enter, so the other two slots of ``d/dr`` are zero.
    """
    q0, q1, q2, q3 = (float(x) for x in q)
    sp01 = math.sqrt(q0 * q1)
    sp23 = math.sqrt(q2 * q3)
    c01 = (2.0 * r[0] - q0 - q1) / (2.0 * sp01)
    c23 = (2.0 * r[2] - (1.0 - q0 - q1)) / (2.0 * sp23)
    s = 1.0 if branch >= 0 else -1.0
    u = math.sqrt(max(1.0 - c01**2, 0.0))
    v = math.sqrt(max(1.0 - c23**2, 0.0))
    w = c01 * c23 + s * u * v
    big_r = 2.0 * sp01 * sp23
    value = q1 * q2 + q0 * q3 - big_r * w
    if u == 0.0 or v == 0.0:
        raise ZeroDivisionError(
            "combined-cosine derivative diverges at |cos| = 1; "
            "first-order propagation is undefined here"
        )
    w_c01 = c23 - s * v * c01 / u
    w_c23 = c01 - s * u * c23 / v
    dc01_dq0 = -1.0 / (2.0 * sp01) - c01 / (2.0 * q0)
    dc01_dq1 = -1.0 / (2.0 * sp01) - c01 / (2.0 * q1)
    dc23_dq01 = 1.0 / (2.0 * sp23)
    dc23_dq2 = -c23 / (2.0 * q2)
    dc23_dq3 = -c23 / (2.0 * q3)
    g_q = np.array(
        [
            q3 - big_r / (2.0 * q0) * w - big_r * (w_c01 * dc01_dq0 + w_c23 * dc23_dq01),
            q2 - big_r / (2.0 * q1) * w - big_r * (w_c01 * dc01_dq1 + w_c23 * dc23_dq01),
            q1 - big_r / (2.0 * q2) * w - big_r * w_c23 * dc23_dq2,
            q0 - big_r / (2.0 * q3) * w - big_r * w_c23 * dc23_dq3,
        ]
    )
    g_r = np.array([-2.0 * sp23 * w_c01, 0.0, -2.0 * sp01 * w_c23, 0.0])
    return value, g_q, g_r


def _multinomial_quadratic(grad: np.ndarray, p: np.ndarray, shots: float) -> float:
    """``g^T Cov g`` for multinomial frequencies with the exact covariance."""
    gp = float(np.dot(grad, p))
    return (float(np.dot(grad**2, p)) - gp**2) / shots


def _independent_quadratic(grad: np.ndarray, p: np.ndarray, shots: float) -> float:
    """Same, ignoring the cross covariances between outcomes."""
    return float(np.dot(grad**2, p * (1.0 - p))) / shots


def analytic_uncertainty_cc(
    state: PureState,
    shots_per_round: int | tuple[int, int],
    covariance: str = "multinomial",
) -> float:
    """First-order standard deviation of the determinant-equivalent estimate.

    Propagates the per-round multinomial fluctuations (``shots_per_round``
    repetitions each, or a ``(round1, round2)`` pair; rounds independent)
    through the full estimator chain evaluated at the true probabilities
    with the true branch.

    ``covariance`` selects ``"multinomial"`` (exact within-round covariance,
    ``Cov(P_i, P_j) = -P_i P_j / n`` off-diagonal) or ``"independent"``
    (diagonal binomial variances only).

    States whose amplitude products vanish reduce the estimator to its
    polynomial part, which is differentiated instead. States with a phase
    cosine exactly at ``+-1`` have no finite first-order uncertainty and
    return ``inf``.
    """
    n1, n2 = (
        (int(shots_per_round), int(shots_per_round))
        if np.isscalar(shots_per_round)
        else (int(shots_per_round[0]), int(shots_per_round[1]))
    )
    if n1 < 1 or n2 < 1:
        raise ValueError("shots_per_round must be at least 1")
    if covariance not in ("multinomial", "independent"):
        raise ValueError(f"unknown covariance convention {covariance!r}")
    q = round1_probabilities(state).p
    r = round2_probabilities(state).p
    if q[0] * q[1] == 0.0 or q[2] * q[3] == 0.0:
        # cross term absent: polynomial estimator q1 q2 + q0 q3
        g_q = np.array([q[3], q[2], q[1], q[0]])
        g_r = np.zeros(4)
    else:
        phi = np.angle(state.amplitudes)
        if math.sin(phi[0] - phi[1]) == 0.0 or math.sin(phi[2] - phi[3]) == 0.0:
            return math.inf
        try:
            _, g_q, g_r = cc_det_gradients(q, r, true_branch_sign(state))
        except ZeroDivisionError:
            return math.inf
    quad = _multinomial_quadratic if covariance == "multinomial" else _independent_quadratic
    var = quad(g_q, q, float(n1)) + quad(g_r, r, float(n2))
    return math.sqrt(max(var, 0.0))


def delta_cc_batch(
    amplitudes: np.ndarray,
    shots_per_round: int | float,
    covariance: str = "multinomial",
) -> np.ndarray:
    """Vectorized :func:`analytic_uncertainty_cc` over amplitude rows.

    Degenerate rows (vanishing modulus products) fall back to the
    polynomial gradient; rows with a cosine exactly at ``+-1`` come out as
    ``inf``. Isotropically sampled ensembles hit neither case in practice.
    """
    if covariance not in ("multinomial", "independent"):
        raise ValueError(f"unknown covariance convention {covariance!r}")
    a = np.asarray(amplitudes, dtype=complex)
    q = np.abs(a) ** 2
    phi = np.angle(a)
    phi01 = phi[:, 0] - phi[:, 1]
    phi23 = phi[:, 2] - phi[:, 3]
    q0, q1, q2, q3 = q.T
    sp01 = np.sqrt(q0 * q1)
    sp23 = np.sqrt(q2 * q3)
    big_r = 2.0 * sp01 * sp23
    c01 = np.cos(phi01)
    c23 = np.cos(phi23)
    s01 = np.sin(phi01)
    s23 = np.sin(phi23)
    w = np.cos(phi01 - phi23)
    sin_combined = np.sin(phi01 - phi23)
    degenerate = (sp01 == 0.0) | (sp23 == 0.0)
    singular = ~degenerate & ((s01 == 0.0) | (s23 == 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        w_c01 = sin_combined / s01
        w_c23 = -sin_combined / s23
        dc01_dq0 = -1.0 / (2.0 * sp01) - c01 / (2.0 * q0)
        dc01_dq1 = -1.0 / (2.0 * sp01) - c01 / (2.0 * q1)
        dc23_dq01 = 1.0 / (2.0 * sp23)
        dc23_dq2 = -c23 / (2.0 * q2)
        dc23_dq3 = -c23 / (2.0 * q3)
        g_q = np.stack(
            [
                q3 - big_r / (2.0 * q0) * w - big_r * (w_c01 * dc01_dq0 + w_c23 * dc23_dq01),
                q2 - big_r / (2.0 * q1) * w - big_r * (w_c01 * dc01_dq1 + w_c23 * dc23_dq01),
                q1 - big_r / (2.0 * q2) * w - big_r * w_c23 * dc23_dq2,
                q0 - big_r / (2.0 * q3) * w - big_r * w_c23 * dc23_dq3,
            ],
            axis=1,
        )
        g_r = np.zeros_like(q)
        g_r[:, 0] = -2.0 * sp23 * w_c01
        g_r[:, 2] = -2.0 * sp01 * w_c23
    poly = np.stack([q3, q2, q1, q0], axis=1)
    g_q = np.where(degenerate[:, None], poly, g_q)
    g_r = np.where(degenerate[:, None], 0.0, g_r)
    r2 = np.stack(
        [
            0.5 * np.abs(a[:, 0] + a[:, 1]) ** 2,
            0.5 * np.abs(a[:, 0] - a[:, 1]) ** 2,
            0.5 * np.abs(a[:, 2] + a[:, 3]) ** 2,
            0.5 * np.abs(a[:, 2] - a[:, 3]) ** 2,
        ],
        axis=1,
    )
    n = float(shots_per_round)
    if covariance == "multinomial":
        var1 = (np.sum(g_q**2 * q, axis=1) - np.sum(g_q * q, axis=1) ** 2) / n
        var2 = (np.sum(g_r**2 * r2, axis=1) - np.sum(g_r * r2, axis=1) ** 2) / n
    else:
        var1 = np.sum(g_q**2 * q * (1.0 - q), axis=1) / n
        var2 = np.sum(g_r**2 * r2 * (1.0 - r2), axis=1) / n
    delta = np.sqrt(np.maximum(var1 + var2, 0.0))
    delta[singular] = np.inf
    return delta


def simulate_cc_counts(
    state: PureState, total_pairs: int, stream: SeededStream
) -> tuple[CountVector, CountVector]:
    """Simulate both rounds, splitting the pair budget evenly between them."""
    if total_pairs < 2:
        raise ValueError("need at least 2 pairs, one per round")
    n1 = total_pairs // 2 + total_pairs % 2
    n2 = total_pairs // 2
    rng = stream.generator()
    counts1 = multinomial_counts(round1_probabilities(state).p, n1, rng)
    counts2 = multinomial_counts(round2_probabilities(state).p, n2, rng)
    return counts1, counts2
