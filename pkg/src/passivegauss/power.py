r"""Entangling power of passive optics.

A Gaussian state can be made NPPT by beam splitters and phase shifters
exactly when the product of the two smallest eigenvalues of its covariance
matrix is below one.  The best logarithmic negativity reachable in any
two-mode subsystem is ``max(0, -log2(lambda1 * lambda2) / 2)``; this module
computes that number and builds a passive transformation attaining it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from .core import (
    TOL_EIG,
    CovarianceMatrix,
    PassiveTransform,
    apply_passive,
    as_covariance,
    complexify,
    direct_sum,
    embed_unitary,
    passive_from_unitary,
    permutation_transform,
    realify,
    require_valid,
    squeezing_report,
    to_blocks,
    vacuum,
)
from .entanglement import EntanglementReport, ModePartition, entanglement_report
from .errors import StructuralError

TOL_OPT = 1e-6
SIN_GAMMA_FLOOR = 1e-8

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def closed_form_bits(product: float) -> float:
    """``max(0, -log2(product) / 2)``."""
    if product >= 1:
        return 0.0
    return float(-np.log2(product) / 2)


@dataclass(frozen=True)
class EntanglingPowerVerdict:
    lambda1: float
    lambda2: float
    partition: Optional[ModePartition] = None

    @property
    def product(self) -> float:
        return self.lambda1 * self.lambda2

    @property
    def can_entangle(self) -> bool:
        return self.product < 1 - TOL_EIG

    @property
    def lower_bound_bits(self) -> float:
        """Guaranteed full-state negativity across any split after the optimal procedure."""
        return closed_form_bits(self.product)

    @property
    def attainable_two_mode_bits(self) -> float:
        """Exact maximum over passive transforms and two-mode subsystems."""
        return closed_form_bits(self.product)


def verdict(gamma, part: Optional[ModePartition] = None) -> EntanglingPowerVerdict:
    """Decide whether passive optics can produce an NPPT state from ``gamma``.

    The answer depends only on the ordinary spectrum of ``gamma``, so the
    partition is carried along for labelling only.
    """
    rep = squeezing_report(gamma)
    if rep.eigenvalues.size < 2:
        raise StructuralError("need at least one mode")
    return EntanglingPowerVerdict(rep.lambda1, rep.lambda2, part)


def attainable_two_mode(gamma) -> float:
    """Largest logarithmic negativity (bits) of any two-mode subsystem after a passive transform."""
    gamma = as_covariance(gamma)
    if gamma.n < 2:
        raise StructuralError(f"two-mode subsystems need n >= 2, got n = {gamma.n}")
    return verdict(gamma).attainable_two_mode_bits


def add_vacuum_ancilla(gamma) -> CovarianceMatrix:
    """Append one vacuum mode (the empty port of a beam splitter)."""
    return direct_sum(require_valid(gamma), vacuum(1))


# ---------------------------------------------------------------------------
# two-mode optics
# ---------------------------------------------------------------------------


def beam_splitter(theta: float) -> np.ndarray:
    """Complex 2x2 beam splitter ``[[cos, -sin], [sin, cos]]``; ``theta = pi/4`` is 50:50."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def phase_shift(alpha: float) -> np.ndarray:
    """Phase ``exp(-i alpha)`` on mode A."""
    return np.array([[np.exp(-1j * alpha), 0], [0, 1]], dtype=complex)


def entangler_matrix(gamma_angle: float, alpha: float) -> np.ndarray:
    """``F = V E V^dag`` for ``V = L(alpha) B(gamma/2)``, ``E = diag(1, -1)``."""
    c, s = np.cos(gamma_angle), np.sin(gamma_angle)
    return np.array(
        [[c, np.exp(-1j * alpha) * s], [np.exp(1j * alpha) * s, -c]],
        dtype=complex,
    )


def pauli_imaginary_parts(psi1, psi2) -> np.ndarray:
    """``(Im<psi2|sx|psi1>, Im<psi2|sy|psi1>, Im<psi2|sz|psi1>)``.

    For unit vectors with ``Re<psi2|psi1> = 0`` this is a unit vector.
    """
    psi1 = np.asarray(psi1, dtype=complex)
    psi2 = np.asarray(psi2, dtype=complex)
    return np.array([np.imag(np.vdot(psi2, p @ psi1)) for p in (PAULI_X, PAULI_Y, PAULI_Z)])


def solve_angles(j) -> Tuple[float, float]:
    """Solve ``cos g = jz, sin a sin g = jy, cos a sin g = jx`` for ``(alpha, gamma)``.

    ``alpha`` is returned in ``[0, pi)``; the pair ``(alpha + pi, -gamma)``
    describes the same optics, and is used to fold ``alpha`` into range.
    """
    jx, jy, jz = (float(x) for x in j)
    if abs(jy) < 1e-12:
        jy = 0.0
    g = float(np.arctan2(np.hypot(jx, jy), jz))
    if abs(np.sin(g)) < SIN_GAMMA_FLOOR:
        return 0.0, g
    a = float(np.arctan2(jy, jx))
    if a < 0:
        a, g = a + np.pi, -g
    if a >= np.pi:
        a, g = a - np.pi, -g
    return a, g


def classify_two_mode(gamma, tol: float = 1e-9) -> str:
    """Label a two-mode state by the special cases of the optimal entangler.

    ``ia``   product of two identical single-mode states
    ``ib``   product of a single-mode state with a coherent/thermal state
    ``i``    other product states
    ``iib``  two-mode squeezed vacuum in standard form
    ``iia``  symmetric standard form ``A = B = a 1``, ``C`` diagonal
    ``ii``   standard form ``A = a 1``, ``B = b 1``, ``C`` diagonal
    ``general`` anything else
    """
    a, b, c = to_blocks(gamma)
    eye = np.eye(2)
    close = lambda x, y: bool(np.max(np.abs(x - y)) <= tol)
    scalar = lambda m: close(m, m[0, 0] * eye)
    if close(c, 0 * c):
        if close(a, b):
            return "ia"
        if scalar(b) or scalar(a):
            return "ib"
        return "i"
    if scalar(a) and scalar(b) and close(c, np.diag(np.diag(c))):
        if abs(a[0, 0] - b[0, 0]) <= tol:
            cq, cp = c[0, 0], c[1, 1]
            if abs(cq + cp) <= tol and abs(cq * cq - (a[0, 0] ** 2 - 1)) <= tol * max(1.0, a[0, 0] ** 2):
                return "iib"
            return "iia"
        return "ii"
    return "general"


@dataclass(frozen=True)
class EntanglerPlan:
    """Phase ``L(alpha)`` on mode A, then beam splitter ``B(gamma / 2)``.

    ``k`` is the passive transform to apply as ``K.T Gamma K``.  Because
    ``K`` is built from ``U = X + iY`` as ``[[X, Y], [-Y, X]]``, its
    unitary is the complex conjugate of the optical matrix
    ``L(alpha) @ B(gamma / 2)``.
    """

    alpha: float
    gamma: float
    k: PassiveTransform
    predicted_negativity_bits: float
    case: str = "general"
    nothing_to_gain: bool = False
    phase_first: bool = True

    @property
    def optical_unitary(self) -> np.ndarray:
        return phase_shift(self.alpha) @ beam_splitter(self.gamma / 2)

    @property
    def transmissivity(self) -> float:
        return float(np.cos(self.gamma / 2) ** 2)


def _plan(alpha: float, gamma_angle: float, predicted: float, case: str, nothing: bool = False) -> EntanglerPlan:
    v = phase_shift(alpha) @ beam_splitter(gamma_angle / 2)
    return EntanglerPlan(alpha, gamma_angle, passive_from_unitary(v.conj()), predicted, case, nothing)


def _degenerate_partner(values, vectors, tol: float = 1e-9) -> Optional[np.ndarray]:
    """Basis of the lambda2 eigenspace when it is a complex line apart from lambda1, else None."""
    scale = max(1.0, abs(values[1]))
    idx = [i for i in range(1, len(values)) if abs(values[i] - values[1]) <= tol * scale]
    if len(idx) != 2 or abs(values[0] - values[1]) <= tol * scale:
        return None
    basis = vectors[:, idx]
    jv = realify(1j * complexify(vectors[:, 1]))
    if np.linalg.norm(jv - basis @ (basis.T @ jv)) > 1e-8:
        return None
    return basis


def _eigen_pair(gamma: CovarianceMatrix):
    """Complexified eigenvectors of the two smallest eigenvalues, in a canonical gauge.

    When the lambda2 eigenspace is a complex line, psi2 is rotated by a
    phase so that no phase shifter is needed (jy = 0, jx >= 0).  The sign
    of psi2 is otherwise fixed so that jy > 0, or jy = 0 and jx >= 0.
    """
    rep = squeezing_report(gamma)
    psi1 = complexify(rep.eigvec1)
    psi2 = complexify(rep.eigvec2)
    if _degenerate_partner(rep.eigenvalues, rep.eigenvectors) is not None:
        zx = np.vdot(psi2, PAULI_X @ psi1)
        zy = np.vdot(psi2, PAULI_Y @ psi1)
        theta = np.angle(zy) if abs(zy) > 1e-12 else np.angle(zx) - np.pi / 2
        if np.imag(np.exp(-1j * theta) * zx) < 0:
            theta += np.pi
        psi2 = np.exp(1j * theta) * psi2
    j = pauli_imaginary_parts(psi1, psi2)
    if j[1] < -1e-12 or (abs(j[1]) <= 1e-12 and j[0] < 0):
        psi2, j = -psi2, -j
    return rep, psi1, psi2, j


def optimal_two_mode_plan(gamma, fast_path: bool = True) -> EntanglerPlan:
    """Optimal phase shifter + beam splitter for a two-mode state.

    Args:
        gamma: valid two-mode covariance matrix.
        fast_path: return the identity for symmetric standard-form states
            that are already optimally entangled.

    Returns:
        EntanglerPlan whose transform brings the negativity across the 1|1
        split to ``max(0, -log2(lambda1 lambda2) / 2)``.  If passive optics
        cannot help, the identity plan flagged ``nothing_to_gain``.
    """
    gamma = require_valid(gamma)
    if gamma.n != 2:
        raise StructuralError(f"optimal_two_mode_plan needs a two-mode state, got n = {gamma.n}")
    v = verdict(gamma)
    predicted = v.attainable_two_mode_bits
    case = classify_two_mode(gamma)
    if not v.can_entangle:
        return _plan(0.0, 0.0, 0.0, case, nothing=True)
    if fast_path and case in ("iia", "iib"):
        current = entanglement_report(gamma, ModePartition.contiguous(1, 1)).log_negativity
        if abs(current - predicted) <= TOL_OPT:
            return _plan(0.0, 0.0, predicted, case)
    _, _, _, j = _eigen_pair(gamma)
    alpha, gamma_angle = solve_angles(j)
    return _plan(alpha, gamma_angle, predicted, case)


# ---------------------------------------------------------------------------
# n modes
# ---------------------------------------------------------------------------


def concentrate_modes(gamma) -> Tuple[PassiveTransform, CovarianceMatrix]:
    """Passive ``S`` moving the two smallest eigenvectors of ``gamma`` onto modes 1 and 2.

    Afterwards the reduced state of the first two modes of ``S.T Gamma S``
    has ``lambda1`` and ``lambda2`` as its two smallest eigenvalues.
    """
    gamma = require_valid(gamma)
    if gamma.n < 2:
        raise StructuralError(f"concentrate_modes needs n >= 2, got n = {gamma.n}")
    if gamma.n == 2:
        s = PassiveTransform.identity(2)
        return s, gamma
    rep = squeezing_report(gamma)
    span = np.column_stack([complexify(rep.eigvec1), complexify(rep.eigvec2)])
    # Leading columns of q span the psi's (if they are complex-parallel the
    # second column is an arbitrary completion, which is fine).
    q, _, _ = np.linalg.svd(span, full_matrices=True)
    s = passive_from_unitary(q.conj())
    return s, apply_passive(gamma, s)


class EntanglingResult(NamedTuple):
    transform: PassiveTransform
    state: CovarianceMatrix
    report: EntanglementReport
    plan: EntanglerPlan


def entangle_optimally(gamma, part: Optional[ModePartition] = None) -> EntanglingResult:
    """Concentrate, entangle the concentrated pair, and route it across ``part``.

    The total transform is ``S`` (concentration), then the two-mode plan on
    modes 1-2, then a mode permutation sending mode 1 to the first mode of
    party A and mode 2 to the first mode of party B.
    """
    gamma = require_valid(gamma)
    n = gamma.n
    part = ModePartition.halves(n) if part is None else part
    if part.n != n:
        raise StructuralError(f"partition covers {part.n} modes, state has {n}")
    v = verdict(gamma, part)
    if not v.can_entangle:
        ident = PassiveTransform.identity(n)
        plan = _plan(0.0, 0.0, 0.0, "general", nothing=True)
        return EntanglingResult(ident, gamma, entanglement_report(gamma, part), plan)

    s, concentrated = concentrate_modes(gamma)
    plan = optimal_two_mode_plan(concentrated.submatrix([0, 1]))
    pair = passive_from_unitary(embed_unitary(plan.k.unitary, n))

    order = [None] * n
    order[part.a_modes[0]] = 0
    order[part.b_modes[0]] = 1
    rest = iter(range(2, n))
    order = [m if m is not None else next(rest) for m in order]

    total = s.then(pair).then(permutation_transform(order))
    out = apply_passive(gamma, total)
    return EntanglingResult(total, out, entanglement_report(out, part), plan)
