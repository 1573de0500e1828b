"""Partial transposition, symplectic spectra and logarithmic negativity."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np

from .core import TOL_EIG, CovarianceMatrix, as_covariance, require_valid, symplectic_form
from .errors import NumericalDomainError, StructuralError

PAIR_RTOL = 1e-7


@dataclass(frozen=True)
class ModePartition:
    """Bipartition of modes ``0..n-1`` into parties A and B (0-indexed).

    Party B is the side whose momenta are reversed by the partial transpose.
    """

    a_modes: Tuple[int, ...]
    b_modes: Tuple[int, ...]

    def __post_init__(self):
        a = tuple(int(m) for m in self.a_modes)
        b = tuple(int(m) for m in self.b_modes)
        if not a or not b:
            raise StructuralError("both parties need at least one mode")
        if set(a) & set(b):
            raise StructuralError(f"modes {sorted(set(a) & set(b))} appear in both parties")
        if len(set(a)) != len(a) or len(set(b)) != len(b):
            raise StructuralError("a mode is listed twice")
        if sorted(a + b) != list(range(len(a) + len(b))):
            raise StructuralError(f"parties {a} | {b} do not cover modes 0..{len(a) + len(b) - 1}")
        object.__setattr__(self, "a_modes", a)
        object.__setattr__(self, "b_modes", b)

    @classmethod
    def contiguous(cls, n_a: int, n_b: int) -> "ModePartition":
        return cls(tuple(range(n_a)), tuple(range(n_a, n_a + n_b)))

    @classmethod
    def halves(cls, n: int) -> "ModePartition":
        """First half in A, second half in B (A gets the smaller half for odd n)."""
        if n < 2:
            raise StructuralError(f"a bipartition needs at least two modes, got {n}")
        return cls.contiguous(n // 2, n - n // 2)

    @property
    def n_a(self) -> int:
        return len(self.a_modes)

    @property
    def n_b(self) -> int:
        return len(self.b_modes)

    @property
    def n(self) -> int:
        return self.n_a + self.n_b

    def momentum_signs(self) -> np.ndarray:
        """The diagonal of ``1_n (+) E``: +1 everywhere except B's momenta."""
        d = np.ones(2 * self.n)
        d[self.n + np.asarray(self.b_modes)] = -1.0
        return d

    def __str__(self):
        fmt = lambda ms: ",".join(str(m + 1) for m in ms)
        return f"{fmt(self.a_modes)}:{fmt(self.b_modes)}"


def _check_partition(gamma: CovarianceMatrix, part: ModePartition):
    if part.n != gamma.n:
        raise StructuralError(f"partition covers {part.n} modes, state has {gamma.n}")


def partial_transpose(gamma, part: ModePartition) -> CovarianceMatrix:
    """Reverse the momenta of party B: ``(1 (+) E) Gamma (1 (+) E)``.

    Only signs change, so applying it twice returns the input bit for bit.
    """
    gamma = as_covariance(gamma)
    _check_partition(gamma, part)
    d = part.momentum_signs()
    return CovarianceMatrix(gamma.data * np.outer(d, d))


def symplectic_values(data: np.ndarray) -> np.ndarray:
    """Symplectic eigenvalues of a (stack of) symmetric positive definite matrices.

    The eigenvalues of ``-(G sigma)^2`` are the squared symplectic
    eigenvalues, each twice.  We diagonalise the similar symmetric matrix
    ``L.T sigma.T G sigma L`` (``G = L L.T``), pair the sorted eigenvalues,
    and average each pair.

    Returns:
        array of shape ``(..., n)`` sorted ascending.

    Raises:
        NumericalDomainError: if ``G`` is not positive definite or the
            eigenvalues fail to pair up.
    """
    data = np.asarray(data, dtype=float)
    n = data.shape[-1] // 2
    sig = symplectic_form(n)
    try:
        chol = np.linalg.cholesky(data)
    except np.linalg.LinAlgError as exc:
        raise NumericalDomainError("symplectic spectrum requires a positive definite matrix") from exc
    lt = np.swapaxes(chol, -1, -2)
    m = lt @ sig.T @ data @ sig @ chol
    w = np.linalg.eigvalsh(0.5 * (m + np.swapaxes(m, -1, -2)))
    lo, hi = w[..., 0::2], w[..., 1::2]
    gap = np.abs(hi - lo)
    if np.any(gap > PAIR_RTOL * np.maximum(np.abs(hi), 1e-300)):
        raise NumericalDomainError(
            f"eigenvalues of -(G sigma)^2 do not pair up (worst relative gap {np.max(gap / np.abs(hi)):.3g})"
        )
    return np.sqrt(np.clip(0.5 * (lo + hi), 0.0, None))


def symplectic_spectrum(gamma) -> np.ndarray:
    """The ``n`` symplectic eigenvalues of ``gamma`` in non-decreasing order.

    Works for partial transposes too (they are positive definite but not
    necessarily physical).
    """
    gamma = as_covariance(gamma)
    return symplectic_values(gamma.data)


def negativity_from_spectrum(spectrum) -> np.ndarray:
    """``-sum_i log2 s_i`` over ``s_i < 1 - TOL_EIG``; vectorised over leading axes.

    Values inside the tolerance band around 1 contribute nothing, so a zero
    result coincides exactly with a PPT verdict.
    """
    s = np.asarray(spectrum, dtype=float)
    below = s < 1 - TOL_EIG
    logs = np.log2(np.where(below, s, 1.0))
    return -np.sum(logs, axis=-1) + 0.0


@dataclass(frozen=True)
class EntanglementReport:
    spectrum: np.ndarray
    log_negativity: float
    is_nppt: bool
    partition: ModePartition

    @property
    def verdict_label(self) -> str:
        if self.is_nppt:
            return "NPPT (entangled, distillable)"
        if min(self.partition.n_a, self.partition.n_b) == 1:
            return "PPT (separable)"
        return "PPT (separability undetermined)"


def entanglement_report(gamma, part: ModePartition) -> EntanglementReport:
    """Logarithmic negativity (bits) and PPT verdict of ``gamma`` across ``part``."""
    gamma = require_valid(gamma)
    spectrum = symplectic_spectrum(partial_transpose(gamma, part))
    spectrum.flags.writeable = False
    en = float(negativity_from_spectrum(spectrum))
    return EntanglementReport(spectrum, en, bool(spectrum[0] < 1 - TOL_EIG), part)


def all_bipartitions(n: int) -> Iterable[ModePartition]:
    """Every bipartition of ``n`` modes, each unordered pair listed once (mode 0 always in A)."""
    rest = list(range(1, n))
    for mask in range(2 ** (n - 1) - 1):
        a = [0] + [m for i, m in enumerate(rest) if mask >> i & 1]
        b = [m for m in range(n) if m not in a]
        yield ModePartition(tuple(a), tuple(b))


def parse_partition(text: str, n: int) -> ModePartition:
    """Parse ``"1,3:2,4"`` (1-indexed mode lists) or ``"nA:nB"`` (mode counts).

    Mode lists are tried first; if they do not form a bipartition of all
    ``n`` modes and both sides are single integers summing to ``n``, they
    are read as counts of a contiguous split.
    """
    if ":" not in text:
        raise StructuralError(f"partition {text!r} must have the form A:B")
    left, right = text.split(":", 1)

    def ints(s: str) -> Sequence[int]:
        try:
            return [int(x) for x in s.split(",") if x.strip()]
        except ValueError as exc:
            raise StructuralError(f"partition {text!r}: {exc}") from None

    a, b = ints(left), ints(right)
    if a and b and sorted(a + b) == list(range(1, n + 1)):
        return ModePartition(tuple(m - 1 for m in a), tuple(m - 1 for m in b))
    if len(a) == 1 and len(b) == 1 and a[0] >= 1 and b[0] >= 1 and a[0] + b[0] == n:
        return ModePartition.contiguous(a[0], b[0])
    raise StructuralError(f"partition {text!r} is not a bipartition of {n} modes")
