r"""Covariance matrices, passive transformations and standard Gaussian states.

Conventions
-----------
* Quadratures are ordered ``(q_1, ..., q_n, p_1, ..., p_n)`` ("qqpp").
* The vacuum covariance matrix is the identity.
* The symplectic form is ``sigma = [[0, 1], [-1, 0]]`` in ``n x n`` blocks.
* A passive transformation acts as ``Gamma -> K.T @ Gamma @ K`` with
  ``K = [[X, Y], [-Y, X]]`` for the unitary ``U = X + iY``.  In this
  convention ``complexify(K @ v) == conj(U) @ complexify(v)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import StructuralError, ValidityError

TOL_SYM = 1e-10
TOL_UNIT = 1e-10
TOL_PSD = 1e-9
TOL_EIG = 1e-9
TOL_DET = 1e-8

ArrayLike = Union[np.ndarray, Sequence[Sequence[float]]]


def symplectic_form(n: int) -> np.ndarray:
    """Return the ``2n x 2n`` symplectic form in qqpp ordering."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def mode_indices(modes: Sequence[int], n: int) -> np.ndarray:
    """Row/column indices ``[q_m..., p_m...]`` of the given modes."""
    modes = np.asarray(modes, dtype=int)
    return np.concatenate([modes, modes + n])


@dataclass(frozen=True)
class CovarianceMatrix:
    """Real symmetric ``2n x 2n`` covariance matrix in qqpp ordering.

    Construction only checks the shape. Physical validity is checked by
    :func:`validate`, so that invalid matrices can still be represented.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if np.iscomplexobj(arr):
            if np.any(arr.imag != 0):
                raise StructuralError("covariance matrix must be real")
            arr = arr.real
        arr = np.array(arr, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise StructuralError(f"covariance matrix must be square, got shape {arr.shape}")
        if arr.shape[0] == 0 or arr.shape[0] % 2:
            raise StructuralError(f"covariance matrix size must be even and positive, got {arr.shape[0]}")
        if not np.all(np.isfinite(arr)):
            raise StructuralError("covariance matrix has non-finite entries")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def n(self) -> int:
        return self.data.shape[0] // 2

    def submatrix(self, modes: Sequence[int]) -> "CovarianceMatrix":
        """Reduced covariance matrix of ``modes`` (0-indexed), i.e. the other modes traced out."""
        idx = mode_indices(modes, self.n)
        return CovarianceMatrix(self.data[np.ix_(idx, idx)])

    def __eq__(self, other):
        if not isinstance(other, CovarianceMatrix):
            return NotImplemented
        return self.data.shape == other.data.shape and bool(np.array_equal(self.data, other.data))

    def __hash__(self):
        return hash(self.data.tobytes())


def as_covariance(gamma) -> CovarianceMatrix:
    if isinstance(gamma, CovarianceMatrix):
        return gamma
    return CovarianceMatrix(np.asarray(gamma))


@dataclass(frozen=True)
class ValidityVerdict:
    """Outcome of :func:`validate`.

    ``min_eigenvalue`` is the smallest eigenvalue of the Hermitian matrix
    ``sym(Gamma) + i sigma``; ``asymmetry`` is ``max |Gamma - Gamma.T|``.
    """

    status: str
    min_eigenvalue: float
    asymmetry: float

    @property
    def ok(self) -> bool:
        return self.status == "valid"

    @property
    def violation(self) -> float:
        """Magnitude of the worst violated constraint (0 when valid)."""
        if self.status == "asymmetric":
            return self.asymmetry
        return max(0.0, -self.min_eigenvalue)


def validate(gamma) -> ValidityVerdict:
    """Check symmetry and the uncertainty relation ``Gamma + i sigma >= 0``."""
    gamma = as_covariance(gamma)
    g = gamma.data
    asym = float(np.max(np.abs(g - g.T)))
    sym = 0.5 * (g + g.T)
    min_eig = float(np.linalg.eigvalsh(sym + 1j * symplectic_form(gamma.n))[0])
    if asym > TOL_SYM:
        status = "asymmetric"
    elif min_eig < -TOL_PSD:
        status = "unphysical"
    else:
        status = "valid"
    return ValidityVerdict(status, min_eig, asym)


def require_valid(gamma) -> CovarianceMatrix:
    """Coerce to :class:`CovarianceMatrix` and raise :class:`ValidityError` unless valid."""
    gamma = as_covariance(gamma)
    verdict = validate(gamma)
    if verdict.status == "asymmetric":
        raise ValidityError(f"covariance matrix is not symmetric (max deviation {verdict.asymmetry:.3g})", verdict.asymmetry)
    if verdict.status == "unphysical":
        raise ValidityError(
            f"covariance matrix violates the uncertainty relation "
            f"(min eigenvalue of Gamma + i sigma = {verdict.min_eigenvalue:.6g})",
            verdict.violation,
        )
    return gamma


@dataclass(frozen=True)
class SqueezingReport:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)

    @property
    def lambda1(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def lambda2(self) -> float:
        return float(self.eigenvalues[1])

    @property
    def eigvec1(self) -> np.ndarray:
        return self.eigenvectors[:, 0]

    @property
    def eigvec2(self) -> np.ndarray:
        return self.eigenvectors[:, 1]

    @property
    def is_squeezed(self) -> bool:
        return self.lambda1 < 1 - TOL_EIG


def squeezing_report(gamma) -> SqueezingReport:
    """Ordinary spectrum of ``Gamma`` in non-decreasing order with orthonormal eigenvectors.

    Within degenerate eigenspaces the basis is whatever the eigensolver
    returns; callers must not rely on a particular choice.
    """
    gamma = require_valid(gamma)
    w, v = np.linalg.eigh(gamma.data)
    w.flags.writeable = False
    v.flags.writeable = False
    return SqueezingReport(w, v)


# ---------------------------------------------------------------------------
# complex <-> real
# ---------------------------------------------------------------------------


def complexify(v) -> np.ndarray:
    """Map a real qqpp vector ``(q, p)`` to the complex mode vector ``q + i p``."""
    v = np.asarray(v, dtype=float)
    if v.shape[-1] % 2:
        raise StructuralError(f"real phase-space vector must have even length, got {v.shape[-1]}")
    n = v.shape[-1] // 2
    return v[..., :n] + 1j * v[..., n:]


def realify(psi) -> np.ndarray:
    """Inverse of :func:`complexify`."""
    psi = np.asarray(psi, dtype=complex)
    return np.concatenate([psi.real, psi.imag], axis=-1)


# ---------------------------------------------------------------------------
# passive transformations
# ---------------------------------------------------------------------------


def real_form(u) -> np.ndarray:
    """Real ``2n x 2n`` matrix ``[[X, Y], [-Y, X]]`` of ``u = X + iY``; works on stacks."""
    u = np.asarray(u, dtype=complex)
    x, y = u.real, u.imag
    top = np.concatenate([x, y], axis=-1)
    bottom = np.concatenate([-y, x], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def unitarity_error(u) -> float:
    u = np.asarray(u, dtype=complex)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


@dataclass(frozen=True)
class PassiveTransform:
    """Orthogonal symplectic matrix ``K`` together with its unitary ``U``.

    Use :func:`passive_from_unitary` rather than calling the constructor
    with a hand-made ``real_form``; the constructor cross-checks both.
    """

    unitary: np.ndarray
    real_form: np.ndarray = field(repr=False)

    def __post_init__(self):
        u = np.array(self.unitary, dtype=complex)
        k = np.array(self.real_form, dtype=float)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise StructuralError(f"unitary must be square, got shape {u.shape}")
        n = u.shape[0]
        if k.shape != (2 * n, 2 * n):
            raise StructuralError(f"real form must be {2 * n}x{2 * n}, got {k.shape}")
        err = unitarity_error(u)
        if err > TOL_UNIT:
            raise ValidityError(f"matrix is not unitary (max |U^dag U - 1| = {err:.3g})", err)
        mismatch = float(np.max(np.abs(k - real_form(u))))
        if mismatch > TOL_UNIT:
            raise ValidityError(f"real form does not match unitary (max deviation {mismatch:.3g})", mismatch)
        u.flags.writeable = False
        k.flags.writeable = False
        object.__setattr__(self, "unitary", u)
        object.__setattr__(self, "real_form", k)

    @property
    def n(self) -> int:
        return self.unitary.shape[0]

    @classmethod
    def identity(cls, n: int) -> "PassiveTransform":
        return passive_from_unitary(np.eye(n))

    def then(self, other: "PassiveTransform") -> "PassiveTransform":
        """Transform that applies ``self`` first and ``other`` second."""
        if other.n != self.n:
            raise StructuralError(f"cannot compose {self.n}-mode and {other.n}-mode transforms")
        u = self.unitary @ other.unitary
        return PassiveTransform(u, real_form(u))

    def orthogonality_error(self) -> float:
        k = self.real_form
        return float(np.max(np.abs(k.T @ k - np.eye(2 * self.n))))

    def symplecticity_error(self) -> float:
        k = self.real_form
        s = symplectic_form(self.n)
        return float(np.max(np.abs(k.T @ s @ k - s)))


def passive_from_unitary(u) -> PassiveTransform:
    """Build the passive transformation generated by the unitary ``u``.

    Raises:
        ValidityError: if ``u`` deviates from unitarity by more than ``TOL_UNIT``.
    """
    u = np.atleast_2d(np.asarray(u, dtype=complex))
    return PassiveTransform(u, real_form(u))


def apply_passive(gamma, k: PassiveTransform) -> CovarianceMatrix:
    """Return ``K.T @ Gamma @ K``."""
    gamma = as_covariance(gamma)
    if k.n != gamma.n:
        raise StructuralError(f"transform acts on {k.n} modes, state has {gamma.n}")
    if k.orthogonality_error() > TOL_UNIT:
        raise ValidityError("transform is not orthogonal", k.orthogonality_error())
    km = k.real_form
    out = km.T @ gamma.data @ km
    return CovarianceMatrix(0.5 * (out + out.T))


def embed_unitary(u, n: int, modes: Optional[Sequence[int]] = None) -> np.ndarray:
    """Embed a ``m x m`` unitary acting on ``modes`` into an ``n``-mode identity."""
    u = np.asarray(u, dtype=complex)
    m = u.shape[0]
    modes = list(range(m)) if modes is None else list(modes)
    full = np.eye(n, dtype=complex)
    full[np.ix_(modes, modes)] = u
    return full


def permutation_transform(order: Sequence[int]) -> PassiveTransform:
    """Passive transform with ``K.T Gamma K`` placing old mode ``order[i]`` at position ``i``."""
    n = len(order)
    if sorted(order) != list(range(n)):
        raise StructuralError(f"{order!r} is not a permutation of 0..{n - 1}")
    # (K.T G K)[i, j] = G[order[i], order[j]] requires K[order[i], i] = 1.
    p = np.zeros((n, n))
    p[list(order), list(range(n))] = 1.0
    return passive_from_unitary(p)


def haar_unitary(n: int, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """Haar-random ``n x n`` unitary (or a stack of ``size`` of them).

    QR of a complex Ginibre matrix, with the phases of ``diag(R)`` moved
    into ``Q`` so the distribution does not depend on the QR convention.
    """
    shape = (n, n) if size is None else (size, n, n)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    ph = d / np.abs(d)
    return q * ph[..., None, :]


# ---------------------------------------------------------------------------
# state factory
# ---------------------------------------------------------------------------


def vacuum(n: int) -> CovarianceMatrix:
    if n < 1:
        raise StructuralError(f"mode count must be positive, got {n}")
    return CovarianceMatrix(np.eye(2 * n))


def thermal(b) -> CovarianceMatrix:
    """Product of thermal states with covariance ``b_k * 1`` per mode (``b_k >= 1``)."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if np.any(b < 1):
        raise ValidityError(f"thermal state requires b >= 1, got b = {b.min():g}", float(1 - b.min()))
    return CovarianceMatrix(np.diag(np.concatenate([b, b])))


def squeezed(r: float, phase: float = 0.0, thermal_b: float = 1.0) -> CovarianceMatrix:
    """Single-mode squeezed (thermal) state.

    The variance ``thermal_b * exp(-2r)`` lies along the phase-space
    direction ``(cos phase, sin phase)``.
    """
    if thermal_b < 1:
        raise ValidityError(f"thermal factor must be >= 1, got {thermal_b:g}", 1 - thermal_b)
    c, s = np.cos(phase), np.sin(phase)
    rot = np.array([[c, -s], [s, c]])
    g = thermal_b * rot @ np.diag([np.exp(-2 * r), np.exp(2 * r)]) @ rot.T
    return CovarianceMatrix(0.5 * (g + g.T))


def direct_sum(*gammas) -> CovarianceMatrix:
    """Product state ``Gamma_1 (+) Gamma_2 (+) ...`` re-interleaved into qqpp order."""
    gammas = [as_covariance(g) for g in gammas]
    if not gammas:
        raise StructuralError("direct_sum needs at least one state")
    n = sum(g.n for g in gammas)
    out = np.zeros((2 * n, 2 * n))
    start = 0
    for g in gammas:
        idx = mode_indices(range(start, start + g.n), n)
        out[np.ix_(idx, idx)] = g.data
        start += g.n
    return CovarianceMatrix(out)


def from_blocks(a, b, c) -> CovarianceMatrix:
    """Two-mode state from mode-wise 2x2 blocks ``[[A, C], [C.T, B]]`` (each block in (q, p) order)."""
    a, b, c = (np.asarray(x, dtype=float) for x in (a, b, c))
    modewise = np.block([[a, c], [c.T, b]])
    # modewise order (q1, p1, q2, p2) -> qqpp (q1, q2, p1, p2)
    perm = [0, 2, 1, 3]
    return CovarianceMatrix(modewise[np.ix_(perm, perm)])


def to_blocks(gamma):
    """Inverse of :func:`from_blocks` for two-mode states: returns ``(A, B, C)``."""
    gamma = as_covariance(gamma)
    if gamma.n != 2:
        raise StructuralError(f"block form needs a two-mode state, got n = {gamma.n}")
    perm = [0, 2, 1, 3]
    m = gamma.data[np.ix_(perm, perm)]
    return m[:2, :2], m[2:, 2:], m[:2, 2:]


def simon_form(a: float, b: float, c: float, d: float) -> CovarianceMatrix:
    """Two-mode state with ``A = a 1``, ``B = b 1``, ``C = diag(c, d)``.

    Raises:
        ValidityError: if the parameters violate the uncertainty relation.
    """
    gamma = from_blocks(a * np.eye(2), b * np.eye(2), np.diag([c, d]))
    verdict = validate(gamma)
    if not verdict.ok:
        raise ValidityError(
            f"simon_form(a={a:g}, b={b:g}, c={c:g}, d={d:g}) violates Gamma + i sigma >= 0 "
            f"(min eigenvalue {verdict.min_eigenvalue:.6g})",
            verdict.violation,
        )
    return gamma


def two_mode_squeezed(r: float) -> CovarianceMatrix:
    """Two-mode squeezed vacuum: ``A = B = cosh(2r) 1``, ``C = diag(-sinh 2r, sinh 2r)``."""
    ch, sh = np.cosh(2 * r), np.sinh(2 * r)
    return from_blocks(ch * np.eye(2), ch * np.eye(2), np.diag([-sh, sh]))


def random_symplectic(n: int, rng: np.random.Generator, max_squeeze: float = 1.0) -> np.ndarray:
    """Random symplectic matrix ``K1 Z K2`` with Haar passive parts and squeezings in ``[0, max_squeeze]``."""
    r = rng.uniform(0, max_squeeze, size=n)
    z = np.diag(np.concatenate([np.exp(-r), np.exp(r)]))
    k1 = real_form(haar_unitary(n, rng))
    k2 = real_form(haar_unitary(n, rng))
    return k1 @ z @ k2


def random_state(
    n: int,
    rng: np.random.Generator,
    max_squeeze: float = 1.0,
    max_thermal: float = 2.0,
) -> CovarianceMatrix:
    """Random valid state ``S.T diag(nu, nu) S`` with thermal ``nu_k`` in ``[1, max_thermal]``."""
    nu = rng.uniform(1, max_thermal, size=n)
    s = random_symplectic(n, rng, max_squeeze)
    g = s.T @ np.diag(np.concatenate([nu, nu])) @ s
    return CovarianceMatrix(0.5 * (g + g.T))


def make_state(kind: str, **params) -> CovarianceMatrix:
    """Named state factory used by the command line.

    ``kind`` is one of ``vacuum`` (n), ``thermal`` (b, scalar or list),
    ``squeezed`` (r, scalar or list; phase), ``simon`` (a, b, c, d),
    ``tms`` (r) and ``random`` (n, seed, max_squeeze, max_thermal).
    The returned state is always valid.
    """
    if kind == "vacuum":
        return vacuum(int(params.get("n", 1)))
    if kind == "thermal":
        return thermal(params["b"])
    if kind == "squeezed":
        rs = np.atleast_1d(params["r"])
        phases = np.broadcast_to(np.atleast_1d(params.get("phase", 0.0)), rs.shape)
        return direct_sum(*[squeezed(float(r), float(ph)) for r, ph in zip(rs, phases)])
    if kind == "simon":
        return simon_form(params["a"], params["b"], params["c"], params["d"])
    if kind == "tms":
        return two_mode_squeezed(float(params["r"]))
    if kind == "random":
        rng = np.random.default_rng(params.get("seed", 0))
        return random_state(
            int(params.get("n", 2)),
            rng,
            float(params.get("max_squeeze", 1.0)),
            float(params.get("max_thermal", 2.0)),
        )
    raise StructuralError(f"unknown state kind {kind!r}")
