"""Dense complex linear algebra, quantum states and random sampling.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. States are
wrapped in small immutable containers that validate themselves on
construction and cache their spectral decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Sequence

import numpy as np

from infodist.config import DEFAULT_TOLERANCES, Tolerances
from infodist.errors import DimensionMismatchError, InvariantError

ComplexMatrix = np.ndarray


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def as_matrix(m) -> ComplexMatrix:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def dagger(m: ComplexMatrix) -> ComplexMatrix:
    return np.conj(np.swapaxes(m, -1, -2))


def hermitian_residual(h: ComplexMatrix) -> float:
    return float(np.max(np.abs(h - dagger(h)))) if h.size else 0.0


def tensor(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace(m: ComplexMatrix, dims: Sequence[int], keep: Sequence[int]) -> ComplexMatrix:
    """Trace out every subsystem of ``m`` not listed in ``keep``.

    Args:
        m: Square matrix on the tensor product of subsystems of sizes ``dims``.
        dims: Subsystem dimensions, first factor outermost (``np.kron`` order).
        keep: Indices of the subsystems to retain; their order in the result
            follows ``dims``, not ``keep``.
    """
    m = as_matrix(m)
    dims = [int(d) for d in dims]
    n = len(dims)
    total = prod(dims)
    if m.shape != (total, total):
        raise DimensionMismatchError(
            f"matrix of shape {m.shape} does not match subsystem dims {dims} (product {total})")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise DimensionMismatchError(f"keep indices {keep} out of range for {n} subsystems")
    t = m.reshape(dims + dims)
    for i in reversed([i for i in range(n) if i not in keep]):
        half = t.ndim // 2
        t = np.trace(t, axis1=i, axis2=i + half)
    dk = prod(dims[k] for k in keep)
    return t.reshape(dk, dk)


def eigh(h: ComplexMatrix, tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[np.ndarray, ComplexMatrix]:
    """Spectral decomposition of a Hermitian matrix, eigenvalues descending.

    Ties keep the solver's order (stable sort). Each eigenvector's phase is
    fixed so its largest-magnitude entry is real and positive, which makes
    the output a deterministic function of the input bytes.
    """
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise DimensionMismatchError(f"eigh needs a square matrix, got {h.shape}")
    res = hermitian_residual(h)
    if res > tol.hermitian:
        raise InvariantError("hermiticity", res, tol.hermitian)
    w, v = np.linalg.eigh((h + dagger(h)) / 2)
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]
    if v.size:
        pivot = np.argmax(np.abs(v), axis=0)
        ph = v[pivot, np.arange(v.shape[1])]
        v = v * (np.abs(ph) / ph)
    return w, v


def eigvalsh(h: ComplexMatrix) -> np.ndarray:
    """Eigenvalues only, descending. No Hermiticity validation."""
    h = as_matrix(h)
    return np.linalg.eigvalsh((h + dagger(h)) / 2)[::-1]


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated quantum state with its cached spectral decomposition.

    Build instances through :meth:`from_matrix` (or the other
    constructors); the raw initializer performs no checks.
    """

    matrix: ComplexMatrix
    spectrum: np.ndarray
    eigenbasis: ComplexMatrix

    @classmethod
    def from_matrix(cls, m, tol: Tolerances = DEFAULT_TOLERANCES) -> "DensityMatrix":
        m = as_matrix(m)
        if m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise DimensionMismatchError(f"density matrix must be square and non-empty, got {m.shape}")
        res = hermitian_residual(m)
        if res > tol.hermitian:
            raise InvariantError("hermiticity", res, tol.hermitian)
        m = (m + dagger(m)) / 2
        tr = float(np.real(np.trace(m)))
        if abs(tr - 1.0) > tol.trace:
            raise InvariantError("unit trace", abs(tr - 1.0), tol.trace)
        w, v = eigh(m, tol)
        if w[-1] < -tol.psd:
            raise InvariantError("positivity", -w[-1], tol.psd)
        w = np.where(w < 0, 0.0, w)
        recon = float(np.max(np.abs((v * w) @ dagger(v) - m)))
        if recon > tol.reconstruction:
            raise InvariantError("spectral reconstruction", recon, tol.reconstruction)
        return cls(_frozen(m), _frozen(w), _frozen(v))

    @classmethod
    def pure(cls, psi, tol: Tolerances = DEFAULT_TOLERANCES) -> "DensityMatrix":
        psi = PureState.from_vector(psi, tol).amplitudes
        return cls.from_matrix(np.outer(psi, psi.conj()), tol)

    @classmethod
    def maximally_mixed(cls, d: int) -> "DensityMatrix":
        return cls.from_matrix(np.eye(d, dtype=np.complex128) / d)

    @classmethod
    def diagonal(cls, probs: Sequence[float], tol: Tolerances = DEFAULT_TOLERANCES) -> "DensityMatrix":
        return cls.from_matrix(np.diag(np.asarray(probs, dtype=np.complex128)), tol)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.spectrum > DEFAULT_TOLERANCES.psd))

    def eigenprojector(self, j: int) -> ComplexMatrix:
        v = self.eigenbasis[:, j]
        return np.outer(v, v.conj())

    def sqrt(self, cutoff: float = 1e-12) -> ComplexMatrix:
        # eigenvalues below cutoff are numerical zeros; their square roots would not be
        s = np.where(self.spectrum > cutoff, np.sqrt(np.clip(self.spectrum, 0, None)), 0.0)
        return (self.eigenbasis * s) @ dagger(self.eigenbasis)


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray

    @classmethod
    def from_vector(cls, psi, tol: Tolerances = DEFAULT_TOLERANCES) -> "PureState":
        psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
        norm = float(np.real(np.vdot(psi, psi)))
        if abs(norm - 1.0) > tol.unit_norm:
            raise InvariantError("unit norm", abs(norm - 1.0), tol.unit_norm)
        return cls(_frozen(psi))

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def projector(self) -> ComplexMatrix:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def density(self) -> DensityMatrix:
        return DensityMatrix.from_matrix(self.projector())


def as_density(rho) -> DensityMatrix:
    if isinstance(rho, DensityMatrix):
        return rho
    if isinstance(rho, PureState):
        return rho.density()
    return DensityMatrix.from_matrix(rho)


def purify(rho: DensityMatrix, compact: bool = False) -> PureState:
    """Canonical spectral purification ``sum_j sqrt(l_j) |j>_Q |j>_R``.

    The system factor comes first. With ``compact=True`` the reference only
    spans the support of ``rho`` (dimension ``rho.rank``) instead of ``dim``.
    """
    rho = as_density(rho)
    lam, v = rho.spectrum, rho.eigenbasis
    if compact:
        r = max(rho.rank, 1)
        lam, v = lam[:r], v[:, :r]
    psi = (v * np.sqrt(lam)).reshape(-1)
    # spectrum sums to one only up to the trace tolerance
    psi = psi / np.linalg.norm(psi)
    return PureState.from_vector(psi)


def _check_same_dim(a: DensityMatrix, b: DensityMatrix) -> None:
    if a.dim != b.dim:
        raise DimensionMismatchError(f"states have different dimensions: {a.dim} vs {b.dim}")


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    a, b = as_density(a), as_density(b)
    _check_same_dim(a, b)
    t = 0.5 * float(np.sum(np.abs(eigvalsh(a.matrix - b.matrix))))
    return min(max(t, 0.0), 1.0)


def trace_distance_matrices(a: ComplexMatrix, b: ComplexMatrix) -> float:
    """Trace distance of two Hermitian matrices without state validation."""
    return 0.5 * float(np.sum(np.abs(eigvalsh(as_matrix(a) - as_matrix(b)))))


def fidelity(a: DensityMatrix, b: DensityMatrix) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(a) b sqrt(a)))**2``.

    When either state is pure the overlap formula is used, which avoids the
    square-root amplification of round-off in the null space.
    """
    a, b = as_density(a), as_density(b)
    _check_same_dim(a, b)
    for p, q in ((a, b), (b, a)):
        if p.dim == 1 or p.spectrum[1] <= 1e-12:
            psi = p.eigenbasis[:, 0]
            f = float(np.real(np.vdot(psi, q.matrix @ psi)))
            return min(max(f, 0.0), 1.0)
    s = np.linalg.svd(a.sqrt() @ b.sqrt(), compute_uv=False)
    f = float(np.sum(s)) ** 2
    return min(max(f, 0.0), 1.0)


def haar_unitary(d: int, rng: np.random.Generator) -> ComplexMatrix:
    """Haar-random ``d x d`` unitary (QR of a Ginibre matrix, phases fixed)."""
    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def haar_isometry(din: int, dout: int, rng: np.random.Generator) -> ComplexMatrix:
    """First ``din`` columns of a Haar unitary on ``dout`` dimensions."""
    if dout < din:
        raise DimensionMismatchError(f"no isometry from dimension {din} into {dout}")
    return haar_unitary(dout, rng)[:, :din]


def random_pure_state(d: int, rng: np.random.Generator) -> PureState:
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return PureState.from_vector(z / np.linalg.norm(z))


def random_density(d: int, rank: int, rng: np.random.Generator) -> DensityMatrix:
    if not 1 <= rank <= d:
        raise ValueError(f"rank must lie in [1, {d}], got {rank}")
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = g @ dagger(g)
    return DensityMatrix.from_matrix(m / np.real(np.trace(m)))


def degenerate_clusters(spectrum: np.ndarray, gap: float = DEFAULT_TOLERANCES.degenerate_gap) -> list[list[int]]:
    """Group indices of a descending spectrum into runs closer than ``gap``."""
    clusters = [[0]] if len(spectrum) else []
    for j in range(1, len(spectrum)):
        if spectrum[j - 1] - spectrum[j] < gap:
            clusters[-1].append(j)
        else:
            clusters.append([j])
    return clusters


def rotate_degenerate(rho: DensityMatrix, rng: np.random.Generator) -> ComplexMatrix:
    """Another eigenbasis of ``rho``: a Haar rotation inside each degenerate cluster."""
    v = np.array(rho.eigenbasis)
    for cl in degenerate_clusters(rho.spectrum):
        if len(cl) > 1:
            v[:, cl] = v[:, cl] @ haar_unitary(len(cl), rng)
    return v
