"""Entropic functionals of states, channels and instruments (all in bits)."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from math import log2

import numpy as np

from infodist.channels import (
    apply,
    as_channel,
    as_instrument,
    check_input,
    complementary,
    povm,
)
from infodist.config import DEFAULT_TOLERANCES, Tolerances
from infodist.errors import DimensionMismatchError, InvariantError
from infodist.linalg import ComplexMatrix, DensityMatrix, as_density, eigvalsh, fidelity, purify


def _entropy_of_spectrum(w: np.ndarray) -> float:
    w = w[w > 0]
    return float(-np.sum(w * np.log2(w))) if w.size else 0.0


def von_neumann_entropy(rho) -> float:
    s = _entropy_of_spectrum(as_density(rho).spectrum)
    return max(s, 0.0)


def matrix_entropy(m: ComplexMatrix) -> float:
    """Entropy of a PSD unit-trace matrix; round-off negatives count as zero."""
    return max(_entropy_of_spectrum(eigvalsh(m)), 0.0)


def shannon_entropy(p, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise InvariantError("probability vector shape", 1.0, 0.0, f"got shape {p.shape}")
    if np.any(p < -tol.prob_clip):
        raise InvariantError("non-negative probabilities", -float(p.min()), tol.prob_clip)
    res = abs(float(p.sum()) - 1.0)
    if res > tol.completeness:
        raise InvariantError("probabilities sum to one", res, tol.completeness)
    return max(_entropy_of_spectrum(np.clip(p, 0.0, None)), 0.0)


def binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * log2(x) - (1 - x) * log2(1 - x)


def w_matrix(c, rho) -> DensityMatrix:
    """``W_ij = Tr[K_i rho K_j^dag]``, itself a valid density matrix."""
    c, rho = as_channel(c), as_density(rho)
    check_input(c, rho)
    k = c.stacked
    w = np.einsum("iab,bc,jac->ij", k, rho.matrix, k.conj())
    return DensityMatrix.from_matrix(w)


def exchange_entropy(c, rho) -> float:
    return von_neumann_entropy(w_matrix(c, rho))


def exchange_entropy_purified(c, rho, compact: bool = False) -> float:
    """Entropy of ``(Q (x) 1)|Psi><Psi|`` for the spectral purification ``Psi``.

    ``compact`` shrinks the reference to the support of ``rho``; the value
    must not depend on that choice.
    """
    c, rho = as_channel(c), as_density(rho)
    check_input(c, rho)
    psi = purify(rho, compact=compact).amplitudes
    m = psi.reshape(rho.dim, -1)
    outs = np.einsum("kab,br->kar", c.stacked, m).reshape(len(c), -1)
    return matrix_entropy(outs.T @ outs.conj())


def coherent_information(c, rho) -> float:
    return von_neumann_entropy(apply(c, rho)) - exchange_entropy(c, rho)


def disturbance(c, rho) -> float:
    rho = as_density(rho)
    return von_neumann_entropy(rho) - coherent_information(c, rho)


def _eigen_ensemble(rho: DensityMatrix, basis: ComplexMatrix | None):
    if basis is None:
        return rho.spectrum, rho.eigenbasis
    basis = np.asarray(basis, dtype=np.complex128)
    lam = np.real(np.einsum("aj,ab,bj->j", basis.conj(), rho.matrix, basis))
    return np.clip(lam, 0.0, None), basis


def joint_distribution(ins, rho, basis: ComplexMatrix | None = None) -> np.ndarray:
    """``p(j, k) = lambda_j <j|Pi_k|j>`` over eigen-labels ``j`` and outcomes ``k``."""
    ins, rho = as_instrument(ins), as_density(rho)
    check_input(ins.channel, rho)
    lam, v = _eigen_ensemble(rho, basis)
    cond = np.stack([np.real(np.einsum("aj,ab,bj->j", v.conj(), pi, v)) for pi in povm(ins)], axis=1)
    return lam[:, None] * np.clip(cond, 0.0, None)


def mutual_information(ins, rho, basis: ComplexMatrix | None = None,
                       tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Mutual information (bits) between the eigen-label of ``rho`` and the outcome.

    Args:
        ins: Measurement instrument (a bare channel counts as one outcome).
        rho: Input state.
        basis: Optional orthonormal eigenbasis of ``rho`` (columns) to use
            instead of the cached one; only matters for degenerate spectra.
    """
    joint = joint_distribution(ins, rho, basis)
    pj = joint.sum(axis=1)
    pk = joint.sum(axis=0)
    mask = joint > tol.joint_zero
    ratio = joint[mask] / (pj[:, None] * pk[None, :])[mask]
    return max(float(np.sum(joint[mask] * np.log2(ratio))), 0.0)


def holevo_rhs(ins, rho, basis: ComplexMatrix | None = None) -> float:
    """Holevo quantity of the probe ensemble ``{lambda_j, P[|j><j|]}``."""
    ins, rho = as_instrument(ins), as_density(rho)
    check_input(ins.channel, rho)
    probe = complementary(ins)
    lam, v = _eigen_ensemble(rho, basis)
    avg = 0.0
    for j in range(rho.dim):
        if lam[j] > 0:
            avg += lam[j] * von_neumann_entropy(apply(probe, DensityMatrix.pure(v[:, j])))
    return float(von_neumann_entropy(apply(probe, rho)) - avg)


def entanglement_fidelity(c, rho) -> float:
    c, rho = as_channel(c), as_density(rho)
    check_input(c, rho)
    m = purify(rho).amplitudes.reshape(rho.dim, -1)
    overlaps = np.einsum("ar,kab,br->k", m.conj(), c.stacked, m)
    return float(np.sum(np.abs(overlaps) ** 2))


def spectral_fidelity(a, b) -> float:
    """Maximum of the fidelity over the unitary orbit of ``b``."""
    la, lb = as_density(a).spectrum, as_density(b).spectrum
    return float(np.sum(np.sqrt(la * lb))) ** 2


def fidelity_disturbances(c, rho) -> tuple[float, float, float]:
    """Fidelity-based comparators ``(1 - F, 1 - F_e, Dbar)`` for a map ``d -> d``."""
    c, rho = as_channel(c), as_density(rho)
    if c.din != c.dout:
        raise DimensionMismatchError(f"fidelity comparators need din == dout, got {c.din} -> {c.dout}")
    out = apply(c, rho)
    return (1.0 - fidelity(rho, out),
            1.0 - entanglement_fidelity(c, rho),
            max(1.0 - spectral_fidelity(rho, out), 0.0))


def state_independent(ins) -> tuple[float, float]:
    """``(I, D)`` evaluated on the maximally mixed input state."""
    ins = as_instrument(ins)
    d = ins.din
    flat = DensityMatrix.maximally_mixed(d)
    return mutual_information(ins, flat), log2(d) - coherent_information(ins, flat)


@dataclass
class TradeoffReport:
    s_rho: float
    s_out: float
    s_exchange: float
    i_coherent: float
    disturbance: float
    mutual_info: float
    holevo_rhs: float
    normalized_i: float
    normalized_d: float
    fid_disturbance: float | None
    ent_fid_disturbance: float | None
    dbar: float | None
    slack: float
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def full_report(ins, rho) -> TradeoffReport:
    ins, rho = as_instrument(ins), as_density(rho)
    check_input(ins.channel, rho)
    s_rho = von_neumann_entropy(rho)
    s_out = von_neumann_entropy(apply(ins, rho))
    s_e = exchange_entropy(ins, rho)
    i_c = s_out - s_e
    dist = s_rho - i_c
    info = mutual_information(ins, rho)
    chi = holevo_rhs(ins, rho)
    norm = log2(rho.dim) if rho.dim > 1 else 1.0
    if ins.din == ins.dout:
        fid, efid, dbar = fidelity_disturbances(ins, rho)
    else:
        fid = efid = dbar = None
    degenerate = bool(np.any(np.abs(np.diff(rho.spectrum)) < DEFAULT_TOLERANCES.degenerate_gap))
    meta = {
        "din": ins.din,
        "dout": ins.dout,
        "n_kraus": len(ins.channel),
        "outcomes": ins.labels,
        "basis": "eigh-descending-phase-fixed",
        "degenerate_spectrum": degenerate,
    }
    return TradeoffReport(
        s_rho=s_rho,
        s_out=s_out,
        s_exchange=s_e,
        i_coherent=i_c,
        disturbance=dist,
        mutual_info=info,
        holevo_rhs=chi,
        normalized_i=info / norm,
        normalized_d=dist / norm,
        fid_disturbance=fid,
        ent_fid_disturbance=efid,
        dbar=dbar,
        slack=dist - info,
        metadata=meta,
    )

