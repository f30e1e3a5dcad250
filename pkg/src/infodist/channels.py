"""Kraus channels, measurement instruments and their dilations.

A :class:`Channel` is a trace-preserving completely positive map given by
Kraus operators. An :class:`Instrument` partitions those Kraus operators
into labelled outcome groups; a channel is the one-outcome instrument.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from infodist.config import DEFAULT_TOLERANCES, Tolerances
from infodist.errors import DimensionMismatchError, ImpossibleOutcomeError, InvariantError
from infodist.linalg import (
    ComplexMatrix,
    DensityMatrix,
    PureState,
    _frozen,
    as_density,
    as_matrix,
    dagger,
    eigh,
    eigvalsh,
    partial_trace,
)


@dataclass(frozen=True, eq=False)
class Channel:
    kraus: tuple[ComplexMatrix, ...]

    def __post_init__(self):
        if not self.kraus:
            raise InvariantError("at least one Kraus operator", 1.0, 0.0)
        shapes = {k.shape for k in self.kraus}
        if len(shapes) != 1:
            raise DimensionMismatchError(f"Kraus operators have mixed shapes {sorted(shapes)}")

    @classmethod
    def from_kraus(cls, kraus: Sequence, tol: Tolerances = DEFAULT_TOLERANCES) -> "Channel":
        ops = tuple(_frozen(as_matrix(k)) for k in kraus)
        ch = cls(ops)
        res = ch.completeness_residual()
        if res > tol.completeness:
            raise InvariantError("completeness (sum K^dag K = I)", res, tol.completeness)
        return ch

    @classmethod
    def identity(cls, d: int) -> "Channel":
        return cls.from_kraus([np.eye(d)])

    @classmethod
    def unitary(cls, u) -> "Channel":
        return cls.from_kraus([u])

    @property
    def din(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def dout(self) -> int:
        return self.kraus[0].shape[0]

    @property
    def stacked(self) -> np.ndarray:
        """Kraus operators as one ``(n, dout, din)`` array."""
        return np.stack(self.kraus)

    def completeness_residual(self) -> float:
        k = self.stacked
        s = np.einsum("kai,kaj->ij", k.conj(), k)
        return float(np.max(np.abs(s - np.eye(self.din))))

    def __len__(self) -> int:
        return len(self.kraus)


@dataclass(frozen=True, eq=False)
class Instrument:
    """Kraus operators grouped into measurement outcomes.

    ``outcomes`` holds ``(label, indices)`` pairs whose index sets partition
    ``range(len(channel))``. ``metadata`` carries free-form conventions
    (e.g. the eigenbasis choice of an informational map).
    """

    channel: Channel
    outcomes: tuple[tuple[str, tuple[int, ...]], ...]
    metadata: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        seen: list[int] = []
        for label, idx in self.outcomes:
            if not idx:
                raise InvariantError(f"outcome {label!r} has no Kraus operators", 1.0, 0.0)
            seen.extend(idx)
        n = len(self.channel)
        if sorted(seen) != list(range(n)):
            raise InvariantError("outcome index sets must partition the Kraus indices", 1.0, 0.0,
                                 f"got {sorted(seen)} for {n} operators")
        labels = [lab for lab, _ in self.outcomes]
        if len(set(labels)) != len(labels):
            raise InvariantError("outcome labels must be unique", 1.0, 0.0, str(labels))

    @classmethod
    def from_groups(cls, groups: Sequence[tuple[str, Sequence]], tol: Tolerances = DEFAULT_TOLERANCES,
                    metadata: Mapping[str, str] | None = None) -> "Instrument":
        kraus, outcomes = [], []
        for label, ops in groups:
            start = len(kraus)
            kraus.extend(ops)
            outcomes.append((str(label), tuple(range(start, len(kraus)))))
        return cls(Channel.from_kraus(kraus, tol), tuple(outcomes), dict(metadata or {}))

    @classmethod
    def single(cls, channel: Channel, label: str = "k0") -> "Instrument":
        return cls(channel, ((label, tuple(range(len(channel)))),))

    @classmethod
    def projective(cls, basis: ComplexMatrix, rotation: ComplexMatrix | None = None) -> "Instrument":
        """One outcome per column ``|a_j>`` of ``basis`` with Kraus ``U |a_j><a_j|``."""
        basis = as_matrix(basis)
        d = basis.shape[0]
        u = np.eye(d) if rotation is None else as_matrix(rotation)
        groups = [(f"k{j}", [u @ np.outer(basis[:, j], basis[:, j].conj())]) for j in range(basis.shape[1])]
        return cls.from_groups(groups)

    @property
    def labels(self) -> list[str]:
        return [lab for lab, _ in self.outcomes]

    @property
    def din(self) -> int:
        return self.channel.din

    @property
    def dout(self) -> int:
        return self.channel.dout

    def indices(self, label: str) -> tuple[int, ...]:
        for lab, idx in self.outcomes:
            if lab == label:
                return idx
        raise KeyError(f"unknown outcome label {label!r}; known: {self.labels}")


def validate_instrument(ins: Instrument, tol: Tolerances = DEFAULT_TOLERANCES) -> None:
    """Re-check completeness and POVM positivity; raises :class:`InvariantError`."""
    res = ins.channel.completeness_residual()
    if res > tol.completeness:
        raise InvariantError("completeness (sum K^dag K = I)", res, tol.completeness)
    elements = povm(ins)
    for label, pi in zip(ins.labels, elements):
        low = float(eigvalsh(pi)[-1])
        if low < -tol.psd:
            raise InvariantError(f"POVM element {label!r} positivity", -low, tol.psd)
    total = float(np.max(np.abs(sum(elements) - np.eye(ins.din))))
    if total > tol.completeness:
        raise InvariantError("POVM sums to identity", total, tol.completeness)


def as_channel(c) -> Channel:
    return c.channel if isinstance(c, Instrument) else c


def as_instrument(c) -> Instrument:
    return c if isinstance(c, Instrument) else Instrument.single(c)


def check_input(c: Channel, rho: DensityMatrix) -> None:
    if rho.dim != c.din:
        raise DimensionMismatchError(f"state of dimension {rho.dim} fed to channel with input dimension {c.din}")


def _kraus_sum(kraus: np.ndarray, m: ComplexMatrix) -> ComplexMatrix:
    return np.einsum("kab,bc,kdc->ad", kraus, m, kraus.conj())


def apply(c, rho) -> DensityMatrix:
    c, rho = as_channel(c), as_density(rho)
    check_input(c, rho)
    return DensityMatrix.from_matrix(_kraus_sum(c.stacked, rho.matrix))


def apply_matrix(c, m: ComplexMatrix) -> ComplexMatrix:
    """Kraus sum on an arbitrary operator, no state validation."""
    return _kraus_sum(as_channel(c).stacked, as_matrix(m))


def povm(ins: Instrument) -> list[ComplexMatrix]:
    k = ins.channel.stacked
    out = []
    for _, idx in ins.outcomes:
        sub = k[list(idx)]
        out.append(np.einsum("kai,kaj->ij", sub.conj(), sub))
    return out


def outcome_probabilities(ins: Instrument, rho, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    ins, rho = as_instrument(ins), as_density(rho)
    check_input(ins.channel, rho)
    p = np.array([np.real(np.trace(pi @ rho.matrix)) for pi in povm(ins)])
    if np.any(p < -tol.prob_clip):
        raise InvariantError("non-negative outcome probabilities", -float(p.min()), tol.prob_clip)
    p = np.clip(p, 0.0, None)
    res = abs(float(p.sum()) - 1.0)
    if res > tol.completeness:
        raise InvariantError("outcome probabilities sum to one", res, tol.completeness)
    return p


def post_state(ins: Instrument, rho, k: str, tol: Tolerances = DEFAULT_TOLERANCES) -> DensityMatrix:
    """Normalized conditional state after outcome ``k``.

    Raises:
        ImpossibleOutcomeError: if outcome ``k`` has probability below
            ``tol.zero_probability`` on ``rho``.
    """
    ins, rho = as_instrument(ins), as_density(rho)
    check_input(ins.channel, rho)
    sub = ins.channel.stacked[list(ins.indices(k))]
    unnorm = _kraus_sum(sub, rho.matrix)
    p = float(np.real(np.trace(unnorm)))
    if p <= tol.zero_probability:
        raise ImpossibleOutcomeError(f"outcome {k!r} has probability {p:.3e} on this state")
    return DensityMatrix.from_matrix(unnorm / p)


@dataclass(frozen=True, eq=False)
class StinespringModel:
    """Isometric dilation ``V = sum_i K_i (x) |e_i>`` of an instrument.

    Output ordering is system first, environment (probe) second. The probe
    measurement for outcome ``k`` projects onto ``span{|e_i> : i in I_k}``.
    """

    isometry: ComplexMatrix
    din: int
    dout: int
    denv: int
    env_basis: tuple[PureState, ...]
    probe_projectors: tuple[ComplexMatrix, ...]
    labels: tuple[str, ...]

    def dilate(self, rho) -> ComplexMatrix:
        rho = as_density(rho)
        return self.isometry @ rho.matrix @ dagger(self.isometry)

    def system_output(self, rho) -> ComplexMatrix:
        return partial_trace(self.dilate(rho), [self.dout, self.denv], [0])

    def probe_output(self, rho) -> ComplexMatrix:
        return partial_trace(self.dilate(rho), [self.dout, self.denv], [1])

    def probabilities(self, rho) -> np.ndarray:
        big = self.dilate(rho)
        eye = np.eye(self.dout)
        return np.array([np.real(np.trace(big @ np.kron(eye, p))) for p in self.probe_projectors])

    def conditional_state(self, rho, k: str) -> ComplexMatrix:
        """Unnormalized-then-normalized system state after probe outcome ``k``."""
        p = self.probe_projectors[self.labels.index(k)]
        big = self.dilate(rho) @ np.kron(np.eye(self.dout), p)
        out = partial_trace(big, [self.dout, self.denv], [0])
        return out / np.real(np.trace(out))

    def isometry_residual(self) -> float:
        v = self.isometry
        return float(np.max(np.abs(dagger(v) @ v - np.eye(self.din))))


def stinespring(ins) -> StinespringModel:
    ins = as_instrument(ins)
    k = ins.channel.stacked
    n, dout, din = k.shape
    # V[(m, i), a] = K_i[m, a]
    v = np.transpose(k, (1, 0, 2)).reshape(dout * n, din)
    env = tuple(PureState.from_vector(np.eye(n)[i]) for i in range(n))
    projs = []
    for _, idx in ins.outcomes:
        p = np.zeros((n, n), dtype=np.complex128)
        p[list(idx), list(idx)] = 1.0
        projs.append(_frozen(p))
    return StinespringModel(_frozen(v), din, dout, n, env, tuple(projs), tuple(ins.labels))


def complementary(ins) -> Channel:
    """Channel from the system input to the probe (environment) output.

    Kraus operators are ``F_m = (<m| (x) 1) V`` for each system output basis
    vector ``|m>``, so ``F_m[i, :] = K_i[m, :]``.
    """
    k = as_channel(ins).stacked
    f = np.transpose(k, (1, 0, 2))
    return Channel.from_kraus(list(f))


def compose(second, first) -> Channel:
    """The map ``second o first`` with Kraus operators ``K'_j K_i``."""
    a, b = as_channel(first), as_channel(second)
    if a.dout != b.din:
        raise DimensionMismatchError(f"cannot compose: first outputs {a.dout}, second expects {b.din}")
    prods = np.einsum("jab,ibc->jiac", b.stacked, a.stacked).reshape(-1, b.dout, a.din)
    return Channel.from_kraus(list(prods))


def mixture(channels: Sequence, weights: Sequence[float]) -> Channel:
    """Convex combination with Kraus set ``{sqrt(w_c) K}`` over all channels."""
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError(f"mixture weights must be a probability vector, got {weights}")
    kraus = []
    for c, w in zip(channels, weights):
        if w > 0:
            kraus.extend(np.sqrt(w) * k for k in as_channel(c).kraus)
    return Channel.from_kraus(kraus)


def remix(c, u: ComplexMatrix) -> Channel:
    """Same map, new Kraus representation ``K'_i = sum_j u_ij K_j``."""
    k = as_channel(c).stacked
    return Channel.from_kraus(list(np.einsum("ij,jab->iab", as_matrix(u), k)))


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    """Choi matrix ``sum_ij Q(|i><j|) (x) |i><j|``, output factor first."""

    matrix: ComplexMatrix
    din: int
    dout: int

    @classmethod
    def validated(cls, m, din: int, dout: int, tol: Tolerances = DEFAULT_TOLERANCES,
                  psd_atol: float | None = None) -> "ChoiMatrix":
        m = as_matrix(m)
        if m.shape != (din * dout, din * dout):
            raise DimensionMismatchError(f"Choi matrix shape {m.shape} does not match din={din}, dout={dout}")
        psd_atol = tol.psd if psd_atol is None else psd_atol
        low = float(eigvalsh(m)[-1])
        if low < -psd_atol:
            raise InvariantError("Choi positivity", -low, psd_atol)
        tp = partial_trace(m, [dout, din], [1])
        res = float(np.max(np.abs(tp - np.eye(din))))
        if res > tol.completeness:
            raise InvariantError("Choi trace preservation", res, tol.completeness)
        return cls(_frozen(m), din, dout)

    def to_channel(self, cutoff: float = 1e-12) -> Channel:
        """Kraus operators from the eigendecomposition; negative round-off dropped."""
        w, v = eigh(self.matrix)
        kraus = [np.sqrt(x) * v[:, i].reshape(self.dout, self.din) for i, x in enumerate(w) if x > cutoff]
        return Channel.from_kraus(kraus)


def choi(c) -> ChoiMatrix:
    c = as_channel(c)
    vecs = c.stacked.reshape(len(c), -1)
    return ChoiMatrix.validated(vecs.T @ vecs.conj(), c.din, c.dout)


def informational_map(rho_p) -> Instrument:
    """Instrument that measures the eigenbasis of ``rho_p`` and re-prepares it.

    Kraus operators are ``sqrt(mu_j) |v_j><v_k|`` grouped by ``k``; zero
    eigenvalues contribute null operators and are dropped. Degenerate
    eigenspaces use the deterministic basis returned by :func:`eigh`.
    """
    rho_p = as_density(rho_p)
    mu, v = rho_p.spectrum, rho_p.eigenbasis
    support = [j for j in range(rho_p.dim) if mu[j] > 0]
    groups = []
    for k in range(rho_p.dim):
        ops = [np.sqrt(mu[j]) * np.outer(v[:, j], v[:, k].conj()) for j in support]
        groups.append((f"k{k}", ops))
    degenerate = bool(np.any(np.abs(np.diff(mu)) < DEFAULT_TOLERANCES.degenerate_gap))
    meta = {"basis": "eigh-descending-phase-fixed", "degenerate": str(degenerate).lower()}
    return Instrument.from_groups(groups, metadata=meta)


@dataclass(frozen=True, eq=False)
class Decomposition:
    """``Q = xi C + (1 - xi) T`` with the largest admissible ``xi``."""

    xi: float
    informational: Channel
    dynamical: ChoiMatrix | None


def _min_eig(m: ComplexMatrix) -> float:
    return float(eigvalsh(m)[-1])


def decompose_xi(q, c, tol: Tolerances = DEFAULT_TOLERANCES) -> Decomposition:
    """Largest weight of ``c`` that can be split off ``q`` keeping the rest CP.

    The minimum eigenvalue of ``J(q) - xi J(c)`` is concave in ``xi``, so the
    feasible set is an interval starting at 0 and bisection finds its end.
    The returned ``xi`` is always a feasible point (the lower bracket).
    """
    q, c = as_channel(q), as_channel(c)
    if (q.din, q.dout) != (c.din, c.dout):
        raise DimensionMismatchError(f"maps differ in shape: {(q.din, q.dout)} vs {(c.din, c.dout)}")
    jq, jc = choi(q).matrix, choi(c).matrix

    def feasible(x: float) -> bool:
        return _min_eig(jq - x * jc) >= -tol.xi_psd

    if feasible(1.0):
        return Decomposition(1.0, c, None)
    lo, hi = 0.0, 1.0
    if not feasible(0.0):
        # q itself is only CP up to round-off larger than the tolerance
        lo = hi = 0.0
    for _ in range(tol.xi_max_iter):
        if hi - lo <= tol.xi_step:
            break
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    rest = (jq - lo * jc) / (1.0 - lo)
    dyn = ChoiMatrix.validated(rest, q.din, q.dout, tol, psd_atol=tol.xi_psd / (1.0 - lo) + tol.psd)
    return Decomposition(lo, c, dyn)
