"""Randomized sweeps that check the entropy bounds on sampled instruments.

Each check draws independent trials. Trial ``t`` of check ``name`` at
dimension ``d`` (and ladder position ``v`` where a check has one) uses a
generator seeded from ``(seed, crc32(name), d, v, t)``, so any trial can be
replayed in isolation with :func:`replay` and results do not depend on
execution order. Continuity keys every ladder position with ``v = 0`` so
the same base instance is perturbed at each epsilon.

A trial reports named margins. A margin ``m`` with tolerance ``tol``
passes when ``m >= -tol``; the trial's slack is its smallest margin.
"""

from __future__ import annotations

import csv
import json
import logging
import time
import zlib
from dataclasses import asdict, dataclass, field
from math import log2, pi
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from infodist import functionals as fn
from infodist.channels import (
    Channel,
    Instrument,
    apply,
    compose,
    mixture,
    stinespring,
    validate_instrument,
)
from infodist.errors import ConfigError, ReportWriteError
from infodist.io import density_to_json, instrument_to_json
from infodist.linalg import (
    DensityMatrix,
    haar_isometry,
    haar_unitary,
    random_density,
    random_pure_state,
    rotate_degenerate,
    trace_distance,
)

log = logging.getLogger(__name__)

ALL_CHECKS = ("tradeoff", "equality", "monotonicity", "continuity", "state_independent", "fidelity_critique")
EPSILON_LADDER = (1e-2, 1e-4, 1e-6)
PROBE_TOLERANCE = 1e-9
ZERO_GAP = 1e-12


@dataclass
class SweepConfig:
    dims: tuple[int, ...] = (2, 3, 4)
    trials: int = 1000
    seed: int = 0
    max_kraus: int | None = None
    tolerance: float = 1e-8
    checks: tuple[str, ...] = ALL_CHECKS
    output_path: str | None = None
    sampler: str = "general"

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        self.checks = tuple(c for c in ALL_CHECKS if c in set(self.checks)) if self.checks else ()
        self.validate()

    def validate(self) -> None:
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not self.dims or any(d < 2 for d in self.dims):
            raise ConfigError(f"dims must be a non-empty list of integers >= 2, got {list(self.dims)}")
        if not self.tolerance > 0:
            raise ConfigError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_kraus is not None and self.max_kraus < 1:
            raise ConfigError(f"max_kraus must be >= 1, got {self.max_kraus}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.sampler not in ("general", "unitary"):
            raise ConfigError(f"sampler must be 'general' or 'unitary', got {self.sampler!r}")
        if not self.checks:
            raise ConfigError("no checks selected")

    @classmethod
    def from_mapping(cls, data: dict) -> "SweepConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        bad = set(data.get("checks", ())) - set(ALL_CHECKS)
        if bad:
            raise ConfigError(f"unknown checks {sorted(bad)}; choose from {list(ALL_CHECKS)}")
        try:
            return cls(**data)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    def kraus_limit(self, d: int) -> int:
        return self.max_kraus if self.max_kraus is not None else d * d

    def to_dict(self) -> dict:
        out = asdict(self)
        out["dims"] = list(self.dims)
        out["checks"] = list(self.checks)
        return out


@dataclass
class Trial:
    margins: dict[str, tuple[float, float]]
    instance: dict = field(default_factory=dict)
    values: dict[str, float] = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return min(m for m, _ in self.margins.values())

    @property
    def passed(self) -> bool:
        return all(m >= -tol for m, tol in self.margins.values())


@dataclass
class CheckResult:
    name: str
    trials: int = 0
    passed: int = 0
    failures: int = 0
    worst_slack: float = float("inf")
    failing_instances: list[dict] = field(default_factory=list)
    aggregates: list[dict] = field(default_factory=list)
    rows: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failures == 0 and all(a["passed"] for a in self.aggregates)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "trials": self.trials,
            "passed": self.passed,
            "failures": self.failures,
            "worst_slack": self.worst_slack,
            "aggregates": self.aggregates,
            "failing_instances": self.failing_instances,
        }


@dataclass
class SweepResult:
    config: SweepConfig
    checks: list[CheckResult]
    duration_s: float = 0.0

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self, include_timing: bool = True) -> dict:
        out = {"config": self.config.to_dict(), "checks": [c.to_dict() for c in self.checks]}
        if include_timing:
            out["duration_s"] = self.duration_s
        return out

    def write(self, path) -> tuple[Path, Path]:
        """Write the JSON report and its CSV companion (same stem, ``.csv``)."""
        path = Path(path)
        csv_path = path.with_suffix(".csv")
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")
            with csv_path.open("w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh)
                w.writerow(["check", "dim", "variant", "trial", "slack", "passed"])
                for c in self.checks:
                    for r in c.rows:
                        w.writerow([c.name, r["dim"], r["variant"], r["trial"], repr(r["slack"]), int(r["passed"])])
        except OSError as exc:
            raise ReportWriteError(f"cannot write report to {path}: {exc}") from exc
        return path, csv_path


def trial_rng(seed: int, check: str, dim: int, variant: int, trial: int) -> np.random.Generator:
    key = [seed, zlib.crc32(check.encode()), dim, variant, trial]
    return np.random.default_rng(np.random.SeedSequence(key))


# --- samplers ---------------------------------------------------------------

def random_channel(d: int, rng: np.random.Generator, n_kraus: int, dout: int | None = None) -> Channel:
    """Kraus operators sliced out of a Haar isometry ``d -> dout * n_kraus``."""
    dout = d if dout is None else dout
    v = haar_isometry(d, dout * n_kraus, rng).reshape(dout, n_kraus, d)
    return Channel.from_kraus([v[:, i, :] for i in range(n_kraus)])


def random_instrument(d: int, rng: np.random.Generator, max_kraus: int) -> Instrument:
    """Random channel with a random coarse-graining of its Kraus indices."""
    n = int(rng.integers(1, max_kraus + 1))
    ch = random_channel(d, rng, n)
    n_out = int(rng.integers(1, n + 1))
    perm = rng.permutation(n)
    cuts = np.sort(rng.choice(np.arange(1, n), size=n_out - 1, replace=False)) if n_out > 1 else []
    groups = np.split(perm, cuts)
    outcomes = tuple((f"k{g}", tuple(sorted(int(i) for i in idx))) for g, idx in enumerate(groups))
    ins = Instrument(ch, outcomes)
    validate_instrument(ins)
    return ins


def random_unitary_instrument(d: int, rng: np.random.Generator) -> Instrument:
    return Instrument.single(Channel.unitary(haar_unitary(d, rng)))


def random_state(d: int, rng: np.random.Generator, degenerate_prob: float = 0.0) -> DensityMatrix:
    """Random state of random rank; optionally with a repeated eigenvalue."""
    if degenerate_prob and rng.random() < degenerate_prob:
        w = rng.dirichlet(np.ones(d))
        w[1] = w[0]
        w /= w.sum()
        u = haar_unitary(d, rng)
        return DensityMatrix.from_matrix((u * w) @ u.conj().T)
    return random_density(d, int(rng.integers(1, d + 1)), rng)


def fannes_audenaert(t: float, d: int) -> float:
    """Entropy continuity bound ``t log2(d - 1) + H2(t)`` for dimension ``d``."""
    if d <= 1:
        return 0.0
    t = min(max(t, 0.0), 1.0)
    return t * log2(d - 1) + fn.binary_entropy(t)


def _instance(**objs) -> dict:
    out = {}
    for k, v in objs.items():
        if isinstance(v, DensityMatrix):
            out[k] = density_to_json(v)
        elif isinstance(v, (Instrument, Channel)):
            out[k] = instrument_to_json(v)
        else:
            out[k] = v
    return out


# --- trials -------------------------------------------------------------------

def _tradeoff_trial(rng, d, cfg: SweepConfig, variant):
    tol = cfg.tolerance
    rho = random_state(d, rng, degenerate_prob=0.25)
    if cfg.sampler == "unitary":
        ins = random_unitary_instrument(d, rng)
    else:
        ins = random_instrument(d, rng, cfg.kraus_limit(d))
    info = fn.mutual_information(ins, rho)
    chi = fn.holevo_rhs(ins, rho)
    dist = fn.disturbance(ins, rho)
    s_probe = fn.matrix_entropy(stinespring(ins).probe_output(rho))
    s_e = fn.exchange_entropy(ins, rho)
    rotated = rotate_degenerate(rho, rng)
    info_rot = fn.mutual_information(ins, rho, basis=rotated)
    chi_rot = fn.holevo_rhs(ins, rho, basis=rotated)
    margins = {
        "D-I": (dist - info, tol),
        "chi-I": (chi - info, tol),
        "D-chi": (dist - chi, tol),
        "S(P)=S_e": (-abs(s_probe - s_e), PROBE_TOLERANCE),
        "D-I(rotated basis)": (dist - info_rot, tol),
        "chi-I(rotated basis)": (chi_rot - info_rot, tol),
    }
    if cfg.sampler == "unitary":
        margins["|D|"] = (-abs(dist), tol)
        margins["|I|"] = (-abs(info), tol)
    return Trial(margins, _instance(instrument=ins, state=rho),
                 {"I": info, "chi": chi, "D": dist})


def _equality_trial(rng, d, cfg: SweepConfig, variant):
    tol = cfg.tolerance
    rho = random_density(d, d, rng)
    s = fn.von_neumann_entropy(rho)
    proj = Instrument.projective(rho.eigenbasis)
    rot = Instrument.projective(rho.eigenbasis, rotation=haar_unitary(d, rng))
    pure = DensityMatrix.pure(random_pure_state(d, rng).amplitudes)
    pure_proj = Instrument.projective(pure.eigenbasis)
    margins = {}
    for tag, ins in (("projective", proj), ("rotated", rot)):
        i, dist = fn.mutual_information(ins, rho), fn.disturbance(ins, rho)
        margins[f"|I-D| {tag}"] = (-abs(i - dist), tol)
        margins[f"|I-S| {tag}"] = (-abs(i - s), tol)
    margins["|I| pure"] = (-abs(fn.mutual_information(pure_proj, pure)), tol)
    margins["|D| pure"] = (-abs(fn.disturbance(pure_proj, pure)), tol)
    return Trial(margins, _instance(state=rho, rotated_instrument=rot))


def _monotonicity_trial(rng, d, cfg: SweepConfig, variant):
    tol = cfg.tolerance
    rho = random_state(d, rng)
    k = cfg.kraus_limit(d)
    first = random_channel(d, rng, int(rng.integers(1, k + 1)))
    second = random_channel(d, rng, int(rng.integers(1, k + 1)))
    d1 = fn.disturbance(first, rho)
    d2 = fn.disturbance(compose(second, first), rho)
    return Trial({"D(Q'Q)-D(Q)": (d2 - d1, tol)},
                 _instance(state=rho, first=first, second=second), {"D": d1, "D_composed": d2})


def _continuity_trial(rng, d, cfg: SweepConfig, variant):
    tol = cfg.tolerance
    eps = EPSILON_LADDER[variant]
    k = cfg.kraus_limit(d)
    rho = random_state(d, rng)
    sigma = random_density(d, d, rng)
    rho2 = DensityMatrix.from_matrix((1 - eps) * rho.matrix + eps * sigma.matrix)
    q = random_channel(d, rng, int(rng.integers(1, k + 1)))
    r = random_channel(d, rng, int(rng.integers(1, k + 1)))
    q2 = mixture([q, r], [1 - eps, eps])

    t_in = trace_distance(rho, rho2)
    out, out2 = apply(q, rho), apply(q, rho2)
    t_out = trace_distance(out, out2)
    w, w2 = fn.w_matrix(q, rho), fn.w_matrix(q, rho2)
    t_w = trace_distance(w, w2)
    n = len(q)

    kk = q.stacked
    # Tr[K_j^dag K_i K_i^dag K_j] = ||K_i^dag K_j||_HS^2
    gram = np.einsum("iab,jac->ijbc", kk.conj(), kk)
    hs = np.sum(np.abs(gram) ** 2, axis=(2, 3))
    delta = rho.matrix - rho2.matrix
    hs_delta = float(np.real(np.trace(delta @ delta)))
    dw2 = np.abs(w.matrix - w2.matrix) ** 2
    w_margin = float(np.min(hs * hs_delta - dw2))

    out_q2 = apply(q2, rho)
    t_chan = trace_distance(out, out_q2)

    s = fn.von_neumann_entropy
    margins = {
        "fannes S(rho)": (fannes_audenaert(t_in, d) - abs(s(rho) - s(rho2)), tol),
        "fannes S(Q rho)": (fannes_audenaert(t_out, d) - abs(s(out) - s(out2)), tol),
        "fannes S(W)": (fannes_audenaert(t_w, n) - abs(s(w) - s(w2)), tol),
        "contractivity": (t_in - t_out, tol),
        "W bound": (w_margin, tol),
        "fannes S(Q' rho)": (fannes_audenaert(t_chan, d) - abs(s(out) - s(out_q2)), tol),
        "T(Q rho, Q' rho)<=eps": (eps - t_chan, tol),
    }
    d0 = fn.disturbance(q, rho)
    values = {
        "dD_state": abs(d0 - fn.disturbance(q, rho2)),
        "dD_channel": abs(d0 - fn.disturbance(q2, rho)),
        "T": t_in,
    }
    return Trial(margins, _instance(state=rho, perturbed_state=rho2, channel=q, perturbed_channel=q2, eps=eps),
                 values)


def _continuity_aggregates(per_variant: dict[int, list[Trial]]) -> list[dict]:
    out = []
    for key in ("dD_state", "dD_channel"):
        worst = [max(t.values[key] for t in per_variant[v]) for v in sorted(per_variant)]
        eps = [EPSILON_LADDER[v] for v in sorted(per_variant)]
        # a worst case already at round-off level counts as converged
        decreasing = all(b < a or max(a, b) <= ZERO_GAP for a, b in zip(worst, worst[1:]))
        out.append({
            "name": f"worst {key} decreases along eps ladder",
            "passed": decreasing,
            "eps": eps,
            "worst": worst,
        })
    return out


def _state_independent_trial(rng, d, cfg: SweepConfig, variant):
    tol = cfg.tolerance
    u = random_unitary_instrument(d, rng)
    i_u, d_u = fn.state_independent(u)
    noisy = Instrument.single(random_channel(d, rng, 2))
    i_n, d_n = fn.state_independent(noisy)
    ins = random_instrument(d, rng, cfg.kraus_limit(d))
    i_r, d_r = fn.state_independent(ins)
    i_p, d_p = fn.state_independent(Instrument.projective(np.eye(d)))
    margins = {
        "|D~| unitary": (-abs(d_u), tol),
        "|I~| unitary": (-abs(i_u), tol),
        "D~ > 1e-6 two-Kraus": (d_n - 1e-6, 0.0),
        "D~-I~ random": (d_r - i_r, tol),
        "D~-I~ two-Kraus": (d_n - i_n, tol),
        "|I~-log d| projective": (-abs(i_p - log2(d)), tol),
        "|D~-log d| projective": (-abs(d_p - log2(d)), tol),
    }
    return Trial(margins, _instance(unitary=u, two_kraus=noisy, instrument=ins))


def _orthogonal_rotation(psi: np.ndarray, rng, theta: float) -> np.ndarray:
    d = psi.shape[0]
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    phi = z - np.vdot(psi, z) * psi
    phi /= np.linalg.norm(phi)
    p = np.outer(psi, psi.conj()) + np.outer(phi, phi.conj())
    return (np.eye(d) + (np.cos(theta) - 1) * p
            + np.sin(theta) * (np.outer(phi, psi.conj()) - np.outer(psi, phi.conj())))


def _fidelity_critique_trial(rng, d, cfg: SweepConfig, variant):
    tol = cfg.tolerance
    psi = random_pure_state(d, rng).amplitudes
    theta = float(rng.uniform(pi / 4, pi / 2))
    rot = Channel.unitary(_orthogonal_rotation(psi, rng, theta))
    pure = DensityMatrix.pure(psi)
    fid, _, dbar = fn.fidelity_disturbances(rot, pure)
    dist = fn.disturbance(rot, pure)
    mixed = random_density(d, d, rng)
    u = Channel.unitary(haar_unitary(d, rng))
    _, _, dbar_mixed = fn.fidelity_disturbances(u, mixed)
    margins = {
        "1-F >= 0.5": (fid - 0.5, tol),
        "|D| rotation": (-abs(dist), tol),
        "Dbar rotation": (-abs(dbar), tol),
        "Dbar haar": (-abs(dbar_mixed), tol),
        "|D| haar": (-abs(fn.disturbance(u, mixed)), tol),
    }
    return Trial(margins, _instance(rotation=rot, state=pure, theta=theta), {"1-F": fid})


TrialFn = Callable[[np.random.Generator, int, SweepConfig, int], Trial]

# name -> (trial function, number of variants, whether the rng key includes the variant)
CHECKS: dict[str, tuple[TrialFn, int, bool]] = {
    "tradeoff": (_tradeoff_trial, 1, True),
    "equality": (_equality_trial, 1, True),
    "monotonicity": (_monotonicity_trial, 1, True),
    "continuity": (_continuity_trial, len(EPSILON_LADDER), False),
    "state_independent": (_state_independent_trial, 1, True),
    "fidelity_critique": (_fidelity_critique_trial, 1, True),
}


def replay(check: str, seed: int, dim: int, trial: int, variant: int = 0,
           cfg: SweepConfig | None = None) -> Trial:
    """Recompute a single trial from its coordinates."""
    cfg = cfg or SweepConfig(seed=seed, dims=(dim,), checks=(check,))
    fn_, _, keyed = CHECKS[check]
    return fn_(trial_rng(seed, check, dim, variant if keyed else 0, trial), dim, cfg, variant)


def run_check(name: str, cfg: SweepConfig) -> CheckResult:
    fn_, n_variants, keyed = CHECKS[name]
    res = CheckResult(name)
    per_variant: dict[int, list[Trial]] = {v: [] for v in range(n_variants)}
    for d in cfg.dims:
        for v in range(n_variants):
            for t in range(cfg.trials):
                trial = fn_(trial_rng(cfg.seed, name, d, v if keyed else 0, t), d, cfg, v)
                per_variant[v].append(trial)
                slack = trial.slack
                res.trials += 1
                res.worst_slack = min(res.worst_slack, slack)
                res.rows.append({"dim": d, "variant": v, "trial": t, "slack": slack, "passed": trial.passed,
                                 "margins": {k: m for k, (m, _) in trial.margins.items()}})
                if trial.passed:
                    res.passed += 1
                else:
                    res.failures += 1
                    res.failing_instances.append({
                        "seed": cfg.seed, "check": name, "dim": d, "variant": v, "trial": t,
                        "margins": {k: m for k, (m, _) in trial.margins.items()},
                        "instance": trial.instance,
                    })
                    log.warning("%s failed at dim=%d variant=%d trial=%d (slack %.3e)", name, d, v, t, slack)
    if name == "continuity":
        res.aggregates = _continuity_aggregates(per_variant)
    return res


def check_tradeoff(cfg: SweepConfig) -> CheckResult:
    return run_check("tradeoff", cfg)


def check_equality_cases(cfg: SweepConfig) -> CheckResult:
    return run_check("equality", cfg)


def check_monotonicity(cfg: SweepConfig) -> CheckResult:
    return run_check("monotonicity", cfg)


def check_continuity(cfg: SweepConfig) -> CheckResult:
    return run_check("continuity", cfg)


def check_state_independent(cfg: SweepConfig) -> CheckResult:
    return run_check("state_independent", cfg)


def check_fidelity_critique(cfg: SweepConfig) -> CheckResult:
    return run_check("fidelity_critique", cfg)


def run_all(cfg: SweepConfig, checks: Iterable[str] | None = None) -> SweepResult:
    start = time.perf_counter()
    names = [c for c in (checks or cfg.checks)]
    results = [run_check(name, cfg) for name in names]
    result = SweepResult(cfg, results, time.perf_counter() - start)
    if cfg.output_path:
        result.write(cfg.output_path)
    return result
