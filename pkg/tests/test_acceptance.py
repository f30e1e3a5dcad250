"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``; the lines are also
collected into the terminal summary.
"""

import numpy as np
import pytest

from infodist import functionals as fn
from infodist.channels import Channel, decompose_xi, informational_map, mixture, remix
from infodist.harness import EPSILON_LADDER, SweepConfig, random_channel, run_all, run_check
from infodist.linalg import DensityMatrix, haar_unitary, random_density

from conftest import I2, SX, SY, SZ, ACCEPTANCE_LINES

DIMS = (2, 3, 4)


def verdict(n, ok, detail):
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


@pytest.fixture(scope="module")
def tradeoff_result():
    return run_check("tradeoff", SweepConfig(dims=DIMS, trials=1000, seed=0, tolerance=1e-8))


def _worst(result, key):
    return min(row["margins"][key] for row in result.rows)


def test_c01_tradeoff(tradeoff_result):
    res = tradeoff_result
    violations = [f for f in res.failing_instances if f["margins"]["D-I"] < -1e-8]
    ok = res.trials == 3000 and not violations
    verdict(1, ok, f"I <= D + 1e-8 on {res.trials} instances (d=2,3,4 x 1000), violations={len(violations)}, "
                   f"worst D-I={_worst(res, 'D-I'):.2e}")
    assert ok


def test_c02_proof_chain(tradeoff_result):
    res = tradeoff_result
    chain = min(_worst(res, "chi-I"), _worst(res, "D-chi"))
    probe_gap = -_worst(res, "S(P)=S_e")
    ok = res.ok and chain >= -1e-8 and probe_gap <= 1e-9
    verdict(2, ok, f"I <= chi <= D + 1e-8 (worst {chain:.2e}); max |S(P[rho]) - S_e| = {probe_gap:.2e} (tol 1e-9)")
    assert ok


def test_c03_equality_condition():
    res = run_check("equality", SweepConfig(dims=DIMS, trials=100, seed=0, tolerance=1e-8))
    ok = res.ok and res.trials == 300
    verdict(3, ok, f"eigenbasis and rotated projective instruments, {res.trials} states: "
                   f"|I-D|, |I-S| < 1e-8 (worst slack {res.worst_slack:.2e})")
    assert ok


def test_c04_unitary_and_depolarizing():
    rng = np.random.default_rng(4)
    worst_d = worst_dt = 0.0
    for n in range(100):
        d = DIMS[n % 3]
        u = Channel.unitary(haar_unitary(d, rng))
        worst_d = max(worst_d, abs(fn.disturbance(u, random_density(d, int(rng.integers(1, d + 1)), rng))))
        worst_dt = max(worst_dt, abs(fn.state_independent(u)[1]))
    dep = Channel.from_kraus([I2 / 2, SX / 2, SY / 2, SZ / 2])
    d_dep = fn.disturbance(dep, DensityMatrix.maximally_mixed(2))
    ok = worst_d < 1e-8 and worst_dt < 1e-8 and abs(d_dep - 2.0) <= 1e-8
    verdict(4, ok, f"100 Haar unitaries: max|D|={worst_d:.2e}, max|D~|={worst_dt:.2e}; "
                   f"depolarizing at I/2: D={d_dep:.8f}")
    assert ok


def test_c05_monotonicity():
    res = run_check("monotonicity", SweepConfig(dims=DIMS, trials=1000, seed=0, tolerance=1e-8))
    ok = res.ok and res.trials >= 1000
    verdict(5, ok, f"{res.trials} compositions: D(Q'Q) >= D(Q) - 1e-8, violations={res.failures}, "
                   f"worst {res.worst_slack:.2e}")
    assert ok


def test_c06_continuity():
    res = run_check("continuity", SweepConfig(dims=DIMS, trials=200, seed=0, tolerance=1e-8))
    state = next(a for a in res.aggregates if "dD_state" in a["name"])
    ok = res.failures == 0 and state["passed"]
    worst = ", ".join(f"{e:g}: {w:.2e}" for e, w in zip(EPSILON_LADDER, state["worst"]))
    verdict(6, ok, f"{res.trials} perturbations (200 per eps and d): bound violations={res.failures}; "
                   f"worst |dD| by eps {{{worst}}}")
    assert ok


def test_c07_fidelity_critique():
    zero = DensityMatrix.diagonal([1, 0])
    fid, _, dbar_x = fn.fidelity_disturbances(Channel.unitary(SX), zero)
    dist = fn.disturbance(Channel.unitary(SX), zero)
    rng = np.random.default_rng(7)
    worst = abs(dbar_x)
    for n in range(100):
        d = DIMS[n % 3]
        u = Channel.unitary(haar_unitary(d, rng))
        worst = max(worst, fn.fidelity_disturbances(u, random_density(d, int(rng.integers(1, d + 1)), rng))[2])
    sweep = run_check("fidelity_critique", SweepConfig(dims=DIMS, trials=100, seed=0, tolerance=1e-8))
    ok = abs(fid - 1.0) < 1e-12 and abs(dist) < 1e-8 and worst < 1e-8 and sweep.ok
    verdict(7, ok, f"sigma_x on |0>: 1-F={fid:.6f}, D={dist:.1e}; max Dbar over unitaries={worst:.1e}; "
                   f"rotation sweep {sweep.passed}/{sweep.trials}")
    assert ok


def test_c08_exchange_entropy_routes():
    rng = np.random.default_rng(8)
    route = remixed = 0.0
    for n in range(100):
        d = DIMS[n % 3]
        ch = random_channel(d, rng, int(rng.integers(1, d * d + 1)))
        rho = random_density(d, int(rng.integers(1, d + 1)), rng)
        s_w = fn.exchange_entropy(ch, rho)
        route = max(route, abs(s_w - fn.exchange_entropy_purified(ch, rho)))
        remixed = max(remixed, abs(s_w - fn.exchange_entropy(remix(ch, haar_unitary(len(ch), rng)), rho)))
    ok = route <= 1e-9 and remixed <= 1e-9
    verdict(8, ok, f"100 instances: max |S(W) - S_purified|={route:.1e}, max remix change={remixed:.1e}")
    assert ok


def test_c09_decomposition():
    rng = np.random.default_rng(9)
    mix_worst, self_worst = 1.0, 0.0
    for n in range(12):
        d = DIMS[n % 3]
        rho = random_density(d, d, rng)
        c = informational_map(rho)
        t = random_channel(d, rng, int(rng.integers(1, d * d + 1)))
        mix_worst = min(mix_worst, decompose_xi(mixture([c, t], [0.3, 0.7]), c).xi)
        self_worst = max(self_worst, abs(decompose_xi(c, c).xi - 1.0))
    ok = mix_worst >= 0.3 - 1e-6 and self_worst <= 1e-8
    verdict(9, ok, f"0.3 mixtures: min xi*={mix_worst:.8f}; self-decomposition max |xi*-1|={self_worst:.1e}")
    assert ok


def test_c10_determinism():
    cfg = SweepConfig(dims=DIMS, trials=20, seed=123)
    a, b = run_all(cfg), run_all(cfg)
    ok = a.to_dict(include_timing=False) == b.to_dict(include_timing=False) and all(
        ra == rb for ca, cb in zip(a.checks, b.checks) for ra, rb in zip(ca.rows, cb.rows))
    verdict(10, ok, "two sweeps with seed 123 give identical reports and per-trial rows")
    assert ok
