from math import log2

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infodist import functionals as fn
from infodist.channels import Channel, Instrument, compose, outcome_probabilities, remix
from infodist.errors import DimensionMismatchError, InvariantError
from infodist.harness import random_channel, random_instrument, random_state
from infodist.linalg import DensityMatrix, fidelity, haar_unitary, random_density, rotate_degenerate

from conftest import H_THREE_QUARTERS, SX

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=2, max_value=4)


def _mutual_information_loops(joint):
    """Plain-loop mutual information of a joint table, in bits."""
    rows, cols = joint.shape
    pj = [sum(joint[j, k] for k in range(cols)) for j in range(rows)]
    pk = [sum(joint[j, k] for j in range(rows)) for k in range(cols)]
    total = 0.0
    for j in range(rows):
        for k in range(cols):
            if joint[j, k] > 0:
                total += joint[j, k] * log2(joint[j, k] / (pj[j] * pk[k]))
    return total


def test_von_neumann_entropy_examples(diag_state):
    assert fn.von_neumann_entropy(DensityMatrix.diagonal([1, 0])) == 0.0
    for d in (2, 3, 4, 7):
        assert fn.von_neumann_entropy(DensityMatrix.maximally_mixed(d)) == pytest.approx(log2(d), abs=1e-12)
    assert fn.von_neumann_entropy(diag_state) == pytest.approx(0.811278, abs=1e-6)
    assert fn.von_neumann_entropy(diag_state) == pytest.approx(H_THREE_QUARTERS, abs=1e-14)


def test_shannon_entropy(rng):
    assert fn.shannon_entropy([1, 0]) == 0.0
    assert fn.shannon_entropy([0.5, 0.5]) == pytest.approx(1.0)
    for _ in range(10):
        p = rng.dirichlet(np.ones(4))
        assert fn.shannon_entropy(p) == pytest.approx(fn.von_neumann_entropy(DensityMatrix.diagonal(p)), abs=1e-12)
    with pytest.raises(InvariantError):
        fn.shannon_entropy([0.7, 0.7])
    with pytest.raises(InvariantError):
        fn.shannon_entropy([1.2, -0.2])


def test_exchange_entropy_examples(rng, depolarizing, diag_state):
    u = Channel.unitary(haar_unitary(3, rng))
    rho = random_density(3, 3, rng)
    assert fn.w_matrix(u, rho).dim == 1
    assert fn.exchange_entropy(u, rho) == pytest.approx(0.0, abs=1e-12)

    proj = Instrument.projective(rho.eigenbasis)
    np.testing.assert_allclose(fn.w_matrix(proj, rho).matrix, np.diag(rho.spectrum), atol=1e-12)
    assert fn.exchange_entropy(proj, rho) == pytest.approx(fn.von_neumann_entropy(rho), abs=1e-12)

    flat = DensityMatrix.maximally_mixed(2)
    np.testing.assert_allclose(fn.w_matrix(depolarizing, flat).matrix, np.eye(4) / 4, atol=1e-15)
    assert fn.exchange_entropy(depolarizing, flat) == pytest.approx(2.0, abs=1e-12)


def test_coherent_information_examples(rng, depolarizing):
    rho = random_density(3, 3, rng)
    assert fn.coherent_information(Channel.identity(3), rho) == pytest.approx(fn.von_neumann_entropy(rho), abs=1e-12)
    assert fn.coherent_information(depolarizing, DensityMatrix.maximally_mixed(2)) == pytest.approx(-1.0, abs=1e-12)
    proj = Instrument.projective(rho.eigenbasis)
    assert fn.coherent_information(proj, rho) == pytest.approx(0.0, abs=1e-12)


def test_disturbance_examples(rng, depolarizing, diag_state, z_measurement):
    for d in (2, 3, 4):
        u = Channel.unitary(haar_unitary(d, rng))
        assert abs(fn.disturbance(u, random_density(d, int(rng.integers(1, d + 1)), rng))) < 1e-9
    assert fn.disturbance(depolarizing, DensityMatrix.maximally_mixed(2)) == pytest.approx(2.0, abs=1e-12)
    assert fn.disturbance(z_measurement, diag_state) == pytest.approx(0.811278, abs=1e-6)


def test_disturbance_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        fn.disturbance(Channel.identity(2), DensityMatrix.maximally_mixed(3))


def test_mutual_information_examples(rng, diag_state, z_measurement, x_measurement):
    pure = DensityMatrix.pure(np.array([0.6, 0.8j]))
    assert fn.mutual_information(Instrument.projective(np.eye(2)), pure) == 0.0
    assert fn.mutual_information(z_measurement, diag_state) == pytest.approx(H_THREE_QUARTERS, abs=1e-12)
    assert fn.mutual_information(x_measurement, diag_state) == pytest.approx(0.0, abs=1e-12)


def test_mutual_information_matches_loop_oracle(rng):
    for _ in range(30):
        d = int(rng.integers(2, 5))
        ins = random_instrument(d, rng, d * d)
        rho = random_density(d, d, rng)
        joint = fn.joint_distribution(ins, rho)
        np.testing.assert_allclose(joint.sum(axis=0), outcome_probabilities(ins, rho), atol=1e-12)
        np.testing.assert_allclose(joint.sum(axis=1), rho.spectrum, atol=1e-12)
        info = fn.mutual_information(ins, rho)
        assert info == pytest.approx(_mutual_information_loops(joint), abs=1e-12)
        assert -1e-12 <= info <= min(fn.shannon_entropy(rho.spectrum), fn.shannon_entropy(joint.sum(axis=0))) + 1e-12


def test_holevo_examples(rng):
    rho = random_density(3, 3, rng)
    assert fn.holevo_rhs(Channel.unitary(haar_unitary(3, rng)), rho) == pytest.approx(0.0, abs=1e-12)
    proj = Instrument.projective(rho.eigenbasis)
    assert fn.holevo_rhs(proj, rho) == pytest.approx(fn.von_neumann_entropy(rho), abs=1e-12)


def test_entanglement_fidelity_kraus_formula(rng):
    for _ in range(10):
        c = random_channel(3, rng, 3)
        rho = random_density(3, 3, rng)
        oracle = sum(abs(np.trace(k @ rho.matrix)) ** 2 for k in c.kraus)
        assert fn.entanglement_fidelity(c, rho) == pytest.approx(oracle, abs=1e-12)


def test_fidelity_disturbances_examples(rng):
    rho = random_density(3, 3, rng)
    np.testing.assert_allclose(fn.fidelity_disturbances(Channel.identity(3), rho), (0, 0, 0), atol=1e-12)

    zero = DensityMatrix.diagonal([1, 0])
    fid, efid, dbar = fn.fidelity_disturbances(Channel.unitary(SX), zero)
    assert fid == pytest.approx(1.0, abs=1e-15)
    assert abs(fn.disturbance(Channel.unitary(SX), zero)) < 1e-12
    assert abs(dbar) < 1e-12

    for d in (2, 3, 4):
        u = Channel.unitary(haar_unitary(d, rng))
        assert fn.fidelity_disturbances(u, random_density(d, d, rng))[2] < 1e-12

    with pytest.raises(DimensionMismatchError):
        fn.fidelity_disturbances(random_channel(2, rng, 2, dout=3), DensityMatrix.maximally_mixed(2))


def test_dbar_closed_form_matches_direct_optimization(rng):
    # direct search: rotate the output's Bloch vector over a grid of directions, then refine
    paulis = (SX, np.array([[0, -1j], [1j, 0]]), np.diag([1.0, -1.0]))

    def rotated_fid(rho, r, theta, phi):
        n = (np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta))
        m = (np.eye(2) + r * sum(c * p for c, p in zip(n, paulis))) / 2
        return fidelity(rho, DensityMatrix.from_matrix(m))

    for _ in range(3):
        rho = random_density(2, 2, rng)
        out = random_density(2, 2, rng)
        r = np.sqrt(2 * np.real(np.trace(out.matrix @ out.matrix)) - 1)
        step_t, step_p = np.pi / 36, np.pi / 36
        grid = [(rotated_fid(rho, r, t, p), t, p)
                for t in np.arange(0, np.pi + 1e-9, step_t) for p in np.arange(0, 2 * np.pi, step_p)]
        best, t0, p0 = max(grid)
        for _ in range(4):
            grid = [(rotated_fid(rho, r, t, p), t, p)
                    for t in t0 + np.linspace(-step_t, step_t, 9) for p in p0 + np.linspace(-step_p, step_p, 9)]
            best, t0, p0 = max(grid + [(best, t0, p0)])
            step_t, step_p = step_t / 4, step_p / 4
        assert fn.spectral_fidelity(rho, out) == pytest.approx(best, abs=1e-8)
        assert fn.spectral_fidelity(rho, out) >= best - 1e-12


def test_state_independent_examples(rng):
    for d in (2, 3):
        i, dd = fn.state_independent(Channel.unitary(haar_unitary(d, rng)))
        assert abs(i) < 1e-12 and abs(dd) < 1e-9
    i, dd = fn.state_independent(Instrument.projective(np.eye(2)))
    assert i == pytest.approx(1.0, abs=1e-12) and dd == pytest.approx(1.0, abs=1e-12)
    for _ in range(20):
        d = int(rng.integers(2, 5))
        i, dd = fn.state_independent(Instrument.single(random_channel(d, rng, 2)))
        assert dd > 1e-6
        assert i <= dd + 1e-8


def test_full_report_examples(diag_state, z_measurement, depolarizing):
    rep = fn.full_report(Channel.identity(2), DensityMatrix.maximally_mixed(2))
    assert abs(rep.mutual_info) < 1e-12 and abs(rep.disturbance) < 1e-12 and abs(rep.slack) < 1e-12

    rep = fn.full_report(z_measurement, diag_state)
    assert rep.mutual_info == pytest.approx(0.811278, abs=1e-6)
    assert rep.disturbance == pytest.approx(0.811278, abs=1e-6)
    assert abs(rep.slack) < 1e-12

    rep = fn.full_report(Instrument.single(depolarizing), DensityMatrix.maximally_mixed(2))
    assert rep.mutual_info == 0.0
    assert rep.disturbance == pytest.approx(2.0, abs=1e-12)
    assert rep.slack == pytest.approx(2.0, abs=1e-12)
    assert rep.normalized_d == pytest.approx(2.0, abs=1e-12)


def test_full_report_identities(rng):
    for _ in range(20):
        d = int(rng.integers(2, 5))
        rep = fn.full_report(random_instrument(d, rng, d * d), random_density(d, d, rng))
        assert rep.disturbance == rep.s_rho - rep.i_coherent
        assert rep.i_coherent == rep.s_out - rep.s_exchange
        assert rep.slack == rep.disturbance - rep.mutual_info
        assert rep.slack >= -1e-8
        assert 0 <= rep.normalized_i <= 1 + 1e-9
        assert 0 <= rep.normalized_d <= 2 + 1e-9


def test_full_report_rectangular_map(rng):
    ch = random_channel(2, rng, 2, dout=3)
    rep = fn.full_report(ch, random_density(2, 2, rng))
    assert rep.fid_disturbance is None and rep.dbar is None
    assert rep.slack >= -1e-8


# --- properties ----------------------------------------------------------------

@settings(max_examples=150, deadline=None)
@given(seeds, dims)
def test_tradeoff_and_chain(seed, d):
    rng = np.random.default_rng(seed)
    ins = random_instrument(d, rng, d * d)
    rho = random_state(d, rng, degenerate_prob=0.3)
    info, chi, dist = fn.mutual_information(ins, rho), fn.holevo_rhs(ins, rho), fn.disturbance(ins, rho)
    assert info <= chi + 1e-8
    assert chi <= dist + 1e-8
    assert dist >= -1e-9


@settings(max_examples=60, deadline=None)
@given(seeds, dims)
def test_tradeoff_any_degenerate_basis(seed, d):
    rng = np.random.default_rng(seed)
    ins = random_instrument(d, rng, d * d)
    rho = random_state(d, rng, degenerate_prob=1.0)
    basis = rotate_degenerate(rho, rng)
    assert fn.mutual_information(ins, rho, basis=basis) <= fn.disturbance(ins, rho) + 1e-8


@settings(max_examples=100, deadline=None)
@given(seeds, dims)
def test_exchange_entropy_two_routes(seed, d):
    rng = np.random.default_rng(seed)
    ch = random_channel(d, rng, int(rng.integers(1, d * d + 1)))
    rho = random_density(d, int(rng.integers(1, d + 1)), rng)
    s_w = fn.exchange_entropy(ch, rho)
    assert abs(s_w - fn.exchange_entropy_purified(ch, rho)) < 1e-9
    assert abs(s_w - fn.exchange_entropy_purified(ch, rho, compact=True)) < 1e-9


@settings(max_examples=60, deadline=None)
@given(seeds, dims)
def test_kraus_representation_independence(seed, d):
    rng = np.random.default_rng(seed)
    ch = random_channel(d, rng, int(rng.integers(1, d * d + 1)))
    rho = random_density(d, d, rng)
    mixed = remix(ch, haar_unitary(len(ch), rng))
    assert abs(fn.exchange_entropy(ch, rho) - fn.exchange_entropy(mixed, rho)) < 1e-9
    assert abs(fn.disturbance(ch, rho) - fn.disturbance(mixed, rho)) < 1e-9


@settings(max_examples=80, deadline=None)
@given(seeds, dims)
def test_data_processing_monotonicity(seed, d):
    rng = np.random.default_rng(seed)
    q = random_channel(d, rng, int(rng.integers(1, d * d + 1)))
    q2 = random_channel(d, rng, int(rng.integers(1, d * d + 1)))
    rho = random_state(d, rng)
    assert fn.disturbance(compose(q2, q), rho) >= fn.disturbance(q, rho) - 1e-8


def test_monotonicity_tail_cases(rng):
    for d in (2, 3):
        q = random_channel(d, rng, 2)
        rho = random_density(d, d, rng)
        assert fn.disturbance(compose(Channel.identity(d), q), rho) == pytest.approx(fn.disturbance(q, rho), abs=1e-9)
        # fully depolarizing tail: discrete Weyl operators / d
        x = np.roll(np.eye(d), 1, axis=0)
        z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
        tail = Channel.from_kraus([np.linalg.matrix_power(x, a) @ np.linalg.matrix_power(z, b) / d
                                   for a in range(d) for b in range(d)])
        flat = DensityMatrix.maximally_mixed(d)
        composed = fn.disturbance(compose(tail, q), flat)
        assert composed == pytest.approx(2 * log2(d), abs=1e-9)
        assert composed >= fn.disturbance(q, flat) - 1e-8


@settings(max_examples=60, deadline=None)
@given(seeds, dims)
def test_equality_condition(seed, d):
    rng = np.random.default_rng(seed)
    rho = random_density(d, d, rng)
    for ins in (Instrument.projective(rho.eigenbasis),
                Instrument.projective(rho.eigenbasis, rotation=haar_unitary(d, rng))):
        info, dist = fn.mutual_information(ins, rho), fn.disturbance(ins, rho)
        assert abs(info - dist) < 1e-8
        assert abs(info - fn.von_neumann_entropy(rho)) < 1e-8


def test_equality_fails_for_unrelated_basis(rng):
    rho = random_density(3, 3, rng)
    ins = Instrument.projective(haar_unitary(3, rng))
    assert fn.disturbance(ins, rho) - fn.mutual_information(ins, rho) > 1e-3
