import json
import math
from dataclasses import replace

import numpy as np
import pytest

from collective_qubit import geometry as g
from collective_qubit import protocol as P
from collective_qubit.states import (JointLayout, SingleQubitState, apply_unitary, basis_ket,
                                     fidelity, marginal, tensor)

A = basis_ket(0)
B = basis_ket(1)
PLUS = SingleQubitState.normalized(1, 1)
IDEAL_GATES = [P.GateSpec()] * 3


@pytest.fixture(scope="module")
def fig6_channel():
    return P.channel_from_physics(g.FIG6_TRAP.with_convention("figure"))


@pytest.fixture(scope="module")
def fig6_result(fig6_channel):
    gates = [P.GateSpec.for_error(P.DEFAULT_GATE_ERROR)] * 3
    return P.run_transmission(PLUS, gates, fig6_channel)


class TestGateSpec:
    def test_epsilon_from_rabi(self):
        gate = P.GateSpec(rabi=2 * math.pi * 0.1e6, N=100, ddd_avg=2 * math.pi * 25e6)
        assert gate.omega_eff == pytest.approx(math.sqrt(100) * 2 * math.pi * 0.1e6)
        assert gate.epsilon == pytest.approx((1e6 / 25e6) ** 2, rel=1e-12)

    def test_for_error_round_trip(self):
        assert P.GateSpec.for_error(3e-4, N=5000).epsilon == pytest.approx(3e-4, rel=1e-12)

    def test_guard(self):
        with pytest.raises(ValueError, match="perturbative"):
            P.GateSpec.for_error(0.2)
        with pytest.raises(ValueError):
            P.GateSpec(model="leakage")


class TestCnot:
    def layout_state(self, c, t):
        return tensor([c, t], ["psi", "phi"])

    def test_truth_table(self):
        gate = P.GateSpec()
        for c, t, out in ((A, A, (A, A)), (A, B, (A, B)), (B, A, (B, B)), (B, B, (B, A))):
            res = P.mixed_cnot(self.layout_state(c, t), 0, 1, gate)
            assert fidelity(res, np.kron(*out)) == pytest.approx(1.0, abs=1e-14)

    def test_basis_fidelity_under_gate_error(self):
        eps = 1e-4
        for c, t in ((A, A), (B, A), (A, B), (B, B)):
            rho = self.layout_state(c, t)
            ideal = P.mixed_cnot(rho, 0, 1, P.GateSpec())
            noisy = P.mixed_cnot(rho, 0, 1, P.GateSpec.for_error(eps))
            assert np.real(np.trace(ideal.matrix @ noisy.matrix)) == pytest.approx(1 - eps / 2, rel=1e-12)

    def test_phase_flip_model_spares_basis_states(self):
        rho = self.layout_state(B, A)
        out = P.mixed_cnot(rho, 0, 1, P.GateSpec.for_error(1e-3, model="phase_flip"))
        assert fidelity(out, np.kron(B, B)) == pytest.approx(1.0, abs=1e-14)

    def test_same_factor(self):
        with pytest.raises(ValueError):
            P.mixed_cnot(self.layout_state(A, A), 0, 0, P.GateSpec())


class TestEmission:
    def state(self, ens):
        return tensor([ens, A], ["phi", "photon"])

    def test_perfect(self):
        out = P.emit_photon(self.state(B), 0, 1, P.ChannelSpec(p_c=1.0))
        assert fidelity(out, np.kron(A, B)) == pytest.approx(1.0, abs=1e-14)

    def test_total_loss(self):
        out = P.emit_photon(self.state(B), 0, 1, P.ChannelSpec(p_c=0.0))
        assert fidelity(out, np.kron(A, A)) == pytest.approx(1.0, abs=1e-14)

    def test_coherence(self, frozen):
        out = P.emit_photon(self.state((A + B) / math.sqrt(2)), 0, 1, P.ChannelSpec(p_c=0.99))
        # |a_bar,0> is index 0, |a_bar,1> is index 1
        assert abs(out.matrix[0, 1]) == pytest.approx(frozen["protocol"]["coherence_pc099"], rel=1e-12)
        assert out.trace() == pytest.approx(1.0, abs=1e-12)

    def test_occupied_photon_rejected(self):
        with pytest.raises(ValueError, match="occupied"):
            P.emit_photon(tensor([B, B]), 0, 1, P.ChannelSpec())


class TestAbsorption:
    def test_perfect(self):
        out = P.absorb_photon(tensor([B, A]), 0, 1, P.ChannelSpec())
        assert fidelity(out, np.kron(A, B)) == pytest.approx(1.0, abs=1e-14)

    def test_success_weight(self):
        p1 = g.absorption_probability(500, 2.0, 0.78)
        out = P.absorb_photon(tensor([B, A]), 0, 1, P.ChannelSpec(p_1=p1))
        assert fidelity(out, np.kron(A, B)) == pytest.approx(p1, rel=1e-12)
        assert 1 - p1 == pytest.approx(1e-5, rel=0.5)

    def test_vacuum_unchanged(self):
        rho = tensor([A, A])
        out = P.absorb_photon(rho, 0, 1, P.ChannelSpec(p_1=0.3))
        assert np.allclose(out.matrix, rho.matrix)

    def test_coherent_superposition_is_mapped(self):
        photon = (A + 1j * B) / math.sqrt(2)
        out = P.absorb_photon(tensor([photon, A]), 0, 1, P.ChannelSpec())
        assert fidelity(marginal(out, [1]), photon) == pytest.approx(1.0, abs=1e-14)

    def test_excited_receiver_rejected(self):
        with pytest.raises(ValueError, match="population"):
            P.absorb_photon(tensor([B, B]), 0, 1, P.ChannelSpec())

    def test_reversed_factor_order(self):
        out = P.absorb_photon(tensor([A, B]), 1, 0, P.ChannelSpec())
        assert fidelity(out, np.kron(B, A)) == pytest.approx(1.0, abs=1e-14)


class TestDecoherence:
    def test_t2(self, frozen):
        t2 = P.clock_shift_t2(2e14)
        assert t2 == pytest.approx(frozen["protocol"]["t2_2e14"], rel=1e-12)
        assert t2 == pytest.approx(4e-3, rel=0.25)

    def test_identity_at_zero(self):
        rho = tensor([(A + B) / math.sqrt(2)])
        assert P.decohere(rho, [0], 0.0, P.ChannelSpec(t2_collective=1e-6, t_loss=1e-6)) is rho

    def test_off_diagonal_factor(self, frozen):
        rho = tensor([(A + B) / math.sqrt(2)])
        out = P.decohere(rho, [0], 10e-6, P.ChannelSpec(t2_collective=4e-3))
        assert 2 * abs(out.matrix[0, 1]) == pytest.approx(frozen["protocol"]["coherence_10us_at_4ms"], rel=1e-12)
        assert 2 * abs(out.matrix[0, 1]) > 0.995

    def test_loss(self):
        out = P.decohere(tensor([B]), [0], 1e-3, P.ChannelSpec(t_loss=1e-3))
        assert np.real(out.matrix[1, 1]) == pytest.approx(math.exp(-1), rel=1e-12)

    def test_negative_time(self):
        with pytest.raises(ValueError):
            P.decohere(tensor([A]), [0], -1.0, P.ChannelSpec())


class TestTransmission:
    def test_ideal_haar_inputs(self):
        for q in P.haar_qubits(20, seed=2024):
            res = P.run_transmission(q, IDEAL_GATES, P.ChannelSpec.ideal(), budget=False)
            assert res.fidelity_to_target == pytest.approx(1.0, abs=1e-12)
            assert res.output_state.min_eigenvalue() >= -1e-9

    def test_sender_reset(self):
        res = P.run_transmission(SingleQubitState(0.6, 0.8j), IDEAL_GATES, P.ChannelSpec.ideal())
        m = marginal(res.output_state, [P.PSI1])
        assert np.allclose(m.matrix, np.diag([1, 0]), atol=1e-12)

    def test_bell(self):
        res = P.run_transmission(PLUS, IDEAL_GATES, P.ChannelSpec.ideal(), include_disentangle=False)
        assert res.fidelity_to_target == pytest.approx(1.0, abs=1e-12)
        for k in (P.PSI1, P.PSI2):
            assert np.allclose(marginal(res.output_state, [k]).matrix, np.eye(2) / 2, atol=1e-12)

    def test_reset_gate_is_needed(self):
        """Without the final psi2->phi2 gate, phi2 stays entangled with psi2."""
        rho = P.initial_state(PLUS)
        gate, chan = P.GateSpec(), P.ChannelSpec.ideal()
        rho = P.mixed_cnot(rho, P.PSI1, P.PHI1, gate)
        rho = P.mixed_cnot(rho, P.PHI1, P.PSI1, gate)
        rho = P.emit_photon(rho, P.PHI1, P.PHOTON, chan)
        rho = P.absorb_photon(rho, P.PHOTON, P.PHI2, chan)
        rho = P.mixed_cnot(rho, P.PHI2, P.PSI2, gate)
        f = fidelity(marginal(rho, [P.PSI1, P.PSI2]), P.target_ket(PLUS, True))
        assert f == pytest.approx(0.5 ** 2 + 0.5 ** 2, abs=1e-12)

    def test_ideal_budget_is_zero(self):
        res = P.run_transmission(PLUS, IDEAL_GATES, P.ChannelSpec.ideal())
        assert all(r.infidelity == pytest.approx(0.0, abs=1e-14) for r in res.infidelity_budget)

    def test_gate_only_budget(self):
        eps = 1e-4
        for q in (SingleQubitState(1, 0), SingleQubitState(0, 1)):
            res = P.run_transmission(q, [P.GateSpec.for_error(eps)] * 3, P.ChannelSpec.ideal())
            assert res.infidelity == pytest.approx(1.5 * eps, rel=1e-3)

    @pytest.mark.parametrize("pc", [0.5, 0.9, 0.99])
    def test_emission_only_closed_form(self, pc):
        for q in [PLUS] + P.haar_qubits(4, seed=1):
            res = P.run_transmission(q, IDEAL_GATES, P.ChannelSpec(p_c=pc), budget=False)
            assert 1 - res.fidelity_to_target == pytest.approx(1 - P.emission_only_fidelity(q, pc), abs=1e-13)

    def test_emission_only_oracle(self, frozen):
        res = P.run_transmission(PLUS, IDEAL_GATES, P.ChannelSpec(p_c=0.99), budget=False)
        assert res.infidelity == pytest.approx(frozen["protocol"]["emission_only_infidelity_pc099"], rel=1e-10)

    @pytest.mark.parametrize("param,values", [
        ("p_c", [1.0, 0.99, 0.9]), ("p_1", [1.0, 0.99, 0.9]),
        ("transfer_fidelity", [1.0, 0.99, 0.9]), ("t2_collective", [math.inf, 1e-3, 1e-6]),
    ])
    def test_monotone_in_channel_errors(self, param, values):
        fids = [P.run_transmission(PLUS, IDEAL_GATES, replace(P.ChannelSpec.ideal(), **{param: v}),
                                   budget=False).fidelity_to_target for v in values]
        assert all(b <= a + 1e-15 for a, b in zip(fids, fids[1:]))
        assert fids[-1] < fids[0]

    def test_monotone_in_gate_error(self):
        fids = [P.run_transmission(PLUS, [P.GateSpec.for_error(e)] * 3, P.ChannelSpec.ideal(),
                                   budget=False).fidelity_to_target for e in (0.0, 1e-4, 1e-2)]
        assert fids[0] > fids[1] > fids[2]

    def test_rejects_wrong_gate_count(self):
        with pytest.raises(ValueError):
            P.run_transmission(PLUS, IDEAL_GATES[:2], P.ChannelSpec.ideal())


class TestFig6Point:
    def test_channel(self, fig6_channel, frozen):
        assert 1 - fig6_channel.p_c == pytest.approx(frozen["geometry"]["fig6_one_minus_pc_figure"], rel=1e-10)
        assert fig6_channel.p_1 == 1.0
        assert fig6_channel.t2_collective == pytest.approx(frozen["protocol"]["t2_5e14"], rel=1e-12)

    def test_emission_loss_dominates(self, fig6_result):
        rows = P.infidelity_budget_report(fig6_result)
        assert rows[0].source == "emission_loss"
        assert [r.infidelity for r in rows] == sorted((r.infidelity for r in rows), reverse=True)

    def test_emission_entry_matches_oracle(self, fig6_result, frozen):
        entry = next(r for r in fig6_result.infidelity_budget if r.source == "emission_loss")
        assert entry.infidelity == pytest.approx(frozen["protocol"]["fig6_emission_only_infidelity"], rel=1e-9)

    def test_total_near_emission_only(self, fig6_result, frozen):
        only = frozen["protocol"]["fig6_emission_only_infidelity"]
        assert fig6_result.infidelity == pytest.approx(only, rel=0.30)

    def test_json_export(self, fig6_result):
        data = json.loads(fig6_result.to_json())
        assert set(data) == {"input", "params", "fidelity", "budget"}
        assert data["input"]["c_a"] == pytest.approx([1 / math.sqrt(2), 0.0])
        assert data["budget"][0]["source"] == "emission_loss"
        assert {"source", "infidelity"} == set(data["budget"][0])
        assert data["params"]["channel"]["t_loss"] == pytest.approx(0.1)
