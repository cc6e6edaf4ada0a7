import math

import pytest

import czpulse


def test_reference_circuit_layout():
    spec = czpulse.reference_circuit()
    assert spec.mode_labels == ["Q1", "C", "Q2"]
    assert spec.coupling_rho(0, 1) == pytest.approx(0.018)


def test_effective_coupling_changes_sign():
    spec = czpulse.reference_circuit()
    assert czpulse.effective_coupling_mhz(spec, 7.0) < 0.0
    assert czpulse.effective_coupling_mhz(spec, 8.5) > 0.0


def test_zz_curve_is_small_near_idle():
    curve = czpulse.zz_curve(czpulse.reference_circuit(), czpulse.linspace(7.6, 8.0, 9))
    assert len(curve["zeta_mhz"]) == 9
    assert min(abs(z) for z in curve["zeta_mhz"]) < 0.05


def test_fixed_lambda_gate_is_a_cz():
    model = czpulse.GateModel(czpulse.gate_circuit())
    out = model.evaluate(30.0, [-0.1366], dt_ns=0.05)
    assert out["epg"] < 1e-3
    assert abs(abs(out["phi_zz"]) - math.pi) < 0.05
    assert len(out["t_ns"]) == len(out["omega_c_ghz"])


def test_errors_are_raised_as_python_exceptions():
    with pytest.raises(czpulse.CzpulseError):
        czpulse.GateModel(czpulse.gate_circuit()).evaluate(30.0, [-0.1366], dt_ns=0.2)
