import csv
import math

import numpy as np
import pytest

from artifact import gkpmath
from artifact import gridsim as g
from artifact import peaksim as ps


def _moments(st, mode=0):
    x, d = g.position_pdf(st, mode)
    p, dp = g.p_quadrature_pdf(st, mode)
    hx, hp = st.specs[mode].spacing, p[1] - p[0]
    mx, mp = float(np.sum(x * d) * hx), float(np.sum(p * dp) * hp)
    vx = float(np.sum((x - mx) ** 2 * d) * hx)
    vp = float(np.sum((p - mp) ** 2 * dp) * hp)
    return mx, mp, vx, vp


def test_gridspec_validation():
    with pytest.raises(g.GridError):
        g.GridSpec(100, 0.1)
    with pytest.raises(g.GridError):
        g.GridSpec(64, 0.0)
    s = g.GridSpec.rotation_grid(256)
    assert s.rotation_accurate and s.centered
    assert s.coords()[0] == pytest.approx(-128 * s.spacing)


def test_vacuum_is_unit_gaussian():
    s = g.GridSpec(512, 1 / 16)
    st = g.prepare("vacuum", s)
    assert st.norm() == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(st.block(0), gkpmath.psi_delta(s.coords(), 1.0), atol=1e-12)


def test_squeezed_second_moment():
    st = g.prepare("squeezed", g.GridSpec(1024, 1 / 256), delta=0.1)
    _, _, vx, _ = _moments(st)
    assert vx == pytest.approx(0.005, rel=0.01)


def test_comb_matches_gkpmath():
    s = g.GridSpec(4096, 1 / 128)
    kw = dict(spacing=1.0, kappa=0.3, delta=0.05, eps=0.2, window=10)
    psi = g.prepare_mode("comb", s, **kw)
    x = s.coords()
    ref = np.zeros_like(x)
    for z in range(-10, 11):
        ref += gkpmath.eta_kappa(z, 0.3) * gkpmath.truncated_peak(x, float(z), 0.05, 0.2)
    ref /= math.sqrt(np.sum(ref ** 2) * s.spacing)
    assert np.max(np.abs(psi - ref)) <= 1e-10


def test_prepare_rejects_offgrid():
    with pytest.raises(g.SupportError):
        g.prepare("position_peak", g.GridSpec(64, 1 / 16), x=1.9, delta=0.2)


def test_budget():
    s = g.GridSpec(256, 1 / 16)
    psi = g.prepare_mode("vacuum", s)
    with pytest.raises(g.BudgetError):
        g.product_state([s, s, s], [psi, psi, psi])
    st = g.product_state([s, s], [psi, psi], budget=2 ** 17)
    assert st.amp.shape == (256, 256, 2)


def test_phase_zero_identity():
    st = g.prepare("vacuum", g.GridSpec(256, 1 / 16))
    ref = st.copy()
    g.phase_Q(st, 0, 0.0)
    assert g.fidelity(st, ref) == pytest.approx(1.0, abs=1e-15)


def test_rotation_convention():
    s = g.GridSpec.rotation_grid(512)
    st = g.prepare("position_peak", s, x=1.5, delta=1.0)
    g.phase_Q(st, 0, 0.7)
    mx, mp, _, _ = _moments(st)
    assert (mx, mp) == pytest.approx((1.5, -0.7), abs=1e-9)
    g.rotate_quarter(st, 0, 1)
    mx2, mp2, _, _ = _moments(st)
    assert (mx2, mp2) == pytest.approx((-mp, mx), abs=1e-9)


def test_rotate_four_times_identity():
    s = g.GridSpec.rotation_grid(256)
    st = g.prepare("vacuum", s)
    ref = st.copy()
    for _ in range(4):
        g.rotate_quarter(st, 0, 1)
    assert np.max(np.abs(st.amp - ref.amp)) <= 1e-8


def test_rotate_inverse_pair():
    s = g.GridSpec.rotation_grid(256)
    st = g.prepare("position_peak", s, x=0.8, delta=0.7)
    g.phase_Q(st, 0, 0.3)
    ref = st.copy()
    g.rotate_quarter(st, 0, 1)
    g.rotate_quarter(st, 0, -1)
    assert np.max(np.abs(st.amp - ref.amp)) <= 1e-9


def test_controlled_rotation_needs_rotation_grid():
    st = g.prepare("vacuum", g.GridSpec(256, 1 / 16))
    with pytest.raises(g.AlignmentError):
        g.rotate_quarter(st, 0, 1, control=1)


def test_two_mode_sum():
    s = g.GridSpec(256, 1 / 16)
    a = g.prepare_mode("position_peak", s, x=2.0, delta=1 / 128, eps=1 / 32)
    b = g.prepare_mode("position_peak", s, x=3.0, delta=1 / 128, eps=1 / 32)
    st = g.product_state([s, s], [a, b])
    g.two_mode_sum(st, 0, 1)
    ref = g.product_state([s, s], [a, g.prepare_mode("position_peak", s, x=5.0, delta=1 / 128, eps=1 / 32)])
    assert g.fidelity(st, ref) == pytest.approx(1.0, abs=1e-12)
    g.two_mode_sum(st, 0, 1, sign=-1)
    assert g.fidelity(st, g.product_state([s, s], [a, b])) == pytest.approx(1.0, abs=1e-12)


def test_two_mode_sum_alignment():
    s1, s2 = g.GridSpec(256, 1 / 4), g.GridSpec(256, 1 / 8)
    v1, v2 = g.prepare_mode("vacuum", s1), g.prepare_mode("vacuum", s2)
    with pytest.raises(g.AlignmentError):
        g.two_mode_sum(g.product_state([s1, s2], [v1, v2]), 0, 1)


def test_shift_exact_and_fractional():
    s = g.GridSpec(512, 1 / 32)
    st = g.prepare("squeezed", s, delta=0.5)
    g.shift_P(st, 0, 0.25)
    assert np.max(np.abs(st.block(0) - gkpmath.psi_delta(s.coords() - 0.25, 0.5))) <= 1e-12
    st = g.prepare("squeezed", s, delta=0.5)
    g.shift_P(st, 0, 0.3141)
    assert np.max(np.abs(st.block(0) - gkpmath.psi_delta(s.coords() - 0.3141, 0.5))) <= 1e-10
    assert st.norm() == pytest.approx(1.0, abs=1e-9)


def test_shift_out_of_grid():
    st = g.prepare("squeezed", g.GridSpec(64, 1 / 8), delta=0.3)
    with pytest.raises(g.SupportError):
        g.shift_P(st, 0, 3.5)


def test_squeeze_metadata():
    s = g.GridSpec(256, 1 / 16)
    a = g.prepare("squeezed", s, delta=0.4)
    b = a.copy()
    g.squeeze(a, 0, 2.0)
    g.squeeze(b, 0, math.sqrt(2.0))
    g.squeeze(b, 0, math.sqrt(2.0))
    assert a.specs[0].spacing == pytest.approx(b.specs[0].spacing, rel=1e-15)
    assert np.allclose(a.amp, b.amp, rtol=1e-15, atol=0)
    assert a.norm() == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(a.block(0), gkpmath.psi_delta(a.specs[0].coords(), 0.8), atol=1e-12)


def test_gates_preserve_norm():
    s = g.GridSpec.rotation_grid(256)
    st = g.prepare("position_peak", s, x=0.5, delta=0.8)
    g.hadamard(st)
    for gate in (lambda: g.phase_Q(st, 0, 1.3, control=1), lambda: g.shift_P(st, 0, 0.2, control=0),
                 lambda: g.rotate_quarter(st, 0, 1, control=1), lambda: g.hadamard(st),
                 lambda: g.rotate_quarter(st, 0, -1)):
        gate()
        assert st.norm() == pytest.approx(1.0, abs=1e-9)


def _peak_state(x, qubit=0, h=1 / 256, G=1024):
    spec = g.GridSpec(G, h, 0.0)
    return g.prepare("position_peak", spec, qubit=qubit, x=x, delta=h / 8, eps=h / 2)


@pytest.mark.parametrize("x,b,want", [(3, 0, 1), (2, 0, 0), (2, 1, 1), (1, 1, 0)])
def test_lsb_integers(x, b, want):
    st = _peak_state(float(x), qubit=b)
    g.lsb_circuit(st)
    assert st.qubit_probabilities()[want] >= 1 - 1e-9


def test_lsb_adjoint_roundtrip():
    st = _peak_state(2.3, h=1 / 64, G=512)
    ref = st.copy()
    g.lsb_circuit(st)
    g.lsb_circuit(st, adjoint=True)
    assert g.fidelity(st, ref) == pytest.approx(1.0, abs=1e-12)


def test_lsb_pointwise_closeness():
    from artifact.verify import lsb_experiment
    r = lsb_experiment(0.1)
    assert r["pointwise_max_defect"] <= math.pi * 0.1 / 2
    assert r["pointwise_max_error"] <= 1e-6
    assert r["trace_distance"] <= 7 * 0.1 ** 0.25


def test_ctrlM_control_off_identity():
    spec = g.GridSpec(256, 1 / 16)
    st = g.prepare("position_peak", spec, x=1.0, delta=0.25)
    ref = st.copy()
    g.ctrlM_alpha(st, 0, 3.0)
    assert np.max(np.abs(st.amp - ref.amp)) <= 1e-8


def test_ctrlM_scales_controlled_branch():
    spec = g.GridSpec(256, 1 / 16)
    psi = g.prepare_mode("position_peak", spec, x=1.0, delta=0.25)
    st = g.product_state([spec], [psi], 1)
    g.ctrlM_alpha(st, 0, 2.0)
    want = gkpmath.psi_delta(spec.coords() - 2.0, 0.5)
    assert st.norm() == pytest.approx(1.0, abs=1e-8)
    assert np.max(np.abs(st.block(1) - want)) <= 1e-8


def _abc(G=128):
    sA, sB, sC = g.GridSpec(G, 8 / G), g.GridSpec(G, 16 / G), g.GridSpec(G, 8 / G)
    return sA, sB, sC


def _mean(st, k):
    return float(np.sum(st.specs[k].coords() * st.marginal(k)) * st.specs[k].spacing)


def test_V1_moves_parity():
    sA, sB, sC = _abc()
    psis = [g.prepare_mode("position_peak", sA, x=1.0, delta=sA.spacing / 8),
            g.prepare_mode("position_peak", sB, x=1.0, delta=4 * sB.spacing),
            g.prepare_mode("position_peak", sC, x=0.0, delta=sC.spacing / 8)]
    st = g.product_state((sA, sB, sC), psis)
    g.V_alpha(st, 1.0)
    assert _mean(st, 0) == pytest.approx(0.0, abs=1e-9)
    assert _mean(st, 1) == pytest.approx(1.0, abs=1e-9)
    assert _mean(st, 2) == pytest.approx(1.0, abs=1e-9)
    assert st.qubit_probabilities()[0] == pytest.approx(1.0, abs=1e-9)


def test_V_alpha_dag_inverts():
    sA, sB, sC = _abc()
    psis = [g.prepare_mode("position_peak", sA, x=3.0, delta=sA.spacing / 8),
            g.prepare_mode("position_peak", sB, x=0.5, delta=4 * sB.spacing),
            g.prepare_mode("position_peak", sC, x=0.0, delta=sC.spacing / 8)]
    st = g.product_state((sA, sB, sC), psis)
    ref = st.copy()
    g.V_alpha(st, 2.0)
    assert _mean(st, 1) == pytest.approx(1.0, abs=1e-6)
    g.V_alpha_dag(st, 2.0)
    assert st.specs == ref.specs
    assert g.fidelity(st, ref) >= 1 - 1e-6


def test_U_small_grid_matches_peaksim():
    sA, sB, sC = _abc(128)
    shapes = (ps.ModeShape(sA.spacing / 8), ps.ModeShape(4 * sB.spacing), ps.ModeShape(sC.spacing / 8))
    start = ps.superpose([ps.single_term(x, 0.0, 0.0, 0, shapes) for x in range(4)], [0.5] * 4)
    st = g.from_peaks(start, (sA, sB, sC))
    g.U_aNm(st, 2, 3, 2)
    ref = g.from_peaks(ps.apply_UaNm_ideal(start, 2, 3, 2), st.specs)
    assert g.fidelity(st, ref) >= 1 - 1e-3


def test_p_pdf_vacuum_and_squeezed():
    s = g.GridSpec(512, 1 / 16)
    st = g.prepare("vacuum", s)
    p, d = g.p_quadrature_pdf(st, 0)
    assert float(np.sum(d) * (p[1] - p[0])) == pytest.approx(1.0, abs=1e-6)
    _, _, vx, vp = _moments(st)
    assert (vx, vp) == pytest.approx((0.5, 0.5), rel=1e-6)
    st = g.prepare("squeezed", g.GridSpec(1024, 1 / 128), delta=0.25)
    _, _, vx, vp = _moments(st)
    assert vp == pytest.approx(1 / (2 * 0.25 ** 2), rel=1e-3)
    assert vx * vp == pytest.approx(0.25, rel=1e-3)


def test_p_pdf_comb_peak_spacing():
    r = 2
    s = g.GridSpec(8192, 1 / 32)
    st = g.prepare("comb", s, spacing=float(r), kappa=0.15, delta=0.1, window=40)
    p, d = g.p_quadrature_pdf(st, 0)
    hp = p[1] - p[0]
    assert float(np.sum(d) * hp) == pytest.approx(1.0, abs=1e-6)
    # local maxima sit at multiples of 2 pi / r
    peaks = p[1:-1][(d[1:-1] > d[:-2]) & (d[1:-1] >= d[2:]) & (d[1:-1] > 1e-3 * d.max())]
    k = peaks / (2 * math.pi / r)
    assert len(peaks) >= 5
    assert np.max(np.abs(k - np.round(k))) * (2 * math.pi / r) <= hp


def test_dump_csv(tmp_path):
    st = g.prepare("vacuum", g.GridSpec(64, 1 / 4))
    x, d = g.position_pdf(st, 0)
    path = tmp_path / "pdf.csv"
    g.dump_csv(path, x, d)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["coordinate", "density"] and len(rows) == 65
    assert float(rows[33][1]) == d[32]
