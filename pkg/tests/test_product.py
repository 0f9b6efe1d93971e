import json

import numpy as np
import pytest

from oracles import SyndromeTableBDD, pyndiah_rows_reference
from tpc.channel import RngStream, snr_to_sigma
from tpc.codes import build_code, encode
from tpc.gmi import PostProcParams, post_process
from tpc.product import (
    APP_LITERAL,
    ECPD,
    GMI,
    HEURISTIC,
    MCPD,
    REF_CHANNEL,
    ROWS,
    CoefficientSchedule,
    DimensionMismatch,
    IterationState,
    ProductCode,
    app_llrs,
    calibrate_schedule,
    component_pass,
    encode_product,
    extrinsic_half_iteration,
    gmi_cp_decode,
    original_cp_decode,
    pilot_llrs,
    pyndiah_half_iteration,
    pyndiah_schedule,
)

PC64 = ProductCode(build_code("ebch", 64, 2))
PC8 = ProductCode(build_code("ebch", 8, 1))


def _frames(pc, snr, count, seed=1):
    return pilot_llrs(pc, snr_to_sigma(snr, pc.rate), RngStream(seed), range(count))


def test_rates():
    rates = [ProductCode(build_code("ebch", n, 2)).rate for n in (64, 128, 256)]
    assert np.round(rates, 3).tolist() == [0.635, 0.779, 0.872]
    assert PC64.params == (4096, 2601, 36)


def test_encode_spc_example():
    pc = ProductCode(build_code("spc", 3))
    c = encode_product(pc, np.eye(2, dtype=np.uint8))
    assert c.tolist() == [[1, 0, 1], [0, 1, 1], [1, 1, 0]]
    with pytest.raises(DimensionMismatch):
        encode_product(pc, np.zeros((3, 2), np.uint8))


def test_rows_and_columns_are_codewords_either_order():
    spec = PC64.component
    rng = np.random.default_rng(0)
    for _ in range(100):
        m = rng.integers(0, 2, (spec.k, spec.k), dtype=np.uint8)
        c = encode_product(PC64, m)
        cols_first = encode(spec, encode(spec, m.T).T)
        assert (c == cols_first).all()
    assert all((encode(spec, row[: spec.k]) == row).all() for row in c)
    assert all((encode(spec, col[: spec.k]) == col).all() for col in c.T)


def test_pyndiah_schedule_values():
    s = pyndiah_schedule()
    assert [s.at(l) for l in range(1, 9)] == list(zip(
        [0.1, 0.3, 0.5, 0.7, 0.9, 1, 1, 1], [0.2, 0.4, 0.6, 0.8, 1, 1, 1, 1]
    ))
    assert s.at(20) == (1.0, 1.0)
    with pytest.raises(ValueError):
        s.at(0)


def test_schedule_json_roundtrip(tmp_path):
    s = CoefficientSchedule(GMI, [(0.16, 0.15), (0.2, 0.1)])
    s.save(tmp_path / "s.json")
    assert json.loads((tmp_path / "s.json").read_text())[0] == {"l": 1, "gamma": 0.16, "delta": 0.15}
    back = CoefficientSchedule.load(tmp_path / "s.json")
    assert back.kind == GMI and back.pairs == s.pairs
    h = CoefficientSchedule.from_json(pyndiah_schedule().to_json())
    assert h.kind == HEURISTIC and h.at(30) == (1.0, 1.0)
    with pytest.raises(ValueError):
        CoefficientSchedule.from_json([{"l": 2, "gamma": 1, "delta": 1}])


def test_pyndiah_half_iteration_matches_reference_script():
    L = _frames(PC64, 2.0, 1, seed=5)[0]
    Lin = L / np.abs(L).mean()
    st = IterationState(L[None], Lin[None], 1, ROWS)
    out = pyndiah_half_iteration(PC64, st, pyndiah_schedule(), 5)
    bdd = SyndromeTableBDD(PC64.component.generator_matrix, 2, extended=True).decode
    V, L_out = pyndiah_rows_reference(L, Lin, 0.1, 0.2, 5, bdd)
    np.testing.assert_allclose(out.V[0], V, rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(out.L_in[0], L_out, rtol=1e-9, atol=1e-12)
    assert out.half_iter == 2 and out.direction == "columns"


def test_pyndiah_equals_gmi_path_without_normalizers():
    L = _frames(PC64, 2.0, 2, seed=6)
    st = IterationState(L, L / np.abs(L).mean(axis=(1, 2), keepdims=True), 3, ROWS)
    alpha, beta = pyndiah_schedule().at(3)
    a = pyndiah_half_iteration(PC64, st, pyndiah_schedule(), 5)
    norm = np.array([np.abs(a.W[f][a.alt[f]]).mean() for f in range(2)])[:, None, None]
    expect = post_process(a.W, a.alt, PostProcParams(alpha, alpha * beta))
    np.testing.assert_allclose(a.V * norm, expect, rtol=1e-12)
    b = extrinsic_half_iteration(PC64, st, PostProcParams(alpha, alpha * beta), 5, extrinsic=False)
    np.testing.assert_allclose(b.V, expect, rtol=1e-12)


def test_extrinsic_step_is_noop_when_input_is_channel():
    L = _frames(PC64, 2.0, 1, seed=7)
    st = IterationState(L, L.copy(), 1, ROWS)
    th = PostProcParams(0.3, 0.4)
    a = extrinsic_half_iteration(PC64, st, th, 4, extrinsic=True)
    b = extrinsic_half_iteration(PC64, st, th, 4, extrinsic=False)
    np.testing.assert_array_equal(a.V, b.V)
    np.testing.assert_array_equal(a.L_in, L + a.V)


def test_sign_symmetry_of_original_decoder():
    L0 = _frames(PC64, 2.0, 2, seed=8)
    rng = np.random.default_rng(1)
    c = encode_product(PC64, rng.integers(0, 2, (2, 51, 51), dtype=np.uint8))
    Lc = L0 * (1.0 - 2.0 * c)
    d0 = original_cp_decode(PC64, L0, p=4, l_max=6).decisions
    dc = original_cp_decode(PC64, Lc, p=4, l_max=6).decisions
    assert ((dc ^ c) == d0).all()


def test_sign_symmetry_of_gmi_decoder():
    L0 = _frames(PC64, 2.0, 1, seed=9)
    c = encode_product(PC64, np.random.default_rng(2).integers(0, 2, (51, 51), dtype=np.uint8))
    sched = CoefficientSchedule(GMI, [(0.3, 0.5)] * 6)
    for variant in (MCPD, ECPD):
        d0 = gmi_cp_decode(PC64, L0, sched, 3, 6, variant=variant).decisions
        dc = gmi_cp_decode(PC64, L0 * (1.0 - 2.0 * c), sched, 3, 6, variant=variant).decisions
        assert ((dc[0] ^ c) == d0[0]).all()


def test_noiseless_decoding():
    L = np.full((1, 64, 64), 40.0)
    assert not original_cp_decode(PC64, L, p=3, l_max=4).decisions.any()
    sched = CoefficientSchedule(GMI, [(0.5, 1.0)] * 4)
    for variant in (MCPD, ECPD):
        assert not gmi_cp_decode(PC64, L, sched, 3, 4, variant=variant).decisions.any()


def test_lmax_validated():
    with pytest.raises(ValueError):
        original_cp_decode(PC8, np.ones((8, 8)), l_max=0)


def test_app_rules():
    L = _frames(PC64, 2.0, 1, seed=10)
    st = IterationState(L, L.copy(), 1, ROWS)
    for _ in range(2):
        st = extrinsic_half_iteration(PC64, st, PostProcParams(0.3, 0.4), 4, extrinsic=False)
    v_prev = st.L_prev_in - st.L_ch
    np.testing.assert_allclose(app_llrs(st), st.V + st.L_ch + v_prev)
    np.testing.assert_allclose(app_llrs(st, APP_LITERAL), st.V + st.L_ch + st.L_prev_in)


def test_ber_trace_and_reference():
    L = _frames(PC64, 2.3, 2, seed=11)
    res = original_cp_decode(PC64, L, p=4, l_max=4, trace=True)
    assert len(res.ber_trace) == 4
    assert res.ber_trace[-1] == pytest.approx(res.decisions.mean())


def test_calibration_small():
    cal = calibrate_schedule(PC64, 2.2, 4, 4, pilot_frames=8, seed=2)
    assert len(cal.schedule.pairs) == 4 and cal.schedule.kind == GMI
    assert all(0 < g < 1 for g, _ in cal.schedule.pairs)
    assert cal.samples_per_half_iter == [8 * 64 * 64] * 4
    again = calibrate_schedule(PC64, 2.2, 4, 4, pilot_frames=8, seed=2)
    assert again.schedule.pairs == cal.schedule.pairs
    # first half iteration: l_in == l_ch, so both pairing rules agree
    ch = calibrate_schedule(PC64, 2.2, 4, 2, pilot_frames=8, seed=2, reference=REF_CHANNEL)
    assert ch.schedule.pairs[0] == cal.schedule.pairs[0]
    assert ch.schedule.pairs[1] != cal.schedule.pairs[1]


def test_calibration_subsampling_cap():
    cal = calibrate_schedule(PC64, 2.2, 3, 1, pilot_frames=4, seed=3, max_samples=5000)
    assert 4000 < cal.samples_per_half_iter[0] < 6000


def test_single_pilot_frame_warns(caplog):
    calibrate_schedule(PC8, 3.0, 2, 1, pilot_frames=1)
    assert "single pilot frame" in caplog.text


def test_gmi_trajectory_increases_at_high_snr():
    cal = calibrate_schedule(PC64, 2.6, 4, 8, pilot_frames=6, seed=4)
    g = cal.gmi_trajectory
    assert all(b >= a - 1e-3 for a, b in zip(g[1:], g[2:]))
