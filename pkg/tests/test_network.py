"""Network assembly, forward propagation, backends, and the model format."""

import numpy as np
import pytest

from snnlzc import _kernels_py
from snnlzc.core import SeedSpec, TimeGrid, derive_rng
from snnlzc.kernels import BACKEND
from snnlzc.network import (
    NetworkModel,
    forward,
    init_model,
    output_features,
    read_model,
    run_layer,
    write_model,
)
from snnlzc.neuron import LifParams, MetaParams, NeuronState, lif_step, meta_step

GRID = TimeGrid(dt_ms=1.0, n_bins=64)


def random_model(rng, n=8, kind="lif", grid=GRID, delay=False):
    if kind == "lif":
        params = LifParams(tau_m_ms=float(rng.uniform(5, 40)), v_th=float(rng.uniform(0.5, 1.5)))
    else:
        params = MetaParams(
            base=LifParams(tau_m_ms=float(rng.uniform(5, 40)), v_th=float(rng.uniform(0.5, 1.5))),
            th_jump=float(rng.uniform(0, 0.5)),
            tau_adapt_ms=float(rng.uniform(10, 80)),
            tau_mod_gain=float(rng.uniform(0, 0.3)),
        )
    return NetworkModel(
        n=n,
        model_kind=kind,
        w_xh=rng.uniform(0, 3, size=(n, n)),
        w_hz=rng.uniform(0, 3, size=(n, n)),
        b_h=rng.uniform(-0.1, 0.1, size=n),
        b_z=rng.uniform(-0.1, 0.1, size=n),
        params_h=params,
        params_z=params,
        grid=grid,
        delay_one_bin=delay,
    )


class TestModelValidation:
    def test_shape_mismatch_rejected(self, rng):
        with pytest.raises(Exception):
            NetworkModel(
                n=4, model_kind="lif",
                w_xh=np.zeros((4, 5)), w_hz=np.zeros((4, 4)),
                b_h=np.zeros(4), b_z=np.zeros(4),
                params_h=LifParams(), params_z=LifParams(), grid=GRID,
            )

    def test_kind_params_must_agree(self):
        with pytest.raises(Exception):
            NetworkModel(
                n=4, model_kind="meta",
                w_xh=np.zeros((4, 4)), w_hz=np.zeros((4, 4)),
                b_h=np.zeros(4), b_z=np.zeros(4),
                params_h=LifParams(), params_z=LifParams(), grid=GRID,
            )


class TestForward:
    def test_shapes_and_determinism(self, rng):
        model = random_model(rng)
        x = (rng.random((8, 64)) < 0.1).astype(np.uint8)
        t1 = forward(model, x)
        t2 = forward(model, x)
        assert t1.hidden_spikes.shape == (8, 64)
        assert t1.output_spikes.shape == (8, 64)
        np.testing.assert_array_equal(t1.output_spikes, t2.output_spikes)

    def test_potentials_retained_on_request(self, rng):
        model = random_model(rng)
        x = (rng.random((8, 64)) < 0.1).astype(np.uint8)
        assert forward(model, x).v_hist_z is None
        trace = forward(model, x, retain="potentials")
        assert trace.v_hist_h.shape == (8, 64)
        assert trace.v_hist_z.shape == (8, 64)

    def test_output_features_length(self, rng):
        model = random_model(rng)
        x = (rng.random((8, 64)) < 0.1).astype(np.uint8)
        feats = output_features(forward(model, x))
        assert feats.shape == (8,)
        assert np.isfinite(feats).all()

    def test_silent_input_silent_output(self, rng):
        model = random_model(rng)
        x = np.zeros((8, 64), dtype=np.uint8)
        trace = forward(model, x)
        assert trace.hidden_spikes.sum() == 0
        assert trace.output_spikes.sum() == 0


class TestBackendAgreement:
    """The compiled kernel, the pure-Python twin, and the scalar reference
    stepper must produce bit-identical spike rasters."""

    def _scalar_layer(self, pre, w, b, params, dt):
        n_post, n_bins = w.shape[0], pre.shape[1]
        step = meta_step if isinstance(params, MetaParams) else lif_step
        out = np.zeros((n_post, n_bins), dtype=np.uint8)
        for j in range(n_post):
            state = NeuronState.resting(params)
            for t in range(n_bins):
                i_t = float(w[j] @ pre[:, t]) + float(b[j])
                state, s = step(state, params, i_t, dt, bin_index=t)
                out[j, t] = s
        return out

    @pytest.mark.parametrize("kind", ["lif", "meta"])
    def test_three_way_agreement(self, rng, kind):
        for _ in range(20):
            n = int(rng.integers(2, 10))
            t = int(rng.integers(8, 80))
            pre = (rng.random((n, t)) < 0.2).astype(np.uint8)
            w = rng.uniform(0, 4.0 / n, size=(n, n))
            b = rng.uniform(-0.05, 0.05, size=n)
            if kind == "lif":
                params = LifParams(tau_m_ms=float(rng.uniform(2, 30)))
            else:
                params = MetaParams(
                    base=LifParams(tau_m_ms=float(rng.uniform(2, 30))),
                    th_jump=float(rng.uniform(0, 0.5)),
                    tau_adapt_ms=float(rng.uniform(5, 60)),
                    tau_mod_gain=float(rng.uniform(0, 0.5)),
                )
            active, _ = run_layer(pre, w, b, params, 1.0)
            scalar = self._scalar_layer(pre, w, b, params, 1.0)
            np.testing.assert_array_equal(active, scalar)
            # Pure-Python twin of whatever backend is active.
            kwargs = dict(
                dt_ms=1.0,
                tau_m=params.base.tau_m_ms if kind == "meta" else params.tau_m_ms,
                r_m=(params.base if kind == "meta" else params).r_m,
                v_th=(params.base if kind == "meta" else params).v_th,
                v_reset=(params.base if kind == "meta" else params).v_reset,
                v_rest=(params.base if kind == "meta" else params).v_rest,
                is_meta=kind == "meta",
                th_jump=params.th_jump if kind == "meta" else 0.0,
                tau_adapt=params.tau_adapt_ms if kind == "meta" else 1.0,
                tau_mod_gain=params.tau_mod_gain if kind == "meta" else 0.0,
                adapt_decay=params.adapt_decay_per_ms if kind == "meta" else 0.0,
            )
            py_spikes, _ = _kernels_py.simulate_layer(
                pre, w, b, kwargs["dt_ms"], kwargs["tau_m"], kwargs["r_m"],
                kwargs["v_th"], kwargs["v_reset"], kwargs["v_rest"],
                kwargs["is_meta"], kwargs["th_jump"], kwargs["tau_adapt"],
                kwargs["tau_mod_gain"], kwargs["adapt_decay"], False,
            )
            np.testing.assert_array_equal(active, py_spikes)

    def test_backend_selected(self):
        assert BACKEND in ("cython", "python")


class TestModelFile:
    @pytest.mark.parametrize("kind", ["lif", "meta"])
    def test_round_trip_byte_identical(self, rng, tmp_path, kind):
        for i in range(20):
            model = random_model(rng, n=int(rng.integers(2, 8)), kind=kind,
                                 delay=bool(rng.integers(2)))
            p1, p2 = tmp_path / f"{kind}{i}a.txt", tmp_path / f"{kind}{i}b.txt"
            write_model(p1, model)
            loaded = read_model(p1)
            write_model(p2, loaded)
            assert p1.read_bytes() == p2.read_bytes()
            np.testing.assert_array_equal(loaded.w_xh, model.w_xh)
            np.testing.assert_array_equal(loaded.w_hz, model.w_hz)
            assert loaded.params_h == model.params_h
            assert loaded.model_kind == model.model_kind
            assert loaded.grid == model.grid
            assert loaded.delay_one_bin == model.delay_one_bin


class TestInitModel:
    def test_deterministic_and_bounded(self):
        rng1 = derive_rng(SeedSpec(3, 1))
        rng2 = derive_rng(SeedSpec(3, 1))
        p = LifParams()
        m1 = init_model(16, "lif", GRID, rng1, p, p)
        m2 = init_model(16, "lif", GRID, rng2, p, p)
        np.testing.assert_array_equal(m1.w_xh, m2.w_xh)
        assert (m1.w_xh >= 0).all()

    def test_w_max_cap(self):
        rng = derive_rng(SeedSpec(3, 1))
        p = LifParams()
        m = init_model(8, "lif", GRID, rng, p, p, w_max=0.5)
        assert m.w_xh.max() <= 0.5
        assert m.w_hz.max() <= 0.5
