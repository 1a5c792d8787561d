import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from paprlab import _backend, peak_cancel
from paprlab.ofdm import oversampled_ifft, random_symbol, rms
from paprlab.peak_cancel import (
    OpCounter,
    SpcState,
    complexity_alg1,
    complexity_alg2,
    cpc,
    make_window,
    scale_factor,
    spc_algorithm1,
    spc_algorithm2,
    spc_step,
    window_support,
)

BACKENDS = ["python"] + (["cython"] if _backend.compiled is not None else [])


def small_symbol(seed, n_data=64, oversample=4):
    return oversampled_ifft(random_symbol(np.random.default_rng(seed), n_data, oversample)[0])


def threshold(sig, a_db):
    return rms(sig) * 10 ** (a_db / 20)


class TestWindow:
    def test_taps_are_sinc_with_zeros_every_j(self):
        win = make_window(16, 16, oversample=4)
        assert_array_equal(win.offsets, np.arange(-7, 9))
        assert win.at(0) == 1.0
        assert win.at(1) == pytest.approx(math.sin(math.pi / 4) / (math.pi / 4), rel=1e-15)
        assert win.at(-6) == pytest.approx(-2 / (3 * math.pi), rel=1e-14)
        for k in (-4, 4, 8):
            assert abs(win.at(k)) < 1e-16

    def test_symmetric_about_zero(self):
        win = make_window(64, 32, 4)
        for k in range(1, 16):
            assert win.at(k) == win.at(-k)

    @pytest.mark.parametrize("n_s", [0, 3, 130])
    def test_bad_length_rejected(self, n_s):
        with pytest.raises(ValueError):
            make_window(32, n_s, 4)

    def test_support_wraps(self):
        assert_array_equal(window_support(1, 4, 8), [0, 1, 2, 3])
        assert_array_equal(window_support(0, 4, 8), [7, 0, 1, 2])
        assert_array_equal(window_support(7, 4, 8), [6, 7, 0, 1])


class TestScaleFactor:
    def test_real_peak(self):
        assert scale_factor(4.0, 2.0) == pytest.approx(-2.0)

    def test_complex_peak_keeps_phase(self):
        v = 3 + 4j
        alpha = scale_factor(v, 2.5)
        assert alpha == pytest.approx(-1.5 - 2j)
        assert v + alpha == pytest.approx(1.5 + 2j)

    def test_sample_below_threshold_rejected(self):
        with pytest.raises(ValueError, match="does not exceed"):
            scale_factor(1 + 1j, 2.0)


class TestSpcStep:
    def test_two_peak_trace(self):
        # two peaks on L=32 (N=8, J=4); each step computed by hand from the updated signal
        win = make_window(8, 8, 4)
        s = np.zeros(32, complex)
        s[5], s[8] = 3.0, 2.5
        state = SpcState(s, 2.0)
        spc_step(state, 5, win)
        after_first = s.copy()
        after_first[window_support(5, 8, 32)] += -1.0 * win.taps
        assert_allclose(state.signal, after_first, atol=1e-15)
        v8 = 2.5 - win.at(3)
        assert state.signal[8] == pytest.approx(v8)
        spc_step(state, 8, win)
        assert abs(state.signal[8]) == pytest.approx(2.0, abs=1e-12)
        assert state.iteration == 2

    def test_refuses_sample_at_threshold(self):
        state = SpcState(np.array([2.0, 0, 0, 0, 0, 0, 0, 0]), 2.0)
        with pytest.raises(ValueError, match="not above"):
            spc_step(state, 0, make_window(2, 4, 4))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.sampled_from([8, 16, 64, 128]), st.floats(0.0, 6.0))
    def test_peak_is_limited_exactly_and_only_support_changes(self, seed, n_s, a_db):
        s0 = small_symbol(seed % 10_000, n_data=64)
        a = threshold(s0, a_db)
        over = np.flatnonzero(np.abs(s0) > a * (1 + 1e-9))
        if over.size == 0:
            return
        m = int(np.random.default_rng(seed).choice(over))
        state = SpcState(s0, a)
        spc_step(state, m, make_window(64, n_s, 4))
        assert abs(abs(state.signal[m]) - a) <= 1e-12
        outside = np.ones(s0.size, bool)
        outside[window_support(m, n_s, s0.size)] = False
        assert_array_equal(state.signal[outside], s0[outside])


def three_peaks():
    """Peaks at 10, 16 and 22 (L=64, N=16, J=4, N_s=16, A=2).

    The window for the peak at 16 reaches 10 and 22 with g(-6) = g(6) =
    sinc(1.5) = -2/(3 pi), so in the parallel scheme each outer sample ends at
    2.2 - 0.2 + 2 * 2/(3 pi) = 2.4244, back above A.
    """
    s = np.zeros(64, complex)
    s[10], s[16], s[22] = 2.2, 4.0, 2.2
    return s, 2.0, make_window(16, 16, 4)


@pytest.mark.parametrize("backend", BACKENDS)
class TestCancellation:
    def test_cpc_regrows_outer_peaks(self, backend):
        s, a, win = three_peaks()
        out, rep = cpc(s, a, win, backend=backend)
        expected = 2.0 + 4 / (3 * math.pi)
        assert out[10].real == pytest.approx(expected, rel=1e-12)
        assert out[22].real == pytest.approx(expected, rel=1e-12)
        assert np.max(np.abs(out)) > a
        assert rep.peaks_cancelled == 3

    def test_algorithm1_limits_every_peak(self, backend):
        s, a, win = three_peaks()
        out, rep = spc_algorithm1(s, a, win, i_max=100, backend=backend)
        assert np.max(np.abs(out)) <= a * (1 + 1e-12)
        assert rep.iterations_used < 100

    def test_single_peak_all_schemes_agree(self, backend):
        s = np.full(64, 0.3 + 0.1j)
        s[20] = 3 - 1j
        win = make_window(16, 16, 4)
        a = 1.5
        ref, _ = cpc(s, a, win, backend=backend)
        one, _ = spc_algorithm1(s, a, win, i_max=10, backend=backend)
        two, _ = spc_algorithm2(s, a, win, 5, backend=backend)
        assert_allclose(one, ref, atol=1e-15)
        assert_allclose(two, ref, atol=1e-15)
        assert abs(ref[20]) == pytest.approx(a, abs=1e-12)

    def test_i_max_caps_iterations(self, backend):
        s, a, win = three_peaks()
        out, rep = spc_algorithm1(s, a, win, i_max=1, backend=backend)
        assert rep.iterations_used == 1
        assert abs(out[16]) == pytest.approx(a, abs=1e-12)

    def test_algorithm2_is_seed_reproducible(self, backend):
        s0 = small_symbol(3)
        a = threshold(s0, 3.0)
        win = make_window(64, 64, 4)
        x, rx = spc_algorithm2(s0, a, win, 17, backend=backend)
        y, ry = spc_algorithm2(s0, a, win, 17, backend=backend)
        z, _ = spc_algorithm2(s0, a, win, 18, backend=backend)
        assert_array_equal(x, y)
        assert rx.counter == ry.counter
        assert not np.array_equal(x, z)

    def test_input_is_not_modified(self, backend):
        s0 = small_symbol(8)
        keep = s0.copy()
        win = make_window(64, 64, 4)
        a = threshold(s0, 3.0)
        cpc(s0, a, win, backend=backend)
        spc_algorithm1(s0, a, win, 50, backend=backend)
        spc_algorithm2(s0, a, win, 1, backend=backend)
        assert_array_equal(s0, keep)

    def test_nothing_above_threshold_is_a_no_op(self, backend):
        s0 = small_symbol(2)
        a = 1.01 * np.max(np.abs(s0))
        win = make_window(64, 64, 4)
        for out, rep in (
            cpc(s0, a, win, backend=backend),
            spc_algorithm1(s0, a, win, 10, backend=backend),
            spc_algorithm2(s0, a, win, 0, backend=backend),
        ):
            assert_array_equal(out, s0)
            assert rep.iterations_used == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(2.0, 7.0), st.sampled_from([16, 64, 256]))
def test_algorithm1_stopping_on_threshold_leaves_no_peak(seed, a_db, n_s):
    s0 = small_symbol(seed)
    a = threshold(s0, a_db)
    out, rep = spc_algorithm1(s0, a, make_window(64, n_s, 4), 10_000)
    assert rep.iterations_used < 10_000
    assert np.max(np.abs(out)) <= a * (1 + 1e-12)


@pytest.mark.skipif(_backend.compiled is None, reason="compiled kernels not built")
@pytest.mark.parametrize("seed", range(6))
def test_backends_agree_bit_for_bit(seed):
    s0 = small_symbol(seed, n_data=128)
    a = threshold(s0, 2.0 + seed / 2)
    win = make_window(128, 64, 4)
    pairs = [
        (cpc(s0, a, win, backend="python"), cpc(s0, a, win, backend="cython")),
        (spc_algorithm1(s0, a, win, 200, backend="python"), spc_algorithm1(s0, a, win, 200, backend="cython")),
        (spc_algorithm2(s0, a, win, seed, backend="python"), spc_algorithm2(s0, a, win, seed, backend="cython")),
    ]
    for (x, rx), (y, ry) in pairs:
        assert_array_equal(x, y)
        assert rx.counter == ry.counter and rx.raw == ry.raw


def test_unknown_backend_rejected():
    s, a, win = three_peaks()
    with pytest.raises(ValueError, match="unknown backend"):
        cpc(s, a, win, backend="fortran")


class TestCounters:
    def test_transform_cost(self):
        c = peak_cancel.transform_cost(4096)
        # (L/2) log2 L complex mults, L log2 L complex adds
        assert c == OpCounter(4 * 2048 * 12, 2 * 2048 * 12 + 2 * 4096 * 12, 0)

    def test_cancellation_cost(self):
        assert peak_cancel.cancellation_cost(16) == OpCounter(2 * 9 + 2 + 1, 1 + 2 * 16, 0)

    def test_counter_arithmetic(self):
        a = OpCounter(1, 2, 3)
        b = a + 2 * a
        b += a
        assert b.as_tuple() == (4, 8, 12)

    @pytest.mark.parametrize("seed", range(10))
    def test_algorithm1_matches_closed_form(self, seed):
        s0 = small_symbol(seed)
        a = threshold(s0, 2.0)
        win = make_window(64, 32, 4)
        _, rep = spc_algorithm1(s0, a, win, 500)
        assert rep.iterations_used >= 1
        assert rep.counter == complexity_alg1(256, 32, rep.iterations_used)
        # the executed count adds exactly the closing search and its refresh
        assert rep.raw.real_comps - rep.counter.real_comps == 256

    def test_algorithm1_at_cap_has_no_terminal_search(self):
        s0 = small_symbol(4)
        a = threshold(s0, 0.0)
        _, rep = spc_algorithm1(s0, a, make_window(64, 32, 4), 3)
        assert rep.iterations_used == 3
        assert rep.raw == rep.counter == complexity_alg1(256, 32, 3)

    @pytest.mark.parametrize("seed", range(10))
    def test_algorithm2_matches_closed_form(self, seed):
        s0 = small_symbol(seed)
        a = threshold(s0, 2.0)
        _, rep = spc_algorithm2(s0, a, make_window(64, 32, 4), seed)
        assert rep.counter == complexity_alg2(256, 32, rep.peaks_cancelled)

    def test_closed_forms_by_hand(self):
        # JN=16, N_s=4, one iteration / one peak
        assert complexity_alg1(16, 4, 1) == OpCounter(2 * 64 + 48 + 25, 3 * 64 + 24 + 17, 16)
        assert complexity_alg2(16, 4, 1) == OpCounter(2 * 64 + 64 + 9, 3 * 64 + 32 + 9, 16)


class TestPeakCountModel:
    def test_closed_form_at_6db(self):
        sigma = 1.0
        a = 10 ** (6 / 20)
        assert peak_cancel.expected_peak_count(4096, a, sigma) == pytest.approx(4096 * math.exp(-(10**0.6)))
        assert peak_cancel.expected_peak_count(4096, a, sigma) == pytest.approx(76.45, abs=0.01)

    def test_scale_invariant(self):
        assert peak_cancel.expected_peak_count(100, 3.0, 2.0) == pytest.approx(100 * math.exp(-2.25))

    def test_default_i_max_positive(self):
        s = np.ones(16, complex)
        assert peak_cancel.default_i_max(s, 10.0) == 1
