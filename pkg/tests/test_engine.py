"""Variable delay line: schedules, gains, streaming, oracle equivalence."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dafjam import (
    AudioBuffer,
    Engine,
    GainOutOfRange,
    GainStage,
    InvalidConfig,
    JamParams,
    ModulationSpec,
    SampleRateMismatch,
    ValidationError,
    Waveform,
    create_engine,
    delay_at,
    gain_to_linear,
)

from _reference import reference_delay_at, reference_process

# Power-of-two rate makes delays like 100/sr exactly representable.
SR = 32768


def unmuted(spec, **kwargs):
    return JamParams(modulation=spec, gains=GainStage(muted=False), **kwargs)


def run_blocks(engine, samples, block_size):
    sr = engine.sample_rate_hz
    pieces = [
        engine.process_block(AudioBuffer(sr, samples[i : i + block_size])).samples
        for i in range(0, len(samples), block_size)
    ]
    return np.concatenate(pieces)


class TestGainToLinear:
    def test_identity(self):
        assert gain_to_linear(0.0) == 1.0

    def test_half_and_double(self):
        assert gain_to_linear(-6.0206) == pytest.approx(0.5, abs=1e-6)
        assert gain_to_linear(6.0206) == pytest.approx(2.0, abs=1e-6)

    @pytest.mark.parametrize("db", [-60.1, 24.1, 1e9])
    def test_out_of_range(self, db):
        with pytest.raises(GainOutOfRange):
            gain_to_linear(db)

    def test_endpoints_allowed(self):
        assert gain_to_linear(-60.0) == pytest.approx(1e-3)
        assert gain_to_linear(24.0) == pytest.approx(15.8489, rel=1e-4)


class TestDelayAt:
    def test_sinusoid_at_zero(self):
        assert delay_at(ModulationSpec.sinusoid(0.15, 0.05, 1.0), 0.0) == pytest.approx(0.15)

    def test_sinusoid_quarter_period(self):
        assert delay_at(ModulationSpec.sinusoid(0.15, 0.05, 1.0), 0.25) == pytest.approx(0.20)

    def test_fixed_constant(self):
        spec = ModulationSpec.fixed(0.1)
        for t in (0.0, 0.3, 7.77):
            assert delay_at(spec, t) == 0.1

    def test_triangle_shape(self):
        spec = ModulationSpec.triangle(0.15, 0.05, 1.0)
        assert delay_at(spec, 0.0) == pytest.approx(0.15)
        assert delay_at(spec, 0.125) == pytest.approx(0.175)
        assert delay_at(spec, 0.25) == pytest.approx(0.20)
        assert delay_at(spec, 0.5) == pytest.approx(0.15)
        assert delay_at(spec, 0.75) == pytest.approx(0.10)

    def test_square_shape(self):
        spec = ModulationSpec.square(0.15, 0.05, 2.0)
        assert delay_at(spec, 0.1) == pytest.approx(0.20)
        assert delay_at(spec, 0.3) == pytest.approx(0.10)
        assert delay_at(spec, 0.5) == pytest.approx(0.20)

    def test_array_matches_scalars(self):
        spec = ModulationSpec.triangle(0.1, 0.03, 3.3)
        t = np.linspace(0.0, 2.0, 257)
        vec = delay_at(spec, t)
        assert vec.shape == t.shape
        for i in (0, 17, 256):
            assert vec[i] == delay_at(spec, float(t[i]))

    def test_negative_time_rejected(self):
        with pytest.raises(ValidationError):
            delay_at(ModulationSpec.fixed(0.1), -0.001)

    @given(
        base=st.floats(0.0, 1.0),
        amp_frac=st.floats(0.0, 1.0),
        freq=st.floats(0.01, 50.0),
        kind=st.sampled_from([Waveform.SINUSOID, Waveform.TRIANGLE, Waveform.SQUARE]),
        t=st.floats(0.0, 100.0),
    )
    def test_never_negative_and_bounded(self, base, amp_frac, freq, kind, t):
        amp = base * amp_frac
        spec = ModulationSpec(kind, base, amp, freq)
        value = delay_at(spec, t)
        assert base - amp - 1e-12 <= value <= base + amp + 1e-12


class TestModulationSpecValidation:
    def test_amplitude_beyond_base(self):
        with pytest.raises(ValidationError):
            ModulationSpec.sinusoid(0.1, 0.2, 1.0)

    def test_fixed_with_amplitude(self):
        with pytest.raises(ValidationError):
            ModulationSpec(Waveform.FIXED, 0.1, 0.01)

    def test_periodic_needs_positive_frequency(self):
        with pytest.raises(ValidationError):
            ModulationSpec.sinusoid(0.1, 0.05, 0.0)

    def test_negative_base(self):
        with pytest.raises(ValidationError):
            ModulationSpec.fixed(-0.1)

    def test_amplitude_equal_to_base_allowed(self):
        spec = ModulationSpec.sinusoid(0.1, 0.1, 1.0)
        assert spec.peak_delay_s == pytest.approx(0.2)


class TestEngineConstruction:
    def test_default_capacity(self):
        engine = create_engine(48000, 2.0)
        assert engine.delay_capacity_samples >= 96002
        assert engine.params.gains.muted is True
        assert engine.params.modulation == ModulationSpec.fixed(0.1)

    def test_small_engine(self):
        engine = create_engine(8000, 0.2)
        engine.set_params(unmuted(ModulationSpec.fixed(0.2)))

    def test_capacity_bound(self):
        with pytest.raises(InvalidConfig):
            create_engine(48000, 3.0)

    @pytest.mark.parametrize("sr", [0, 7999, 192001, -1])
    def test_sample_rate_bounds(self, sr):
        with pytest.raises(InvalidConfig):
            create_engine(sr)

    def test_modulation_exceeding_capacity(self):
        engine = create_engine(48000, 2.0)
        with pytest.raises(InvalidConfig):
            engine.set_params(unmuted(ModulationSpec.sinusoid(1.9, 0.2, 1.0)))

    def test_sample_rate_mismatch(self):
        engine = create_engine(48000)
        with pytest.raises(SampleRateMismatch):
            engine.process_block(AudioBuffer(44100, np.zeros(16)))


class TestPureDelays:
    def test_integer_delay_impulse(self):
        engine = create_engine(SR)
        engine.set_params(unmuted(ModulationSpec.fixed(100 / SR)))
        x = np.zeros(256)
        x[0] = 1.0
        y = engine.process_block(AudioBuffer(SR, x)).samples
        assert y[100] == 1.0
        assert np.count_nonzero(y) == 1

    def test_fractional_delay_impulse(self):
        engine = create_engine(SR)
        engine.set_params(unmuted(ModulationSpec.fixed(100.5 / SR)))
        x = np.zeros(256)
        x[0] = 1.0
        y = engine.process_block(AudioBuffer(SR, x)).samples
        assert y[100] == 0.5
        assert y[101] == 0.5
        assert np.count_nonzero(y) == 2

    def test_no_slew_at_stream_start(self):
        # The first configuration applies from sample 0; an impulse lands
        # at exactly the configured delay with no ramp artifacts.
        engine = create_engine(SR)
        engine.set_params(unmuted(ModulationSpec.fixed(500 / SR)))
        x = np.zeros(1024)
        x[0] = 1.0
        y = engine.process_block(AudioBuffer(SR, x)).samples
        assert np.array_equal(np.nonzero(y)[0], [500])

    def test_silence_propagates(self):
        engine = create_engine(48000)
        engine.set_params(unmuted(ModulationSpec.sinusoid(0.01, 0.005, 3.0)))
        y = engine.process_block(AudioBuffer(48000, np.zeros(4096))).samples
        assert np.all(y == 0.0)

    def test_gain_staging(self, rng):
        x = rng.uniform(-0.5, 0.5, 2000)
        engine = create_engine(SR)
        engine.set_params(
            JamParams(
                modulation=ModulationSpec.fixed(64 / SR),
                gains=GainStage(input_gain_db=-6.0206, output_gain_db=-6.0206, muted=False),
            )
        )
        y = engine.process_block(AudioBuffer(SR, x)).samples
        expected = gain_to_linear(-6.0206) ** 2 * np.concatenate([np.zeros(64), x[:-64]])
        np.testing.assert_allclose(y, expected, atol=1e-12)

    def test_linearity(self, rng):
        x = rng.uniform(-1.0, 1.0, 3000)
        outs = []
        for scale in (1.0, 0.25):
            engine = create_engine(SR)
            engine.set_params(unmuted(ModulationSpec.sinusoid(0.01, 0.002, 5.0)))
            outs.append(engine.process_block(AudioBuffer(SR, scale * x)).samples)
        np.testing.assert_allclose(outs[1], 0.25 * outs[0], atol=1e-9)


class TestMute:
    def test_muted_output_is_exact_zero(self, rng):
        engine = create_engine(SR)
        engine.set_params(
            JamParams(modulation=ModulationSpec.fixed(0.01), gains=GainStage(muted=True))
        )
        y = engine.process_block(AudioBuffer(SR, rng.uniform(-1, 1, 5000))).samples
        assert np.all(y == 0.0)

    def test_mute_still_advances_delay_memory(self):
        engine = create_engine(SR)
        engine.set_params(
            JamParams(modulation=ModulationSpec.fixed(100 / SR), gains=GainStage(muted=True))
        )
        x = np.zeros(64)
        x[5] = 1.0
        assert np.all(engine.process_block(AudioBuffer(SR, x)).samples == 0.0)
        # Un-mute without touching the delay: the impulse written while
        # muted emerges at its scheduled absolute position (5 + 100).
        engine.set_params(
            JamParams(modulation=ModulationSpec.fixed(100 / SR), gains=GainStage(muted=False))
        )
        y = engine.process_block(AudioBuffer(SR, np.zeros(128))).samples
        assert y[105 - 64] == 1.0
        assert np.count_nonzero(y) == 1


class TestStreaming:
    def test_blocks_concatenate(self, rng):
        x = rng.uniform(-1, 1, 10000)
        whole = create_engine(SR)
        whole.set_params(unmuted(ModulationSpec.sinusoid(0.02, 0.01, 2.0)))
        expected = whole.process_block(AudioBuffer(SR, x)).samples
        split = create_engine(SR)
        split.set_params(unmuted(ModulationSpec.sinusoid(0.02, 0.01, 2.0)))
        got = run_blocks(split, x, 313)
        assert np.array_equal(expected, got)

    @pytest.mark.parametrize("block", [1, 64, 480, 4096])
    def test_block_size_independence_bitwise(self, rng, block):
        x = rng.uniform(-1, 1, 20000)
        reference = create_engine(48000)
        reference.set_params(unmuted(ModulationSpec.triangle(0.05, 0.02, 3.0)))
        expected = reference.process_block(AudioBuffer(48000, x)).samples
        engine = create_engine(48000)
        engine.set_params(unmuted(ModulationSpec.triangle(0.05, 0.02, 3.0)))
        assert np.array_equal(run_blocks(engine, x, block), expected)

    def test_processed_samples_counter(self):
        engine = create_engine(SR)
        engine.process_block(AudioBuffer(SR, np.zeros(100)))
        engine.process_block(AudioBuffer(SR, np.zeros(50)))
        assert engine.processed_samples == 150


class TestSlew:
    def test_fixed_change_ramps_over_10ms(self):
        sr = 48000
        engine = create_engine(sr)
        engine.set_params(unmuted(ModulationSpec.fixed(0.1)))
        engine.process_block(AudioBuffer(sr, np.zeros(1000)))
        engine.set_params(unmuted(ModulationSpec.fixed(0.2)))
        ramp_len = round(0.010 * sr)
        # Halfway through the ramp the effective delay is the midpoint.
        engine.process_block(AudioBuffer(sr, np.zeros(ramp_len // 2)))
        assert engine.instantaneous_delay_s() == pytest.approx(0.15, abs=1e-6)
        engine.process_block(AudioBuffer(sr, np.zeros(ramp_len)))
        assert engine.instantaneous_delay_s() == 0.2

    def test_same_target_does_not_slew(self):
        engine = create_engine(48000)
        engine.set_params(unmuted(ModulationSpec.fixed(0.1)))
        engine.process_block(AudioBuffer(48000, np.zeros(100)))
        engine.set_params(unmuted(ModulationSpec.fixed(0.1)))
        assert engine.instantaneous_delay_s() == 0.1

    def test_slew_is_block_size_independent(self, rng):
        sr = 48000
        x = rng.uniform(-1, 1, 9600)
        outputs = []
        for block in (160, 480):
            engine = create_engine(sr)
            engine.set_params(unmuted(ModulationSpec.fixed(0.05)))
            out = [run_blocks(engine, x[:4800], block)]
            engine.set_params(unmuted(ModulationSpec.fixed(0.08)))
            out.append(run_blocks(engine, x[4800:], block))
            outputs.append(np.concatenate(out))
        assert np.array_equal(outputs[0], outputs[1])

    def test_modulated_schedule_not_slewed(self):
        engine = create_engine(48000)
        engine.set_params(unmuted(ModulationSpec.fixed(0.05)))
        engine.process_block(AudioBuffer(48000, np.zeros(1000)))
        engine.set_params(unmuted(ModulationSpec.sinusoid(0.15, 0.05, 1.0)))
        # Periodic schedules take effect immediately from their epoch.
        expected = delay_at(ModulationSpec.sinusoid(0.15, 0.05, 1.0), 1000 / 48000)
        assert engine.instantaneous_delay_s() == pytest.approx(expected, abs=1e-12)


class TestEpoch:
    def test_epoch_shifts_schedule_origin(self):
        sr = 48000
        spec = ModulationSpec.sinusoid(0.15, 0.05, 1.0)
        engine = create_engine(sr)
        engine.set_params(unmuted(spec, epoch_s=0.5))
        engine.process_block(AudioBuffer(sr, np.zeros(sr // 2)))
        # At the epoch itself the schedule is at T = 0.
        assert engine.instantaneous_delay_s() == pytest.approx(0.15, abs=1e-9)

    def test_before_epoch_holds_t_zero_value(self):
        engine = create_engine(48000)
        engine.set_params(unmuted(ModulationSpec.sinusoid(0.15, 0.05, 1.0), epoch_s=2.0))
        assert engine.instantaneous_delay_s() == pytest.approx(0.15, abs=1e-12)

    def test_negative_epoch_rejected(self):
        with pytest.raises(ValidationError):
            JamParams(modulation=ModulationSpec.fixed(0.1), epoch_s=-1.0)


class TestOracleEquivalence:
    @pytest.mark.parametrize(
        "kind,base,amp,freq",
        [
            ("fixed", 0.013, 0.0, 0.0),
            ("sine", 0.015, 0.008, 2.5),
            ("triangle", 0.02, 0.01, 1.7),
            ("square", 0.02, 0.005, 3.0),
        ],
    )
    def test_against_per_sample_reference(self, rng, kind, base, amp, freq):
        sr = 8000
        x = rng.uniform(-1, 1, 2000)
        waveform = {"fixed": Waveform.FIXED, "sine": Waveform.SINUSOID,
                    "triangle": Waveform.TRIANGLE, "square": Waveform.SQUARE}[kind]
        engine = create_engine(sr)
        engine.set_params(unmuted(ModulationSpec(waveform, base, amp, freq)))
        got = engine.process_block(AudioBuffer(sr, x)).samples
        expected = reference_process(x.tolist(), sr, kind, base, amp, freq)
        np.testing.assert_allclose(got, expected, atol=1e-9, rtol=0)

    @settings(max_examples=25)
    @given(
        kind=st.sampled_from(["sine", "triangle", "square"]),
        base=st.floats(0.001, 0.05),
        amp_frac=st.floats(0.0, 1.0),
        freq=st.floats(0.1, 20.0),
        seed=st.integers(0, 2**32 - 1),
    )
    def test_property_reference_match(self, kind, base, amp_frac, freq, seed):
        sr = 8000
        amp = base * amp_frac
        x = np.random.default_rng(seed).uniform(-1, 1, 900)
        waveform = {"sine": Waveform.SINUSOID, "triangle": Waveform.TRIANGLE,
                    "square": Waveform.SQUARE}[kind]
        engine = create_engine(sr, 0.25)
        engine.set_params(unmuted(ModulationSpec(waveform, base, amp, freq)))
        got = engine.process_block(AudioBuffer(sr, x)).samples
        expected = reference_process(x.tolist(), sr, kind, base, amp, freq)
        np.testing.assert_allclose(got, expected, atol=1e-9, rtol=0)

    def test_delay_at_matches_reference(self):
        for kind, waveform in [
            ("sine", Waveform.SINUSOID),
            ("triangle", Waveform.TRIANGLE),
            ("square", Waveform.SQUARE),
        ]:
            spec = ModulationSpec(waveform, 0.1, 0.04, 2.3)
            for t in np.linspace(0, 3, 1001):
                assert delay_at(spec, float(t)) == pytest.approx(
                    reference_delay_at(kind, 0.1, 0.04, 2.3, float(t)), abs=1e-12
                )
