"""The four parameterized audio effects and their sweep grids.

All effects are pure, deterministic, length- and sample-rate-preserving.
Gain and reverb apply no output clipping, so the maps stay linear.

Grid conventions (raw parameter ranges follow the effect definitions;
step counts and spacing are fixed here):

* gain: `steps` values linearly spaced over [-40, +5] dB, with 0 dB
  inserted if absent and flagged as the neutral parameter;
* lowpass: `steps` Chebyshev-II cutoffs log-spaced over [1600, 18333] Hz;
* reverb: `steps` room sizes linearly spaced over [0.01, 1.00];
* bitcrush: integer bit depths 4..15.

Strength ranks increase with deviation from the clean signal along each
sweep's single physical direction: decreasing gain, decreasing cutoff,
increasing room size, decreasing bit depth.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .audio import AudioClip
from .errors import InvalidParameterError


class Effect(str, enum.Enum):
    GAIN = "gain"
    LOWPASS = "lowpass"
    REVERB = "reverb"
    BITCRUSH = "bitcrush"


GAIN_RANGE_DB = (-40.0, 5.0)
LOWPASS_RANGE_HZ = (1600.0, 18333.0)
REVERB_RANGE = (0.01, 1.0)
BITCRUSH_DEPTHS = tuple(range(4, 16))

CHEBY_ORDER = 8
CHEBY_STOP_ATTEN_DB = 60.0

# Freeverb tunings at 44.1 kHz (Jezar's canonical constants). Delay line
# lengths scale with sample_rate/44100.
_COMB_DELAYS_44100 = (1116, 1188, 1277, 1356, 1422, 1491, 1557, 1617)
_ALLPASS_DELAYS_44100 = (556, 441, 341, 225)
_ALLPASS_FEEDBACK = 0.5
_REVERB_DAMPING = 0.5
_REVERB_DRY = 0.4
_REVERB_WET = 0.33


@dataclass
class EffectSweep:
    """An effect with its ordered parameter grid and strength ranks."""

    effect: Effect
    params: list[float]
    ranks: list[float]
    neutral_index: int | None = None

    def __post_init__(self):
        self.effect = Effect(self.effect)
        if len(self.params) != len(self.ranks) or len(self.params) < 2:
            raise InvalidParameterError("params and ranks must align, length >= 2")
        diffs = np.diff(self.params)
        if not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise InvalidParameterError("params must be strictly monotone")

    def __len__(self) -> int:
        return len(self.params)

    def non_neutral_indices(self) -> list[int]:
        return [i for i in range(len(self.params)) if i != self.neutral_index]


def apply_gain(clip: AudioClip, gain_db: float) -> AudioClip:
    """Scale every sample by 10^(gain_db/20). No clipping is applied."""
    if not math.isfinite(gain_db):
        raise InvalidParameterError("gain_db must be finite")
    return clip.with_samples(clip.samples * 10.0 ** (gain_db / 20.0))


def design_cheby2_lowpass(
    cutoff_hz: float,
    sample_rate: int,
    order: int = CHEBY_ORDER,
    stop_atten_db: float = CHEBY_STOP_ATTEN_DB,
) -> np.ndarray:
    """Chebyshev type-II low-pass as second-order sections.

    The stopband starts at cutoff_hz with attenuation stop_atten_db at the
    (pre-warped) edge. Returns an (n_sections, 6) SOS array.
    """
    if not (0 < cutoff_hz < sample_rate / 2):
        raise InvalidParameterError(
            f"cutoff {cutoff_hz} Hz must lie in (0, Nyquist={sample_rate / 2})"
        )
    if order < 2 or order % 2 != 0:
        raise InvalidParameterError("order must be even and >= 2")
    if stop_atten_db <= 0:
        raise InvalidParameterError("stop_atten_db must be positive")
    return signal.cheby2(order, stop_atten_db, cutoff_hz, btype="low",
                         fs=sample_rate, output="sos")


def apply_filter(sections: np.ndarray, clip: AudioClip) -> AudioClip:
    """Run a cascade of biquads (direct form II transposed, zero initial
    state) over the clip. Output length equals input length."""
    sections = np.asarray(sections, dtype=float)
    if sections.ndim != 2 or sections.shape[1] != 6:
        raise InvalidParameterError("sections must be an (n, 6) SOS array")
    return clip.with_samples(signal.sosfilt(sections, clip.samples))


def apply_lowpass(clip: AudioClip, cutoff_hz: float) -> AudioClip:
    """Chebyshev-II low-pass at the given cutoff.

    A cutoff at or above Nyquist leaves the signal unchanged: there is
    nothing above Nyquist to remove, and the sweep's high end can exceed
    Nyquist at low sample rates.
    """
    if not math.isfinite(cutoff_hz) or cutoff_hz <= 0:
        raise InvalidParameterError("cutoff_hz must be positive and finite")
    if cutoff_hz >= clip.sample_rate / 2:
        return clip.with_samples(clip.samples.copy())
    return apply_filter(design_cheby2_lowpass(cutoff_hz, clip.sample_rate), clip)


def _feedback_delay(x: np.ndarray, delay: int, feedback: float) -> np.ndarray:
    """Solve b[n] = x[n] + feedback * b[n - delay] block-wise."""
    b = x.copy()
    for start in range(delay, b.size, delay):
        stop = min(start + delay, b.size)
        b[start:stop] += feedback * b[start - delay:stop - delay]
    return b


def _comb(x: np.ndarray, delay: int, feedback: float, damping: float) -> np.ndarray:
    """Freeverb lowpass-feedback comb filter.

    Per-sample form: y[n] = x[n - delay] + feedback * f[n - delay] with the
    damping state f[n] = (1 - damping) * y[n] + damping * f[n - 1].
    Evaluated block-by-block (block length = delay) so each block's feedback
    terms are fully known, with an IIR smoother for the damping state.
    """
    n = x.size
    y = np.zeros(n)
    fstate = np.zeros(n)  # damping state aligned with y
    zi = np.zeros(1)
    b_iir = [1.0 - damping]
    a_iir = [1.0, -damping]
    for start in range(0, n, delay):
        stop = min(start + delay, n)
        if start >= delay:  # first block reads the zeroed delay line
            src = slice(start - delay, stop - delay)
            y[start:stop] = x[src] + feedback * fstate[src]
        fstate[start:stop], zi = signal.lfilter(b_iir, a_iir, y[start:stop], zi=zi)
    return y


def _allpass(x: np.ndarray, delay: int, feedback: float) -> np.ndarray:
    """Freeverb all-pass: y[n] = -x[n] + b[n - delay] with the delay line
    b[n] = x[n] + feedback * b[n - delay]."""
    b = _feedback_delay(x, delay, feedback)
    y = -x.copy()
    y[delay:] += b[:-delay]
    return y


def apply_reverb(clip: AudioClip, room_size: float) -> AudioClip:
    """Freeverb-topology reverberation: 8 parallel combs into 4 series
    all-passes, mixed as dry*input + wet*tail. The comb feedback is
    0.28*room_size + 0.7; the tail beyond the input length is truncated.
    """
    if not (0.0 <= room_size <= 1.0):
        raise InvalidParameterError("room_size must lie in [0, 1]")
    scale = clip.sample_rate / 44100.0
    comb_feedback = 0.28 * room_size + 0.7
    x = clip.samples
    wet = np.zeros_like(x)
    for d44 in _COMB_DELAYS_44100:
        wet += _comb(x, max(1, int(d44 * scale)), comb_feedback, _REVERB_DAMPING)
    for d44 in _ALLPASS_DELAYS_44100:
        wet = _allpass(wet, max(1, int(d44 * scale)), _ALLPASS_FEEDBACK)
    return clip.with_samples(_REVERB_DRY * x + _REVERB_WET * wet)


def apply_bitcrush(clip: AudioClip, bit_depth: int) -> AudioClip:
    """Quantize samples to the given bit depth.

    Each sample becomes clamp(round(x * 2^(b-1)) / 2^(b-1), -1, 1 - 2^-(b-1))
    with round-half-away-from-zero.
    """
    b = int(bit_depth)
    if b != bit_depth or not (1 <= b <= 32):
        raise InvalidParameterError("bit_depth must be an integer in [1, 32]")
    scale = float(2 ** (b - 1))
    x = clip.samples
    q = np.copysign(np.floor(np.abs(x) * scale + 0.5), x) / scale
    return clip.with_samples(np.clip(q, -1.0, 1.0 - 1.0 / scale))


def build_parameter_grid(effect: Effect | str, steps: int = 16) -> EffectSweep:
    """Default sweep grid for an effect (see module docstring). For
    bitcrush the step count is ignored; the integer depths 4..15 are used."""
    effect = Effect(effect)
    if effect is not Effect.BITCRUSH and steps < 2:
        raise InvalidParameterError("steps must be >= 2")
    neutral = None
    if effect is Effect.GAIN:
        params = list(np.linspace(*GAIN_RANGE_DB, steps))
        if 0.0 not in params:
            params = sorted(params + [0.0])
        neutral = params.index(0.0)
        n = len(params)
        ranks = [float(n - i) for i in range(n)]  # -40 dB strongest
    elif effect is Effect.LOWPASS:
        params = list(np.geomspace(*LOWPASS_RANGE_HZ, steps))
        ranks = [float(steps - i) for i in range(steps)]  # low cutoff strongest
    elif effect is Effect.REVERB:
        params = list(np.linspace(*REVERB_RANGE, steps))
        ranks = [float(i + 1) for i in range(steps)]  # large room strongest
    else:
        params = [float(b) for b in BITCRUSH_DEPTHS]
        ranks = [float(len(params) - i) for i in range(len(params))]  # few bits strongest
    return EffectSweep(effect=effect, params=params, ranks=ranks, neutral_index=neutral)


def apply_effect(effect: Effect | str, param: float, clip: AudioClip) -> AudioClip:
    """Dispatch to the matching effect. Deterministic; errors propagate
    from the underlying operation."""
    effect = Effect(effect)
    if effect is Effect.GAIN:
        return apply_gain(clip, param)
    if effect is Effect.LOWPASS:
        return apply_lowpass(clip, param)
    if effect is Effect.REVERB:
        return apply_reverb(clip, param)
    return apply_bitcrush(clip, param)
