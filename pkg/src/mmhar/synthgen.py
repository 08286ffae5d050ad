"""Deterministic synthetic stand-in for the data glove and the dual-camera tactile link.

IMU streams are class-conditioned sinusoids over a per-sensor gravity and
magnetic baseline. Tactile frames render a uniform marker grid that a contact
blob displaces and brightens; blob radius, magnitude and temporal modulation
follow the action's area/pressure/frequency profile.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Sequence

import numpy as np

from mmhar.core import (
    FULL_WIDTH,
    PROFILES,
    ActionLabel,
    Area,
    Level,
)
from mmhar.pipeline.recording import AnnotationTrack, Interval, Recording
from mmhar.pipeline.transforms import ImuRanges


class Hand(str, Enum):
    RIGHT = "Right"
    LEFT = "Left"


@dataclass(frozen=True)
class GenParams:
    seed: int = 0
    imu_rate: float = 40.0
    camera_rate: float = 30.0
    image_size: int = 224
    marker_grid: tuple[int, int] = (12, 8)
    noise_std: float = 0.02
    clock_jitter_std: float = 0.002
    segment_duration: float = 60.0
    relaxation: bool = True
    relaxation_tau: float = 0.5
    bottom_attenuation: float = 0.7

    def __post_init__(self):
        if not self.imu_rate > self.camera_rate > 0:
            raise ValueError("need imu_rate > camera_rate > 0")
        rows, cols = self.marker_grid
        if rows < 1 or cols < 1:
            raise ValueError("marker grid must have at least one row and column")
        if self.image_size < 2 * self.marker_spacing:
            raise ValueError("image_size must be at least twice the marker spacing")
        if self.noise_std < 0 or self.clock_jitter_std < 0:
            raise ValueError("noise levels must be non-negative")
        if self.segment_duration <= 0 or self.relaxation_tau <= 0:
            raise ValueError("durations must be positive")

    @property
    def marker_spacing(self) -> float:
        return self.image_size / min(self.marker_grid)

    @classmethod
    def desk(cls, **overrides) -> "GenParams":
        return cls(**{"image_size": 56, **overrides})


# Spatial/temporal mappings of the action profile attributes.
CONTACT_RADIUS = {Area.SMALL: 0.08, Area.MEDIUM: 0.18, Area.LARGE: 0.35, Area.NONE: 0.0}
CONTACT_MAGNITUDE = {Level.LOW: 0.2, Level.MEDIUM: 0.5, Level.HIGH: 0.9, Level.NONE: 0.0}
OSCILLATION_BAND = {Level.LOW: (0.2, 0.8), Level.MEDIUM: (1.0, 3.0), Level.HIGH: (4.0, 8.0)}

# How the blob evolves in time for each action.
PRESS, INTERMITTENT, SLIDE_X, SLIDE_Y, CIRCULAR, VIBRATE, NO_CONTACT = range(7)
_MODES = {
    ActionLabel.PINCHING: INTERMITTENT,
    ActionLabel.PULLING: PRESS,
    ActionLabel.PUSHING: PRESS,
    ActionLabel.RUBBING: SLIDE_X,
    ActionLabel.PATTING: INTERMITTENT,
    ActionLabel.TAPPING: INTERMITTENT,
    ActionLabel.SCRATCHING: SLIDE_Y,
    ActionLabel.LINGERING: PRESS,
    ActionLabel.MASSAGING: CIRCULAR,
    ActionLabel.SQUEEZING: PRESS,
    ActionLabel.TREMBLING: VIBRATE,
    ActionLabel.SHAKING: VIBRATE,
    ActionLabel.STROKING: SLIDE_Y,
    ActionLabel.POKING: INTERMITTENT,
    ActionLabel.IDLE: NO_CONTACT,
}

# Fraction of full scale for motion amplitudes and baselines.
ACCEL_AMPLITUDE = 0.08
GYRO_AMPLITUDE = 0.10
MAG_COUPLING = 0.3
GRAVITY_G = 1.0
EARTH_FIELD_UT = 50.0
# Sensor involvement by contact area, indexed A..H.
_INVOLVEMENT = {
    Area.SMALL: np.array([1.0, 1.0, 1.0, 1.0, 0.7, 0.7, 0.3, 0.2]),
    Area.MEDIUM: np.array([1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.6, 0.4]),
    Area.LARGE: np.array([1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.8]),
    Area.NONE: np.zeros(8),
}
_SIGNATURE_SEED = 7321

# Rendering constants, intensities in [0, 1].
BACKGROUND = 0.12
MARKER = 0.62
SHADE = 0.35
MARKER_SHARPNESS = 3
PLATEAU = 0.7  # blob is flat out to this fraction of its radius
NOISE_CLIP = 2.0  # pixel noise is truncated at this many std devs
JITTER_CLIP = 0.2  # clock jitter is truncated at this fraction of a period


@dataclass(frozen=True)
class ClassSignal:
    label: ActionLabel
    mode: int
    radius: float
    magnitude: float
    frequency: float
    accel_amp: np.ndarray  # (8, 3), fraction of full scale
    gyro_amp: np.ndarray  # (8, 3)
    phase: np.ndarray  # (8, 6) accel then gyro


def _band_frequencies() -> dict[ActionLabel, float]:
    freqs = {}
    for level, (lo, hi) in OSCILLATION_BAND.items():
        members = [lab for lab in ActionLabel if PROFILES[lab].frequency is level]
        for k, lab in enumerate(members):
            freqs[lab] = lo + (k + 0.5) / len(members) * (hi - lo)
    return freqs


@lru_cache(maxsize=None)
def class_signal(label: ActionLabel) -> ClassSignal:
    """Fixed, seed-independent signal template of an action."""
    prof = PROFILES[label]
    rng = np.random.default_rng([_SIGNATURE_SEED, int(label)])
    template = rng.uniform(0.35, 1.0, size=(8, 6))
    weight = _INVOLVEMENT[prof.area][:, None]
    phase = rng.uniform(0.0, 2 * np.pi, size=(8, 6))
    freq = _band_frequencies().get(label, 0.0)
    return ClassSignal(
        label=label,
        mode=_MODES[label],
        radius=CONTACT_RADIUS[prof.area],
        magnitude=CONTACT_MAGNITUDE[prof.pressure],
        frequency=freq,
        accel_amp=ACCEL_AMPLITUDE * template[:, :3] * weight,
        gyro_amp=GYRO_AMPLITUDE * template[:, 3:] * weight,
        phase=phase,
    )


@lru_cache(maxsize=None)
def _sensor_baselines() -> tuple[np.ndarray, np.ndarray]:
    """Per-sensor gravity and magnetic field directions (unit vectors), (8, 3) each."""
    rng = np.random.default_rng([_SIGNATURE_SEED, 99])
    g = rng.normal(size=(8, 3)) + np.array([0.0, 0.0, -2.0])
    m = rng.normal(size=(8, 3)) + np.array([1.5, 0.0, 0.5])
    return g / np.linalg.norm(g, axis=1, keepdims=True), m / np.linalg.norm(m, axis=1, keepdims=True)


@dataclass(frozen=True)
class _Piece:
    start: float
    end: float
    label: ActionLabel
    key: tuple  # rng key for per-piece randomness
    decay_from: ActionLabel | None = None  # relaxation after this action


def _participant_perturbation(seed: int, participant: int):
    rng = np.random.default_rng([seed, 1_000_003, participant])
    phase = rng.uniform(-0.6, 0.6, size=(8, 6))
    scale = 1.0 + rng.uniform(-0.15, 0.15, size=(8, 1))
    fscale = 1.0 + rng.uniform(-0.04, 0.04)
    return phase, scale, fscale


def _piece_randoms(seed: int, key: tuple):
    rng = np.random.default_rng([seed, 2_000_003, *key])
    phase0 = rng.uniform(0, 2 * np.pi)
    center = rng.uniform(0.4, 0.6, size=2)
    return phase0, center


def _tactile_state(sig: ClassSignal, tau: np.ndarray, phase0: float, center: np.ndarray, fscale: float):
    """Blob centre (cx, cy) and magnitude at local times ``tau``."""
    n = tau.shape[0]
    cx = np.full(n, center[0])
    cy = np.full(n, center[1])
    if sig.mode == NO_CONTACT:
        return cx, cy, np.zeros(n)
    theta = 2 * np.pi * sig.frequency * fscale * tau + phase0
    m = np.full(n, sig.magnitude)
    if sig.mode == PRESS:
        m = sig.magnitude * (0.8 + 0.2 * np.sin(theta))
        if sig.label is ActionLabel.PULLING:
            cy = cy + 0.05 * np.sin(theta)
    elif sig.mode == INTERMITTENT:
        m = sig.magnitude * np.maximum(0.0, np.sin(theta))
    elif sig.mode == SLIDE_X:
        cx = cx + 0.12 * np.sin(theta)
    elif sig.mode == SLIDE_Y:
        cy = cy + 0.12 * np.sin(theta)
    elif sig.mode == CIRCULAR:
        cx = cx + 0.08 * np.cos(theta)
        cy = cy + 0.08 * np.sin(theta)
    elif sig.mode == VIBRATE:
        m = sig.magnitude * (0.7 + 0.3 * np.sin(theta))
        cx = cx + 0.02 * np.sin(theta)
        cy = cy + 0.02 * np.cos(theta)
    return cx, cy, m


def _imu_signal(sig: ClassSignal, tau: np.ndarray, phase0: float, perturb) -> np.ndarray:
    """Motion part of the normalised IMU signal, (n, 8, 9)."""
    p_phase, p_scale, fscale = perturb
    out = np.zeros((tau.shape[0], 8, 9))
    if sig.mode == NO_CONTACT:
        return out
    theta = 2 * np.pi * sig.frequency * fscale * tau[:, None, None] + phase0
    ph = sig.phase + p_phase
    acc = sig.accel_amp * p_scale * np.sin(theta + ph[None, :, :3])
    gyr = sig.gyro_amp * p_scale * np.sin(theta + ph[None, :, 3:])
    out[:, :, 0:3] = acc
    out[:, :, 3:6] = gyr
    out[:, :, 6:9] = MAG_COUPLING * sig.gyro_amp * p_scale * np.cos(theta + ph[None, :, 3:])
    return out


def rest_frame(params: GenParams) -> np.ndarray:
    """Undeformed marker grid in [0, 1] (no noise)."""
    return _render(params, np.zeros(1), np.zeros(1), np.zeros(1), np.zeros(1))[0]


def _render(params: GenParams, cx, cy, m, r) -> np.ndarray:
    """Noise-free intensity frames in [0, 1], shape (n, S, S)."""
    s = params.image_size
    rows, cols = params.marker_grid
    coords = (np.arange(s) + 0.5) / s
    u = coords[None, None, :]
    v = coords[None, :, None]
    cx, cy, m, r = (np.asarray(a, dtype=np.float64)[:, None, None] for a in (cx, cy, m, r))
    dx = u - cx
    dy = v - cy
    d = np.sqrt(dx * dx + dy * dy)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(r > 0, d / np.where(r > 0, r, 1.0), np.inf)
        edge = np.clip((1.0 - q) / (1.0 - PLATEAU), 0.0, 1.0)
        bump = edge * edge * (3.0 - 2.0 * edge)
        push = m * bump * (0.35 / max(rows, cols))
        safe = np.where(d > 0, d, 1.0)
        uu = u - push * dx / safe
        vv = v - push * dy / safe
    px = 0.5 + 0.5 * np.cos(2 * np.pi * cols * (uu - 0.5 / cols))
    py = 0.5 + 0.5 * np.cos(2 * np.pi * rows * (vv - 0.5 / rows))
    pattern = (px * py) ** MARKER_SHARPNESS
    return BACKGROUND + (MARKER - BACKGROUND) * pattern + SHADE * m * bump


def _frames(params: GenParams, cx, cy, m, r, rng: np.random.Generator, chunk: int = 64) -> np.ndarray:
    n = len(cx)
    s = params.image_size
    out = np.empty((n, s, s), dtype=np.uint8)
    for a in range(0, n, chunk):
        b = min(n, a + chunk)
        img = _render(params, cx[a:b], cy[a:b], m[a:b], r[a:b])
        noise = np.clip(rng.standard_normal(img.shape), -NOISE_CLIP, NOISE_CLIP)
        img = img + params.noise_std * noise
        out[a:b] = np.rint(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
    return out


def _synthesize(pieces: Sequence[_Piece], hand: Hand, participant: int, params: GenParams, meta: dict,
                stream_key: tuple) -> Recording:
    total = pieces[-1].end
    rng = np.random.default_rng([params.seed, 3_000_017, *stream_key])
    n_imu = int(round(total * params.imu_rate))
    n_cam = int(round(total * params.camera_rate))
    period = 1.0 / params.imu_rate
    jitter = np.clip(rng.normal(0.0, params.clock_jitter_std, n_imu), -JITTER_CLIP * period, JITTER_CLIP * period)
    jitter[0] = 0.0
    imu_t = np.arange(n_imu) * period + jitter
    cam_t = np.arange(n_cam) / params.camera_rate

    perturb = _participant_perturbation(params.seed, participant)
    fscale = perturb[2]
    motion = np.zeros((n_imu, 8, 9))
    cx = np.full(n_cam, 0.5)
    cy = np.full(n_cam, 0.5)
    mag = np.zeros(n_cam)
    radius = np.zeros(n_cam)

    for piece in pieces:
        phase0, center = _piece_randoms(params.seed, piece.key)
        sig = class_signal(piece.label)
        sel = (imu_t >= piece.start) & (imu_t < piece.end)
        if piece is pieces[-1]:
            sel |= imu_t >= piece.end
        motion[sel] = _imu_signal(sig, imu_t[sel] - piece.start, phase0, perturb)
        fsel = (cam_t >= piece.start) & (cam_t < piece.end)
        if piece.decay_from is not None and params.relaxation:
            prev = pieces[pieces.index(piece) - 1]
            p_phase0, p_center = _piece_randoms(params.seed, prev.key)
            psig = class_signal(prev.label)
            ex, ey, em = _tactile_state(psig, np.array([prev.end - prev.start]), p_phase0, p_center, fscale)
            decay = np.exp(-(cam_t[fsel] - piece.start) / params.relaxation_tau)
            cx[fsel], cy[fsel] = ex[0], ey[0]
            mag[fsel] = em[0] * decay
            radius[fsel] = psig.radius
        else:
            cx[fsel], cy[fsel], mag[fsel] = _tactile_state(sig, cam_t[fsel] - piece.start, phase0, center, fscale)
            radius[fsel] = sig.radius

    grav, field = _sensor_baselines()
    ranges = ImuRanges()
    base = np.zeros((8, 9))
    base[:, 0:3] = GRAVITY_G * grav / ranges.accel
    base[:, 6:9] = EARTH_FIELD_UT * field / ranges.mag
    normed = base[None] + motion + params.noise_std * rng.standard_normal(motion.shape)
    if hand is Hand.LEFT:
        normed[:, :, 0::3] *= -1.0
    imu = (normed.reshape(n_imu, FULL_WIDTH) * ranges.scale_vector()).astype(np.float64)

    top = _frames(params, cx, cy, mag, radius, rng)
    bottom = _frames(params, cx, 1.0 - cy, params.bottom_attenuation * mag, radius, rng)
    annotations = AnnotationTrack(Interval(p.start, p.end, p.label) for p in pieces)
    meta = {**meta, "participant": participant, "hand": hand.value, "source": "synthetic"}
    return Recording(imu_t, imu, cam_t, top, cam_t.copy(), bottom, annotations, meta, contact=mag)


def _hand(hand) -> Hand:
    return hand if isinstance(hand, Hand) else Hand(str(hand).capitalize())


def gen_segment(label: ActionLabel, duration: float, hand: Hand | str = Hand.RIGHT,
                params: GenParams = GenParams(), participant: int = 0) -> Recording:
    """One single-action recording of ``duration`` seconds."""
    if not duration > 0:
        raise ValueError("duration must be positive")
    label = ActionLabel(label)
    hand = _hand(hand)
    key = (participant, 0 if hand is Hand.RIGHT else 1, int(label))
    piece = _Piece(0.0, float(duration), label, key)
    rid = f"p{participant:02d}_{hand.value.lower()}_{label.title.lower()}"
    return _synthesize([piece], hand, participant, params, {"id": rid, "label": label.title, "kind": "segment"},
                       (0, *key))


def gen_segmented_dataset(participants: int, params: GenParams = GenParams()) -> list[Recording]:
    """participants x 15 actions x 2 hands single-action recordings."""
    if participants < 1:
        raise ValueError("need at least one participant")
    return [
        gen_segment(label, params.segment_duration, hand, params, participant=p)
        for p in range(participants)
        for label in ActionLabel
        for hand in Hand
    ]


def gen_continuous_sequence(order: Sequence[ActionLabel], action_duration: float, pause_duration: float,
                            params: GenParams = GenParams(), participant: int = 0,
                            hand: Hand | str = Hand.RIGHT, sequence: int = 0) -> Recording:
    """Actions in ``order`` separated by Idle pauses; pauses after contact relax the membrane."""
    if not order:
        raise ValueError("order must not be empty")
    if not (action_duration > 0 and pause_duration > 0):
        raise ValueError("durations must be positive")
    hand = _hand(hand)
    hcode = 0 if hand is Hand.RIGHT else 1
    pieces: list[_Piece] = []
    t = 0.0
    for k, label in enumerate(order):
        label = ActionLabel(label)
        if k:
            prev = pieces[-1].label
            decay = prev if PROFILES[prev].has_contact else None
            pieces.append(_Piece(t, t + pause_duration, ActionLabel.IDLE, (participant, hcode, sequence, 2 * k - 1),
                                 decay_from=decay))
            t += pause_duration
        pieces.append(_Piece(t, t + action_duration, label, (participant, hcode, sequence, 2 * k)))
        t += action_duration
    rid = f"seq{sequence:02d}_p{participant:02d}_{hand.value.lower()}"
    return _synthesize(pieces, hand, participant, params, {"id": rid, "kind": "continuous"},
                       (1, participant, hcode, sequence))
