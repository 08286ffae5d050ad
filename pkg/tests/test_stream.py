import threading

import numpy as np
import pytest

from mmhar.core import ActionLabel
from mmhar.errors import AlignmentGap, EmptyPredictions, NonMonotonicTimestamp
from mmhar.harness import Checkpoint, NormMeta, predict_logits
from mmhar.models import Presets, build_model
from mmhar.pipeline import AnnotationTrack, ImuRanges, align_imu_to_frames, segment
from mmhar.pipeline.windows import apply_image_stats
from mmhar.stream import (
    AnnotationOracle,
    OnlineClassifier,
    PredictionTrack,
    StreamBuffer,
    frame_accuracy,
    replay_events,
    run_online_eval,
    tick,
    transition_lags,
)
from mmhar.synthgen import GenParams, gen_continuous_sequence, gen_segment

FRAME = 1 / 30


def fill(buffer, n_frames, size=16, start=0.0, imu=True):
    rng = np.random.default_rng(0)
    for i in range(n_frames):
        t = start + i * FRAME
        if imu:
            buffer.push_imu(t, rng.normal(size=72))
        buffer.push_bottom(t, rng.integers(0, 255, (size, size), dtype=np.uint8))
        buffer.push_top(t, rng.integers(0, 255, (size, size), dtype=np.uint8))
    return start + (n_frames - 1) * FRAME


def test_window_ready_after_ninety_frames():
    b = StreamBuffer(16)
    t = fill(b, 89)
    assert not b.ready(t) and b.snapshot(t) is None
    t = fill(b, 1, start=t + FRAME)
    assert b.ready(t)
    snap = b.snapshot(t)
    assert snap.top.shape == (90, 16, 16) and snap.imu.shape == (90, 72)


def test_out_of_order_rejected():
    b = StreamBuffer(16)
    b.push_imu(1.0, np.zeros(72))
    with pytest.raises(NonMonotonicTimestamp):
        b.push_imu(0.5, np.zeros(72))
    b.push_imu(1.0, np.zeros(72))  # equal timestamps are allowed
    with pytest.raises(ValueError):
        b.push("audio", 1.0, None)


def test_capacity_eviction():
    b = StreamBuffer(16, capacity=100)
    fill(b, 150)
    assert len(b) == 100
    with pytest.raises(ValueError):
        StreamBuffer(16, capacity=50)


def test_timestamp_gap_blocks_window():
    b = StreamBuffer(16)
    t = fill(b, 60)
    t = fill(b, 40, start=t + 3 * FRAME)
    assert b.snapshot(t) is None
    t = fill(b, 90, start=t + FRAME)
    assert b.snapshot(t) is not None


def test_missing_imu_raises_alignment_gap():
    b = StreamBuffer(16)
    t = fill(b, 45)
    fill(b, 45, start=t + FRAME, imu=False)
    with pytest.raises(AlignmentGap):
        b.snapshot(t + 45 * FRAME)


def test_query_sees_only_past_samples():
    b = StreamBuffer(16, audit=True)
    t_end = fill(b, 150)
    for t in np.arange(89, 150) * FRAME:
        snap = b.snapshot(t)
        assert snap.timestamps[-1] <= t
    assert all(read <= t + 1e-12 for t, read in b.reads)


@pytest.fixture(scope="module")
def desk_checkpoint():
    model = build_model("MMC-8FG", Presets.desk(), seed=3)
    return Checkpoint.from_model(model, NormMeta("per_split", 0.21, 0.13, 56, ImuRanges()))


def test_warmup_is_idle_and_tick_deterministic(desk_checkpoint):
    b = StreamBuffer(56)
    t = fill(b, 50, size=56)
    assert tick(desk_checkpoint, b, t) is ActionLabel.IDLE
    t = fill(b, 60, size=56, start=t + FRAME)
    clf = OnlineClassifier(desk_checkpoint)
    assert tick(clf, b, t) == tick(clf, b, t)


@pytest.mark.parametrize("modality", ["MBC-8FG", "TBC-2", "MMC-8FG", "MBC-2WB", "TBC-1bot"])
def test_online_logits_match_offline(modality):
    """A pre-segmented window fed sample by sample gives bit-identical logits."""
    p = GenParams.desk(seed=2)
    rec = gen_segment(ActionLabel.PATTING, 3.0, "Right", p)
    model = build_model(modality, Presets.desk(), seed=1)
    ck = Checkpoint.from_model(model, NormMeta("per_split", 0.3, 0.11, 56, ImuRanges()))
    ws = apply_image_stats(segment(rec, image_size=56), 0.3, 0.11, "per_split")
    offline = predict_logits(ck.model(), ws, batch_size=1)[0]

    imu = align_imu_to_frames(rec)
    b = StreamBuffer(56)
    for i, t in enumerate(rec.top_t):
        b.push_imu(t, imu[i])
        b.push_bottom(t, rec.bottom[i])
        b.push_top(t, rec.top[i])
    online = OnlineClassifier(ck).logits(b.snapshot(rec.top_t[-1], model.streams))
    assert np.array_equal(online, offline)


def test_concurrent_producers_consistent_snapshots():
    b = StreamBuffer(16, capacity=180)
    fill(b, 90)
    rng = np.random.default_rng(1)
    frames = rng.integers(0, 255, (300, 16, 16), dtype=np.uint8)
    start = 90 * FRAME

    def producer(kind):
        for i in range(300):
            t = start + i * FRAME
            if kind == "imu":
                b.push_imu(t, np.zeros(72))
            else:
                b.push(kind, t, frames[i])

    threads = [threading.Thread(target=producer, args=(k,)) for k in ("imu", "top", "bottom")]
    for th in threads:
        th.start()
    seen = 0
    while any(th.is_alive() for th in threads):
        try:
            snap = b.snapshot(np.inf, ("top",))
        except AlignmentGap:
            continue
        if snap is not None:
            assert np.all(np.diff(snap.timestamps) > 0) and len(snap.timestamps) == 90
            seen += 1
    for th in threads:
        th.join()
    assert b.snapshot(np.inf) is not None


# Frame accuracy

TRUTH = AnnotationTrack([(0.0, 7.0, ActionLabel.RUBBING), (7.0, 10.0, ActionLabel.IDLE)])
TIMES = np.arange(100) * 0.1


def test_accuracy_examples():
    assert frame_accuracy(PredictionTrack.from_truth(TRUTH, TIMES), TRUTH) == 1.0
    idle = PredictionTrack(TIMES, np.full(100, int(ActionLabel.IDLE)))
    assert frame_accuracy(idle, TRUTH) == pytest.approx(0.30)
    one_off = PredictionTrack.from_truth(TRUTH, TIMES)
    one_off.labels[5] = int(ActionLabel.POKING)
    assert frame_accuracy(one_off, TRUTH) == pytest.approx(99 / 100)


def test_accuracy_errors():
    with pytest.raises(EmptyPredictions):
        frame_accuracy(PredictionTrack(), TRUTH)
    with pytest.raises(ValueError):
        frame_accuracy(PredictionTrack([11.0], [0]), TRUTH)
    with pytest.raises(ValueError):
        PredictionTrack([1.0, 1.0], [0, 0])


def test_track_csv_round_trip(tmp_path):
    track = PredictionTrack.from_truth(TRUTH, TIMES)
    track.write_csv(tmp_path / "p.csv")
    assert (tmp_path / "p.csv").read_text().splitlines()[:2] == ["timestamp,label", "0.0,Rubbing"]
    assert PredictionTrack.read_csv(tmp_path / "p.csv") == track


def test_transition_lags():
    truth = AnnotationTrack([(0.0, 1.0, ActionLabel.POKING), (1.0, 2.0, ActionLabel.IDLE)])
    ts = np.arange(20) * 0.1
    labels = np.where(ts < 1.25, int(ActionLabel.POKING), int(ActionLabel.IDLE))
    assert transition_lags(PredictionTrack(ts, labels), truth) == [3]
    assert transition_lags(PredictionTrack(ts, np.zeros(20)), truth) == [None]


# Replay

@pytest.fixture(scope="module")
def short_sequence():
    order = [ActionLabel.SQUEEZING, ActionLabel.TAPPING, ActionLabel.IDLE, ActionLabel.STROKING]
    return gen_continuous_sequence(order, 4.0, 2.0, GenParams(image_size=16, marker_grid=(4, 4)))


def test_replay_event_order(short_sequence):
    events = list(replay_events(short_sequence))
    assert len(events) == len(short_sequence.imu_t) + 2 * len(short_sequence.top_t)
    times = [e[0] for e in events]
    assert times == sorted(times)


def test_oracle_replay(short_sequence):
    res = run_online_eval({"oracle": AnnotationOracle(short_sequence.annotations)}, short_sequence,
                          image_size=16, audit=True)
    track = res["oracle"].track
    assert len(track) == len(short_sequence.top_t)
    assert np.all(track.labels[:89] == ActionLabel.IDLE)
    lags = transition_lags(track, short_sequence.annotations)
    assert all(lag is not None and lag <= 90 for lag in lags)


def test_perfect_predictor_scores_one(short_sequence):
    class Perfect:
        streams = ("top",)

        def __init__(self, truth):
            self.truth = truth

        def predict(self, snap, t):
            return self.truth.label_at(t)

    res = run_online_eval([Perfect(short_sequence.annotations)], short_sequence, image_size=16)
    assert next(iter(res.values())).accuracy == 1.0


def test_replay_is_reproducible(short_sequence):
    ck = Checkpoint.from_model(build_model("TBC-2", Presets.desk()), NormMeta("per_split", 0.2, 0.1, 56))
    small = gen_continuous_sequence([ActionLabel.POKING], 3.5, 1.0, GenParams.desk())
    a = run_online_eval({"m": ck}, small)
    b = run_online_eval({"m": ck}, small)
    assert a["m"].track == b["m"].track


def test_online_eval_needs_annotations(short_sequence):
    import dataclasses
    bare = dataclasses.replace(short_sequence, annotations=None)
    with pytest.raises(ValueError):
        run_online_eval([AnnotationOracle(TRUTH)], bare, image_size=16)
