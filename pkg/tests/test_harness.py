import dataclasses

import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from mmhar.core import get_config
from mmhar.errors import ModalityMismatch, NonFiniteLoss
from mmhar.harness import (
    Checkpoint,
    NormMeta,
    TrainSpec,
    benchmark_latency,
    confusion_matrix,
    evaluate,
    macro_f1,
    metrics_from_confusion,
    predict_logits,
    train,
)
from mmhar.harness.reporting import read_rows_csv, write_confusion_csv, write_history_csv, write_rows_csv, write_summary
from mmhar.models import build_model, parameter_checksum
from oracles import brute_confusion, brute_macro_f1

QUICK = TrainSpec(learning_rate=1e-3, batch_size=8, max_epochs=3, patience=3)


# Metrics

def test_hand_case_one_third():
    y_true = [0] * 5 + [1] * 5
    assert macro_f1(y_true, [0] * 10) == pytest.approx(1 / 3)


def test_confusion_rows_are_truth():
    cm = confusion_matrix([0, 0, 1], [1, 1, 1], classes=2)
    assert cm.tolist() == [[0, 2], [0, 1]]


def test_absent_classes_ignored_and_zero_denominator():
    m = metrics_from_confusion(confusion_matrix([2, 2, 3], [2, 2, 4]))
    # Classes 2, 3, 4 are present; 3 and 4 score zero.
    assert m.macro_f1 == pytest.approx((1.0 + 0.0 + 0.0) / 3)
    assert m.f1[0] == 0.0 and m.accuracy == pytest.approx(2 / 3)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 14), st.integers(0, 14)), min_size=1, max_size=80))
def test_metrics_match_brute_force(pairs):
    y_true, y_pred = [p[0] for p in pairs], [p[1] for p in pairs]
    cm = confusion_matrix(y_true, y_pred)
    assert np.array_equal(cm, brute_confusion(y_true, y_pred))
    assert macro_f1(y_true, y_pred) == brute_macro_f1(y_true, y_pred)


def test_length_mismatch():
    with pytest.raises(ValueError):
        confusion_matrix([0, 1], [0])


# Training

def test_training_is_deterministic(tiny_splits, mini_presets):
    a = train("MMC-8FG", tiny_splits, QUICK, mini_presets)
    b = train("MMC-8FG", tiny_splits, QUICK, mini_presets)
    assert a.history == b.history
    assert parameter_checksum(a.checkpoint.model()) == parameter_checksum(b.checkpoint.model())
    assert len(a.history.epochs) == 3


def test_masked_and_premasked_histories_match(tiny_splits, mini_presets):
    cfg = get_config("3TIB")
    pre = tuple(ws.with_config(cfg) for ws in tiny_splits)
    a = train("MBC-3TIB", tiny_splits, QUICK, mini_presets)
    b = train("MBC-3TIB", pre, QUICK, mini_presets)
    assert a.history == b.history


def test_train_does_not_consume_global_rng(tiny_splits, mini_presets):
    torch.manual_seed(1)
    ref = torch.rand(1)
    torch.manual_seed(1)
    train("MBC-8FG", tiny_splits, QUICK, mini_presets)
    assert torch.equal(torch.rand(1), ref)


def test_best_checkpoint_kept(tiny_splits, mini_presets):
    res = train("MBC-8FG", tiny_splits, dataclasses.replace(QUICK, max_epochs=6, patience=6), mini_presets)
    val = tiny_splits[1]
    best = macro_f1(val.labels, predict_logits(res.checkpoint.model(), val).argmax(1))
    assert best == pytest.approx(max(res.history.val_f1))
    assert res.history.best_epoch == int(np.argmax(res.history.val_f1)) + 1


def test_patience_and_target_loss(tiny_splits, mini_presets):
    res = train("MBC-8FG", tiny_splits, TrainSpec(learning_rate=1e-9, max_epochs=50, patience=2), mini_presets)
    assert len(res.history.epochs) <= 50 and len(res.history.epochs) >= 3
    stop = train("MBC-8FG", tiny_splits, TrainSpec(max_epochs=50, patience=50, target_loss=100.0), mini_presets)
    assert len(stop.history.epochs) == 1


def test_non_finite_loss(tiny_splits, mini_presets):
    bad = dataclasses.replace(tiny_splits[0], imu=np.full_like(tiny_splits[0].imu, np.nan))
    with pytest.raises(NonFiniteLoss) as info:
        train("MBC-8FG", (bad, tiny_splits[1]), QUICK, mini_presets)
    assert info.value.epoch == 1 and info.value.batch == 0


def test_modality_mismatch(tiny_splits, mini_presets):
    no_frames = tuple(dataclasses.replace(ws, top=None, bottom=None) for ws in tiny_splits)
    with pytest.raises(ModalityMismatch):
        train("TBC-2", no_frames, QUICK, mini_presets)
    res = train("MBC-8FG", tiny_splits, QUICK, mini_presets)
    with pytest.raises(ModalityMismatch):
        evaluate(Checkpoint.from_model(build_model("TBC-1top", mini_presets)), no_frames[2])
    masked = tiny_splits[2].with_config(get_config("2WB"))
    with pytest.raises(ModalityMismatch):
        evaluate(res.checkpoint, masked)


def test_spec_validation():
    with pytest.raises(ValueError):
        TrainSpec(learning_rate=0)
    with pytest.raises(ValueError):
        TrainSpec(batch_size=0)


# Checkpoints

def test_checkpoint_round_trip(tmp_path, tiny_splits, mini_presets):
    res = train("MMC-2WB", tiny_splits, QUICK, mini_presets)
    path = tmp_path / "ck.pt"
    res.checkpoint.save(path)
    back = Checkpoint.load(path)
    assert back.modality == res.checkpoint.modality and back.presets == mini_presets
    assert back.norm == res.checkpoint.norm
    assert back.norm.stats_source == "per_split" and back.norm.image_mean is not None
    test = tiny_splits[2]
    assert np.array_equal(predict_logits(back.model(), test), predict_logits(res.checkpoint.model(), test))
    ev = evaluate(back, test)
    assert ev.confusion.sum() == len(test)


def test_norm_meta_dict_round_trip():
    meta = NormMeta("train_only", 0.2, 0.1, 56)
    assert NormMeta.from_dict(meta.to_dict()) == meta


def test_not_a_checkpoint(tmp_path):
    torch.save({"format": "other"}, tmp_path / "x.pt")
    with pytest.raises(ValueError):
        Checkpoint.load(tmp_path / "x.pt")


# Latency

def test_latency_ratio_baseline(mini_presets):
    models = [build_model(m, mini_presets) for m in ("TBC-2", "MBC-8FG", "MBC-2WB")]
    rows = benchmark_latency(models, repetitions=30)
    by_name = {r.name: r for r in rows}
    assert by_name["MBC-8FG"].ratio == 1.0
    assert all(r.mean_ms > 0 and r.hz > 0 for r in rows)


def test_latency_validation(mini_presets):
    with pytest.raises(ValueError):
        benchmark_latency([build_model("MBC-8FG", mini_presets)], repetitions=10)
    with pytest.raises(ValueError):
        benchmark_latency([build_model("TBC-2", mini_presets)])


# Reporting

def test_reporting_files(tmp_path, tiny_splits, mini_presets):
    res = train("MBC-8FG", tiny_splits, QUICK, mini_presets)
    write_history_csv(res.history, tmp_path / "h.csv")
    assert (tmp_path / "h.csv").read_text().splitlines()[0] == "epoch,train_loss,val_f1"
    write_rows_csv([{"modality": "MBC-8FG", "macro_f1": 0.5}], tmp_path / "m.csv")
    assert read_rows_csv(tmp_path / "m.csv") == [{"modality": "MBC-8FG", "macro_f1": "0.5"}]
    write_confusion_csv(np.eye(15, dtype=int), tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert len(lines) == 16 and lines[1].startswith("Pinching,1,0")
    write_summary({"b": np.float64(1.5), "a": np.arange(2)}, tmp_path / "s.json")
    assert (tmp_path / "s.json").read_text().index('"a"') < (tmp_path / "s.json").read_text().index('"b"')
