import numpy as np
import pytest
import torch

from mmhar.core import ActionLabel
from mmhar.models import Presets
from mmhar.pipeline import segment_all, split_dataset, standardize
from mmhar.synthgen import GenParams, gen_segment

torch.set_num_threads(1)

# Tiny windows that fit the mini preset: 10 frames of 16 px.
MINI_WINDOW = 10
TINY_GEN = GenParams(image_size=16, marker_grid=(4, 4), seed=0)


@pytest.fixture(scope="session")
def mini_presets():
    return Presets.mini()


@pytest.fixture(scope="session")
def tiny_windows():
    recs = [gen_segment(lab, 2.0, "Right", TINY_GEN) for lab in ActionLabel]
    return segment_all(recs, window_len=MINI_WINDOW)


@pytest.fixture(scope="session")
def tiny_splits(tiny_windows):
    splits, _ = standardize(split_dataset(tiny_windows, seed=0))
    return splits


def pytest_terminal_summary(terminalreporter):
    from acceptance_report import REPORT

    if not REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(REPORT):
        title, ok, detail = REPORT[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:2d}. {title}: {detail}")
