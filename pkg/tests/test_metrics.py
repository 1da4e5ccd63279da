import numpy as np
import pytest

from copula_cd.metrics import (
    ConfusionCounts,
    MetricsReport,
    compute_metrics,
    confusion,
    load_report,
    save_report,
)
from copula_cd.raster import ChangeMap


def _mask(labels):
    labels = np.asarray(labels, dtype=np.uint8)
    return ChangeMap(width=labels.shape[1], height=labels.shape[0], labels=labels)


def test_perfect_prediction_counts():
    rng = np.random.default_rng(0)
    labels = (rng.uniform(size=(10, 10)) < 0.3).astype(np.uint8)
    labels[:3] = 1
    truth = _mask(labels)
    c = confusion(truth, truth)
    assert c.fp == 0 and c.fn == 0
    assert c.tp == int(labels.sum())
    assert c.tn == 100 - c.tp


def test_all_changed_vs_all_unchanged():
    c = confusion(_mask(np.ones((2, 5))), _mask(np.zeros((2, 5))))
    assert (c.tp, c.tn, c.fp, c.fn) == (0, 0, 10, 0)


def test_confusion_matches_brute_force():
    rng = np.random.default_rng(1)
    p = (rng.uniform(size=(13, 7)) < 0.5).astype(np.uint8)
    t = (rng.uniform(size=(13, 7)) < 0.5).astype(np.uint8)
    c = confusion(_mask(p), _mask(t))
    tp = tn = fp = fn = 0
    for i in range(13):
        for j in range(7):
            if p[i, j] and t[i, j]:
                tp += 1
            elif p[i, j] and not t[i, j]:
                fp += 1
            elif not p[i, j] and t[i, j]:
                fn += 1
            else:
                tn += 1
    assert (c.tp, c.tn, c.fp, c.fn) == (tp, tn, fp, fn)


def test_dimension_mismatch():
    with pytest.raises(ValueError, match="differ"):
        confusion(_mask(np.zeros((2, 2))), _mask(np.zeros((3, 2))))


def test_swap_symmetry():
    rng = np.random.default_rng(2)
    p = _mask((rng.uniform(size=(9, 9)) < 0.4).astype(np.uint8))
    t = _mask((rng.uniform(size=(9, 9)) < 0.6).astype(np.uint8))
    a = compute_metrics(confusion(p, t))
    b = compute_metrics(confusion(t, p))
    assert a.pcc == b.pcc
    assert a.counts.fp == b.counts.fn and a.counts.fn == b.counts.fp


def test_published_row_oe_arithmetic():
    # FP + FN must reproduce the overall error total
    c = ConfusionCounts(tp=1, tn=1, fp=65972, fn=37711)
    assert compute_metrics(c).oe == 103683


def test_hand_case_pcc_and_kappa():
    rep = compute_metrics(ConfusionCounts(tp=40, tn=40, fp=10, fn=10))
    assert rep.pcc == pytest.approx(0.8, abs=1e-12)
    assert rep.kc == pytest.approx(0.6, abs=1e-12)
    assert rep.oe == 20


def test_perfect_gives_unit_scores():
    rep = compute_metrics(ConfusionCounts(tp=30, tn=70, fp=0, fn=0))
    assert rep.pcc == 1.0 and rep.kc == 1.0


def test_kappa_at_most_pcc():
    rng = np.random.default_rng(3)
    for _ in range(50):
        counts = rng.integers(0, 50, 4)
        if counts.sum() == 0:
            continue
        rep = compute_metrics(ConfusionCounts(*[int(x) for x in counts]))
        assert rep.kc <= rep.pcc + 1e-12 <= 1 + 1e-12
        assert rep.oe == rep.counts.fp + rep.counts.fn


def test_degenerate_kappa_flagged():
    rep = compute_metrics(ConfusionCounts(tp=0, tn=10, fp=0, fn=0))
    assert rep.kc == 1.0 and not np.isnan(rep.pcc)
    assert "degenerate" in rep.warnings[0]  # single-class but perfect

    # single-class prediction against the opposite single-class truth has
    # PRE = 0, so it takes the ordinary path: kc = 0, no warning
    rep = compute_metrics(ConfusionCounts(tp=0, tn=0, fp=10, fn=0))
    assert rep.kc == 0.0
    assert not rep.warnings


def test_report_json_round_trip(tmp_path):
    rep = compute_metrics(ConfusionCounts(tp=12, tn=30, fp=4, fn=6))
    path = tmp_path / "metrics.json"
    save_report(rep, path)
    back = load_report(path)
    assert back == rep
    raw = path.read_text()
    for key in ("tp", "tn", "fp", "fn", "oe", "pcc", "kc", "warnings"):
        assert f'"{key}"' in raw


def test_counts_validation():
    with pytest.raises(ValueError):
        ConfusionCounts(tp=-1, tn=0, fp=0, fn=1)
    with pytest.raises(ValueError):
        ConfusionCounts(tp=0, tn=0, fp=0, fn=0)
