"""Confusion matrix, classification report and bit error rate."""
from dataclasses import asdict, dataclass, field

import numpy as np

CLASS_NAMES = ('0 – "space"', '1 – "mark"')


def _check_pair(truth, pred):
    truth = np.asarray(truth)
    pred = np.asarray(pred)
    if truth.shape != pred.shape:
        raise ValueError(f"length mismatch: {truth.shape} truth vs {pred.shape} predictions")
    if truth.size == 0:
        raise ValueError("no records to score")
    return truth.astype(np.int64), pred.astype(np.int64)


def confusion(truth, pred, classes=2):
    """counts[i, j] = number of records with truth i predicted as j."""
    truth, pred = _check_pair(truth, pred)
    if truth.min() < 0 or pred.min() < 0 or max(truth.max(), pred.max()) >= classes:
        raise ValueError(f"labels outside 0..{classes - 1}")
    return np.bincount(truth * classes + pred, minlength=classes * classes).reshape(classes, classes)


@dataclass
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class Report:
    classes: list
    accuracy: float
    macro_avg: dict
    weighted_avg: dict
    total: int
    degenerate: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def _ratio(num, den, flag, flags):
    if den == 0:
        flags.append(flag)
        return 0.0
    return num / den


def report(m):
    m = np.asarray(m, dtype=np.int64)
    total = int(m.sum())
    if total <= 0:
        raise ValueError("confusion matrix is empty")
    flags = []
    rows = []
    for c in range(m.shape[0]):
        tp = int(m[c, c])
        p = _ratio(tp, int(m[:, c].sum()), f"precision[{c}]", flags)
        r = _ratio(tp, int(m[c, :].sum()), f"recall[{c}]", flags)
        f1 = _ratio(2 * p * r, p + r, f"f1[{c}]", flags)
        rows.append(ClassMetrics(p, r, f1, int(m[c, :].sum())))
    supports = np.array([row.support for row in rows], dtype=np.float64)

    def avg(weights):
        return {name: float(np.dot([getattr(row, name) for row in rows], weights))
                for name in ("precision", "recall", "f1")}

    return Report(
        classes=rows,
        accuracy=float(np.trace(m)) / total,
        macro_avg=avg(np.full(len(rows), 1.0 / len(rows))),
        weighted_avg=avg(supports / total),
        total=total,
        degenerate=flags,
    )


def ber(truth, pred):
    truth, pred = _check_pair(truth, pred)
    return float(np.count_nonzero(truth != pred)) / truth.size


def format_report(rep, names=CLASS_NAMES):
    """Fixed-width text in the layout of a classification report, two decimals."""
    w = max(len(n) for n in names + ("Weighted avg",))
    lines = [f"{'Class':<{w}}  {'Precision':>9}  {'Recall':>9}  {'F1-Score':>9}  {'Support':>9}"]
    for name, row in zip(names, rep.classes):
        lines.append(f"{name:<{w}}  {row.precision:9.2f}  {row.recall:9.2f}  {row.f1:9.2f}  {row.support:9d}")
    lines.append(f"{'Accuracy':<{w}}  {'':>9}  {'':>9}  {rep.accuracy:9.2f}  {rep.total:9d}")
    for label, a in (("Macro avg", rep.macro_avg), ("Weighted avg", rep.weighted_avg)):
        lines.append(f"{label:<{w}}  {a['precision']:9.2f}  {a['recall']:9.2f}  {a['f1']:9.2f}  {rep.total:9d}")
    return "\n".join(lines) + "\n"


def metrics_dict(truth, pred):
    m = confusion(truth, pred)
    rep = report(m)
    return {"confusion": m.tolist(), "report": rep.to_dict(), "ber": ber(truth, pred)}
