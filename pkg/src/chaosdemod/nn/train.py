"""Mini-batch training with early stopping on validation accuracy."""
import logging
import time
from dataclasses import dataclass

import numpy as np

from ..dataset import one_hot_batch
from ..rng import SeededGenerator
from . import functional as F
from .optim import AdamState, adam_step

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    batch_size: int = 32
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_epsilon: float = 1e-7
    seed: int = 0
    patience: int = 3

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.patience < 1:
            raise ValueError("epochs, batch_size and patience must be positive")
        if self.lr < 0:
            raise ValueError(f"learning rate must be non-negative, got {self.lr}")


def evaluate(model, split, batch_size=256):
    """(mean cross-entropy, accuracy) in inference mode."""
    probs = model.predict(split.windows, batch_size)
    loss = F.cross_entropy(probs, one_hot_batch(split.labels, model.cfg.classes))
    acc = float(np.mean(np.argmax(probs, axis=1) == split.labels))
    return loss, acc


def _check_split(model, split, name):
    if len(split) == 0:
        raise ValueError(f"{name} split is empty")
    if split.window_len != model.cfg.input_len:
        raise ValueError(
            f"{name} windows have length {split.window_len}, model expects {model.cfg.input_len}"
        )


def fit(model, split, tc=None, progress=None):
    """Train ``model`` in place on ``split.train``, validating on ``split.val``.

    The weights with the best validation accuracy are restored at the end.
    Batch order for epoch ``e`` comes from ``SeededGenerator(tc.seed).derive_stream(e)``.
    Returns a history dict of per-epoch lists.
    """
    tc = tc or TrainConfig()
    train, val = split.train, split.val
    _check_split(model, train, "train")
    _check_split(model, val, "val")
    classes = model.cfg.classes
    opt = AdamState.for_params(
        {k: model.params[k] for k in model.trainable_keys},
        lr=tc.lr, beta1=tc.beta1, beta2=tc.beta2, epsilon=tc.adam_epsilon,
    )
    shuffler = SeededGenerator(tc.seed)
    history = {"epoch": [], "train_loss": [], "train_accuracy": [],
               "val_loss": [], "val_accuracy": []}
    best_acc, best, stale = -1.0, None, 0
    n = len(train)
    for epoch in range(tc.epochs):
        t0 = time.perf_counter()
        order = shuffler.derive_stream(epoch).permutation(n)
        loss_sum, correct = 0.0, 0
        for start in range(0, n, tc.batch_size):
            idx = np.sort(order[start:start + tc.batch_size])
            xb = train.windows[idx]
            yb = one_hot_batch(train.labels[idx], classes)
            probs = model.forward(xb, training=True)
            loss_sum += F.cross_entropy(probs, yb) * len(idx)
            correct += int(np.sum(np.argmax(probs, axis=1) == train.labels[idx]))
            adam_step(model.params, model.backward(yb), opt)
            if progress is not None:
                progress(epoch, start + len(idx), n)
        val_loss, val_acc = evaluate(model, val)
        history["epoch"].append(epoch + 1)
        history["train_loss"].append(loss_sum / n)
        history["train_accuracy"].append(correct / n)
        history["val_loss"].append(val_loss)
        history["val_accuracy"].append(val_acc)
        log.info("epoch %d/%d  loss %.4f  acc %.4f  val_loss %.4f  val_acc %.4f  (%.1fs)",
                 epoch + 1, tc.epochs, loss_sum / n, correct / n, val_loss, val_acc,
                 time.perf_counter() - t0)
        if val_acc > best_acc:
            best_acc, best, stale = val_acc, model.copy(), 0
        else:
            stale += 1
            if stale >= tc.patience:
                log.info("early stop: no val_accuracy gain for %d epochs", stale)
                break
    model.load_state(best)
    history["best_epoch"] = history["epoch"][int(np.argmax(history["val_accuracy"]))]
    history["best_val_accuracy"] = best_acc
    return history
