"""A small convolutional network written directly in NumPy.

Layout is channel-first: an input window is ``(8, 8)``, the convolution
output ``(K, 6, 6)``, the pooled map ``(K, 3, 3)``. Every forward function
also accepts a leading batch axis. Class ``c`` in ``0..7`` encodes the bit
triple ``(past, current, future)`` as ``4*past + 2*current + future``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

__all__ = [
    "CnnModel",
    "TrainingConfig",
    "conv2d_forward",
    "avgpool_forward",
    "dense_forward",
    "loss_and_grad",
    "batch_loss_and_grad",
    "train",
    "accuracy",
    "encode_bits",
    "decode_class",
    "window_indices",
    "build_training_set",
    "extract_windows",
    "predict_classes",
    "predict_bits",
    "save_model",
    "load_model",
    "WINDOW_SYMBOLS",
    "N_CLASSES",
]

WINDOW_SYMBOLS = 4
N_CLASSES = 8
PARAM_NAMES = ("conv_w", "conv_b", "dense_w", "dense_b")


@dataclass
class CnnModel:
    """Parameters of the conv -> tanh -> avg-pool -> dense stack.

    ``conv_w`` is ``(K, 3, 3)``, ``conv_b`` is ``(K,)``, ``dense_w`` is
    ``(9K, 8)`` mapping the flattened pooled map to logits, ``dense_b`` is
    ``(8,)``.
    """

    conv_w: np.ndarray
    conv_b: np.ndarray
    dense_w: np.ndarray
    dense_b: np.ndarray
    input_shape: tuple[int, int] = (8, 8)

    @classmethod
    def init(cls, n_kernels: int = 8, seed: int = 0, kernel: int = 3, input_shape=(8, 8)) -> "CnnModel":
        """Glorot-uniform weights, zero biases."""
        rng = np.random.default_rng(seed)
        h, w = input_shape
        ph, pw = (h - kernel + 1) // 2, (w - kernel + 1) // 2
        n_in = n_kernels * ph * pw
        r_conv = np.sqrt(6.0 / (kernel * kernel + n_kernels * kernel * kernel))
        r_dense = np.sqrt(6.0 / (n_in + N_CLASSES))
        return cls(
            conv_w=rng.uniform(-r_conv, r_conv, (n_kernels, kernel, kernel)),
            conv_b=np.zeros(n_kernels),
            dense_w=rng.uniform(-r_dense, r_dense, (n_in, N_CLASSES)),
            dense_b=np.zeros(N_CLASSES),
            input_shape=tuple(input_shape),
        )

    def params(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def copy(self) -> "CnnModel":
        return replace(self, **{k: v.copy() for k, v in self.params().items()})

    @property
    def n_kernels(self) -> int:
        return self.conv_w.shape[0]

    def forward(self, x) -> np.ndarray:
        """Logits for one window ``(8, 8)`` or a batch ``(B, 8, 8)``."""
        a = conv2d_forward(x, self.conv_w, self.conv_b)
        p = avgpool_forward(a)
        flat = p.reshape(p.shape[:-3] + (-1,))
        return dense_forward(flat, self.dense_w, self.dense_b)


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 0.05
    epochs: int = 2000
    batch: int = 16
    seed: int = 0
    early_stop: bool = True

    def __post_init__(self):
        if not self.learning_rate >= 0:
            raise ValueError("learning_rate must be non-negative")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")


def _windows(x: np.ndarray, kh: int, kw: int) -> np.ndarray:
    return sliding_window_view(x, (kh, kw), axis=(-2, -1))


def conv2d_forward(x, kernels, biases, activation: str = "tanh") -> np.ndarray:
    """Valid stride-1 cross-correlation plus bias, then the activation.

    ``x`` is ``(H, W)`` or ``(B, H, W)``; ``kernels`` is ``(K, kh, kw)``.
    Returns ``(K, H-kh+1, W-kw+1)``, with the batch axis in front if given.
    ``activation`` is ``"tanh"`` or ``"identity"``.
    """
    x = np.asarray(x, dtype=float)
    k = np.asarray(kernels, dtype=float)
    b = np.asarray(biases, dtype=float)
    if k.ndim != 3 or b.shape != (k.shape[0],):
        raise ValueError(f"kernels {k.shape} and biases {b.shape} do not agree")
    if x.ndim not in (2, 3) or x.shape[-2] < k.shape[1] or x.shape[-1] < k.shape[2]:
        raise ValueError(f"input of shape {x.shape} cannot take {k.shape[1:]} kernels")
    z = np.einsum("...ijxy,kxy->...kij", _windows(x, k.shape[1], k.shape[2]), k)
    z += b[:, None, None]
    if activation == "tanh":
        return np.tanh(z)
    if activation == "identity":
        return z
    raise ValueError(f"unknown activation {activation!r}")


def avgpool_forward(x) -> np.ndarray:
    """Non-overlapping 2x2 mean pooling over the last two axes."""
    x = np.asarray(x, dtype=float)
    h, w = x.shape[-2:]
    if h % 2 or w % 2:
        raise ValueError(f"pooling needs even spatial dims, got {(h, w)}")
    return x.reshape(x.shape[:-2] + (h // 2, 2, w // 2, 2)).mean(axis=(-3, -1))


def dense_forward(x, weights, biases) -> np.ndarray:
    """``y_j = b_j + sum_i w_ij x_i``; ``weights`` is ``(n_in, n_out)``."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(weights, dtype=float)
    b = np.asarray(biases, dtype=float)
    if w.ndim != 2 or x.shape[-1] != w.shape[0] or b.shape != (w.shape[1],):
        raise ValueError(f"dense shapes disagree: x {x.shape}, w {w.shape}, b {b.shape}")
    return x @ w + b


def _log_softmax(z):
    z = z - z.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def batch_loss_and_grad(model: CnnModel, x, labels) -> tuple[float, dict[str, np.ndarray]]:
    """Mean softmax cross-entropy over a batch and its parameter gradients."""
    x = np.asarray(x, dtype=float)
    labels = np.asarray(labels)
    if x.ndim == 2:
        x, labels = x[None], labels.reshape(1)
    if labels.shape != (x.shape[0],) or np.any(labels < 0) or np.any(labels >= N_CLASSES):
        raise ValueError(f"labels must be integers in [0, {N_CLASSES - 1}]")
    labels = labels.astype(int)
    n = x.shape[0]
    k = model.conv_w.shape[1]
    win = _windows(x, k, k)
    a = np.tanh(np.einsum("bijxy,kxy->bkij", win, model.conv_w) + model.conv_b[:, None, None])
    pooled = avgpool_forward(a)
    flat = pooled.reshape(n, -1)
    logp = _log_softmax(flat @ model.dense_w + model.dense_b)
    loss = -logp[np.arange(n), labels].mean()

    d_logits = np.exp(logp)
    d_logits[np.arange(n), labels] -= 1.0
    d_logits /= n
    d_flat = d_logits @ model.dense_w.T
    d_a = np.repeat(np.repeat(d_flat.reshape(pooled.shape), 2, axis=-2), 2, axis=-1) / 4.0
    d_z = d_a * (1.0 - a * a)
    grads = {
        "conv_w": np.einsum("bijxy,bkij->kxy", win, d_z),
        "conv_b": d_z.sum(axis=(0, 2, 3)),
        "dense_w": flat.T @ d_logits,
        "dense_b": d_logits.sum(axis=0),
    }
    return float(loss), grads


def loss_and_grad(model: CnnModel, x, label: int) -> tuple[float, dict[str, np.ndarray]]:
    """Cross-entropy loss of one ``(8, 8)`` window and gradients for every parameter."""
    if not (int(label) == label and 0 <= label < N_CLASSES):
        raise ValueError(f"label must be in [0, {N_CLASSES - 1}], got {label!r}")
    return batch_loss_and_grad(model, np.asarray(x, dtype=float)[None], np.array([int(label)]))


def accuracy(model: CnnModel, x, labels) -> float:
    return float(np.mean(np.argmax(model.forward(x), axis=-1) == np.asarray(labels)))


def train(model: CnnModel, x, labels, cfg: TrainingConfig = TrainingConfig()) -> tuple[CnnModel, list[float]]:
    """Mini-batch gradient descent on a copy of ``model``.

    Returns the trained model and the mean training loss of every epoch.
    With ``cfg.early_stop`` the loop ends after the first epoch that
    classifies the whole training set correctly.
    """
    x = np.asarray(x, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if x.shape[0] == 0:
        raise ValueError("training set is empty")
    model = model.copy()
    rng = np.random.default_rng(cfg.seed)
    history: list[float] = []
    n = x.shape[0]
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch):
            idx = order[start : start + cfg.batch]
            loss, grads = batch_loss_and_grad(model, x[idx], labels[idx])
            total += loss * idx.size
            for name, g in grads.items():
                getattr(model, name)[...] -= cfg.learning_rate * g
        history.append(total / n)
        if cfg.early_stop and accuracy(model, x, labels) == 1.0:
            break
    return model, history


def encode_bits(past: int, current: int, future: int) -> int:
    for b in (past, current, future):
        if b not in (0, 1):
            raise ValueError("bits must be 0 or 1")
    return 4 * past + 2 * current + future


def decode_class(c: int) -> tuple[int, int, int]:
    if not 0 <= c < N_CLASSES:
        raise ValueError(f"class must be in [0, {N_CLASSES - 1}]")
    return (c >> 2) & 1, (c >> 1) & 1, c & 1


def window_indices(w, timing_offset: int, n_samp: int = 16) -> np.ndarray:
    """Sample indices of the window that ends at symbol ``w``'s decision instant.

    The window spans ``WINDOW_SYMBOLS`` symbol slots, so its first sample
    follows the decision instant of symbol ``w - WINDOW_SYMBOLS``.
    """
    w = np.asarray(w)
    end = timing_offset + w * n_samp
    return end[..., None] + np.arange(-WINDOW_SYMBOLS * n_samp + 1, 1)


def extract_windows(filtered, positions, timing_offset: int, n_samp: int, norm: float) -> np.ndarray:
    """Normalized ``(len(positions), 8, 8)`` input windows."""
    x = np.asarray(filtered, dtype=float)
    idx = window_indices(np.asarray(positions), timing_offset, n_samp)
    if idx.size and (idx.min() < 0 or idx.max() >= x.size):
        raise IndexError("window reaches outside the filtered waveform")
    side = int(round(np.sqrt(WINDOW_SYMBOLS * n_samp)))
    if side * side != WINDOW_SYMBOLS * n_samp:
        raise ValueError(f"{WINDOW_SYMBOLS * n_samp} samples do not form a square window")
    return (x[idx] / norm).reshape(-1, side, side)


def build_training_set(filtered, probe_bits, timing_offset: int, n_samp: int = 16):
    """Labelled windows from the matched-filter output over the probe.

    One window per probe position ``w`` with ``w-4 >= 0`` and ``w+1`` still
    inside the probe, so each window sees a complete six-bit context. The
    label encodes ``(bit[w-1], bit[w], bit[w+1])``.

    Returns
    -------
    x : ndarray, shape (n, 8, 8)
    labels : ndarray of int, shape (n,)
    norm : float
        Max absolute matched-filter sample over the probe; apply the same
        factor to windows at prediction time.
    """
    bits = np.asarray(probe_bits, dtype=int)
    positions = np.arange(WINDOW_SYMBOLS, bits.size - 1)
    if positions.size == 0:
        raise ValueError(f"probe of {bits.size} bits is too short for {WINDOW_SYMBOLS}-symbol windows")
    x = np.asarray(filtered, dtype=float)
    span = window_indices(np.array([0, bits.size - 1]), timing_offset, n_samp)
    lo, hi = max(span[0, 0], 0), span[1, -1] + 1
    if hi > x.size:
        raise ValueError("filtered waveform ends before the probe does")
    norm = float(np.max(np.abs(x[lo:hi])))
    windows = extract_windows(x, positions, timing_offset, n_samp, norm)
    labels = 4 * bits[positions - 1] + 2 * bits[positions] + bits[positions + 1]
    return windows, labels, norm


def predict_classes(model: CnnModel, windows) -> np.ndarray:
    return np.argmax(model.forward(windows), axis=-1)


def predict_bits(model: CnnModel, window) -> tuple[int, int, int]:
    """(past, current, future) bits for one normalized ``(8, 8)`` window."""
    return decode_class(int(predict_classes(model, np.asarray(window, dtype=float))))


def save_model(model: CnnModel, path, norm: float | None = None) -> None:
    """Write a plain-text model: a header, one shape line per tensor, then values."""
    lines = ["chaoslink-cnn 1", f"input {model.input_shape[0]} {model.input_shape[1]}"]
    if norm is not None:
        lines.append(f"norm {norm!r}")
    for name, arr in model.params().items():
        lines.append(f"{name} " + " ".join(str(d) for d in arr.shape))
        lines.extend(repr(float(v)) for v in arr.ravel())
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> tuple[CnnModel, float | None]:
    """Inverse of :func:`save_model`; returns the model and the stored norm."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != "chaoslink-cnn 1":
        raise ValueError(f"{path}: not a chaoslink model file")
    pos = 1
    input_shape = tuple(int(v) for v in lines[pos].split()[1:])
    pos += 1
    norm = None
    if lines[pos].startswith("norm "):
        norm = float(lines[pos].split()[1])
        pos += 1
    arrays = {}
    for name in PARAM_NAMES:
        head = lines[pos].split()
        if head[0] != name:
            raise ValueError(f"{path}: expected {name}, found {head[0]}")
        shape = tuple(int(v) for v in head[1:])
        size = int(np.prod(shape))
        arrays[name] = np.array([float(v) for v in lines[pos + 1 : pos + 1 + size]]).reshape(shape)
        pos += 1 + size
    return CnnModel(input_shape=input_shape, **arrays), norm
