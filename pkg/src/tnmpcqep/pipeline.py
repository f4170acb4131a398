"""End-to-end demo: client encodings, weighted aggregation, QEP, readout.

The flow mirrors a one-shot federated round.  Every image lives on exactly
one of n clients; each sample becomes one aggregation event in which the
owner contributes its encoded latent and every other client a zero vector,
so event traffic never depends on who holds the data.  The decoded
aggregate is optionally refined by the quantum processor, then an affine
softmax readout plus a validated threshold turns latents into labels.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass, replace
from typing import Callable, Optional

import numpy as np

from . import bench, qep, tn
from .mpc import CostReport
from .qsim import NoiseSpec

IMAGE_SIDE = 28

# pipeline-owned seed stream labels; tn uses 1x/2x/3x, qep 4x
_S_SYNTH = 71


# ---------------------------------------------------------------- aggregation


def _check_weights(w: np.ndarray) -> None:
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    if np.any(w < 0.0):
        raise ValueError("weights must be nonnegative")
    if not w.sum() > 0.0:
        raise ValueError("weights must have a positive sum")


@dataclass(frozen=True)
class AggregationConfig:
    """Client count plus the numeric knobs of the (secure) weighted mean."""

    n: int = 16
    weights: Optional[tuple] = None
    epsilon: float = 1e-6
    fraction_bits: int = 20
    k: int = 64
    theta: int = 5

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one client, got n={self.n}")
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=np.float64)
            if w.shape != (self.n,):
                raise ValueError(f"need {self.n} weights, got shape {w.shape}")
            _check_weights(w)
            object.__setattr__(self, "weights", tuple(float(v) for v in w))


def aggregate_plain(features, weights, epsilon: float = 1e-6) -> np.ndarray:
    """x = (sum_i w_i f_i) / (sum_i w_i + epsilon), elementwise over d."""
    features = np.asarray(features, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if features.ndim != 2:
        raise ValueError(f"features must be (n, d), got {features.shape}")
    if weights.shape != (features.shape[0],):
        raise ValueError(f"need one weight per client, got {weights.shape}")
    if not epsilon > 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    _check_weights(weights)
    return (weights @ features) / (weights.sum() + epsilon)


def aggregate_secure(features, weights, cfg: AggregationConfig, seed: int = 0):
    """Weighted mean under the 3-party protocol; returns (x_agg, CostReport).

    The domain checks run before any protocol message, so an all-zero
    weight vector cannot leak a round of traffic.
    """
    features = np.asarray(features, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] != cfg.n:
        raise ValueError(f"features must be ({cfg.n}, d), got {features.shape}")
    if weights.shape != (cfg.n,):
        raise ValueError(f"need {cfg.n} weights, got shape {weights.shape}")
    _check_weights(weights)
    bcfg = bench.BenchConfig(
        n=cfg.n,
        d=features.shape[1],
        k=cfg.k,
        theta=cfg.theta,
        fraction_bits=cfg.fraction_bits,
        epsilon=cfg.epsilon,
    )
    return bench.execute_scenario(bcfg, 2, seed=seed, features=features, weights=weights)


# ----------------------------------------------------------------------- data


@dataclass(frozen=True)
class LabeledBatch:
    """28x28 grayscale images in [0, 1] with binary labels (1 = positive)."""

    images: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        images = np.asarray(self.images, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if images.ndim != 3 or images.shape[1:] != (IMAGE_SIDE, IMAGE_SIDE):
            raise ValueError(f"images must be (m, 28, 28), got {images.shape}")
        if labels.shape != (images.shape[0],):
            raise ValueError("one label per image")
        if images.size and (images.min() < 0.0 or images.max() > 1.0):
            raise ValueError("pixels must lie in [0, 1]")
        if labels.size and not np.isin(labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.images.shape[0]

    def take(self, idx) -> "LabeledBatch":
        return LabeledBatch(self.images[idx], self.labels[idx])


def synth_data(n_samples: int, seed: int = 0, class_geometry=None) -> LabeledBatch:
    """Two-class blob images: class 0 lights the upper half, class 1 the lower.

    Each image is a Gaussian bump at a jittered class center plus pixel
    noise, clipped to [0, 1].  Labels alternate 0, 1, 0, 1 so any contiguous
    slice stays near-balanced.
    """
    if n_samples < 2:
        raise ValueError(f"need at least two samples, got {n_samples}")
    centers = ((9.0, 14.0), (19.0, 14.0)) if class_geometry is None else tuple(class_geometry)
    rng = np.random.default_rng([seed, _S_SYNTH])
    labels = np.arange(n_samples, dtype=np.int64) % 2
    rows, cols = np.mgrid[0:IMAGE_SIDE, 0:IMAGE_SIDE]
    images = np.empty((n_samples, IMAGE_SIDE, IMAGE_SIDE))
    for i in range(n_samples):
        cr, cc = centers[labels[i]]
        cr += rng.uniform(-1.0, 1.0)
        cc += rng.uniform(-1.0, 1.0)
        bump = 0.9 * np.exp(-((rows - cr) ** 2 + (cols - cc) ** 2) / (2.0 * 5.0**2))
        images[i] = np.clip(bump + rng.normal(0.0, 0.05, size=bump.shape), 0.0, 1.0)
    return LabeledBatch(images, labels)


def partition_stratified(labels, n_clients: int):
    """Deal each label's indices round-robin across clients.

    Per-client counts of every label land within one of proportional.
    """
    labels = np.asarray(labels)
    if n_clients < 1:
        raise ValueError(f"need at least one client, got {n_clients}")
    buckets = [[] for _ in range(n_clients)]
    for lab in np.unique(labels):
        for j, s in enumerate(np.flatnonzero(labels == lab)):
            buckets[j % n_clients].append(int(s))
    return [np.array(sorted(b), dtype=np.int64) for b in buckets]


# ------------------------------------------------------------------ IDX files

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801


def _read_exact(fh, count: int, path, what: str) -> bytes:
    buf = fh.read(count)
    if len(buf) != count:
        raise ValueError(
            f"{path}: truncated {what} at offset {fh.tell() - len(buf)}, "
            f"wanted {count} bytes, got {len(buf)}"
        )
    return buf


def _read_idx(path, magic: int, n_dims: int):
    with open(path, "rb") as fh:
        got = struct.unpack(">I", _read_exact(fh, 4, path, "magic"))[0]
        if got != magic:
            raise ValueError(
                f"{path}: bad magic 0x{got:08x} at offset 0, expected 0x{magic:08x}"
            )
        dims = struct.unpack(f">{n_dims}I", _read_exact(fh, 4 * n_dims, path, "dimension header"))
        count = int(np.prod(dims))
        data = np.frombuffer(_read_exact(fh, count, path, "pixel payload"), dtype=np.uint8)
        if fh.read(1):
            raise ValueError(f"{path}: trailing bytes after the {count}-byte payload")
    return dims, data.reshape(dims)


def load_idx(images_path, labels_path) -> LabeledBatch:
    """Read an IDX image/label file pair; pixels come back scaled to [0, 1]."""
    idims, images = _read_idx(images_path, IDX_IMAGE_MAGIC, 3)
    ldims, labels = _read_idx(labels_path, IDX_LABEL_MAGIC, 1)
    if idims[0] != ldims[0]:
        raise ValueError(
            f"{images_path} holds {idims[0]} images but {labels_path} holds "
            f"{ldims[0]} labels"
        )
    if idims[1:] != (IMAGE_SIDE, IMAGE_SIDE):
        raise ValueError(f"expected 28x28 images, got {idims[1]}x{idims[2]}")
    return LabeledBatch(images.astype(np.float64) / 255.0, labels.astype(np.int64))


def write_idx(batch: LabeledBatch, images_path, labels_path) -> None:
    """Inverse of load_idx; pixels quantize to the u8 grid."""
    m = len(batch)
    with open(images_path, "wb") as fh:
        fh.write(struct.pack(">IIII", IDX_IMAGE_MAGIC, m, IMAGE_SIDE, IMAGE_SIDE))
        fh.write(np.rint(batch.images * 255.0).astype(np.uint8).tobytes())
    with open(labels_path, "wb") as fh:
        fh.write(struct.pack(">II", IDX_LABEL_MAGIC, m))
        fh.write(batch.labels.astype(np.uint8).tobytes())


# -------------------------------------------------------------------- readout


@dataclass(frozen=True)
class ReadoutParams:
    """Affine d -> 2 softmax head with the standardization baked in."""

    w: np.ndarray
    b: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    loss_history: tuple = ()


def _softmax_rows(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def readout_loss(w, b, features, labels, class_weights=(1.0, 1.0)) -> float:
    """Class-weighted cross-entropy, normalized by the total sample weight."""
    p = _softmax_rows(np.asarray(features) @ np.asarray(w).T + np.asarray(b))
    labels = np.asarray(labels)
    cw = np.asarray(class_weights, dtype=np.float64)[labels]
    nll = -np.log(np.clip(p[np.arange(labels.size), labels], 1e-300, None))
    return float((cw * nll).sum() / cw.sum())


def readout_grad(w, b, features, labels, class_weights=(1.0, 1.0)):
    """Analytic (dL/dw, dL/db) for readout_loss."""
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    p = _softmax_rows(features @ np.asarray(w).T + np.asarray(b))
    cw = np.asarray(class_weights, dtype=np.float64)[labels]
    g = cw[:, None] * (p - np.eye(2)[labels]) / cw.sum()
    return g.T @ features, g.sum(axis=0)


def train_readout(features, labels, class_weights=(1.0, 1.0), steps: int = 300,
                  lr: float = 0.5) -> ReadoutParams:
    """Full-batch gradient descent from zero init on standardized features.

    The step halves whenever it would increase the loss, so the recorded
    trajectory is non-increasing; the objective is convex, so the guard
    only ever fires near machine precision or after an over-eager step.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if features.ndim != 2 or labels.shape != (features.shape[0],):
        raise ValueError("features must be (m, d) with one label per row")
    if features.shape[0] < 2:
        raise ValueError("need at least two samples")
    if not np.array_equal(np.unique(labels), [0, 1]):
        raise ValueError("training needs both classes present")
    if len(class_weights) != 2 or min(class_weights) <= 0.0:
        raise ValueError("class_weights must be two positive reals")

    mu = features.mean(axis=0)
    sigma = features.std(axis=0)
    sigma = np.where(sigma < 1e-8, 1.0, sigma)
    z = (features - mu) / sigma

    w = np.zeros((2, features.shape[1]))
    b = np.zeros(2)
    losses = [readout_loss(w, b, z, labels, class_weights)]
    step = float(lr)
    for _ in range(steps):
        gw, gb = readout_grad(w, b, z, labels, class_weights)
        accepted = False
        while step >= 1e-12:
            cand_w, cand_b = w - step * gw, b - step * gb
            cand = readout_loss(cand_w, cand_b, z, labels, class_weights)
            if cand <= losses[-1]:
                w, b = cand_w, cand_b
                losses.append(cand)
                accepted = True
                break
            step *= 0.5
        if not accepted:
            losses.append(losses[-1])  # stalled at machine precision
        else:
            step = min(step * 1.1, 10.0 * lr)
    return ReadoutParams(w=w, b=b, mu=mu, sigma=sigma, loss_history=tuple(losses))


def readout_scores(params: ReadoutParams, features) -> np.ndarray:
    """Positive-class probability per row."""
    z = (np.asarray(features, dtype=np.float64) - params.mu) / params.sigma
    return _softmax_rows(z @ params.w.T + params.b)[:, 1]


# ----------------------------------------------------------------- thresholds


def _ratio(num, den) -> float:
    return 0.0 if den == 0 else float(num) / float(den)


def _harmonic(p: float, r: float) -> float:
    return 0.0 if p + r == 0.0 else 2.0 * p * r / (p + r)


@dataclass(frozen=True)
class EvalReport:
    """Confusion metrics at a fixed threshold; class order (negative, positive)."""

    threshold: float
    accuracy: float
    precision: tuple
    recall: tuple
    f1: tuple
    confusion: tuple  # (tn, fp, fn, tp)
    n: int

    def __post_init__(self):
        rates = (self.accuracy, *self.precision, *self.recall, *self.f1)
        if any(not 0.0 <= r <= 1.0 for r in rates):
            raise ValueError("all rates must lie in [0, 1]")
        if len(self.confusion) != 4 or any(c < 0 for c in self.confusion):
            raise ValueError("confusion must be four nonnegative counts")
        if sum(self.confusion) != self.n:
            raise ValueError("confusion counts must sum to n")

    def to_dict(self) -> dict:
        tn_, fp, fn, tp = self.confusion
        return {
            "threshold": self.threshold,
            "accuracy": self.accuracy,
            "precision": list(self.precision),
            "recall": list(self.recall),
            "f1": list(self.f1),
            "confusion": {"tn": tn_, "fp": fp, "fn": fn, "tp": tp},
            "n": self.n,
        }


def evaluate(scores, labels, tau: float) -> EvalReport:
    """Tabulate at threshold tau; score >= tau predicts the positive class.

    Zero-denominator precision/recall collapse to 0 rather than raising.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pred = scores >= tau
    actual = labels == 1
    tp = int(np.sum(pred & actual))
    fp = int(np.sum(pred & ~actual))
    fn = int(np.sum(~pred & actual))
    tn_ = int(np.sum(~pred & ~actual))
    prec = (_ratio(tn_, tn_ + fn), _ratio(tp, tp + fp))
    rec = (_ratio(tn_, tn_ + fp), _ratio(tp, tp + fn))
    return EvalReport(
        threshold=float(tau),
        accuracy=_ratio(tp + tn_, scores.size),
        precision=prec,
        recall=rec,
        f1=(_harmonic(prec[0], rec[0]), _harmonic(prec[1], rec[1])),
        confusion=(tn_, fp, fn, tp),
        n=int(scores.size),
    )


def threshold_candidates(scores) -> np.ndarray:
    """Midpoints of adjacent sorted unique scores plus the two sentinels."""
    u = np.unique(np.asarray(scores, dtype=np.float64))
    return np.concatenate([[-np.inf], (u[:-1] + u[1:]) / 2.0, [np.inf]])


def select_threshold(scores, labels, metric: str = "youden") -> float:
    """tau maximizing Youden's J = TPR - FPR (or positive-class F1).

    Ties resolve toward the lower tau, i.e. toward higher recall.
    """
    if metric not in ("youden", "f1"):
        raise ValueError(f"metric must be 'youden' or 'f1', got {metric!r}")
    labels = np.asarray(labels)
    if labels.size == 0 or len(np.unique(labels)) < 2:
        raise ValueError("threshold selection needs both classes present")
    best_tau, best_val = None, -np.inf
    for tau in threshold_candidates(scores):
        rep = evaluate(scores, labels, tau)
        tn_, fp, fn, tp = rep.confusion
        if metric == "youden":
            val = _ratio(tp, tp + fn) - _ratio(fp, fp + tn_)
        else:
            val = rep.f1[1]
        if val > best_val:  # strict, so the lowest maximizing tau wins
            best_val, best_tau = val, float(tau)
    return best_tau


# ----------------------------------------------------------------------- demo

_DEMO_MODES = ("classical", "quantum")
_FRONTEND_KINDS = ("mps", "ttn", "mera")


@dataclass(frozen=True)
class DemoConfig:
    """One end-to-end run, fully determined by its fields; JSON-echoable."""

    kind: str = "ttn"
    observables: str = "nearest_neighbor"
    seed: int = 0
    n_q: int = 8
    mode: str = "quantum"
    noise: Optional[NoiseSpec] = None
    secure: bool = False
    n_clients: int = 16
    n_train: int = 400
    n_test: int = 100
    d: int = 64
    layers: int = 2
    scale: float = 0.5
    beta: float = 0.5
    epsilon: float = 1e-6
    fraction_bits: int = 20
    k: int = 64
    theta: int = 5
    train_steps: int = 300
    lr: float = 0.5
    class_weights: tuple = (1.0, 1.0)
    threshold_metric: str = "youden"

    def __post_init__(self):
        if self.kind not in _FRONTEND_KINDS:
            raise ValueError(f"kind must be one of {_FRONTEND_KINDS}, got {self.kind!r}")
        if self.mode not in _DEMO_MODES:
            raise ValueError(f"mode must be one of {_DEMO_MODES}, got {self.mode!r}")
        if self.observables not in qep.OBSERVABLE_MODES:
            raise ValueError(f"unknown observable mode {self.observables!r}")
        if self.noise is not None and not isinstance(self.noise, NoiseSpec):
            raise TypeError("noise must be a NoiseSpec or None")
        if self.n_q < 1:
            raise ValueError(f"n_q must be positive, got {self.n_q}")
        if self.n_clients < 1:
            raise ValueError(f"need at least one client, got {self.n_clients}")
        if self.n_train < 2 or self.n_test < 1:
            raise ValueError("need n_train >= 2 and n_test >= 1")
        if len(self.class_weights) != 2:
            raise ValueError("class_weights must be a pair")
        if self.threshold_metric not in ("youden", "f1"):
            raise ValueError(f"unknown threshold metric {self.threshold_metric!r}")
        object.__setattr__(self, "class_weights", tuple(float(v) for v in self.class_weights))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DemoReport:
    """Config echo plus metrics, processor diagnostics, and traffic."""

    config: dict
    metrics: EvalReport
    diagnostics: qep.QepDiagnostics
    cost: CostReport

    def to_json(self) -> str:
        payload = {
            "config": self.config,
            "metrics": self.metrics.to_dict(),
            "diagnostics": {
                "alpha_mean": self.diagnostics.alpha_mean,
                "q_std": self.diagnostics.q_std,
            },
            "cost": {
                "client_to_node_bits": self.cost.client_to_node_bits,
                "node_to_node_bits": self.cost.node_to_node_bits,
                "reconstruction_bits": self.cost.reconstruction_bits,
                "total_bits": self.cost.total_bits,
            },
        }
        return json.dumps(payload, sort_keys=True, indent=2)


def _split(data: LabeledBatch, cfg: DemoConfig):
    m = len(data)
    if m >= cfg.n_train + cfg.n_test:
        n_tr, n_te = cfg.n_train, cfg.n_test
    else:
        n_te = max(1, m // 5)  # smaller batches keep the 4:1 feel
        n_tr = m - n_te
    if n_tr < 2:
        raise ValueError(f"batch of {m} samples is too small to split")
    return data.take(np.arange(n_tr)), data.take(np.arange(n_tr, n_tr + n_te))


def _owners(labels, n_clients: int) -> np.ndarray:
    owners = np.empty(len(labels), dtype=np.int64)
    for c, idx in enumerate(partition_stratified(labels, n_clients)):
        owners[idx] = c
    return owners


def _per_sample_aggregate(feats, owners, weights, acfg: AggregationConfig,
                          secure: bool, seed: int):
    """One aggregation event per sample; returns (x_agg rows, total cost)."""
    out = np.empty_like(feats)
    total = CostReport()
    for s in range(feats.shape[0]):
        event = np.zeros((acfg.n, feats.shape[1]))
        event[owners[s]] = feats[s]
        if secure:
            x, rep = aggregate_secure(event, weights, acfg, seed=seed)
            total = total + rep
        else:
            x = aggregate_plain(event, weights, acfg.epsilon)
        out[s] = x
    return out, total


def run_demo(cfg: DemoConfig, data: Optional[LabeledBatch] = None,
             gate: Optional[Callable] = None,
             qep_params: Optional[qep.QepParams] = None) -> DemoReport:
    """Run the full pipeline once and evaluate on the held-out split.

    gate is the post-decode hook applied to each aggregated latent before
    the processor (identity when None).  qep_params overrides the seeded
    processor draw, which keeps endpoint experiments (alpha pinned to an
    extreme) expressible without touching the config.
    """
    if data is None:
        data = synth_data(cfg.n_train + cfg.n_test, seed=cfg.seed)
    train, test = _split(data, cfg)

    frontend = tn.make_frontend(tn.FrontendConfig(kind=cfg.kind, d=cfg.d, seed=cfg.seed))
    feats_train = tn.encode_batch(train.images.reshape(len(train), -1), frontend)
    feats_test = tn.encode_batch(test.images.reshape(len(test), -1), frontend)

    # client weights are train sample counts; test events reuse them
    parts = partition_stratified(train.labels, cfg.n_clients)
    weights = np.array([len(p) for p in parts], dtype=np.float64)
    acfg = AggregationConfig(n=cfg.n_clients, epsilon=cfg.epsilon,
                             fraction_bits=cfg.fraction_bits, k=cfg.k, theta=cfg.theta)
    x_train, cost_tr = _per_sample_aggregate(
        feats_train, _owners(train.labels, cfg.n_clients), weights, acfg, cfg.secure, cfg.seed)
    x_test, cost_te = _per_sample_aggregate(
        feats_test, _owners(test.labels, cfg.n_clients), weights, acfg, cfg.secure, cfg.seed)
    cost = cost_tr + cost_te

    if gate is not None:
        x_train = np.stack([np.asarray(gate(x), dtype=np.float64) for x in x_train])
        x_test = np.stack([np.asarray(gate(x), dtype=np.float64) for x in x_test])

    if cfg.mode == "quantum":
        params = qep_params if qep_params is not None else qep.make_qep(
            d=cfg.d, n_q=cfg.n_q, layers=cfg.layers, scale=cfg.scale,
            beta=cfg.beta, mode=cfg.observables, seed=cfg.seed)
        f_all, diag = qep.qep_forward(
            np.concatenate([x_train, x_test]), params, noise=cfg.noise)
        f_train, f_test = f_all[: len(x_train)], f_all[len(x_train):]
    else:
        f_train, f_test = x_train, x_test
        diag = qep.QepDiagnostics(alpha_mean=0.0, q_std=0.0)

    readout = train_readout(f_train, train.labels, class_weights=cfg.class_weights,
                            steps=cfg.train_steps, lr=cfg.lr)
    tau = select_threshold(readout_scores(readout, f_train), train.labels,
                           metric=cfg.threshold_metric)
    metrics = evaluate(readout_scores(readout, f_test), test.labels, tau)
    return DemoReport(config=cfg.to_dict(), metrics=metrics, diagnostics=diag, cost=cost)


NOISE_SWEEP_KINDS = ("noiseless", "depolarizing", "thermal", "mixed")


def noise_sweep(kinds=NOISE_SWEEP_KINDS, seeds=(0, 1, 2), n_q: int = 8,
                p: float = 0.01, gamma: float = 0.01,
                config: Optional[DemoConfig] = None,
                data: Optional[LabeledBatch] = None):
    """One demo run per (noise kind, seed); records mirror the qubit sweep."""
    base = config if config is not None else DemoConfig()
    records = []
    for kind in kinds:
        if kind == "noiseless":
            noise = None
        elif kind in ("depolarizing", "thermal", "mixed"):
            noise = NoiseSpec(kind=kind, p=p, gamma_amp=gamma, gamma_phase=gamma)
        else:
            raise ValueError(f"unknown noise kind {kind!r}")
        for seed in seeds:
            cfg = replace(base, seed=int(seed), n_q=int(n_q), mode="quantum", noise=noise)
            report = run_demo(cfg, data=data)
            records.append({
                "noise_kind": kind,
                "seed": int(seed),
                "n_q": int(n_q),
                "p": 0.0 if noise is None else p,
                "gamma": 0.0 if noise is None else gamma,
                "accuracy": report.metrics.accuracy,
                "f1": report.metrics.f1[1],
                "alpha_mean": report.diagnostics.alpha_mean,
                "q_std": report.diagnostics.q_std,
            })
    return records
