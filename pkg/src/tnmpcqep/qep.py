"""Quantum-enhanced post-aggregation processor.

The aggregated latent drives a layered Ry/Rz + CNOT-chain circuit through a
shallow trainable-shape angle encoder; Pauli expectations of a declared
observable set form the quantum feature q_raw, which is decoded, mixed with
a classical bypass of the encoder output, fused with the original latent,
and gated back onto it:

    e = Enc(x);  theta[l,q] = pi*s*(e_pair[q] + delta[l,q])
    q_raw = <P_j> over the observable set
    q = (1-beta)*Dec(q_raw) + beta*BP(e)
    z = Fusion([x; q]);  alpha = sigmoid(affine(LN(x)))
    f_out = alpha*z + (1-alpha)*x

No component is trained here; parameters are seeded draws or loaded from
the shared container format.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import expit

from .container import read_container, write_container
from .qsim import NOISELESS, NoiseSpec, PauliTerm, expectation, run_circuit, run_noisy

__all__ = [
    "OBSERVABLE_MODES",
    "QepParams",
    "QepDiagnostics",
    "suggest_qubits",
    "observable_set",
    "observable_count",
    "make_qep",
    "beta_from_raw",
    "encode_angles",
    "quantum_features",
    "qep_forward",
    "qubit_sweep",
    "save_qep_params",
    "load_qep_params",
    "write_diagnostics_csv",
]

OBSERVABLE_MODES = ("nearest_neighbor", "all_pairs")

DIAGNOSTICS_HEADER = ["batch_id", "n_q", "d_q", "alpha_mean", "q_std", "noise_kind", "seed"]

_LN_EPS = 1e-5

# seeded sub-stream labels, one per parameter group
_S_DELTA = 41
_S_ENCODER = 42
_S_DECODER = 43
_S_BYPASS = 44
_S_FUSION = 45
_S_ALPHA = 46


def suggest_qubits(d: int) -> int:
    """Smallest N_q with N_q^2 >= d (square-root scaling of the latent)."""
    if d < 1:
        raise ValueError("latent dimension must be >= 1")
    root = math.isqrt(d)
    return root if root * root == d else root + 1


def observable_set(n_q: int, mode: str = "nearest_neighbor"):
    """Deterministically ordered Pauli terms: X's, then Z's, then ZZ pairs."""
    if n_q < 2:
        raise ValueError("need at least 2 qubits for two-body observables")
    if mode not in OBSERVABLE_MODES:
        raise ValueError(f"mode must be one of {OBSERVABLE_MODES}, got {mode!r}")
    terms = [PauliTerm(((q, "X"),)) for q in range(n_q)]
    terms += [PauliTerm(((q, "Z"),)) for q in range(n_q)]
    if mode == "nearest_neighbor":
        pairs = [(q, q + 1) for q in range(n_q - 1)]
    else:
        pairs = [(i, j) for i in range(n_q) for j in range(i + 1, n_q)]
    terms += [PauliTerm(((i, "Z"), (j, "Z"))) for i, j in pairs]
    return terms


def observable_count(n_q: int, mode: str = "nearest_neighbor") -> int:
    if n_q < 2:
        raise ValueError("need at least 2 qubits for two-body observables")
    if mode not in OBSERVABLE_MODES:
        raise ValueError(f"mode must be one of {OBSERVABLE_MODES}, got {mode!r}")
    two_body = n_q - 1 if mode == "nearest_neighbor" else n_q * (n_q - 1) // 2
    return 2 * n_q + two_body


@dataclass(frozen=True)
class QepDiagnostics:
    alpha_mean: float
    q_std: float

    def __post_init__(self):
        if not 0.0 <= self.alpha_mean <= 1.0:
            raise ValueError("alpha_mean must lie in [0, 1]")
        if self.q_std < 0.0:
            raise ValueError("q_std must be non-negative")


@dataclass(frozen=True)
class QepParams:
    """All processor parameters; shapes keyed by (d, n_q, d_q).

    beta is stored directly in [0, 1]; the endpoints are legal so the mixing
    identities are expressible.  Values loaded from an unconstrained scalar
    pass through a sigmoid (see beta_from_raw) and land strictly inside.
    """

    d: int
    n_q: int
    layers: int
    scale: float
    beta: float
    mode: str
    seed: int
    delta: np.ndarray  # (layers, n_q, 2)
    enc_w1: np.ndarray  # (2n_q, d)
    enc_b1: np.ndarray
    enc_w2: np.ndarray  # (2n_q, 2n_q)
    enc_b2: np.ndarray
    dec_w1: np.ndarray  # (d, d_q)
    dec_b1: np.ndarray
    dec_w2: np.ndarray  # (d, d)
    dec_b2: np.ndarray
    bp_w: np.ndarray  # (d, 2n_q)
    bp_b: np.ndarray
    fus_w: np.ndarray  # (d, 2d)
    fus_b: np.ndarray
    alpha_w: np.ndarray  # (d,)
    alpha_b: float

    def __post_init__(self):
        if self.d < 1 or self.layers < 1:
            raise ValueError("d and layers must be >= 1")
        if self.n_q < 2:
            raise ValueError("n_q must be >= 2")
        if self.scale < 0.0:
            raise ValueError("angle scale must be non-negative")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        d, nq, dq = self.d, self.n_q, self.d_q
        expected = {
            "delta": (self.layers, nq, 2),
            "enc_w1": (2 * nq, d),
            "enc_b1": (2 * nq,),
            "enc_w2": (2 * nq, 2 * nq),
            "enc_b2": (2 * nq,),
            "dec_w1": (d, dq),
            "dec_b1": (d,),
            "dec_w2": (d, d),
            "dec_b2": (d,),
            "bp_w": (d, 2 * nq),
            "bp_b": (d,),
            "fus_w": (d, 2 * d),
            "fus_b": (d,),
            "alpha_w": (d,),
        }
        for name, shape in expected.items():
            got = np.asarray(getattr(self, name)).shape
            if got != shape:
                raise ValueError(f"{name} has shape {got}, expected {shape}")

    @property
    def d_q(self) -> int:
        return observable_count(self.n_q, self.mode)


def beta_from_raw(raw: float) -> float:
    """Unconstrained scalar -> (0, 1) mixing coefficient."""
    return float(expit(raw))


def _rng(seed: int, label: int) -> np.random.Generator:
    return np.random.default_rng([seed, label])


def make_qep(d: int = 64, n_q: int | None = None, layers: int = 2, scale: float = 0.5,
             beta: float = 0.5, mode: str = "nearest_neighbor", seed: int = 0) -> QepParams:
    """Seeded parameter draw; n_q defaults to suggest_qubits(d)."""
    if n_q is None:
        n_q = suggest_qubits(d)
    dq = observable_count(n_q, mode)
    g_delta = _rng(seed, _S_DELTA)
    delta = 0.1 * g_delta.standard_normal((layers, n_q, 2))
    g = _rng(seed, _S_ENCODER)
    enc_w1 = g.standard_normal((2 * n_q, d)) / np.sqrt(d)
    enc_b1 = 0.1 * g.standard_normal(2 * n_q)
    enc_w2 = g.standard_normal((2 * n_q, 2 * n_q)) / np.sqrt(2 * n_q)
    enc_b2 = 0.1 * g.standard_normal(2 * n_q)
    g = _rng(seed, _S_DECODER)
    dec_w1 = g.standard_normal((d, dq)) / np.sqrt(dq)
    dec_b1 = 0.1 * g.standard_normal(d)
    dec_w2 = g.standard_normal((d, d)) / np.sqrt(d)
    dec_b2 = 0.1 * g.standard_normal(d)
    g = _rng(seed, _S_BYPASS)
    bp_w = g.standard_normal((d, 2 * n_q)) / np.sqrt(2 * n_q)
    bp_b = 0.1 * g.standard_normal(d)
    g = _rng(seed, _S_FUSION)
    fus_w = g.standard_normal((d, 2 * d)) / np.sqrt(2 * d)
    fus_b = 0.1 * g.standard_normal(d)
    g = _rng(seed, _S_ALPHA)
    alpha_w = g.standard_normal(d) / np.sqrt(d)
    alpha_b = float(0.1 * g.standard_normal())
    return QepParams(d, n_q, layers, scale, beta, mode, seed, delta,
                     enc_w1, enc_b1, enc_w2, enc_b2,
                     dec_w1, dec_b1, dec_w2, dec_b2,
                     bp_w, bp_b, fus_w, fus_b, alpha_w, alpha_b)


def _layer_norm(v):
    return (v - v.mean()) / np.sqrt(v.var() + _LN_EPS)


def _ensure_finite(arr, stage: str):
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"non-finite values at stage '{stage}'")
    return arr


def encode_angles(x_agg, params: QepParams):
    """Shallow map to e in R^{2N_q}, then theta[l,q] = pi*s*(e_pair[q] + delta[l,q]).

    Even slots of e drive the Ry angles, odd slots the Rz angles.
    """
    x = np.asarray(x_agg, dtype=np.float64).reshape(-1)
    if x.shape != (params.d,):
        raise ValueError(f"expected a {params.d}-vector, got {x.shape}")
    _ensure_finite(x, "input")
    hidden = np.maximum(_layer_norm(params.enc_w1 @ x + params.enc_b1), 0.0)
    e = params.enc_w2 @ hidden + params.enc_b2
    _ensure_finite(e, "encoder")
    pairs = e.reshape(params.n_q, 2)
    theta = np.pi * params.scale * (pairs[np.newaxis, :, :] + params.delta)
    return e, theta


def _readout(theta, terms, noise: NoiseSpec):
    if noise.is_noiseless:
        state = run_circuit(theta)
        return np.array([expectation(state, t) for t in terms])
    return run_noisy(theta, noise).expectations(terms)


def quantum_features(x_agg, params: QepParams, noise: NoiseSpec | None = None) -> np.ndarray:
    """The raw observable vector q_raw in [-1, 1]^{d_q} for one latent."""
    noise = NOISELESS if noise is None else noise
    if not noise.is_noiseless and params.n_q > 10:
        raise ValueError("noisy evaluation is limited to 10 qubits")
    _, theta = encode_angles(x_agg, params)
    terms = observable_set(params.n_q, params.mode)
    return _ensure_finite(_readout(theta, terms, noise), "readout")


def qep_forward(x_agg, params: QepParams, noise: NoiseSpec | None = None):
    """Process one latent or a batch; returns (f_out, QepDiagnostics).

    Noiseless specs run on the statevector simulator; any other NoiseSpec
    switches to density-matrix evolution (n_q <= 10).
    """
    noise = NOISELESS if noise is None else noise
    if not noise.is_noiseless and params.n_q > 10:
        raise ValueError("noisy evaluation is limited to 10 qubits")
    xs = np.asarray(x_agg, dtype=np.float64)
    single = xs.ndim == 1
    xs = np.atleast_2d(xs)
    if xs.ndim != 2 or xs.shape[1] != params.d:
        raise ValueError(f"expected (m, {params.d}) latents, got {np.asarray(x_agg).shape}")
    _ensure_finite(xs, "input")

    terms = observable_set(params.n_q, params.mode)
    outs = np.empty_like(xs)
    alphas = np.empty(xs.shape[0])
    qs = np.empty((xs.shape[0], params.d))
    for i in range(xs.shape[0]):
        x = xs[i]
        e, theta = encode_angles(x, params)
        q_raw = _ensure_finite(_readout(theta, terms, noise), "readout")
        hidden = np.maximum(_layer_norm(params.dec_w1 @ q_raw + params.dec_b1), 0.0)
        q_dec = _ensure_finite(params.dec_w2 @ hidden + params.dec_b2, "decoder")
        q_bp = _ensure_finite(params.bp_w @ e + params.bp_b, "bypass")
        q = (1.0 - params.beta) * q_dec + params.beta * q_bp
        z = _ensure_finite(params.fus_w @ np.concatenate([x, q]) + params.fus_b, "fusion")
        alpha = float(expit(params.alpha_w @ _layer_norm(x) + params.alpha_b))
        outs[i] = alpha * z + (1.0 - alpha) * x
        alphas[i] = alpha
        qs[i] = q
    _ensure_finite(outs, "output")
    diag = QepDiagnostics(alpha_mean=float(alphas.mean()), q_std=float(qs.std()))
    return (outs[0] if single else outs), diag


def qubit_sweep(batch, n_q_list, *, kind: str = "ttn", mode: str = "nearest_neighbor",
                noise: NoiseSpec | None = None, seed: int = 0, config=None):
    """Run the demo pipeline once per qubit count; one record per N_q.

    batch is a LabeledBatch (see pipeline module); records carry the qubit
    count, feature width d_q, seed, wall-clock runtime, downstream accuracy,
    and the processor diagnostics.
    """
    from . import pipeline  # deferred, pipeline depends on this module

    if len(batch.labels) == 0:
        raise ValueError("empty batch")
    n_q_list = list(n_q_list)
    if not n_q_list:
        raise ValueError("need at least one qubit count")
    base = config if config is not None else pipeline.DemoConfig(
        kind=kind, observables=mode, seed=seed)
    records = []
    for n_q in n_q_list:
        cfg = replace(base, n_q=int(n_q), mode="quantum", noise=noise)
        t0 = time.perf_counter()
        report = pipeline.run_demo(cfg, data=batch)
        runtime = time.perf_counter() - t0
        records.append({
            "n_q": int(n_q),
            "d_q": observable_count(int(n_q), mode),
            "seed": cfg.seed,
            "runtime_s": runtime,
            "accuracy": report.metrics.accuracy,
            "f1": report.metrics.f1[1],
            "alpha_mean": report.diagnostics.alpha_mean,
            "q_std": report.diagnostics.q_std,
        })
    return records


# ------------------------------------------------------------------ bundles

_QEP_ENTRIES = ("delta", "enc_w1", "enc_b1", "enc_w2", "enc_b2",
                "dec_w1", "dec_b1", "dec_w2", "dec_b2",
                "bp_w", "bp_b", "fus_w", "fus_b", "alpha_w", "alpha_b")


def save_qep_params(params: QepParams, path) -> None:
    config = {
        "d": params.d, "n_q": params.n_q, "layers": params.layers,
        "scale": params.scale, "beta": params.beta, "mode": params.mode,
        "seed": params.seed,
    }
    entries = []
    for name in _QEP_ENTRIES:
        value = getattr(params, name)
        entries.append((name, np.atleast_1d(np.asarray(value, dtype=np.float64))))
    write_container(path, "qep", config, entries, extra={"seed": params.seed})


def load_qep_params(path) -> QepParams:
    header, arrays = read_container(path, kind="qep")
    if set(arrays) != set(_QEP_ENTRIES):
        raise ValueError("bundle entry names do not match the processor layout")
    cfg = dict(header["config"])
    if "beta_raw" in cfg:  # unconstrained storage squashes into (0, 1)
        cfg["beta"] = beta_from_raw(cfg.pop("beta_raw"))
    return QepParams(
        d=int(cfg["d"]), n_q=int(cfg["n_q"]), layers=int(cfg["layers"]),
        scale=float(cfg["scale"]), beta=float(cfg["beta"]), mode=cfg["mode"],
        seed=int(cfg["seed"]),
        delta=arrays["delta"],
        enc_w1=arrays["enc_w1"], enc_b1=arrays["enc_b1"],
        enc_w2=arrays["enc_w2"], enc_b2=arrays["enc_b2"],
        dec_w1=arrays["dec_w1"], dec_b1=arrays["dec_b1"],
        dec_w2=arrays["dec_w2"], dec_b2=arrays["dec_b2"],
        bp_w=arrays["bp_w"], bp_b=arrays["bp_b"],
        fus_w=arrays["fus_w"], fus_b=arrays["fus_b"],
        alpha_w=arrays["alpha_w"], alpha_b=float(arrays["alpha_b"][0]),
    )


def write_diagnostics_csv(rows, path) -> None:
    """Rows of dicts with the fixed diagnostics header."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(DIAGNOSTICS_HEADER)
        for row in rows:
            writer.writerow([row[key] for key in DIAGNOSTICS_HEADER])
