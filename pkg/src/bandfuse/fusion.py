"""Trainable fusion of band functionals into a prediction.

Five strategies: mean-pool (MP), gated-pool (GP), mixture-of-experts (MoE,
fuses per-band logits), hybrid gating on handcrafted features (HYB), and a
single-layer self-attention encoder with a CLS token (SA). Forward passes
and gradients are written out by hand in numpy so they can be verified
against finite differences; training is plain mini-batch SGD with momentum.
"""

from __future__ import annotations

import base64
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from bandfuse.encoder import Functional

STRATEGIES = ("MP", "GP", "MoE", "HYB", "SA")

CHECKPOINT_VERSION = 1
_LN_EPS = 1e-5


class FusionError(ValueError):
    """Raised on configuration or shape errors."""


class TrainingDivergence(RuntimeError):
    """Raised when the loss becomes non-finite during training."""


@dataclass
class FusionConfig:
    strategy: str
    band_count: int
    dim: int
    class_count: int
    seed: int = 0
    epochs: int = 20
    learning_rate: float = 1e-2
    batch_size: int = 32
    momentum: float = 0.9
    gate_hidden: int = 64
    attn_heads: int = 4

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise FusionError(f"unknown strategy {self.strategy!r}, expected one of {STRATEGIES}")
        if self.band_count < 1 or self.dim < 1:
            raise FusionError("band_count and dim must be >= 1")
        if self.class_count < 2:
            raise FusionError("class_count must be >= 2")
        if self.epochs < 1 or self.batch_size < 1:
            raise FusionError("epochs and batch_size must be >= 1")
        if self.strategy == "SA" and self.dim % self.attn_heads != 0:
            raise FusionError(f"dim {self.dim} is not divisible by attn_heads {self.attn_heads}")


@dataclass(eq=False)
class BandFeatureSet:
    """Per-clip fusion input: B x D functionals, optional B x 2 handcrafted features."""

    functionals: np.ndarray
    handcrafted: np.ndarray | None = None
    label: int | None = None

    def __post_init__(self):
        self.functionals = np.asarray(self.functionals, dtype=np.float64)
        if self.functionals.ndim != 2:
            raise FusionError("functionals must be a B x D matrix")
        if not np.all(np.isfinite(self.functionals)):
            raise FusionError("functionals contain NaN or Inf")
        if self.handcrafted is not None:
            self.handcrafted = np.asarray(self.handcrafted, dtype=np.float64)
            if self.handcrafted.shape != (self.functionals.shape[0], 2):
                raise FusionError("handcrafted features must be B x 2")


@dataclass(eq=False)
class FusionModel:
    config: FusionConfig
    params: dict[str, np.ndarray]

    def copy(self) -> "FusionModel":
        return FusionModel(self.config, {k: v.copy() for k, v in self.params.items()})


# ---------------------------------------------------------------------------
# initialization

def _uniform(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    a = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-a, a, size=shape)


def init_model(config: FusionConfig, rng: np.random.Generator | None = None) -> FusionModel:
    """Draw initial parameters.

    The classifier tensors are drawn first so that, for a given seed, every
    strategy (and the B=1 probe) starts from the same classifier weights.
    Gate output layers start at zero, making all gated strategies behave as
    mean-pool at initialization.
    """
    if rng is None:
        rng = np.random.default_rng([config.seed, 0])
    b, d, c, h = config.band_count, config.dim, config.class_count, config.gate_hidden
    p: dict[str, np.ndarray] = {}
    if config.strategy == "MoE":
        p["head_w"] = _uniform(rng, (b, c, d), d)
        p["head_b"] = np.zeros((b, c))
        p["gate_w1"] = _uniform(rng, (d, h), d)
        p["gate_b1"] = np.zeros(h)
        p["gate_w2"] = np.zeros(h)
        p["gate_b2"] = np.zeros(1)
        return FusionModel(config, p)

    p["cls_w"] = _uniform(rng, (c, d), d)
    p["cls_b"] = np.zeros(c)
    if config.strategy == "GP":
        p["gate_w"] = np.zeros(d)
        p["gate_b"] = np.zeros(1)
    elif config.strategy == "HYB":
        p["gate_w1"] = _uniform(rng, (d + 2, h), d + 2)
        p["gate_b1"] = np.zeros(h)
        p["gate_w2"] = _uniform(rng, (h, h), h)
        p["gate_b2"] = np.zeros(h)
        p["gate_w3"] = np.zeros(h)
        p["gate_b3"] = np.zeros(1)
    elif config.strategy == "SA":
        p["cls_tok"] = _uniform(rng, (d,), d)
        p["pos"] = _uniform(rng, (b + 1, d), d)
        for name in ("wq", "wk", "wv", "wo"):
            p[name] = _uniform(rng, (d, d), d)
        for name in ("bq", "bk", "bv", "bo"):
            p[name] = np.zeros(d)
        p["ln1_g"] = np.ones(d)
        p["ln1_b"] = np.zeros(d)
        p["ln2_g"] = np.ones(d)
        p["ln2_b"] = np.zeros(d)
        p["ff_w1"] = _uniform(rng, (d, 2 * d), d)
        p["ff_b1"] = np.zeros(2 * d)
        p["ff_w2"] = _uniform(rng, (2 * d, d), 2 * d)
        p["ff_b2"] = np.zeros(d)
    return FusionModel(config, p)


# ---------------------------------------------------------------------------
# shared numerics

def _softmax(z: np.ndarray, axis: int = -1) -> np.ndarray:
    z = z - z.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def _softmax_backward(w: np.ndarray, dw: np.ndarray) -> np.ndarray:
    # rows of w sum to 1 along the last axis
    return w * (dw - (w * dw).sum(axis=-1, keepdims=True))


def _weighted_sum(w: np.ndarray, f: np.ndarray) -> np.ndarray:
    # (N, B) weights against (N, B, D) functionals
    return np.einsum("nb,nbd->nd", w, f)


def _layernorm_forward(x, gamma, beta):
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    inv = 1.0 / np.sqrt((xc * xc).mean(axis=-1, keepdims=True) + _LN_EPS)
    xhat = xc * inv
    return xhat * gamma + beta, (xhat, inv, gamma)


def _layernorm_backward(dy, cache):
    xhat, inv, gamma = cache
    axes = tuple(range(dy.ndim - 1))
    dgamma = (dy * xhat).sum(axis=axes)
    dbeta = dy.sum(axis=axes)
    dxhat = dy * gamma
    dx = inv * (dxhat - dxhat.mean(axis=-1, keepdims=True)
                - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True))
    return dx, dgamma, dbeta


# ---------------------------------------------------------------------------
# forward passes (batched); each returns (logits, cache)

def _check_shapes(config: FusionConfig, f: np.ndarray, hc: np.ndarray | None):
    n, b, d = f.shape
    if b != config.band_count or d != config.dim:
        raise FusionError(
            f"features are B={b}, D={d} but model expects B={config.band_count}, D={config.dim}"
        )
    if hc is not None and hc.shape != (n, b, 2):
        raise FusionError("handcrafted features must be N x B x 2")


def _classifier_forward(p, x):
    return x @ p["cls_w"].T + p["cls_b"]


def _forward_mp(p, config, f, hc):
    n, b, _ = f.shape
    w = np.full((n, b), 1.0 / b)
    x = _weighted_sum(w, f)
    return _classifier_forward(p, x), {"f": f, "w": w, "x": x}


def _forward_gp(p, config, f, hc):
    s = f @ p["gate_w"] + p["gate_b"]
    w = _softmax(s, axis=1)
    x = _weighted_sum(w, f)
    return _classifier_forward(p, x), {"f": f, "w": w, "x": x}


def _forward_moe(p, config, f, hc):
    z = np.einsum("nbd,bcd->nbc", f, p["head_w"]) + p["head_b"][None]
    pre1 = f @ p["gate_w1"] + p["gate_b1"]
    h1 = np.maximum(pre1, 0.0)
    s = h1 @ p["gate_w2"] + p["gate_b2"]
    w = _softmax(s, axis=1)
    logits = np.einsum("nb,nbc->nc", w, z)
    return logits, {"f": f, "z": z, "pre1": pre1, "h1": h1, "w": w}


def _forward_hyb(p, config, f, hc):
    if hc is None:
        raise FusionError("hybrid fusion requires handcrafted features (entropy, flux) per band")
    u = np.concatenate([f, hc], axis=2)
    pre1 = u @ p["gate_w1"] + p["gate_b1"]
    h1 = np.maximum(pre1, 0.0)
    pre2 = h1 @ p["gate_w2"] + p["gate_b2"]
    h2 = np.maximum(pre2, 0.0)
    s = h2 @ p["gate_w3"] + p["gate_b3"]
    w = _softmax(s, axis=1)
    x = _weighted_sum(w, f)
    return _classifier_forward(p, x), {
        "f": f, "u": u, "pre1": pre1, "h1": h1, "pre2": pre2, "h2": h2, "w": w, "x": x,
    }


def _forward_sa(p, config, f, hc):
    n, b, d = f.shape
    heads = config.attn_heads
    dh = d // heads
    tok = np.concatenate([np.broadcast_to(p["cls_tok"], (n, 1, d)), f], axis=1)
    h0 = tok + p["pos"][None]
    s_len = b + 1

    u, ln1 = _layernorm_forward(h0, p["ln1_g"], p["ln1_b"])
    q = u @ p["wq"] + p["bq"]
    k = u @ p["wk"] + p["bk"]
    v = u @ p["wv"] + p["bv"]

    def split(m):
        return m.reshape(n, s_len, heads, dh).transpose(0, 2, 1, 3)

    qh, kh, vh = split(q), split(k), split(v)
    scores = qh @ kh.swapaxes(-1, -2) / np.sqrt(dh)
    attn = _softmax(scores, axis=-1)
    ctx = (attn @ vh).transpose(0, 2, 1, 3).reshape(n, s_len, d)
    att_out = ctx @ p["wo"] + p["bo"]
    h1 = h0 + att_out

    w2, ln2 = _layernorm_forward(h1, p["ln2_g"], p["ln2_b"])
    pre = w2 @ p["ff_w1"] + p["ff_b1"]
    act = np.maximum(pre, 0.0)
    ff = act @ p["ff_w2"] + p["ff_b2"]
    h2 = h1 + ff
    x = h2[:, 0, :]
    cache = {
        "f": f, "u": u, "ln1": ln1, "qh": qh, "kh": kh, "vh": vh, "attn": attn,
        "ctx": ctx, "ln2": ln2, "w2": w2, "pre": pre, "act": act, "x": x,
        "heads": heads, "dh": dh,
    }
    return _classifier_forward(p, x), cache


_FORWARD = {"MP": _forward_mp, "GP": _forward_gp, "MoE": _forward_moe,
            "HYB": _forward_hyb, "SA": _forward_sa}


def _forward(model: FusionModel, f: np.ndarray, hc: np.ndarray | None):
    _check_shapes(model.config, f, hc)
    return _FORWARD[model.config.strategy](model.params, model.config, f, hc)


# ---------------------------------------------------------------------------
# backward passes: given d(loss)/d(logits), produce parameter gradients

def _classifier_backward(p, dlogits, x):
    return {"cls_w": dlogits.T @ x, "cls_b": dlogits.sum(axis=0)}, dlogits @ p["cls_w"]


def _backward_mp(p, config, cache, dlogits):
    grads, _ = _classifier_backward(p, dlogits, cache["x"])
    return grads


def _backward_gp(p, config, cache, dlogits):
    f, w = cache["f"], cache["w"]
    grads, dx = _classifier_backward(p, dlogits, cache["x"])
    dw = np.einsum("nd,nbd->nb", dx, f)
    ds = _softmax_backward(w, dw)
    grads["gate_w"] = np.einsum("nb,nbd->d", ds, f)
    grads["gate_b"] = np.asarray([ds.sum()])
    return grads


def _backward_moe(p, config, cache, dlogits):
    f, z, w, h1, pre1 = cache["f"], cache["z"], cache["w"], cache["h1"], cache["pre1"]
    dz = w[..., None] * dlogits[:, None, :]
    grads = {
        "head_w": np.einsum("nbc,nbd->bcd", dz, f),
        "head_b": dz.sum(axis=0),
    }
    dw = np.einsum("nc,nbc->nb", dlogits, z)
    ds = _softmax_backward(w, dw)
    grads["gate_w2"] = np.einsum("nb,nbh->h", ds, h1)
    grads["gate_b2"] = np.asarray([ds.sum()])
    dh1 = ds[..., None] * p["gate_w2"][None, None, :]
    dpre1 = dh1 * (pre1 > 0.0)
    grads["gate_w1"] = np.einsum("nbh,nbd->dh", dpre1, f)
    grads["gate_b1"] = dpre1.sum(axis=(0, 1))
    return grads


def _backward_hyb(p, config, cache, dlogits):
    f, u, w = cache["f"], cache["u"], cache["w"]
    grads, dx = _classifier_backward(p, dlogits, cache["x"])
    dw = np.einsum("nd,nbd->nb", dx, f)
    ds = _softmax_backward(w, dw)
    grads["gate_w3"] = np.einsum("nb,nbh->h", ds, cache["h2"])
    grads["gate_b3"] = np.asarray([ds.sum()])
    dh2 = ds[..., None] * p["gate_w3"][None, None, :]
    dpre2 = dh2 * (cache["pre2"] > 0.0)
    grads["gate_w2"] = np.einsum("nbo,nbi->io", dpre2, cache["h1"])
    grads["gate_b2"] = dpre2.sum(axis=(0, 1))
    dh1 = dpre2 @ p["gate_w2"].T
    dpre1 = dh1 * (cache["pre1"] > 0.0)
    grads["gate_w1"] = np.einsum("nbo,nbi->io", dpre1, u)
    grads["gate_b1"] = dpre1.sum(axis=(0, 1))
    return grads


def _backward_sa(p, config, cache, dlogits):
    f = cache["f"]
    n, b, d = f.shape
    s_len = b + 1
    heads, dh = cache["heads"], cache["dh"]

    grads, dx = _classifier_backward(p, dlogits, cache["x"])
    dh2 = np.zeros((n, s_len, d))
    dh2[:, 0, :] = dx

    # feed-forward block
    dff = dh2
    grads["ff_w2"] = np.einsum("nsi,nso->io", cache["act"], dff)
    grads["ff_b2"] = dff.sum(axis=(0, 1))
    dact = dff @ p["ff_w2"].T
    dpre = dact * (cache["pre"] > 0.0)
    grads["ff_w1"] = np.einsum("nsi,nso->io", cache["w2"], dpre)
    grads["ff_b1"] = dpre.sum(axis=(0, 1))
    dw2 = dpre @ p["ff_w1"].T
    dh1_ln, grads["ln2_g"], grads["ln2_b"] = _layernorm_backward(dw2, cache["ln2"])
    dh1 = dh2 + dh1_ln

    # attention block
    datt = dh1
    grads["wo"] = np.einsum("nsi,nso->io", cache["ctx"], datt)
    grads["bo"] = datt.sum(axis=(0, 1))
    dctx = (datt @ p["wo"].T).reshape(n, s_len, heads, dh).transpose(0, 2, 1, 3)
    attn, vh = cache["attn"], cache["vh"]
    dattn = dctx @ vh.swapaxes(-1, -2)
    dvh = attn.swapaxes(-1, -2) @ dctx
    dscores = _softmax_backward(attn, dattn) / np.sqrt(dh)
    dqh = dscores @ cache["kh"]
    dkh = dscores.swapaxes(-1, -2) @ cache["qh"]

    def merge(m):
        return m.transpose(0, 2, 1, 3).reshape(n, s_len, d)

    dq, dk, dv = merge(dqh), merge(dkh), merge(dvh)
    u = cache["u"]
    du = np.zeros_like(u)
    for name, dm in (("wq", dq), ("wk", dk), ("wv", dv)):
        grads[name] = np.einsum("nsi,nso->io", u, dm)
        grads["b" + name[1]] = dm.sum(axis=(0, 1))
        du += dm @ p[name].T
    dh0_ln, grads["ln1_g"], grads["ln1_b"] = _layernorm_backward(du, cache["ln1"])
    dh0 = dh1 + dh0_ln

    grads["pos"] = dh0.sum(axis=0)
    grads["cls_tok"] = dh0[:, 0, :].sum(axis=0)
    return grads


_BACKWARD = {"MP": _backward_mp, "GP": _backward_gp, "MoE": _backward_moe,
             "HYB": _backward_hyb, "SA": _backward_sa}


# ---------------------------------------------------------------------------
# loss, training, inference

def _cross_entropy(logits: np.ndarray, labels: np.ndarray):
    z = logits - logits.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    n = logits.shape[0]
    loss = -logp[np.arange(n), labels].mean()
    dlogits = np.exp(logp)
    dlogits[np.arange(n), labels] -= 1.0
    return loss, dlogits / n


def loss_and_grads(model: FusionModel, f: np.ndarray, hc: np.ndarray | None, labels: np.ndarray):
    """Mean cross-entropy over a batch plus gradients for every parameter tensor."""
    logits, cache = _forward(model, f, hc)
    loss, dlogits = _cross_entropy(logits, labels)
    grads = _BACKWARD[model.config.strategy](model.params, model.config, cache, dlogits)
    for key in model.params:
        grads.setdefault(key, np.zeros_like(model.params[key]))
    return loss, grads


def stack_feature_sets(sets, require_labels: bool = False):
    """Stack BandFeatureSets into (N,B,D) functionals, (N,B,2) handcrafted, labels."""
    if not sets:
        raise FusionError("empty feature-set list")
    f = np.stack([s.functionals for s in sets])
    if any(s.handcrafted is None for s in sets):
        hc = None
    else:
        hc = np.stack([s.handcrafted for s in sets])
    labels = None
    if all(s.label is not None for s in sets):
        labels = np.asarray([s.label for s in sets], dtype=np.int64)
    elif require_labels:
        raise FusionError("feature sets are missing labels")
    return f, hc, labels


def _batch_logits(model: FusionModel, f: np.ndarray, hc: np.ndarray | None) -> np.ndarray:
    logits, _ = _forward(model, f, hc)
    return logits


def _accuracy(model: FusionModel, f, hc, labels) -> float:
    pred = _batch_logits(model, f, hc).argmax(axis=1)
    return float((pred == labels).mean())


def train(config: FusionConfig, train_set, val_set) -> FusionModel:
    """Mini-batch SGD with momentum on the cross-entropy of the fused prediction.

    Deterministic for a fixed seed: one generator stream drives parameter
    init, a second drives batch shuffling, so strategies with different
    parameter counts still see identical batch orders. Returns the epoch
    checkpoint with the best validation accuracy (ties -> earliest epoch).
    """
    f, hc, labels = stack_feature_sets(train_set, require_labels=True)
    _check_shapes(config, f, hc)
    if labels.min() < 0 or labels.max() >= config.class_count:
        raise FusionError("train labels out of range for class_count")

    model = init_model(config, np.random.default_rng([config.seed, 0]))
    shuffle_rng = np.random.default_rng([config.seed, 1])
    velocity = {k: np.zeros_like(v) for k, v in model.params.items()}

    has_val = bool(val_set)
    if has_val:
        f_val, hc_val, labels_val = stack_feature_sets(val_set, require_labels=True)
        _check_shapes(config, f_val, hc_val)

    best = model.copy()
    best_acc = -1.0
    n = f.shape[0]
    for epoch in range(1, config.epochs + 1):
        order = shuffle_rng.permutation(n)
        for batch_idx, start in enumerate(range(0, n, config.batch_size)):
            idx = order[start:start + config.batch_size]
            hcb = hc[idx] if hc is not None else None
            loss, grads = loss_and_grads(model, f[idx], hcb, labels[idx])
            if not np.isfinite(loss):
                raise TrainingDivergence(f"non-finite loss at epoch {epoch}, batch {batch_idx}")
            for key, grad in grads.items():
                velocity[key] = config.momentum * velocity[key] - config.learning_rate * grad
                model.params[key] = model.params[key] + velocity[key]
        if has_val:
            acc = _accuracy(model, f_val, hc_val, labels_val)
            if acc > best_acc:
                best_acc = acc
                best = model.copy()
        else:
            best = model.copy()
    return best


def predict(model: FusionModel, features: BandFeatureSet):
    """Class index (ties -> lowest index) and the softmax probability vector."""
    hc = features.handcrafted[None] if features.handcrafted is not None else None
    logits = _batch_logits(model, features.functionals[None], hc)[0]
    probs = _softmax(logits)
    return int(np.argmax(logits)), probs


def predict_batch(model: FusionModel, sets) -> np.ndarray:
    f, hc, _ = stack_feature_sets(sets)
    return _batch_logits(model, f, hc).argmax(axis=1)


# ---------------------------------------------------------------------------
# per-strategy fused representations

def band_weights(model: FusionModel, features: BandFeatureSet) -> np.ndarray:
    """Softmax band weights for the gated strategies; uniform for MP."""
    hc = features.handcrafted[None] if features.handcrafted is not None else None
    f = features.functionals[None]
    strategy = model.config.strategy
    if strategy == "MP":
        return np.full(model.config.band_count, 1.0 / model.config.band_count)
    if strategy in ("GP", "MoE", "HYB"):
        _, cache = _forward(model, f, hc)
        return cache["w"][0]
    raise FusionError(f"band weights are undefined for strategy {strategy}")


def fuse_mean_pool(features: BandFeatureSet) -> Functional:
    """Element-wise average across bands; no learnable parameters."""
    b = features.functionals.shape[0]
    w = np.full((1, b), 1.0 / b)
    return Functional(vector=_weighted_sum(w, features.functionals[None])[0], band_index=0)


def fuse_gated_pool(features: BandFeatureSet, model: FusionModel) -> Functional:
    _, cache = _forward(model, features.functionals[None], None)
    return Functional(vector=cache["x"][0], band_index=0)


def fuse_moe(features: BandFeatureSet, model: FusionModel) -> np.ndarray:
    """MoE fuses after classification: returns the weighted band logits."""
    hc = features.handcrafted[None] if features.handcrafted is not None else None
    logits, _ = _forward(model, features.functionals[None], hc)
    return logits[0]


def fuse_hybrid(features: BandFeatureSet, model: FusionModel) -> Functional:
    if features.handcrafted is None:
        raise FusionError("hybrid fusion requires handcrafted features (entropy, flux) per band")
    _, cache = _forward(model, features.functionals[None], features.handcrafted[None])
    return Functional(vector=cache["x"][0], band_index=0)


def fuse_self_attention(features: BandFeatureSet, model: FusionModel) -> Functional:
    _, cache = _forward(model, features.functionals[None], None)
    return Functional(vector=cache["x"][0], band_index=0)


def fused_functional(model: FusionModel, features: BandFeatureSet) -> Functional:
    """The fused D-vector each strategy feeds its classifier.

    MoE fuses logits rather than functionals, so for analysis purposes its
    fused vector is taken as the gate-weighted mixture of band functionals.
    """
    strategy = model.config.strategy
    if strategy == "MP":
        return fuse_mean_pool(features)
    if strategy == "GP":
        return fuse_gated_pool(features, model)
    if strategy == "HYB":
        return fuse_hybrid(features, model)
    if strategy == "SA":
        return fuse_self_attention(features, model)
    w = band_weights(model, features)
    return Functional(vector=w @ features.functionals, band_index=0)


# ---------------------------------------------------------------------------
# checkpoint serialization: JSON container with base64 row-major float64 tensors

def save_model(model: FusionModel, path) -> None:
    tensors = {
        name: {
            "shape": list(arr.shape),
            "dtype": "<f8",
            "data": base64.b64encode(np.ascontiguousarray(arr, dtype="<f8").tobytes()).decode("ascii"),
        }
        for name, arr in model.params.items()
    }
    payload = {
        "format_version": CHECKPOINT_VERSION,
        "kind": "bandfuse-fusion-checkpoint",
        "config": asdict(model.config),
        "tensors": tensors,
    }
    Path(path).write_text(json.dumps(payload, indent=1), encoding="utf-8")


def load_model(path) -> FusionModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format_version") != CHECKPOINT_VERSION:
        raise FusionError(f"unsupported checkpoint version {payload.get('format_version')!r}")
    config = FusionConfig(**payload["config"])
    params = {}
    for name, spec in payload["tensors"].items():
        raw = base64.b64decode(spec["data"])
        arr = np.frombuffer(raw, dtype=spec["dtype"]).astype(np.float64).reshape(spec["shape"])
        params[name] = arr
    return FusionModel(config, params)
