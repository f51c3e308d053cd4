"""Attention-based GRU network over title and content token sequences.

Two GRU encoders (title, content) feed a title-conditioned word-by-word
attention layer: at every content step the layer softmax-weights all title
states, accumulating an attended summary through its own recurrence.  The
final attended vector and the final content state combine into a dense
task embedding, and a sigmoid unit on top yields the fake-news probability.

Everything is plain numpy in double precision with hand-derived gradients;
`network_gradients` is checked against central finite differences in the
test suite.  Word vectors are frozen inputs, never updated.

Cell equations:
    z_t = sigma(Wz x_t + Uz h_{t-1} + bz)
    r_t = sigma(Wr x_t + Ur h_{t-1} + br)
    c_t = tanh(Wc x_t + Uc (r_t * h_{t-1}) + bc)
    h_t = (1 - z_t) * h_{t-1} + z_t * c_t

Attention, for content step t over title states y_1..y_L:
    m_i   = tanh(Wy y_i + Wh h_t + Wr' r_{t-1})
    alpha = softmax(w . m)
    r_t   = sum_i alpha_i y_i + tanh(Wt r_{t-1})

Head:
    h* = tanh(Wp r_N + Wx h_N)
    e  = tanh(We h* + be)          # the task-specific embedding
    p  = sigma(wo . e + bo)

Padded positions are masked: state and attended vector carry through
unchanged, so appending padding never changes any output.  An empty title
skips attention entirely (r_N = 0).
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass

import numpy as np

from .corpus import Article, Dataset
from .embeddings import EmbeddingMatrix, Vocabulary
from .errors import DataError, ModelMismatchError
from .textproc import tokenize

_PARAMS_MAGIC = b"FNNP"
_PARAMS_VERSION = 1

_NEG_INF = -1e30


@dataclass(frozen=True)
class NetworkConfig:
    seq_len: int = 50
    word_dim: int = 300
    gru_hidden: int = 128
    attention_dim: int = 128
    task_dim: int = 128
    epochs: int = 20
    batch: int = 32
    lr: float = 0.001
    optimizer: str = "rmsprop"
    seed: int = 0

    def validate(self) -> None:
        for name in ("seq_len", "word_dim", "gru_hidden", "attention_dim", "task_dim",
                     "epochs", "batch"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.optimizer not in ("rmsprop", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _glorot(rng, fan_out, fan_in):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_out, fan_in))


def init_params(config: NetworkConfig) -> dict[str, np.ndarray]:
    """Glorot-uniform initialization; tensor creation order is fixed so a
    seed fully determines the result."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    d, h, a, k = config.word_dim, config.gru_hidden, config.attention_dim, config.task_dim
    params: dict[str, np.ndarray] = {}
    for side in ("title", "content"):
        for gate in ("z", "r", "c"):
            params[f"{side}_W{gate}"] = _glorot(rng, h, d)
            params[f"{side}_U{gate}"] = _glorot(rng, h, h)
            params[f"{side}_b{gate}"] = np.zeros(h)
    params["att_Wy"] = _glorot(rng, a, h)
    params["att_Wh"] = _glorot(rng, a, h)
    params["att_Wr"] = _glorot(rng, a, h)
    params["att_w"] = _glorot(rng, a, 1)[:, 0]
    params["att_Wt"] = _glorot(rng, h, h)
    params["comb_Wp"] = _glorot(rng, h, h)
    params["comb_Wx"] = _glorot(rng, h, h)
    params["task_We"] = _glorot(rng, k, h)
    params["task_be"] = np.zeros(k)
    params["out_w"] = _glorot(rng, k, 1)[:, 0]
    params["out_b"] = np.zeros(1)
    return params


def zero_like_params(params: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    return {name: np.zeros_like(value) for name, value in params.items()}


# ---------------------------------------------------------------------------
# Input encoding
# ---------------------------------------------------------------------------

def encode_indices(articles: list[Article], vocab: Vocabulary,
                   config: NetworkConfig) -> dict[str, np.ndarray]:
    """Token index arrays (OOV tokens dropped, right-padded, truncated)."""
    n, t = len(articles), config.seq_len
    out = {
        "title_idx": np.zeros((n, t), dtype=np.int64),
        "title_mask": np.zeros((n, t)),
        "content_idx": np.zeros((n, t), dtype=np.int64),
        "content_mask": np.zeros((n, t)),
    }
    for i, art in enumerate(articles):
        for field, text in (("title", art.title), ("content", art.content)):
            idx = [vocab.word_to_index[w] for w in tokenize(text).lowers()
                   if w in vocab.word_to_index][:t]
            out[f"{field}_idx"][i, :len(idx)] = idx
            out[f"{field}_mask"][i, :len(idx)] = 1.0
    return out


def batch_inputs(encoded: dict[str, np.ndarray], rows: np.ndarray,
                 matrix: EmbeddingMatrix) -> dict[str, np.ndarray]:
    """Materialize frozen word vectors for a batch of encoded articles."""
    batch = {}
    for field in ("title", "content"):
        idx = encoded[f"{field}_idx"][rows]
        mask = encoded[f"{field}_mask"][rows]
        x = matrix.input_vectors[idx] * mask[:, :, None]
        batch[f"{field}_x"] = x
        batch[f"{field}_mask"] = mask
    return batch


# ---------------------------------------------------------------------------
# Forward
# ---------------------------------------------------------------------------

def _gru_forward_batch(X, mask, params, side):
    B, T, _ = X.shape
    h = params[f"{side}_Wz"].shape[0]
    Wz, Uz, bz = params[f"{side}_Wz"], params[f"{side}_Uz"], params[f"{side}_bz"]
    Wr, Ur, br = params[f"{side}_Wr"], params[f"{side}_Ur"], params[f"{side}_br"]
    Wc, Uc, bc = params[f"{side}_Wc"], params[f"{side}_Uc"], params[f"{side}_bc"]
    Hs = np.zeros((B, T + 1, h))
    Z = np.zeros((B, T, h))
    R = np.zeros((B, T, h))
    C = np.zeros((B, T, h))
    hprev = Hs[:, 0]
    for t in range(T):
        x = X[:, t]
        z = _sigmoid(x @ Wz.T + hprev @ Uz.T + bz)
        r = _sigmoid(x @ Wr.T + hprev @ Ur.T + br)
        c = np.tanh(x @ Wc.T + (r * hprev) @ Uc.T + bc)
        hnew = (1.0 - z) * hprev + z * c
        m = mask[:, t:t + 1]
        hcur = m * hnew + (1.0 - m) * hprev
        Z[:, t], R[:, t], C[:, t] = z, r, c
        Hs[:, t + 1] = hcur
        hprev = hcur
    return Hs, Z, R, C


def _attention_forward_batch(Y, tmask, H, cmask, params):
    """Y: B x L x h title states, H: B x N x h content states."""
    B, L, h = Y.shape
    N = H.shape[1]
    Wy, Wh, Wr = params["att_Wy"], params["att_Wh"], params["att_Wr"]
    w, Wt = params["att_w"], params["att_Wt"]
    WyY = Y @ Wy.T
    has_title = (tmask.sum(axis=1) > 0).astype(np.float64)
    Rs = np.zeros((B, N + 1, h))
    Alphas = np.zeros((B, N, L))
    Rho = np.zeros((B, N, h))
    rprev = Rs[:, 0]
    for t in range(N):
        ht = H[:, t]
        q = ht @ Wh.T + rprev @ Wr.T
        M = np.tanh(WyY + q[:, None, :])
        s = np.where(tmask > 0, M @ w, _NEG_INF)
        es = np.exp(s - s.max(axis=1, keepdims=True)) * (tmask > 0)
        denom = es.sum(axis=1, keepdims=True)
        alpha = np.where(denom > 0, es / np.maximum(denom, 1e-300), 0.0)
        att = np.einsum("bl,blh->bh", alpha, Y)
        rho = np.tanh(rprev @ Wt.T)
        g = (cmask[:, t] * has_title)[:, None]
        rcur = g * (att + rho) + (1.0 - g) * rprev
        Alphas[:, t], Rho[:, t], Rs[:, t + 1] = alpha, rho, rcur
        rprev = rcur
    return Rs, Alphas, Rho, has_title


def forward_batch(params: dict[str, np.ndarray], batch: dict[str, np.ndarray]):
    """Full forward pass; returns (probabilities, task embeddings, cache)."""
    tHs, tZ, tR, tC = _gru_forward_batch(batch["title_x"], batch["title_mask"], params, "title")
    cHs, cZ, cR, cC = _gru_forward_batch(batch["content_x"], batch["content_mask"], params, "content")
    Y = tHs[:, 1:]
    H = cHs[:, 1:]
    Rs, Alphas, Rho, has_title = _attention_forward_batch(
        Y, batch["title_mask"], H, batch["content_mask"], params)
    rN = Rs[:, -1]
    hN = cHs[:, -1]
    hstar = np.tanh(rN @ params["comb_Wp"].T + hN @ params["comb_Wx"].T)
    e = np.tanh(hstar @ params["task_We"].T + params["task_be"])
    p = _sigmoid(e @ params["out_w"] + params["out_b"][0])
    cache = {
        "tHs": tHs, "tZ": tZ, "tR": tR, "tC": tC,
        "cHs": cHs, "cZ": cZ, "cR": cR, "cC": cC,
        "Rs": Rs, "Alphas": Alphas, "Rho": Rho, "has_title": has_title,
        "hstar": hstar, "e": e, "p": p,
    }
    return p, e, cache


def bce_loss(p: np.ndarray, y: np.ndarray) -> float:
    p = np.clip(p, 1e-12, 1.0 - 1e-12)
    return float(np.mean(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))))


# ---------------------------------------------------------------------------
# Backward
# ---------------------------------------------------------------------------

def _gru_backward_batch(X, mask, params, side, Hs, Z, R, C, dstates, dfinal, grads):
    """dstates: B x T x h gradients on each step output; dfinal on Hs[:, T]."""
    B, T, _ = X.shape
    Uz, Ur, Uc = params[f"{side}_Uz"], params[f"{side}_Ur"], params[f"{side}_Uc"]
    carry = dfinal.copy()
    for t in range(T - 1, -1, -1):
        dh = carry + dstates[:, t]
        m = mask[:, t:t + 1]
        hprev = Hs[:, t]
        z, r, c = Z[:, t], R[:, t], C[:, t]
        x = X[:, t]

        dhnew = m * dh
        dhprev = (1.0 - m) * dh
        dz = dhnew * (c - hprev)
        dc = dhnew * z
        dhprev = dhprev + dhnew * (1.0 - z)

        dpre_c = dc * (1.0 - c * c)
        grads[f"{side}_Wc"] += dpre_c.T @ x
        grads[f"{side}_Uc"] += dpre_c.T @ (r * hprev)
        grads[f"{side}_bc"] += dpre_c.sum(axis=0)
        drh = dpre_c @ Uc
        dr_gate = drh * hprev
        dhprev = dhprev + drh * r

        dpre_z = dz * z * (1.0 - z)
        grads[f"{side}_Wz"] += dpre_z.T @ x
        grads[f"{side}_Uz"] += dpre_z.T @ hprev
        grads[f"{side}_bz"] += dpre_z.sum(axis=0)
        dhprev = dhprev + dpre_z @ Uz

        dpre_r = dr_gate * r * (1.0 - r)
        grads[f"{side}_Wr"] += dpre_r.T @ x
        grads[f"{side}_Ur"] += dpre_r.T @ hprev
        grads[f"{side}_br"] += dpre_r.sum(axis=0)
        dhprev = dhprev + dpre_r @ Ur

        carry = dhprev


def _attention_backward_batch(batch, params, cache, drN, grads):
    """Returns (dY, dH): gradients on title and content state sequences."""
    Y = cache["tHs"][:, 1:]
    H = cache["cHs"][:, 1:]
    tmask, cmask = batch["title_mask"], batch["content_mask"]
    Rs, Alphas, Rho, has_title = cache["Rs"], cache["Alphas"], cache["Rho"], cache["has_title"]
    Wy, Wh, Wr, w, Wt = (params["att_Wy"], params["att_Wh"], params["att_Wr"],
                         params["att_w"], params["att_Wt"])
    WyY = Y @ Wy.T
    N = H.shape[1]
    dY = np.zeros_like(Y)
    dH = np.zeros_like(H)
    dr = drN.copy()
    for t in range(N - 1, -1, -1):
        rprev = Rs[:, t]
        ht = H[:, t]
        g = (cmask[:, t] * has_title)[:, None]
        drnew = g * dr
        drprev = (1.0 - g) * dr

        rho = Rho[:, t]
        dpre_rho = drnew * (1.0 - rho * rho)
        grads["att_Wt"] += dpre_rho.T @ rprev
        drprev = drprev + dpre_rho @ Wt

        alpha = Alphas[:, t]
        dalpha = np.einsum("bh,blh->bl", drnew, Y)
        dY += alpha[:, :, None] * drnew[:, None, :]
        ds = alpha * (dalpha - (dalpha * alpha).sum(axis=1, keepdims=True))

        # recompute m_i = tanh(Wy y_i + q); caching it for all steps would
        # need B x N x L x a memory
        q = ht @ Wh.T + rprev @ Wr.T
        M = np.tanh(WyY + q[:, None, :])
        grads["att_w"] += np.einsum("bl,bla->a", ds, M)
        dpreM = (ds[:, :, None] * w) * (1.0 - M * M)
        grads["att_Wy"] += np.einsum("bla,blh->ah", dpreM, Y)
        dY += np.einsum("bla,ah->blh", dpreM, Wy)
        dq = dpreM.sum(axis=1)
        grads["att_Wh"] += dq.T @ ht
        dH[:, t] += dq @ Wh
        grads["att_Wr"] += dq.T @ rprev
        drprev = drprev + dq @ Wr

        dr = drprev
    return dY, dH


def network_gradients(params: dict[str, np.ndarray], batch: dict[str, np.ndarray],
                      labels: np.ndarray) -> tuple[float, dict[str, np.ndarray]]:
    """Mean binary cross-entropy and its gradient for every parameter tensor."""
    y = np.asarray(labels, dtype=np.float64)
    if y.size == 0:
        raise ValueError("empty batch")
    p, e, cache = forward_batch(params, batch)
    loss = bce_loss(p, y)
    grads = zero_like_params(params)
    B = y.shape[0]

    du = (p - y) / B
    grads["out_w"] += cache["e"].T @ du
    grads["out_b"] += du.sum(keepdims=True)
    de_pre = (du[:, None] * params["out_w"]) * (1.0 - e * e)
    hstar = cache["hstar"]
    grads["task_We"] += de_pre.T @ hstar
    grads["task_be"] += de_pre.sum(axis=0)
    dc = (de_pre @ params["task_We"]) * (1.0 - hstar * hstar)
    rN = cache["Rs"][:, -1]
    hN = cache["cHs"][:, -1]
    grads["comb_Wp"] += dc.T @ rN
    grads["comb_Wx"] += dc.T @ hN
    drN = dc @ params["comb_Wp"]
    dhN = dc @ params["comb_Wx"]

    dY, dH = _attention_backward_batch(batch, params, cache, drN, grads)
    _gru_backward_batch(batch["content_x"], batch["content_mask"], params, "content",
                        cache["cHs"], cache["cZ"], cache["cR"], cache["cC"],
                        dH, dhN, grads)
    _gru_backward_batch(batch["title_x"], batch["title_mask"], params, "title",
                        cache["tHs"], cache["tZ"], cache["tR"], cache["tC"],
                        dY, np.zeros_like(dY[:, 0]), grads)
    return loss, grads


# ---------------------------------------------------------------------------
# Single-sequence wrappers (the shapes the unit tests hand-compute)
# ---------------------------------------------------------------------------

def gru_forward(inputs: np.ndarray, params: dict[str, np.ndarray],
                side: str = "content", mask: np.ndarray | None = None) -> np.ndarray:
    """Hidden state sequence for one input sequence (T x word_dim)."""
    X = np.asarray(inputs, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("inputs must be a T x d array")
    if X.shape[0] == 0:
        return np.zeros((0, params[f"{side}_Wz"].shape[0]))
    if X.shape[1] != params[f"{side}_Wz"].shape[1]:
        raise ValueError(
            f"input dim {X.shape[1]} != word dim {params[f'{side}_Wz'].shape[1]}")
    m = np.ones((1, X.shape[0])) if mask is None else np.asarray(mask, dtype=np.float64)[None, :]
    Hs, _, _, _ = _gru_forward_batch(X[None, :, :], m, params, side)
    return Hs[0, 1:]


def attention_forward(title_states: np.ndarray, content_states: np.ndarray,
                      params: dict[str, np.ndarray],
                      return_alphas: bool = False):
    """Attended vector r_N for one (title, content) state pair.

    An empty title skips attention: r_N = 0.
    """
    Y = np.asarray(title_states, dtype=np.float64)
    H = np.asarray(content_states, dtype=np.float64)
    h = params["att_Wt"].shape[0]
    if Y.shape[0] == 0 or H.shape[0] == 0:
        r = np.zeros(h)
        return (r, np.zeros((H.shape[0], Y.shape[0]))) if return_alphas else r
    Rs, Alphas, _, _ = _attention_forward_batch(
        Y[None], np.ones((1, Y.shape[0])), H[None], np.ones((1, H.shape[0])), params)
    r = Rs[0, -1]
    return (r, Alphas[0]) if return_alphas else r


def network_forward(title_tokens: list[str], content_tokens: list[str],
                    vocab: Vocabulary, matrix: EmbeddingMatrix,
                    params: dict[str, np.ndarray], config: NetworkConfig):
    """Probability and task embedding for one tokenized article."""
    art = Article(id=-1, url="", date="", title=" ".join(title_tokens),
                  content=" ".join(content_tokens))
    encoded = encode_indices([art], vocab, config)
    batch = batch_inputs(encoded, np.array([0]), matrix)
    p, e, _ = forward_batch(params, batch)
    return float(p[0]), e[0]


# ---------------------------------------------------------------------------
# Optimizers and training
# ---------------------------------------------------------------------------

class RmsProp:
    def __init__(self, params, lr, decay=0.9, eps=1e-8):
        self.lr = lr
        self.decay = decay
        self.eps = eps
        self.cache = zero_like_params(params)

    def step(self, params, grads):
        for name, g in grads.items():
            c = self.cache[name]
            c *= self.decay
            c += (1.0 - self.decay) * g * g
            params[name] -= self.lr * g / (np.sqrt(c) + self.eps)


class Adam:
    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = zero_like_params(params)
        self.v = zero_like_params(params)
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for name, g in grads.items():
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            params[name] -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)


def _make_optimizer(params, config):
    if config.optimizer == "adam":
        return Adam(params, config.lr)
    return RmsProp(params, config.lr)


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    train_loss: float
    dev_accuracy: float


def predict_proba_encoded(params, encoded, matrix, batch_size: int = 256) -> np.ndarray:
    n = encoded["title_idx"].shape[0]
    out = np.zeros(n)
    for start in range(0, n, batch_size):
        rows = np.arange(start, min(start + batch_size, n))
        batch = batch_inputs(encoded, rows, matrix)
        p, _, _ = forward_batch(params, batch)
        out[rows] = p
    return out


def train_network(train: Dataset, dev: Dataset, vocab: Vocabulary,
                  matrix: EmbeddingMatrix, config: NetworkConfig,
                  log=None) -> tuple[dict[str, np.ndarray], list[EpochStats]]:
    """Mini-batch training; returns the epoch snapshot that scored best on dev."""
    config.validate()
    if matrix.dim != config.word_dim:
        raise ModelMismatchError(
            f"embedding dim {matrix.dim} != configured word_dim {config.word_dim}")
    if len(train) == 0 or len(dev) == 0:
        raise DataError("train and dev must both be non-empty")
    y_train = np.array([1.0 if l else 0.0 for l in train.fake_labels()])
    y_dev = np.array([1.0 if l else 0.0 for l in dev.fake_labels()])
    enc_train = encode_indices(train.articles(), vocab, config)
    enc_dev = encode_indices(dev.articles(), vocab, config)

    params = init_params(config)
    optimizer = _make_optimizer(params, config)
    rng = np.random.default_rng(config.seed)
    history: list[EpochStats] = []
    best_params = {k: v.copy() for k, v in params.items()}
    best_acc = -1.0
    n = len(train)
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        loss_sum = 0.0
        for start in range(0, n, config.batch):
            rows = order[start:start + config.batch]
            batch = batch_inputs(enc_train, rows, matrix)
            loss, grads = network_gradients(params, batch, y_train[rows])
            optimizer.step(params, grads)
            loss_sum += loss * len(rows)
        train_loss = loss_sum / n
        p_dev = predict_proba_encoded(params, enc_dev, matrix)
        dev_acc = float(np.mean((p_dev >= 0.5) == (y_dev > 0.5)))
        history.append(EpochStats(epoch=epoch, train_loss=train_loss, dev_accuracy=dev_acc))
        if log is not None:
            log(history[-1])
        if dev_acc > best_acc:
            best_acc = dev_acc
            best_params = {k: v.copy() for k, v in params.items()}
    return best_params, history


def extract_task_embedding(article: Article, params: dict[str, np.ndarray],
                           vocab: Vocabulary, matrix: EmbeddingMatrix,
                           config: NetworkConfig) -> np.ndarray:
    """The 128-d (by default) representation feeding the output unit."""
    encoded = encode_indices([article], vocab, config)
    batch = batch_inputs(encoded, np.array([0]), matrix)
    _, e, _ = forward_batch(params, batch)
    return e[0]


def extract_task_embeddings(dataset: Dataset, params, vocab, matrix, config,
                            batch_size: int = 256) -> np.ndarray:
    encoded = encode_indices(dataset.articles(), vocab, config)
    n = len(dataset)
    out = np.zeros((n, config.task_dim))
    for start in range(0, n, batch_size):
        rows = np.arange(start, min(start + batch_size, n))
        batch = batch_inputs(encoded, rows, matrix)
        _, e, _ = forward_batch(params, batch)
        out[rows] = e
    return out


# ---------------------------------------------------------------------------
# Persistence: named tensors in one container file
# ---------------------------------------------------------------------------

def save_params(params: dict[str, np.ndarray], config: NetworkConfig, path,
                meta: dict[str, str] | None = None) -> None:
    header = json.dumps({"config": asdict(config), "meta": meta or {}},
                        sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_PARAMS_MAGIC)
        fh.write(struct.pack("<II", _PARAMS_VERSION, len(header)))
        fh.write(header)
        fh.write(struct.pack("<I", len(params)))
        for name, tensor in params.items():
            raw = name.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<B", tensor.ndim))
            for dim in tensor.shape:
                fh.write(struct.pack("<I", dim))
            fh.write(np.ascontiguousarray(tensor, dtype="<f8").tobytes())


def load_params(path) -> tuple[dict[str, np.ndarray], NetworkConfig, dict[str, str]]:
    with open(path, "rb") as fh:
        if fh.read(4) != _PARAMS_MAGIC:
            raise ModelMismatchError(f"{path}: not a network parameter file")
        version, header_len = struct.unpack("<II", fh.read(8))
        if version != _PARAMS_VERSION:
            raise ModelMismatchError(f"{path}: unsupported parameter file version {version}")
        header = json.loads(fh.read(header_len).decode("utf-8"))
        config = NetworkConfig(**header["config"])
        meta = header.get("meta", {})
        (count,) = struct.unpack("<I", fh.read(4))
        params: dict[str, np.ndarray] = {}
        for _ in range(count):
            (name_len,) = struct.unpack("<H", fh.read(2))
            name = fh.read(name_len).decode("utf-8")
            (ndim,) = struct.unpack("<B", fh.read(1))
            shape = tuple(struct.unpack("<I", fh.read(4))[0] for _ in range(ndim))
            size = int(np.prod(shape)) if shape else 1
            data = np.frombuffer(fh.read(size * 8), dtype="<f8")
            if data.size != size:
                raise DataError(f"{path}: truncated tensor {name!r}")
            params[name] = data.astype(np.float64).reshape(shape)
    return params, config, meta
