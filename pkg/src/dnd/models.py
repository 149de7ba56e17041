"""Model zoo: classifiers, denoising autoencoder, VAE, LSTM sequence detector.

All models are plain parameter lists over the tensor core, built
deterministically from a seed, trained with momentum SGD, and immutable by
convention once training finishes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
import json
from typing import Sequence

import numpy as np

from . import tensor as T
from .errors import ContractError, DimensionError, ValidationError
from .rng import make_rng

ACTIVATIONS = ("relu", "sigmoid", "tanh")


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def one_hot(labels: np.ndarray, num_classes: int) -> np.ndarray:
    out = np.zeros((len(labels), num_classes))
    out[np.arange(len(labels)), labels] = 1.0
    return out


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int,
            shape: tuple[int, ...]) -> T.Tensor:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return T.Tensor(rng.uniform(-limit, limit, size=shape))


# ---------------------------------------------------------------------------
# architecture specs

@dataclass(frozen=True)
class ConvStage:
    channels: int
    kernel: int
    stride: int


@dataclass(frozen=True)
class ArchitectureSpec:
    """Shape of one classifier: an mlp or a small strided convnet."""

    kind: str  # "mlp" | "convnet"
    hidden_widths: tuple[int, ...]  # mlp hidden layers / convnet dense head
    activation: str = "relu"
    conv_stages: tuple[ConvStage, ...] = ()
    input_shape: tuple[int, int, int] = (1, 12, 12)
    num_classes: int = 10

    def validate(self) -> None:
        if self.kind not in ("mlp", "convnet"):
            raise ValidationError(f"unknown model kind: {self.kind!r}")
        if self.activation not in ACTIVATIONS:
            raise ValidationError(f"unknown activation: {self.activation!r}")
        if self.num_classes < 2:
            raise ValidationError(f"num_classes must be >= 2, got {self.num_classes}")
        if any(w <= 0 for w in self.hidden_widths):
            raise ValidationError(f"hidden widths must be positive: {self.hidden_widths}")
        if self.kind == "mlp":
            if not self.hidden_widths:
                raise ValidationError("mlp needs at least one hidden layer")
            if self.conv_stages:
                raise ValidationError("mlp spec must not carry conv stages")
        else:
            if not self.conv_stages:
                raise ValidationError("convnet needs at least one conv stage")
            side = min(self.input_shape[1], self.input_shape[2])
            for st in self.conv_stages:
                if st.channels <= 0 or st.stride <= 0:
                    raise ValidationError(f"invalid conv stage: {st}")
                if st.kernel % 2 == 0 or st.kernel > side:
                    raise ValidationError(
                        f"kernel must be odd and <= input side {side}: {st}")

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["hidden_widths"] = list(self.hidden_widths)
        d["conv_stages"] = [list(asdict(s).values()) for s in self.conv_stages]
        d["input_shape"] = list(self.input_shape)
        return d

    @staticmethod
    def from_json_dict(d: dict) -> "ArchitectureSpec":
        return ArchitectureSpec(
            kind=d["kind"],
            hidden_widths=tuple(d["hidden_widths"]),
            activation=d["activation"],
            conv_stages=tuple(ConvStage(*s) for s in d["conv_stages"]),
            input_shape=tuple(d["input_shape"]),
            num_classes=d["num_classes"],
        )

    def spec_hash(self) -> str:
        import hashlib

        return hashlib.sha256(
            canonical_json(self.to_json_dict()).encode()).hexdigest()


@dataclass
class TrainConfig:
    epochs: int = 30
    batch_size: int = 32
    lr: float = 0.05
    momentum: float = 0.9
    seed: int = 0
    shuffle: bool = True

    def validate(self) -> None:
        if self.epochs < 1:
            raise ValidationError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValidationError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass
class TrainStats:
    final_loss: float
    train_accuracy: float
    test_accuracy: float
    epochs: int
    seed: int
    loss_decreased: bool
    epoch_losses: list[float] = field(default_factory=list)


# ---------------------------------------------------------------------------
# classifier

class Classifier:
    """Feed-forward classifier; ``params`` interleaves weights and biases."""

    def __init__(self, spec: ArchitectureSpec, params: list[T.Tensor]):
        self.spec = spec
        self.params = params
        self.train_stats: TrainStats | None = None

    def forward(self, x: T.Tensor) -> T.Tensor:
        """Batched logits; x is (batch, c, h, w)."""
        spec = self.spec
        i = 0
        if spec.kind == "convnet":
            for st in spec.conv_stages:
                pad = st.kernel // 2
                x = T.conv2d(x, self.params[i], stride=st.stride, padding=pad)
                x = T.add(x, T.reshape(self.params[i + 1], (st.channels, 1, 1)))
                x = T.apply_activation(x, spec.activation)
                i += 2
            b = x.shape[0]
            x = T.reshape(x, (b, int(np.prod(x.shape[1:]))))
        else:
            x = T.reshape(x, (x.shape[0], int(np.prod(x.shape[1:]))))
        for _ in spec.hidden_widths:
            x = T.add(T.matmul(x, self.params[i]), self.params[i + 1])
            x = T.apply_activation(x, spec.activation)
            i += 2
        return T.add(T.matmul(x, self.params[i]), self.params[i + 1])

    def probs(self, x: T.Tensor) -> T.Tensor:
        return T.softmax(self.forward(x))


def _conv_out_side(side: int, kernel: int, stride: int) -> int:
    pad = kernel // 2
    return (side + 2 * pad - kernel) // stride + 1


def flat_feature_count(spec: ArchitectureSpec) -> int:
    c, h, w = spec.input_shape
    if spec.kind == "mlp":
        return c * h * w
    for st in spec.conv_stages:
        h = _conv_out_side(h, st.kernel, st.stride)
        w = _conv_out_side(w, st.kernel, st.stride)
        c = st.channels
    return c * h * w


def build_classifier(spec: ArchitectureSpec, seed: int) -> Classifier:
    """Deterministic glorot-uniform init; biases start at zero."""
    spec.validate()
    rng = make_rng(seed, "classifier")
    params: list[T.Tensor] = []
    c = spec.input_shape[0]
    if spec.kind == "convnet":
        for st in spec.conv_stages:
            fan_in = c * st.kernel * st.kernel
            fan_out = st.channels * st.kernel * st.kernel
            params.append(_glorot(rng, fan_in, fan_out,
                                  (st.channels, c, st.kernel, st.kernel)))
            params.append(T.Tensor(np.zeros(st.channels)))
            c = st.channels
    width = flat_feature_count(spec)
    for hidden in spec.hidden_widths:
        params.append(_glorot(rng, width, hidden, (width, hidden)))
        params.append(T.Tensor(np.zeros(hidden)))
        width = hidden
    params.append(_glorot(rng, width, spec.num_classes, (width, spec.num_classes)))
    params.append(T.Tensor(np.zeros(spec.num_classes)))
    return Classifier(spec, params)


def _check_input(spec: ArchitectureSpec, x: np.ndarray) -> np.ndarray:
    """Normalize to a batched (b, c, h, w) array."""
    expected = spec.input_shape
    if x.shape == expected:
        return x[None, ...]
    if x.ndim == len(expected) + 1 and x.shape[1:] == expected:
        return x
    raise DimensionError(
        f"input shape {x.shape} does not match model input {expected}")


def classify(model: Classifier, x: np.ndarray | T.Tensor) -> np.ndarray:
    """Softmax probabilities; single input gives a vector, batch a matrix."""
    arr = x.data if isinstance(x, T.Tensor) else np.asarray(x, dtype=np.float64)
    batched = _check_input(model.spec, arr)
    out = model.probs(T.Tensor(batched)).data
    return out if batched is arr else out[0]


def predict_labels(model: Classifier, images: np.ndarray,
                   batch_size: int = 512) -> np.ndarray:
    """Argmax labels over a batch of images (inference only)."""
    preds = []
    for start in range(0, len(images), batch_size):
        chunk = images[start:start + batch_size]
        preds.append(np.argmax(classify(model, chunk), axis=-1))
    return np.concatenate(preds) if preds else np.empty(0, dtype=np.int64)


def accuracy(model: Classifier, images: np.ndarray, labels: np.ndarray) -> float:
    return float(np.mean(predict_labels(model, images) == labels))


def train_supervised(model: Classifier, images: np.ndarray, labels: np.ndarray,
                     cfg: TrainConfig, test_images: np.ndarray | None = None,
                     test_labels: np.ndarray | None = None) -> TrainStats:
    """Minibatch SGD on cross-entropy; reproducible per cfg.seed."""
    cfg.validate()
    if len(images) == 0:
        raise ValidationError("training set is empty")
    if labels.max() >= model.spec.num_classes:
        raise ValidationError("label outside model class range")
    rng = make_rng(cfg.seed, "train-supervised")
    targets = one_hot(labels, model.spec.num_classes)
    n = len(images)
    epoch_losses = []
    for _epoch in range(cfg.epochs):
        order = rng.permutation(n) if cfg.shuffle else np.arange(n)
        total, batches = 0.0, 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            with T.Tape():
                probs = model.probs(T.Tensor(images[idx]))
                loss = T.compute_loss(probs, T.Tensor(targets[idx]), "cross_entropy")
                T.backward(loss)
            T.sgd_step(model.params, cfg.lr, cfg.momentum)
            total += loss.item()
            batches += 1
        epoch_losses.append(total / batches)
    train_acc = accuracy(model, images, labels)
    test_acc = (accuracy(model, test_images, test_labels)
                if test_images is not None else float("nan"))
    stats = TrainStats(
        final_loss=epoch_losses[-1],
        train_accuracy=train_acc,
        test_accuracy=test_acc,
        epochs=cfg.epochs,
        seed=cfg.seed,
        loss_decreased=epoch_losses[-1] < epoch_losses[0] or cfg.epochs == 1,
        epoch_losses=epoch_losses,
    )
    model.train_stats = stats
    return stats


# ---------------------------------------------------------------------------
# denoising autoencoder

class DenoisingAutoencoder:
    """MLP encoder/decoder trained to undo additive pixel noise.

    Decoder ends in a sigmoid, so outputs are in [0,1] by construction.
    """

    def __init__(self, input_shape: tuple[int, int, int], hidden: int,
                 bottleneck_dim: int, params: list[T.Tensor]):
        self.input_shape = input_shape
        self.hidden = hidden
        self.bottleneck_dim = bottleneck_dim
        self.params = params
        self.noise_level: float = 0.0
        self.train_stats: TrainStats | None = None

    def forward(self, x: T.Tensor) -> T.Tensor:
        b = x.shape[0]
        flat = int(np.prod(self.input_shape))
        h = T.reshape(x, (b, flat))
        w1, b1, w2, b2, w3, b3, w4, b4 = self.params
        h = T.relu(T.add(T.matmul(h, w1), b1))
        z = T.relu(T.add(T.matmul(h, w2), b2))
        h = T.relu(T.add(T.matmul(z, w3), b3))
        out = T.sigmoid(T.add(T.matmul(h, w4), b4))
        return T.reshape(out, (b,) + self.input_shape)


def build_denoising_ae(input_shape=(1, 12, 12), hidden: int = 96,
                       bottleneck_dim: int = 32, seed: int = 0) -> DenoisingAutoencoder:
    rng = make_rng(seed, "denoising-ae")
    flat = int(np.prod(input_shape))
    dims = [(flat, hidden), (hidden, bottleneck_dim), (bottleneck_dim, hidden),
            (hidden, flat)]
    params: list[T.Tensor] = []
    for fan_in, fan_out in dims:
        params.append(_glorot(rng, fan_in, fan_out, (fan_in, fan_out)))
        params.append(T.Tensor(np.zeros(fan_out)))
    return DenoisingAutoencoder(input_shape, hidden, bottleneck_dim, params)


def train_denoising_ae(ae: DenoisingAutoencoder, images: np.ndarray,
                       noise_level: float, cfg: TrainConfig) -> TrainStats:
    """Learn x_noisy -> x under mse; noise is clamped additive Gaussian."""
    cfg.validate()
    if len(images) == 0:
        raise ValidationError("training set is empty")
    if noise_level < 0:
        raise ValidationError(f"noise_level must be >= 0, got {noise_level}")
    rng = make_rng(cfg.seed, "train-dae")
    n = len(images)
    epoch_losses = []
    for _epoch in range(cfg.epochs):
        order = rng.permutation(n) if cfg.shuffle else np.arange(n)
        total, batches = 0.0, 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            clean = images[idx]
            noisy = clean if noise_level == 0 else T.clamp01(
                clean + rng.normal(0.0, noise_level, size=clean.shape))
            with T.Tape():
                recon = ae.forward(T.Tensor(noisy))
                loss = T.compute_loss(recon, T.Tensor(clean), "mse")
                T.backward(loss)
            T.sgd_step(ae.params, cfg.lr, cfg.momentum)
            total += loss.item()
            batches += 1
        epoch_losses.append(total / batches)
    ae.noise_level = noise_level
    stats = TrainStats(
        final_loss=epoch_losses[-1], train_accuracy=float("nan"),
        test_accuracy=float("nan"), epochs=cfg.epochs, seed=cfg.seed,
        loss_decreased=epoch_losses[-1] < epoch_losses[0] or cfg.epochs == 1,
        epoch_losses=epoch_losses)
    ae.train_stats = stats
    return stats


def denoise(ae: DenoisingAutoencoder, x: np.ndarray) -> np.ndarray:
    """One reconstruction pass, clamped to [0,1]."""
    arr = np.asarray(x, dtype=np.float64)
    single = arr.shape == ae.input_shape
    batched = arr[None, ...] if single else arr
    if batched.shape[1:] != ae.input_shape:
        raise DimensionError(
            f"denoise: input {arr.shape} does not match {ae.input_shape}")
    out = T.clamp01(ae.forward(T.Tensor(batched)).data)
    return out[0] if single else out


# ---------------------------------------------------------------------------
# variational autoencoder

class VariationalAutoencoder:
    """Gaussian-posterior autoencoder used to spawn look-alike variants."""

    def __init__(self, input_shape: tuple[int, int, int], hidden: int,
                 latent_dim: int, params: list[T.Tensor]):
        self.input_shape = input_shape
        self.hidden = hidden
        self.latent_dim = latent_dim
        # params: enc_w, enc_b, mu_w, mu_b, lv_w, lv_b, dec1_w, dec1_b, dec2_w, dec2_b
        self.params = params
        self.train_stats: TrainStats | None = None

    def encode_t(self, x: T.Tensor) -> tuple[T.Tensor, T.Tensor]:
        b = x.shape[0]
        flat = int(np.prod(self.input_shape))
        h = T.reshape(x, (b, flat))
        enc_w, enc_b, mu_w, mu_b, lv_w, lv_b = self.params[:6]
        h = T.relu(T.add(T.matmul(h, enc_w), enc_b))
        mu = T.add(T.matmul(h, mu_w), mu_b)
        logvar = T.add(T.matmul(h, lv_w), lv_b)
        return mu, logvar

    def decode_t(self, z: T.Tensor) -> T.Tensor:
        b = z.shape[0]
        d1_w, d1_b, d2_w, d2_b = self.params[6:]
        h = T.relu(T.add(T.matmul(z, d1_w), d1_b))
        out = T.sigmoid(T.add(T.matmul(h, d2_w), d2_b))
        return T.reshape(out, (b,) + self.input_shape)


def build_vae(input_shape=(1, 12, 12), hidden: int = 96, latent_dim: int = 16,
              seed: int = 0) -> VariationalAutoencoder:
    rng = make_rng(seed, "vae")
    flat = int(np.prod(input_shape))
    params: list[T.Tensor] = []
    for fan_in, fan_out in [(flat, hidden), (hidden, latent_dim),
                            (hidden, latent_dim)]:
        params.append(_glorot(rng, fan_in, fan_out, (fan_in, fan_out)))
        params.append(T.Tensor(np.zeros(fan_out)))
    # encoder produced [enc, mu, logvar]; reorder is already enc,mu,lv
    for fan_in, fan_out in [(latent_dim, hidden), (hidden, flat)]:
        params.append(_glorot(rng, fan_in, fan_out, (fan_in, fan_out)))
        params.append(T.Tensor(np.zeros(fan_out)))
    return VariationalAutoencoder(input_shape, hidden, latent_dim, params)


def _vae_batch(vae: VariationalAutoencoder, x: np.ndarray) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=np.float64)
    single = arr.shape == vae.input_shape
    batched = arr[None, ...] if single else arr
    if batched.shape[1:] != vae.input_shape:
        raise DimensionError(
            f"vae: input {arr.shape} does not match {vae.input_shape}")
    return batched, single


def vae_encode(vae: VariationalAutoencoder, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic posterior parameters (mu, logvar)."""
    batched, single = _vae_batch(vae, x)
    mu, logvar = vae.encode_t(T.Tensor(batched))
    if single:
        return mu.data[0], logvar.data[0]
    return mu.data, logvar.data


def vae_decode(vae: VariationalAutoencoder, z: np.ndarray) -> np.ndarray:
    zz = np.asarray(z, dtype=np.float64)
    single = zz.ndim == 1
    if single:
        zz = zz[None, :]
    out = T.clamp01(vae.decode_t(T.Tensor(zz)).data)
    return out[0] if single else out


def vae_sample(vae: VariationalAutoencoder, x: np.ndarray, tau: float,
               rng: np.random.Generator) -> np.ndarray:
    """Decode z = mu + tau*std*eta; tau=0 collapses to decode(mu) exactly."""
    if tau < 0:
        raise ValidationError(f"tau must be >= 0, got {tau}")
    mu, logvar = vae_encode(vae, x)
    if tau == 0.0:
        return vae_decode(vae, mu)
    eta = rng.standard_normal(mu.shape)
    z = mu + tau * np.exp(0.5 * logvar) * eta
    return vae_decode(vae, z)


def vae_loss(x: T.Tensor, x_recon: T.Tensor, mu: T.Tensor, logvar: T.Tensor,
             beta: float = 1.0) -> T.Tensor:
    """mse reconstruction plus beta-weighted KL to the standard normal."""
    recon = T.compute_loss(x_recon, x, "mse")
    batch = mu.shape[0] if mu.data.ndim == 2 else 1
    ones = T.Tensor(np.ones(mu.shape))
    inner = T.sub(T.sub(T.add(ones, logvar), T.mul(mu, mu)), T.exp(logvar))
    kl = T.mul(T.tsum(inner), T.Tensor(-0.5 / batch))
    return T.add(recon, T.mul(kl, T.Tensor(float(beta))))


def train_vae(vae: VariationalAutoencoder, images: np.ndarray, cfg: TrainConfig,
              beta: float = 1.0) -> TrainStats:
    """Minibatch ELBO training with reparameterized sampling."""
    cfg.validate()
    if len(images) == 0:
        raise ValidationError("training set is empty")
    rng = make_rng(cfg.seed, "train-vae")
    n = len(images)
    epoch_losses = []
    for _epoch in range(cfg.epochs):
        order = rng.permutation(n) if cfg.shuffle else np.arange(n)
        total, batches = 0.0, 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            batch = images[idx]
            with T.Tape():
                xt = T.Tensor(batch)
                mu, logvar = vae.encode_t(xt)
                eta = T.Tensor(rng.standard_normal(mu.shape))
                std = T.exp(T.mul(logvar, T.Tensor(0.5)))
                z = T.add(mu, T.mul(std, eta))
                recon = vae.decode_t(z)
                loss = vae_loss(xt, recon, mu, logvar, beta)
                T.backward(loss)
            T.sgd_step(vae.params, cfg.lr, cfg.momentum)
            total += loss.item()
            batches += 1
        epoch_losses.append(total / batches)
    stats = TrainStats(
        final_loss=epoch_losses[-1], train_accuracy=float("nan"),
        test_accuracy=float("nan"), epochs=cfg.epochs, seed=cfg.seed,
        loss_decreased=epoch_losses[-1] < epoch_losses[0] or cfg.epochs == 1,
        epoch_losses=epoch_losses)
    vae.train_stats = stats
    return stats


# ---------------------------------------------------------------------------
# LSTM sequence detector

class SequenceDetector:
    """Single-layer LSTM over per-query feature vectors, sigmoid readout."""

    GATES = ("i", "f", "o", "g")

    def __init__(self, feature_dim: int, hidden_size: int, params: list[T.Tensor]):
        self.feature_dim = feature_dim
        self.hidden_size = hidden_size
        # params: per gate (w_x, w_h, b) in GATES order, then (w_out, b_out)
        self.params = params
        self.train_stats: TrainStats | None = None

    def forward_t(self, features: T.Tensor) -> T.Tensor:
        """features is (batch, steps, feature_dim) -> (batch, 1) probability."""
        b, steps, fdim = features.shape
        if fdim != self.feature_dim:
            raise DimensionError(
                f"lstm: feature dim {fdim} != expected {self.feature_dim}")
        if steps < 1:
            raise ContractError("lstm: empty sequence")
        h = T.Tensor(np.zeros((b, self.hidden_size)))
        c = T.Tensor(np.zeros((b, self.hidden_size)))
        for t in range(steps):
            x_t = T.Tensor(features.data[:, t, :])
            gates = {}
            for gi, name in enumerate(self.GATES):
                w_x, w_h, bias = self.params[gi * 3:gi * 3 + 3]
                pre = T.add(T.add(T.matmul(x_t, w_x), T.matmul(h, w_h)), bias)
                gates[name] = (T.tanh(pre) if name == "g" else T.sigmoid(pre))
            c = T.add(T.mul(gates["f"], c), T.mul(gates["i"], gates["g"]))
            h = T.mul(gates["o"], T.tanh(c))
        w_out, b_out = self.params[-2:]
        return T.sigmoid(T.add(T.matmul(h, w_out), b_out))


def build_sequence_detector(feature_dim: int = 5, hidden_size: int = 16,
                            seed: int = 0) -> SequenceDetector:
    rng = make_rng(seed, "sequence-detector")
    params: list[T.Tensor] = []
    for _gate in SequenceDetector.GATES:
        params.append(_glorot(rng, feature_dim, hidden_size,
                              (feature_dim, hidden_size)))
        params.append(_glorot(rng, hidden_size, hidden_size,
                              (hidden_size, hidden_size)))
        params.append(T.Tensor(np.zeros(hidden_size)))
    params.append(_glorot(rng, hidden_size, 1, (hidden_size, 1)))
    params.append(T.Tensor(np.zeros(1)))
    return SequenceDetector(feature_dim, hidden_size, params)


def lstm_forward(det: SequenceDetector, features) -> float:
    """Probability that a feature sequence looks like an attack stream."""
    arr = np.asarray(features, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise ContractError(
            f"lstm_forward: need a nonempty (steps, features) sequence, got {arr.shape}")
    out = det.forward_t(T.Tensor(arr[None, ...]))
    return float(out.data[0, 0])


def train_sequence_detector(det: SequenceDetector, sequences: np.ndarray,
                            labels: np.ndarray, cfg: TrainConfig) -> TrainStats:
    """Binary cross-entropy over fixed-length feature sequences."""
    cfg.validate()
    if len(sequences) == 0:
        raise ValidationError("training set is empty")
    rng = make_rng(cfg.seed, "train-lstm")
    n = len(sequences)
    y = labels.astype(np.float64).reshape(-1, 1)
    epoch_losses = []
    for _epoch in range(cfg.epochs):
        order = rng.permutation(n) if cfg.shuffle else np.arange(n)
        total, batches = 0.0, 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            target = y[idx]
            with T.Tape():
                p = det.forward_t(T.Tensor(sequences[idx]))
                # bce = -mean(y*log(p) + (1-y)*log(1-p))
                pos = T.mul(T.Tensor(target), T.log_guarded(p))
                neg = T.mul(T.Tensor(1.0 - target),
                            T.log_guarded(T.sub(T.Tensor(np.ones(p.shape)), p)))
                loss = T.mul(T.tmean(T.add(pos, neg)), T.Tensor(-1.0))
                T.backward(loss)
            T.sgd_step(det.params, cfg.lr, cfg.momentum)
            total += loss.item()
            batches += 1
        epoch_losses.append(total / batches)
    stats = TrainStats(
        final_loss=epoch_losses[-1], train_accuracy=float("nan"),
        test_accuracy=float("nan"), epochs=cfg.epochs, seed=cfg.seed,
        loss_decreased=epoch_losses[-1] < epoch_losses[0] or cfg.epochs == 1,
        epoch_losses=epoch_losses)
    det.train_stats = stats
    return stats
