"""Sequence-to-sequence segmentation network and its functional API.

The network maps 3 consecutive CT+PET slices to 3 tumor probability
maps: a shared encoder per slice, channel and spatial attention at the
bottleneck, a bidirectional recurrence across the 3 slice positions with
gated fusion of the two directions, a second attention pair, then a
decoder with skip connections and a sigmoid head. Everything runs in
float64 so gradient checks are meaningful.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
import torch
from torch import nn

from .reconstruct import ProbSequence
from .sequences import SliceSequence

__all__ = [
    "ModelConfig",
    "ModelParams",
    "SegModel",
    "build_model",
    "get_params",
    "set_params",
    "forward",
    "loss",
    "backward",
    "save_checkpoint",
    "load_checkpoint",
]


@dataclass(frozen=True)
class ModelConfig:
    image_size: int
    base_width: int = 8
    depth: int = 3
    recurrent_hidden: int | None = None
    input_channels: int = 2
    seq_len: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.seq_len != 3:
            raise ValueError("sequence length is fixed at 3 slices")
        if self.image_size % (2 ** self.depth) != 0:
            raise ValueError(
                f"image_size {self.image_size} not divisible by 2^{self.depth}")
        if self.base_width < 1 or self.depth < 1:
            raise ValueError("base_width and depth must be positive")

    @property
    def bottleneck_width(self) -> int:
        return self.base_width * 2 ** self.depth

    @property
    def hidden(self) -> int:
        return self.recurrent_hidden or self.bottleneck_width


@dataclass(frozen=True)
class ModelParams:
    """Flat float64 parameter vector plus (name, shape) layout."""

    vector: np.ndarray
    index: tuple[tuple[str, tuple[int, ...]], ...]

    def __post_init__(self):
        vec = np.asarray(self.vector, dtype=np.float64).ravel()
        if not np.isfinite(vec).all():
            raise ValueError("parameters must be finite")
        expected = sum(int(np.prod(shape)) for _, shape in self.index)
        if vec.size != expected:
            raise ValueError(f"vector has {vec.size} values, layout needs {expected}")
        object.__setattr__(self, "vector", vec)
        object.__setattr__(self, "index", tuple((n, tuple(s)) for n, s in self.index))

    def slice_for(self, name: str) -> np.ndarray:
        offset = 0
        for pname, shape in self.index:
            size = int(np.prod(shape))
            if pname == name:
                return self.vector[offset:offset + size].reshape(shape)
            offset += size
        raise KeyError(name)


def _groups(channels: int) -> int:
    return math.gcd(channels, 8)


class DoubleConv(nn.Module):
    def __init__(self, cin, cout):
        super().__init__()
        self.c1 = nn.Conv2d(cin, cout, 3, padding=1)
        self.n1 = nn.GroupNorm(_groups(cout), cout)
        self.c2 = nn.Conv2d(cout, cout, 3, padding=1)
        self.n2 = nn.GroupNorm(_groups(cout), cout)

    def forward(self, x):
        x = torch.relu(self.n1(self.c1(x)))
        return torch.relu(self.n2(self.c2(x)))


class ChannelAttention(nn.Module):
    """Squeeze-style gate: global average pool -> 2-layer MLP -> sigmoid."""

    def __init__(self, channels, reduction=2):
        super().__init__()
        hidden = max(channels // reduction, 1)
        self.fc1 = nn.Linear(channels, hidden)
        self.fc2 = nn.Linear(hidden, channels)

    def forward(self, x):
        s = x.mean(dim=(2, 3))
        a = torch.sigmoid(self.fc2(torch.relu(self.fc1(s))))
        return x * a[:, :, None, None]


class SpatialAttention(nn.Module):
    """1-channel sigmoid gate from channel-pooled features."""

    def __init__(self, kernel=7):
        super().__init__()
        self.conv = nn.Conv2d(2, 1, kernel, padding=kernel // 2)

    def forward(self, x):
        pooled = torch.cat([x.mean(dim=1, keepdim=True),
                            x.max(dim=1, keepdim=True).values], dim=1)
        return x * torch.sigmoid(self.conv(pooled))


class SegModel(nn.Module):
    """Input (3, 2, H, W) slice sequence -> (3, H, W) probability maps."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        torch.manual_seed(config.seed)
        self.config = config
        widths = [config.base_width * 2 ** i for i in range(config.depth)]
        cb = config.bottleneck_width

        self.encoders = nn.ModuleList()
        cin = config.input_channels
        for w in widths:
            self.encoders.append(DoubleConv(cin, w))
            cin = w
        self.pool = nn.MaxPool2d(2)
        self.bottleneck = DoubleConv(widths[-1], cb)
        self.att_enc_channel = ChannelAttention(cb)
        self.att_enc_spatial = SpatialAttention()

        hidden = config.hidden
        self.lstm = nn.LSTM(cb, hidden, bidirectional=True)
        self.gate = nn.Linear(2 * hidden, hidden)
        self.proj = nn.Linear(hidden, cb)
        self.att_rec_channel = ChannelAttention(cb)
        self.att_rec_spatial = SpatialAttention()

        self.ups = nn.ModuleList()
        self.decoders = nn.ModuleList()
        cur = cb
        for w in reversed(widths):
            self.ups.append(nn.ConvTranspose2d(cur, w, 2, stride=2))
            self.decoders.append(DoubleConv(2 * w, w))
            cur = w
        self.head = nn.Conv2d(widths[0], 1, 1)
        self.double()

    def forward(self, x):
        if x.ndim != 4 or x.shape[0] != 3 or x.shape[1] != self.config.input_channels:
            raise ValueError(f"expected (3, {self.config.input_channels}, H, W) "
                             f"input, got {tuple(x.shape)}")
        if x.shape[2] != self.config.image_size or x.shape[3] != self.config.image_size:
            raise ValueError(f"expected {self.config.image_size}^2 slices, "
                             f"got {tuple(x.shape[2:])}")
        skips = []
        for enc in self.encoders:
            x = enc(x)
            skips.append(x)
            x = self.pool(x)
        x = self.bottleneck(x)
        x = self.att_enc_spatial(self.att_enc_channel(x))

        # recurrence across the 3 slice positions, independently per pixel
        s, c, h, w = x.shape
        seq = x.flatten(2).permute(0, 2, 1).reshape(s, h * w, c)
        out, _ = self.lstm(seq)
        hidden = self.config.hidden
        fwd, bwd = out[..., :hidden], out[..., hidden:]
        g = torch.sigmoid(self.gate(torch.cat([fwd, bwd], dim=-1)))
        fused = g * fwd + (1.0 - g) * bwd
        x = self.proj(fused).permute(0, 2, 1).reshape(s, c, h, w)
        x = self.att_rec_spatial(self.att_rec_channel(x))

        for up, dec, skip in zip(self.ups, self.decoders, reversed(skips)):
            x = up(x)
            x = dec(torch.cat([x, skip], dim=1))
        return torch.sigmoid(self.head(x)).squeeze(1)


def build_model(config: ModelConfig) -> SegModel:
    return SegModel(config)


def get_params(model: SegModel) -> ModelParams:
    names, chunks = [], []
    for name, p in model.named_parameters():
        names.append((name, tuple(p.shape)))
        chunks.append(p.detach().cpu().numpy().ravel())
    return ModelParams(np.concatenate(chunks), tuple(names))


def set_params(model: SegModel, params: ModelParams) -> SegModel:
    expected = [(n, tuple(p.shape)) for n, p in model.named_parameters()]
    if list(params.index) != expected:
        raise ValueError("parameter layout does not match model")
    offset = 0
    with torch.no_grad():
        for _, p in model.named_parameters():
            size = p.numel()
            chunk = params.vector[offset:offset + size].reshape(tuple(p.shape))
            p.copy_(torch.from_numpy(chunk.copy()))
            offset += size
    return model


def _seq_input(seq: SliceSequence) -> torch.Tensor:
    arr = np.stack([seq.ct, seq.pet], axis=1)
    return torch.from_numpy(np.ascontiguousarray(arr, dtype=np.float64))


def forward(params: ModelParams, config: ModelConfig,
            seq: SliceSequence, model: SegModel | None = None) -> ProbSequence:
    """Functional forward pass; builds the module unless one is supplied."""
    model = model if model is not None else build_model(config)
    set_params(model, params)
    model.eval()
    with torch.no_grad():
        probs = model(_seq_input(seq)).numpy()
    return ProbSequence(seq.start_k, np.clip(probs, 0.0, 1.0))


def _loss_terms(pred: torch.Tensor, target: torch.Tensor,
                epsilon: float) -> tuple[torch.Tensor, torch.Tensor]:
    tiny = torch.finfo(pred.dtype).tiny
    dice_terms = []
    for i in range(pred.shape[0]):
        p, g = pred[i], target[i]
        inter = (p * g).sum()
        dice_terms.append((2.0 * inter + epsilon) / (p.sum() + g.sum() + epsilon))
    dice = 1.0 - torch.stack(dice_terms).mean()
    bce = -(target * torch.log(pred.clamp(min=tiny))
            + (1.0 - target) * torch.log((1.0 - pred).clamp(min=tiny))).mean()
    return dice, bce


def loss(pred, target, dice_w: float = 1.0, bce_w: float = 1.0,
         epsilon: float = 1e-5) -> tuple[float, dict]:
    """Weighted soft-Dice + BCE over the 3 predicted maps."""
    pred_t = torch.as_tensor(np.asarray(pred, dtype=np.float64))
    target_arr = np.asarray(target, dtype=np.float64)
    if not np.isin(target_arr, (0.0, 1.0)).all():
        raise ValueError("target masks must be binary")
    if pred_t.shape != target_arr.shape:
        raise ValueError(f"shape mismatch {tuple(pred_t.shape)} vs "
                         f"{target_arr.shape}")
    dice, bce = _loss_terms(pred_t, torch.as_tensor(target_arr), epsilon)
    total = dice_w * float(dice) + bce_w * float(bce)
    return total, {"dice": float(dice), "bce": float(bce)}


def backward(params: ModelParams, config: ModelConfig, seq: SliceSequence,
             target, dice_w: float = 1.0, bce_w: float = 1.0,
             epsilon: float = 1e-5, frozen: tuple[str, ...] = (),
             model: SegModel | None = None) -> np.ndarray:
    """Gradient of the loss w.r.t. the flat parameter vector.

    Parameters whose name starts with any prefix in `frozen` contribute
    zero gradient (they are excluded from the graph).
    """
    model = model if model is not None else build_model(config)
    set_params(model, params)
    model.train()
    for name, p in model.named_parameters():
        p.requires_grad_(not any(name.startswith(f) for f in frozen))
        p.grad = None
    target_arr = np.asarray(target, dtype=np.float64)
    if not np.isin(target_arr, (0.0, 1.0)).all():
        raise ValueError("target masks must be binary")
    pred = model(_seq_input(seq))
    dice, bce = _loss_terms(pred, torch.as_tensor(target_arr), epsilon)
    (dice_w * dice + bce_w * bce).backward()
    grads = []
    for _, p in model.named_parameters():
        if p.grad is None:
            grads.append(np.zeros(p.numel()))
        else:
            grads.append(p.grad.detach().cpu().numpy().ravel())
    return np.concatenate(grads)


def save_checkpoint(path, params: ModelParams, config: ModelConfig,
                    epoch: int, val_dsc: float) -> None:
    """Single file: one JSON header line, then the f64le parameter payload."""
    header = {
        "config": asdict(config),
        "epoch": epoch,
        "val_dsc": val_dsc,
        "params": [[name, list(shape)] for name, shape in params.index],
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        fh.write(params.vector.astype("<f8").tobytes())


def load_checkpoint(path) -> tuple[ModelParams, ModelConfig, dict]:
    with open(path, "rb") as fh:
        header_line = fh.readline()
        payload = fh.read()
    try:
        header = json.loads(header_line)
    except json.JSONDecodeError as exc:
        raise ValueError(f"corrupt checkpoint header in {path}: {exc}") from exc
    index = tuple((name, tuple(shape)) for name, shape in header["params"])
    expected = sum(int(np.prod(s)) for _, s in index)
    vector = np.frombuffer(payload, dtype="<f8")
    if vector.size != expected:
        raise ValueError(f"checkpoint payload has {vector.size} floats, "
                         f"layout needs {expected}")
    config = ModelConfig(**header["config"])
    params = ModelParams(vector.astype(np.float64), index)
    meta = {"epoch": header["epoch"], "val_dsc": header["val_dsc"]}
    return params, config, meta
