"""Frozen backbones exposing per-block token features.

A backbone announces its block count and block dim, owns the preprocessing
pipeline of its checkpoint, and maps a preprocessed image batch to a
(batch, block_count, block_dim) tensor: for each transformer block, either
the class token's vector ("cls") or the mean over the patch tokens ("mean").
Everything is frozen and evaluated without gradients, so extraction is
deterministic for a fixed checkpoint.
"""

from __future__ import annotations

import numpy as np
import torch

from .errors import ExtractorError

TOKEN_CHOICES = ("cls", "mean")


class Backbone:
    name: str
    block_count: int
    block_dim: int

    def preprocess(self, image) -> torch.Tensor:
        """PIL image (or HWC array) -> float tensor (3, H, W)."""
        raise NotImplementedError

    def block_features(self, batch: torch.Tensor, token: str) -> torch.Tensor:
        """(B, 3, H, W) -> (B, block_count, block_dim)."""
        raise NotImplementedError


class VitB16Backbone(Backbone):
    """torchvision ViT-B/16 pretrained on ImageNet-1K; 12 blocks of width 768."""

    name = "vit_b_16_imagenet1k"
    block_count = 12
    block_dim = 768

    def __init__(self, device: str = "cpu"):
        try:
            from torchvision.models import ViT_B_16_Weights, vit_b_16
            weights = ViT_B_16_Weights.IMAGENET1K_V1
            model = vit_b_16(weights=weights)
        except Exception as exc:
            raise ExtractorError(
                "cannot load pretrained ViT-B/16 weights; download them once "
                "on a networked machine (torchvision caches under TORCH_HOME, "
                f"default ~/.cache/torch) and retry: {exc}"
            ) from exc
        self.device = torch.device(device)
        self.model = model.to(self.device).eval()
        for parameter in self.model.parameters():
            parameter.requires_grad_(False)
        self._transform = weights.transforms()
        self.preprocessing_id = (
            "torchvision/ViT_B_16_Weights.IMAGENET1K_V1.transforms"
        )
        self._captured = {}
        for index, layer in enumerate(self.model.encoder.layers):
            layer.register_forward_hook(self._capture(index))

    def _capture(self, index):
        def hook(_module, _inputs, output):
            self._captured[index] = output
        return hook

    def preprocess(self, image) -> torch.Tensor:
        return self._transform(image)

    def block_features(self, batch: torch.Tensor, token: str) -> torch.Tensor:
        if token not in TOKEN_CHOICES:
            raise ExtractorError(f"unknown token choice {token!r}")
        self._captured.clear()
        with torch.no_grad():
            self.model(batch.to(self.device))
        if len(self._captured) != self.block_count:
            raise ExtractorError(
                f"captured {len(self._captured)} block outputs, expected "
                f"{self.block_count}")
        blocks = []
        for index in range(self.block_count):
            tokens = self._captured[index]        # (B, 1 + patches, dim)
            if token == "cls":
                blocks.append(tokens[:, 0, :])
            else:
                blocks.append(tokens[:, 1:, :].mean(dim=1))
        self._captured.clear()
        return torch.stack(blocks, dim=1).cpu()   # (B, n, E)


class StubBackbone(Backbone):
    """Tiny deterministic backbone for tests and dry runs (no weights needed).

    Per-block features are fixed random linear maps of the flattened image,
    so equal images always produce equal features.
    """

    name = "stub"
    preprocessing_id = "stub/identity-tensor"

    def __init__(self, *, block_count: int = 3, block_dim: int = 8,
                 image_shape=(3, 8, 8), seed: int = 0):
        self.block_count = block_count
        self.block_dim = block_dim
        self.image_shape = tuple(image_shape)
        flat = int(np.prod(self.image_shape))
        rng = np.random.Generator(np.random.Philox(key=seed))
        maps = rng.standard_normal((block_count, flat, block_dim),
                                   dtype=np.float32)
        maps /= np.float32(np.sqrt(flat))
        self._maps = torch.from_numpy(maps)

    def preprocess(self, image) -> torch.Tensor:
        if isinstance(image, torch.Tensor):
            tensor = image.to(torch.float32)
        else:
            array = np.asarray(image, dtype=np.float32)
            if array.ndim == 3 and array.shape[-1] in (1, 3):
                array = np.moveaxis(array, -1, 0)
            tensor = torch.from_numpy(array / 255.0)
        if tuple(tensor.shape) != self.image_shape:
            raise ExtractorError(
                f"stub backbone expects images of shape {self.image_shape}, "
                f"got {tuple(tensor.shape)}")
        return tensor

    def block_features(self, batch: torch.Tensor, token: str) -> torch.Tensor:
        if token not in TOKEN_CHOICES:
            raise ExtractorError(f"unknown token choice {token!r}")
        flat = batch.reshape(batch.shape[0], -1).to(torch.float32)
        blocks = [flat @ self._maps[b] for b in range(self.block_count)]
        out = torch.stack(blocks, dim=1)
        if token == "mean":                      # distinct from cls on purpose
            out = torch.tanh(out)
        return out


_REGISTRY = {
    VitB16Backbone.name: VitB16Backbone,
    StubBackbone.name: StubBackbone,
}


def load_backbone(name: str, device: str = "cpu") -> Backbone:
    if name not in _REGISTRY:
        known = ", ".join(sorted(_REGISTRY))
        raise ExtractorError(f"unknown backbone {name!r} (known: {known})")
    if name == StubBackbone.name:
        return StubBackbone()
    return _REGISTRY[name](device=device)
