"""Network building blocks: GCN encoder, MLP heads, and the link decoder.

All parameters are float64 and flow through the reverse-mode autodiff ops.
Encoders exploit identity features: X @ W collapses to W (with masked
feature columns zeroing the matching rows of W), so the n x n identity is
never materialized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import autodiff as ad
from ..graphs import normalized_adjacency
from ..optim import Parameter


@dataclass(frozen=True)
class EncoderConfig:
    n_layers: int = 2
    layer_size: int = 128
    norm: str = "batch"  # "batch" | "layer"
    batchnorm_momentum: float = 0.9
    weight_standardization: bool = False

    def __post_init__(self):
        if not 1 <= self.n_layers <= 4:
            raise ValueError("n_layers must be 1..4")
        if not 64 <= self.layer_size <= 512:
            raise ValueError("layer_size must be 64..512")
        if self.norm not in ("batch", "layer"):
            raise ValueError("norm must be 'batch' or 'layer'")
        if not 0.0 <= self.batchnorm_momentum <= 1.0:
            raise ValueError("batchnorm_momentum must lie in [0, 1]")


def glorot(rng, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class GCNEncoder:
    """Stacked GCN layers: H <- PReLU(Norm(A_hat @ H @ W)) per layer."""

    def __init__(self, in_dim, cfg, rng):
        self.cfg = cfg
        self.in_dim = in_dim
        self.weights = []
        self.slopes = []
        self.gammas = []
        self.betas = []
        self.bn_states = []
        d_in = in_dim
        for layer in range(cfg.n_layers):
            d_out = cfg.layer_size
            self.weights.append(Parameter(glorot(rng, d_in, d_out),
                                          name=f"enc.W{layer}"))
            self.slopes.append(Parameter(np.full((1, 1), 0.25),
                                         name=f"enc.prelu{layer}"))
            self.gammas.append(Parameter(np.ones((1, d_out)),
                                         name=f"enc.gamma{layer}"))
            self.betas.append(Parameter(np.zeros((1, d_out)),
                                        name=f"enc.beta{layer}"))
            self.bn_states.append({"running_mean": np.zeros((1, d_out)),
                                   "running_var": np.ones((1, d_out))})
            d_in = d_out

    def parameters(self):
        return self.weights + self.slopes + self.gammas + self.betas

    def _first_product(self, view, weight_tensor):
        """X @ W for the view's features without materializing identities."""
        x = view.features
        if x.kind == "identity":
            if x.column_mask is None:
                return weight_tensor
            mask = ad.Tensor(x.column_mask.reshape(-1, 1))
            return ad.elementwise_mul(weight_tensor, mask)
        return ad.matmul(ad.Tensor(x.dense_values), weight_tensor)

    def forward(self, view, mode="train", weight_source=None):
        """Embed the view's nodes.

        mode: "train" (batch statistics, running stats updated),
              "target" (batch statistics, no update; used by EMA targets),
              "eval" (running statistics).
        weight_source: optional dict name -> Tensor overriding parameters
              (constant EMA shadows for target-side encoding).
        """
        if view.features.n_rows != view.n or (view.features.n_cols
                                              != self.in_dim):
            raise ValueError("feature shape does not match encoder input")
        adj = normalized_adjacency(view)
        h = None
        for layer in range(self.cfg.n_layers):
            w = self._tensor_of(self.weights[layer], weight_source)
            if self.cfg.weight_standardization:
                w = ad.standardize_cols(w)
            if layer == 0:
                xw = self._first_product(view, w)
            else:
                xw = ad.matmul(h, w)
            pre = ad.sparse_matmul(adj, xw)
            if self.cfg.norm == "batch":
                if mode == "train":
                    normed = ad.batch_norm(
                        pre, self._tensor_of(self.gammas[layer], weight_source),
                        self._tensor_of(self.betas[layer], weight_source),
                        self.bn_states[layer], self.cfg.batchnorm_momentum,
                        training=True)
                elif mode == "target":
                    state = {k: v.copy()
                             for k, v in self.bn_states[layer].items()}
                    normed = ad.batch_norm(
                        pre, self._tensor_of(self.gammas[layer], weight_source),
                        self._tensor_of(self.betas[layer], weight_source),
                        state, self.cfg.batchnorm_momentum, training=True)
                else:
                    normed = ad.batch_norm(
                        pre, self._tensor_of(self.gammas[layer], weight_source),
                        self._tensor_of(self.betas[layer], weight_source),
                        self.bn_states[layer], self.cfg.batchnorm_momentum,
                        training=False)
            else:
                normed = ad.layer_norm(
                    pre, self._tensor_of(self.gammas[layer], weight_source),
                    self._tensor_of(self.betas[layer], weight_source))
            h = ad.prelu(normed, self._tensor_of(self.slopes[layer],
                                                 weight_source))
        return h

    @staticmethod
    def _tensor_of(param, weight_source):
        if weight_source is None:
            return param.tensor
        return weight_source[param.name]


class MLP:
    """Two linear layers with ReLU between; returns pre-activation output."""

    def __init__(self, in_dim, hidden_dim, out_dim, rng, name):
        self.w1 = Parameter(glorot(rng, in_dim, hidden_dim), name=f"{name}.w1")
        self.b1 = Parameter(np.zeros((1, hidden_dim)), name=f"{name}.b1")
        self.w2 = Parameter(glorot(rng, hidden_dim, out_dim), name=f"{name}.w2")
        self.b2 = Parameter(np.zeros((1, out_dim)), name=f"{name}.b2")
        self.name = name

    def parameters(self):
        return [self.w1, self.b1, self.w2, self.b2]

    def forward(self, x, weight_source=None):
        def tensor_of(p):
            return p.tensor if weight_source is None else weight_source[p.name]

        hidden = ad.relu(ad.add(ad.matmul(x, tensor_of(self.w1)),
                                tensor_of(self.b1)))
        return ad.add(ad.matmul(hidden, tensor_of(self.w2)),
                      tensor_of(self.b2))


class Projector(MLP):
    """Contrastive projection head g: embedding -> proj_hidden -> embedding."""

    def __init__(self, dim, proj_hidden, rng):
        super().__init__(dim, proj_hidden, dim, rng, name="proj")


class Predictor(MLP):
    """Online-side prediction head for the asymmetric models."""

    def __init__(self, dim, proj_hidden, rng):
        super().__init__(dim, proj_hidden, dim, rng, name="pred")


class LinkMLP(MLP):
    """Link representation head: MLP over the Hadamard product h_u * h_v."""

    def __init__(self, dim, proj_hidden, rng):
        super().__init__(dim, proj_hidden, dim, rng, name="link")


class Decoder:
    """Two linear layers with a ReLU between them; sigmoid applied on top.

    Consumes Hadamard products of node embeddings and returns logits via
    `logits`; `scores` wraps them in a sigmoid.
    """

    def __init__(self, dim, hidden_dim, rng):
        self.mlp = MLP(dim, hidden_dim, 1, rng, name="dec")

    def parameters(self):
        return self.mlp.parameters()

    def logits(self, z):
        return self.mlp.forward(z)

    def scores(self, z):
        return ad.sigmoid(self.logits(z))


def link_representation(h, edges, mlp, weight_source=None):
    """Row per edge: MLP(h_u * h_v). Symmetric in (u, v)."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    n = h.shape[0]
    if edges.size and (edges.min() < 0 or edges.max() >= n):
        raise ValueError("edge endpoint outside the embedding matrix")
    hu = ad.gather_rows(h, edges[:, 0])
    hv = ad.gather_rows(h, edges[:, 1])
    return mlp.forward(ad.elementwise_mul(hu, hv), weight_source=weight_source)


def hadamard_pairs(h, pairs):
    """h_u * h_v rows for raw decoder input."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    hu = ad.gather_rows(h, pairs[:, 0])
    hv = ad.gather_rows(h, pairs[:, 1])
    return ad.elementwise_mul(hu, hv)
