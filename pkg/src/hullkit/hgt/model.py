"""Heterogeneous graph transformer over panel graphs.

Per layer and per meta-relation (source type, edge type, target type):

    score = (K_u W^ATT_e . Q_v) * mu_r / sqrt(d_k)     per head
    alpha = softmax of score over all in-edges of v    per head
    msg   = V_u W^MSG_e                                per head
    H~_v  = sum_u alpha * msg                          heads concatenated
    H_v   = BN(gelu(H~_v) W^A_T(v) + H_v)

Nodes with no in-edges get H~_v = 0, so gelu(0) W^A = 0 and the residual
passes through unchanged.  A linear head maps geometry-node embeddings to the
10x50 field.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..graph import FEATURE_DIMS, GEOMETRY, NODE_TYPES, TARGET_DIM, HeteroGraph
from . import autograd as ag

BN_EPS = 1e-5
BN_MOMENTUM = 0.1
ACTIVATIONS = ("gelu",)


class ModelError(ValueError):
    pass


@dataclass
class HgtConfig:
    layers: int = 2
    heads: int = 4
    hidden: int = 64
    activation: str = "gelu"
    learning_rate: float = 1e-3
    batch_size: int = 64
    max_epochs: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.hidden % self.heads:
            raise ModelError(f"hidden width {self.hidden} not divisible by {self.heads} heads")
        if self.activation not in ACTIVATIONS:
            raise ModelError(f"unsupported activation {self.activation!r}")
        if self.layers < 0 or self.batch_size < 1 or self.max_epochs < 0:
            raise ModelError("layers, batch size and epochs must be non-negative")

    @property
    def head_dim(self):
        return self.hidden // self.heads

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def relation_key(rel):
    return "|".join(rel)


def edge_types(relations):
    return sorted({r[1] for r in relations})


@dataclass
class Normalizer:
    """Per-column feature statistics per node type plus scalar target statistics."""
    mean: dict
    std: dict
    target_mean: float = 0.0
    target_std: float = 1.0

    @classmethod
    def identity(cls):
        return cls({t: np.zeros(n) for t, n in FEATURE_DIMS.items()},
                   {t: np.ones(n) for t, n in FEATURE_DIMS.items()})

    @classmethod
    def fit(cls, graphs, targets=None):
        mean, std = {}, {}
        for t, n in FEATURE_DIMS.items():
            rows = [g.x[t] for g in graphs if g.num_nodes(t)]
            if rows:
                x = np.concatenate(rows)
                m, s = x.mean(axis=0), x.std(axis=0)
            else:
                m, s = np.zeros(n), np.ones(n)
            s = np.where(s > 1e-12 * max(1.0, np.abs(m).max()), s, 1.0)
            mean[t], std[t] = m, s
        tm, ts = 0.0, 1.0
        if targets is not None and len(targets):
            y = np.concatenate([np.asarray(t).ravel() for t in targets])
            tm, ts = float(y.mean()), float(y.std())
            if not ts > 0:
                ts = 1.0
        return cls(mean, std, tm, ts)


@dataclass
class HgtParameters:
    config: HgtConfig
    relations: list                      # sorted meta-relation triples
    weights: dict                        # trainable arrays
    running: dict = field(default_factory=dict)   # batch-norm running mean / var
    norm: Normalizer = field(default_factory=Normalizer.identity)

    def copy(self):
        return HgtParameters(self.config, list(self.relations),
                             {k: v.copy() for k, v in self.weights.items()},
                             {k: v.copy() for k, v in self.running.items()},
                             Normalizer({k: v.copy() for k, v in self.norm.mean.items()},
                                        {k: v.copy() for k, v in self.norm.std.items()},
                                        self.norm.target_mean, self.norm.target_std))

    def validate(self):
        for k, v in self.weights.items():
            if not np.all(np.isfinite(v)):
                raise ModelError(f"non-finite parameter {k}")

    def families(self):
        """Parameter names grouped by role, e.g. 'K', 'att', 'mu', 'bn_g', 'in_W'."""
        fam = {}
        for k in self.weights:
            fam.setdefault(_family(k), []).append(k)
        return fam

    @property
    def size(self):
        return sum(v.size for v in self.weights.values())


def _family(name):
    parts = name.split("/")
    if parts[0] == "in":
        return "in_" + parts[-1]
    if parts[0] == "out":
        return "out_" + parts[-1]
    return parts[-1] if parts[1] != "mu" else "mu"


def init_params(config: HgtConfig, relations, seed=None) -> HgtParameters:
    rng = np.random.default_rng(config.seed if seed is None else seed)
    relations = sorted(tuple(r) for r in relations)
    d, h, dk = config.hidden, config.heads, config.head_dim
    w = {}

    def dense(fan_in, shape):
        return rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=shape)

    for t in NODE_TYPES:
        w[f"in/{t}/W"] = dense(FEATURE_DIMS[t], (FEATURE_DIMS[t], d))
        w[f"in/{t}/b"] = np.zeros(d)
    running = {}
    for l in range(config.layers):
        for t in NODE_TYPES:
            for m in ("K", "Q", "V", "A"):
                w[f"L{l}/{t}/{m}"] = dense(d, (d, d))
            w[f"L{l}/{t}/bn_g"] = np.ones(d)
            w[f"L{l}/{t}/bn_b"] = np.zeros(d)
            running[f"L{l}/{t}/mean"] = np.zeros(d)
            running[f"L{l}/{t}/var"] = np.ones(d)
        for e in edge_types(relations):
            w[f"L{l}/{e}/att"] = dense(dk, (h, dk, dk))
            w[f"L{l}/{e}/msg"] = dense(dk, (h, dk, dk))
        for r in relations:
            w[f"L{l}/mu/{relation_key(r)}"] = np.ones(h)
    w["out/W"] = dense(d, (d, TARGET_DIM))
    w["out/b"] = np.zeros(TARGET_DIM)
    return HgtParameters(config, [list(r) for r in relations], w, running)


def batch_graphs(graphs) -> HeteroGraph:
    """Disjoint union; node blocks are stacked in list order."""
    graphs = list(graphs)
    if len(graphs) == 1:
        return graphs[0]
    x, edges, names = {}, {}, []
    offs = {t: 0 for t in NODE_TYPES}
    parts = {}
    for g in graphs:
        for rel, idx in g.edges.items():
            s, _, t = rel
            parts.setdefault(rel, []).append(idx + np.array([[offs[s]], [offs[t]]]))
        for t in NODE_TYPES:
            offs[t] += g.num_nodes(t)
        names.extend(g.strip_names)
    for t in NODE_TYPES:
        rows = [g.x[t] for g in graphs if t in g.x]
        if rows:
            x[t] = np.concatenate(rows)
    for rel, blocks in parts.items():
        edges[rel] = np.concatenate(blocks, axis=1)
    return HeteroGraph(x, edges, names)


@dataclass
class ForwardResult:
    pred: ag.Tensor                  # (n_geometry, 500), z-scored units
    attention: list                  # per layer: {target type: (alpha (E, h), dst idx)}
    batch_stats: dict                # batch-norm statistics seen in training mode


def forward(graph: HeteroGraph, params: HgtParameters, training=False, tensors=None,
            keep_attention=False) -> ForwardResult:
    """Run the network.  ``tensors`` maps parameter names to leaf Tensors when gradients
    are wanted; otherwise constants are used."""
    cfg = params.config
    d, h, dk = cfg.hidden, cfg.heads, cfg.head_dim
    W = tensors if tensors is not None else {k: ag.Tensor(v) for k, v in params.weights.items()}
    known = {tuple(r) for r in params.relations}
    for rel, idx in graph.edges.items():
        if idx.shape[1] and tuple(rel) not in known:
            raise ModelError(f"relation {rel} was not seen when the model was built")
    for t, xt in graph.x.items():
        if xt.shape[1] != FEATURE_DIMS[t]:
            raise ModelError(f"{t} feature width {xt.shape[1]} != {FEATURE_DIMS[t]}")
    if not graph.num_nodes(GEOMETRY):
        raise ModelError("graph has no geometry nodes")

    types = [t for t in NODE_TYPES if graph.num_nodes(t)]
    H = {}
    for t in types:
        xt = (graph.x[t] - params.norm.mean[t]) / params.norm.std[t]
        H[t] = ag.add(ag.matmul(ag.Tensor(xt), W[f"in/{t}/W"]), W[f"in/{t}/b"])

    rels = [r for r in sorted(graph.edges) if graph.edges[r].shape[1]
            and r[0] in H and r[2] in H]
    attention, stats = [], {}
    scale = 1.0 / np.sqrt(dk)
    for l in range(cfg.layers):
        K = {t: ag.reshape(ag.matmul(H[t], W[f"L{l}/{t}/K"]), (-1, h, dk)) for t in types}
        Q = {t: ag.reshape(ag.matmul(H[t], W[f"L{l}/{t}/Q"]), (-1, h, dk)) for t in types}
        V = {t: ag.reshape(ag.matmul(H[t], W[f"L{l}/{t}/V"]), (-1, h, dk)) for t in types}
        scores, msgs, dsts = {}, {}, {}
        for r in rels:
            s, e, t = r
            src, dst = graph.edges[r]
            k = ag.transpose(ag.gather(K[s], src), (1, 0, 2))          # (h, E, dk)
            katt = ag.transpose(ag.matmul(k, W[f"L{l}/{e}/att"]), (1, 0, 2))
            q = ag.gather(Q[t], dst)
            sc = ag.mul(ag.sum_axis(ag.mul(katt, q), 2), ag.mul(W[f"L{l}/mu/{relation_key(r)}"], scale))
            v = ag.transpose(ag.gather(V[s], src), (1, 0, 2))
            m = ag.transpose(ag.matmul(v, W[f"L{l}/{e}/msg"]), (1, 0, 2))  # (E, h, dk)
            scores.setdefault(t, []).append(sc)
            msgs.setdefault(t, []).append(m)
            dsts.setdefault(t, []).append(dst)
        layer_att, newH = {}, {}
        for t in types:
            n = graph.num_nodes(t)
            if t in scores:
                dst = np.concatenate(dsts[t])
                alpha = ag.segment_softmax(ag.concat(scores[t]), dst, n)
                agg = ag.segment_sum(ag.mul(ag.reshape(alpha, (-1, h, 1)), ag.concat(msgs[t])), dst, n)
                upd = ag.matmul(ag.gelu(ag.reshape(agg, (n, d))), W[f"L{l}/{t}/A"])
                pre = ag.add(upd, H[t])
                if keep_attention:
                    layer_att[t] = (alpha.data, dst)
            else:
                pre = H[t]
            g, b = W[f"L{l}/{t}/bn_g"], W[f"L{l}/{t}/bn_b"]
            if training:
                out, mu, var = ag.batch_norm(pre, g, b, BN_EPS)
                stats[f"L{l}/{t}/mean"], stats[f"L{l}/{t}/var"] = mu, var
            else:
                mu, var = params.running[f"L{l}/{t}/mean"], params.running[f"L{l}/{t}/var"]
                inv = 1.0 / np.sqrt(var + BN_EPS)
                out = ag.add(ag.mul(ag.add(ag.mul(pre, inv), -mu * inv), g), b)
            newH[t] = out
        H = newH
        attention.append(layer_att)
    pred = ag.add(ag.matmul(H[GEOMETRY], W["out/W"]), W["out/b"])
    return ForwardResult(pred, attention, stats)


def predict(graph: HeteroGraph, params: HgtParameters) -> np.ndarray:
    """Predictions in physical units, one (500,) row per geometry node."""
    z = forward(graph, params).pred.data
    return z * params.norm.target_std + params.norm.target_mean


def loss_rmse(pred, target) -> float:
    pred, target = np.asarray(pred, float), np.asarray(target, float)
    if pred.shape != target.shape:
        raise ModelError(f"prediction shape {pred.shape} != target shape {target.shape}")
    return float(np.sqrt(np.mean((pred - target) ** 2)))


def mse_and_grads(graph, params: HgtParameters, target, training=True):
    """Mean squared error in z-scored target units and its gradient for every parameter.

    ``target`` is in physical units.  Returns (mse, grads, batch statistics)."""
    tensors = {k: ag.param(v, k) for k, v in params.weights.items()}
    res = forward(graph, params, training=training, tensors=tensors)
    z = (np.asarray(target, float) - params.norm.target_mean) / params.norm.target_std
    if z.shape != res.pred.shape:
        raise ModelError(f"target shape {z.shape} != prediction shape {res.pred.shape}")
    loss = ag.mean_all(ag.square(ag.add(res.pred, -z)))
    ag.backward(loss)
    grads = {k: (t.grad if t.grad is not None else np.zeros_like(t.data)) for k, t in tensors.items()}
    return float(loss.data), grads, res.batch_stats


def mse_only(graph, params, target, training=True):
    res = forward(graph, params, training=training)
    z = (np.asarray(target, float) - params.norm.target_mean) / params.norm.target_std
    return float(np.mean((res.pred.data - z) ** 2))
