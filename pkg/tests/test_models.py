"""Loss oracles, encoder contracts, and training-loop behavior.

Frozen constants below were computed by hand from the loss definitions
(closed forms over 1-2 rows), never from the implementation.
"""

import dataclasses
import warnings
from types import SimpleNamespace

import numpy as np
import pytest

from linkssl import autodiff as ad
from linkssl.augment import AugmentationSpec
from linkssl.community import louvain
from linkssl.graphs import FeatureMatrix, Graph, random_link_split
from linkssl.models import (Decoder, EncoderConfig, GCNEncoder, LinkMLP,
                            Predictor, Projector, bgrl_loss, embed,
                            grace_loss, lbgrl_loss, lgrace_loss,
                            link_representation, predict_scores,
                            select_link_sets, train_decoder, train_encoder,
                            train_supervised_gcn)
from linkssl.models.training import DECODER_EPOCHS


class IdentityHead:
    """Stands in for a projector/MLP when the raw rows are wanted."""

    def forward(self, x, weight_source=None):
        return x


class TensorHead:
    """Two-layer ReLU MLP over explicitly supplied weight tensors, so the
    tensors can participate in gradient checks."""

    def __init__(self, w1, b1, w2, b2):
        self.ws = (w1, b1, w2, b2)

    def forward(self, x, weight_source=None):
        w1, b1, w2, b2 = self.ws
        return ad.add(ad.matmul(ad.relu(ad.add(ad.matmul(x, w1), b1)), w2),
                      b2)


def toy_cfg(**kw):
    enc = kw.pop("encoder", None)
    if enc is None:
        enc = EncoderConfig(n_layers=kw.pop("n_layers", 1), layer_size=64,
                            norm=kw.pop("norm", "layer"))
    base = dict(model="grace", ct_epochs=5, batch_size=256, gnn_lr=1e-3,
                pred_lr=1e-2, proj_hidden=64, loss_func="bce",
                mask_input=False, weight_decay=1e-6, tau=0.5, ema_decay=0.9,
                encoder=enc)
    base.update(kw)
    return SimpleNamespace(**base)


def two_triangles():
    return Graph(6, np.array([(0, 1), (0, 2), (1, 2),
                              (3, 4), (3, 5), (4, 5), (2, 3)]))


# ---------------------------------------------------------------- grace loss

def test_grace_two_nodes_frozen_value():
    # u1=v1=[1,0], u2=v2=[0,1], tau=1: per anchor the positive scores 1 and
    # both negatives score 0, so l = 1 - ln(e + 2) and loss = ln(e + 2) - 1
    u = ad.Tensor(np.array([[1.0, 0.0], [0.0, 1.0]]))
    v = ad.Tensor(np.array([[1.0, 0.0], [0.0, 1.0]]))
    loss = grace_loss(u, v, IdentityHead(), 1.0)
    assert loss.item() == pytest.approx(np.log(np.e + 2.0) - 1.0, abs=1e-12)


def test_grace_two_nodes_frozen_value_tau_half():
    # same instance at tau=0.5: loss = ln(e^2 + 2) - 2
    u = ad.Tensor(np.array([[1.0, 0.0], [0.0, 1.0]]))
    v = ad.Tensor(np.array([[1.0, 0.0], [0.0, 1.0]]))
    loss = grace_loss(u, v, IdentityHead(), 0.5)
    assert loss.item() == pytest.approx(np.log(np.e ** 2 + 2.0) - 2.0,
                                        abs=1e-12)


def test_grace_single_node_loss_zero():
    u = ad.Tensor(np.array([[3.0, 4.0]]))
    v = ad.Tensor(np.array([[3.0, 4.0]]))
    assert grace_loss(u, v, IdentityHead(), 0.5).item() == 0.0


def test_grace_view_exchange_symmetry():
    rng = np.random.default_rng(5)
    u = ad.Tensor(rng.normal(size=(6, 4)))
    v = ad.Tensor(rng.normal(size=(6, 4)))
    a = grace_loss(u, v, IdentityHead(), 0.3).item()
    b = grace_loss(v, u, IdentityHead(), 0.3).item()
    assert abs(a - b) <= 1e-12


def test_grace_row_permutation_invariance():
    rng = np.random.default_rng(6)
    u_vals = rng.normal(size=(6, 4))
    v_vals = rng.normal(size=(6, 4))
    perm = rng.permutation(6)
    a = grace_loss(ad.Tensor(u_vals), ad.Tensor(v_vals),
                   IdentityHead(), 0.4).item()
    b = grace_loss(ad.Tensor(u_vals[perm]), ad.Tensor(v_vals[perm]),
                   IdentityHead(), 0.4).item()
    assert abs(a - b) <= 1e-10


def test_grace_rejects_bad_inputs():
    u = ad.Tensor(np.ones((2, 3)))
    with pytest.raises(ValueError):
        grace_loss(u, ad.Tensor(np.ones((3, 3))), IdentityHead(), 0.5)
    with pytest.raises(ValueError):
        grace_loss(u, u, IdentityHead(), 0.0)


def test_grace_loss_grad_check():
    rng = np.random.default_rng(7)
    u = ad.Tensor(rng.normal(size=(6, 3)))
    v = ad.Tensor(rng.normal(size=(6, 3)))
    w1 = ad.Tensor(rng.normal(size=(3, 4)) * 0.7)
    b1 = ad.Tensor(rng.normal(size=(1, 4)) * 0.3 + 0.2)
    w2 = ad.Tensor(rng.normal(size=(4, 3)) * 0.7)
    b2 = ad.Tensor(rng.normal(size=(1, 3)) * 0.3)

    def f(tu, tv, tw1, tb1, tw2, tb2):
        return grace_loss(tu, tv, TensorHead(tw1, tb1, tw2, tb2), 0.5)

    assert ad.grad_check(f, [u, v, w1, b1, w2, b2]) < 1e-4


# --------------------------------------------------------------- lgrace loss

def _single_link_tensors():
    z1p = ad.Tensor(np.array([[1.0, 0.0]]))
    z2p = ad.Tensor(np.array([[1.0, 0.0]]))
    z1n = ad.Tensor(np.array([[0.0, 1.0]]))
    z2n = ad.Tensor(np.array([[0.0, 1.0]]))
    return z1p, z2p, z1n, z2n


def test_lgrace_single_link_frozen_minus_one():
    # positive cos=1, lone cross-view negative cos=0, intra sum empty at
    # size 1, tau=1: l = 1 per direction, loss = -1
    z1p, z2p, z1n, z2n = _single_link_tensors()
    assert lgrace_loss(z1p, z2p, z1n, z2n, 1.0).item() == pytest.approx(
        -1.0, abs=1e-12)


def test_lgrace_negative_anchor_variant():
    # anchoring on the i-th same-view negative instead: denominator becomes
    # exp(cos(neg1, neg2)) = e, so l = 1 - 1 = 0 per direction
    z1p, z2p, z1n, z2n = _single_link_tensors()
    loss = lgrace_loss(z1p, z2p, z1n, z2n, 1.0, anchor="negative")
    assert loss.item() == pytest.approx(0.0, abs=1e-12)


def test_lgrace_positive_in_denominator_flag():
    # adding the positive term: denominator = e^0 + e^1, l = 1 - ln(1 + e)
    z1p, z2p, z1n, z2n = _single_link_tensors()
    loss = lgrace_loss(z1p, z2p, z1n, z2n, 1.0,
                       add_positive_to_denominator=True)
    assert loss.item() == pytest.approx(np.log(1.0 + np.e) - 1.0, abs=1e-12)


def test_lgrace_monotone_in_tau():
    # identical positives (cos=1) and orthogonal negatives: the positive
    # term 1/tau dominates, so the loss strictly drops as tau shrinks
    z1p = ad.Tensor(np.tile([[1.0, 0.0, 0.0]], (3, 1)))
    z2p = ad.Tensor(np.tile([[1.0, 0.0, 0.0]], (3, 1)))
    z1n = ad.Tensor(np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0],
                              [0.0, 1.0, 1.0]]))
    z2n = ad.Tensor(np.array([[0.0, 1.0, 0.0], [0.0, 1.0, 1.0],
                              [0.0, 0.0, 1.0]]))
    taus = [0.9, 0.7, 0.5, 0.3, 0.1]
    values = [lgrace_loss(z1p, z2p, z1n, z2n, t).item() for t in taus]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_lgrace_view_exchange_symmetry():
    rng = np.random.default_rng(8)
    z1p = ad.Tensor(rng.normal(size=(5, 3)))
    z2p = ad.Tensor(rng.normal(size=(5, 3)))
    z1n = ad.Tensor(rng.normal(size=(5, 3)))
    z2n = ad.Tensor(rng.normal(size=(5, 3)))
    a = lgrace_loss(z1p, z2p, z1n, z2n, 0.4).item()
    b = lgrace_loss(z2p, z1p, z2n, z1n, 0.4).item()
    assert abs(a - b) <= 1e-12


def test_lgrace_aligned_permutation_invariance():
    # permuting positives and negatives by one shared permutation relabels
    # the per-link terms without changing the index alignment
    rng = np.random.default_rng(9)
    vals = [rng.normal(size=(5, 3)) for _ in range(4)]
    perm = rng.permutation(5)
    a = lgrace_loss(*[ad.Tensor(v) for v in vals], 0.5).item()
    b = lgrace_loss(*[ad.Tensor(v[perm]) for v in vals], 0.5).item()
    assert abs(a - b) <= 1e-10


def test_lgrace_rejects_bad_inputs():
    z1p, z2p, z1n, z2n = _single_link_tensors()
    empty = ad.Tensor(np.empty((0, 2)))
    with pytest.raises(ValueError):
        lgrace_loss(empty, empty, z1n, z2n, 1.0)
    with pytest.raises(ValueError):
        lgrace_loss(z1p, z2p, ad.Tensor(np.ones((2, 2))),
                    ad.Tensor(np.ones((2, 2))), 1.0)
    with pytest.raises(ValueError):
        lgrace_loss(z1p, z2p, z1n, z2n, -1.0)
    with pytest.raises(ValueError):
        lgrace_loss(z1p, z2p, z1n, z2n, 1.0, anchor="other")


@pytest.mark.parametrize("anchor", ["positive", "negative"])
def test_lgrace_loss_grad_check(anchor):
    rng = np.random.default_rng(10)
    tensors = [ad.Tensor(rng.normal(size=(6, 3))) for _ in range(4)]

    def f(a, b, c, d):
        return lgrace_loss(a, b, c, d, 0.5, anchor=anchor)

    assert ad.grad_check(f, tensors) < 1e-4


# ----------------------------------------------------------- bgrl and lbgrl

def test_bgrl_identical_rows_minus_two():
    a = ad.Tensor(np.array([[1.0, 2.0], [3.0, 4.0]]), requires_grad=True)
    b = ad.Tensor(np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert bgrl_loss(a, b).item() == pytest.approx(-2.0, abs=1e-12)


def test_bgrl_orthogonal_rows_zero():
    a = ad.Tensor(np.array([[1.0, 0.0], [0.0, 2.0]]))
    b = ad.Tensor(np.array([[0.0, 5.0], [3.0, 0.0]]))
    assert bgrl_loss(a, b).item() == pytest.approx(0.0, abs=1e-12)


def test_bgrl_negated_rows_plus_two():
    vals = np.array([[1.0, -2.0], [0.5, 4.0]])
    assert bgrl_loss(ad.Tensor(vals), ad.Tensor(-vals)).item() == (
        pytest.approx(2.0, abs=1e-12))


def test_bgrl_rejects_grad_tracked_target():
    a = ad.Tensor(np.ones((2, 2)))
    t = ad.Tensor(np.ones((2, 2)), requires_grad=True)
    with pytest.raises(ValueError):
        bgrl_loss(a, t)


def test_lbgrl_row_rescale_invariance():
    rng = np.random.default_rng(11)
    pred = rng.normal(size=(4, 3))
    tgt = rng.normal(size=(4, 3))
    base = lbgrl_loss(ad.Tensor(pred), ad.Tensor(tgt)).item()
    scaled = pred.copy()
    scaled[2] *= 37.5
    other = lbgrl_loss(ad.Tensor(scaled), ad.Tensor(tgt)).item()
    assert abs(base - other) <= 1e-12


def test_bgrl_loss_grad_check():
    rng = np.random.default_rng(12)
    x = ad.Tensor(rng.normal(size=(6, 3)))
    w1 = ad.Tensor(rng.normal(size=(3, 4)) * 0.7)
    b1 = ad.Tensor(rng.normal(size=(1, 4)) * 0.3 + 0.3)
    w2 = ad.Tensor(rng.normal(size=(4, 3)) * 0.7)
    b2 = ad.Tensor(rng.normal(size=(1, 3)) * 0.3)
    target = ad.Tensor(rng.normal(size=(6, 3)))

    def f(tx, tw1, tb1, tw2, tb2):
        return bgrl_loss(TensorHead(tw1, tb1, tw2, tb2).forward(tx), target)

    assert ad.grad_check(f, [x, w1, b1, w2, b2]) < 1e-4


def test_lbgrl_loss_grad_check():
    rng = np.random.default_rng(13)
    z = ad.Tensor(rng.normal(size=(6, 3)))
    target = ad.Tensor(rng.normal(size=(6, 3)))
    assert ad.grad_check(lambda t: lbgrl_loss(t, target), [z]) < 1e-4


# ------------------------------------------------------------ link set pick

def test_select_link_sets_identical_views():
    g = two_triangles()
    pos, neg = select_link_sets(g, g, rng_seed=3)
    assert set(map(tuple, pos)) == g.edge_set()
    assert len(neg) == len(pos)


def test_select_link_sets_disjoint_views_empty():
    a = Graph(4, np.array([(0, 1)]))
    b = Graph(4, np.array([(2, 3)]))
    pos, neg = select_link_sets(a, b, rng_seed=3)
    assert len(pos) == 0 and len(neg) == 0


def test_select_link_sets_negatives_avoid_both_views():
    rng = np.random.default_rng(14)
    for trial in range(20):
        n = 8
        all_pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
        e1 = rng.choice(len(all_pairs), size=10, replace=False)
        e2 = rng.choice(len(all_pairs), size=10, replace=False)
        a = Graph(n, np.array([all_pairs[i] for i in e1]))
        b = Graph(n, np.array([all_pairs[i] for i in e2]))
        pos, neg = select_link_sets(a, b, rng_seed=trial)
        union = a.edge_set() | b.edge_set()
        assert set(map(tuple, pos)) == a.edge_set() & b.edge_set()
        assert len(neg) == len(pos)
        neg_set = set(map(tuple, neg))
        assert len(neg_set) == len(neg)
        assert not neg_set & union


def test_select_link_sets_resamples_negatives():
    g = two_triangles()
    _, neg_a = select_link_sets(g, g, rng_seed=1)
    _, neg_b = select_link_sets(g, g, rng_seed=2)
    assert set(map(tuple, neg_a)) != set(map(tuple, neg_b))


# ------------------------------------------------------------------ encoder

def test_encoder_zero_weights_give_zero_embeddings():
    g = two_triangles()
    for norm in ("batch", "layer"):
        enc = GCNEncoder(6, EncoderConfig(n_layers=2, layer_size=64,
                                          norm=norm),
                         np.random.default_rng(0))
        for w in enc.weights:
            w.tensor.values[:] = 0.0
        out = enc.forward(g, mode="train")
        assert np.allclose(out.values, 0.0)


@pytest.mark.parametrize("n_layers", [1, 2, 3, 4])
def test_encoder_output_shape(n_layers):
    g = two_triangles()
    enc = GCNEncoder(6, EncoderConfig(n_layers=n_layers, layer_size=64),
                     np.random.default_rng(1))
    assert enc.forward(g, mode="train").shape == (6, 64)


@pytest.mark.parametrize("norm", ["batch", "layer"])
def test_encoder_permutation_equivariance(norm):
    rng = np.random.default_rng(15)
    n = 10
    edges = np.array([(u, v) for u in range(n) for v in range(u + 1, n)
                      if rng.random() < 0.4])
    feats = rng.normal(size=(n, 5))
    g = Graph(n, edges, features=FeatureMatrix.dense(feats))
    perm = rng.permutation(n)
    inv = np.empty(n, dtype=np.int64)
    inv[perm] = np.arange(n)
    g_perm = Graph(n, np.array([(inv[u], inv[v]) for u, v in edges]),
                   features=FeatureMatrix.dense(feats[perm]))
    enc = GCNEncoder(5, EncoderConfig(n_layers=2, layer_size=64, norm=norm),
                     np.random.default_rng(2))
    h = enc.forward(g, mode="target").values
    h_perm = enc.forward(g_perm, mode="target").values
    assert np.allclose(h[perm], h_perm, atol=1e-10)


def test_encoder_identity_features_match_materialized():
    g = two_triangles()
    masked = FeatureMatrix(kind="identity", n_rows=6, n_cols=6,
                           column_mask=np.array([1.0, 0.0, 1.0, 1.0, 0.0,
                                                 1.0]))
    g_id = g.with_features(masked)
    g_dense = g.with_features(FeatureMatrix.dense(masked.materialize()))
    enc = GCNEncoder(6, EncoderConfig(n_layers=2, layer_size=64),
                     np.random.default_rng(3))
    h_id = enc.forward(g_id, mode="target").values
    h_dense = enc.forward(g_dense, mode="target").values
    assert np.allclose(h_id, h_dense, atol=1e-12)


def test_encoder_weight_standardization_column_scale_invariance():
    g = two_triangles()
    enc = GCNEncoder(6, EncoderConfig(n_layers=1, layer_size=64,
                                      weight_standardization=True),
                     np.random.default_rng(4))
    base = enc.forward(g, mode="target").values
    enc.weights[0].tensor.values[:, 7] *= 4.0
    enc.weights[0].tensor.values[:, 12] += 3.0
    again = enc.forward(g, mode="target").values
    assert np.allclose(base, again, atol=1e-10)


def test_encoder_batchnorm_running_stats_update_only_in_train_mode():
    g = two_triangles()
    enc = GCNEncoder(6, EncoderConfig(n_layers=1, layer_size=64,
                                      norm="batch"),
                     np.random.default_rng(5))
    before = enc.bn_states[0]["running_mean"].copy()
    enc.forward(g, mode="target")
    assert np.array_equal(enc.bn_states[0]["running_mean"], before)
    enc.forward(g, mode="train")
    assert not np.array_equal(enc.bn_states[0]["running_mean"], before)


def test_encoder_end_to_end_grace_grad_check():
    g = two_triangles()
    enc = GCNEncoder(6, EncoderConfig(n_layers=1, layer_size=64,
                                      norm="layer"),
                     np.random.default_rng(6))
    proj = Projector(64, 8, np.random.default_rng(7))
    checked = [enc.weights[0].tensor, enc.slopes[0].tensor,
               enc.gammas[0].tensor, enc.betas[0].tensor,
               proj.w1.tensor, proj.b1.tensor]

    def f(*_):
        h1 = enc.forward(g, mode="target")
        h2 = enc.forward(g, mode="target")
        return grace_loss(h1, h2, proj, 0.5)

    assert ad.grad_check(f, checked) < 1e-4


# -------------------------------------------------------- link representation

def test_link_representation_hadamard_rows():
    h = ad.Tensor(np.array([[1.0, 2.0], [3.0, 4.0], [0.0, 0.0]]))
    out = link_representation(h, [(0, 1)], IdentityHead())
    assert np.allclose(out.values, [[3.0, 8.0]])
    swapped = link_representation(h, [(1, 0)], IdentityHead())
    assert np.array_equal(out.values, swapped.values)
    zeroed = link_representation(h, [(2, 1)], IdentityHead())
    assert np.allclose(zeroed.values, [[0.0, 0.0]])


def test_link_representation_rejects_out_of_range():
    h = ad.Tensor(np.ones((3, 2)))
    with pytest.raises(ValueError):
        link_representation(h, [(0, 3)], IdentityHead())


# ---------------------------------------------------------------- train loops

def _toy_split(seed=1):
    g = two_triangles()
    return random_link_split(g, (0.7, 0.1, 0.2), seed=seed)


def test_train_encoder_grace_loss_decreases():
    split = _toy_split()
    spec = AugmentationSpec(kind="random", drop_edge_rate_1=0.2,
                            drop_edge_rate_2=0.2, drop_feature_rate_1=0.1,
                            drop_feature_rate_2=0.1)
    state = train_encoder(split, spec, "grace", toy_cfg(ct_epochs=100),
                          seed=4)
    losses = [v for _, v in state.loss_history]
    assert losses[-1] < losses[0]
    assert state.epoch == 100


def test_train_encoder_bit_identical_repeat():
    split = _toy_split()
    spec = AugmentationSpec()
    runs = []
    for _ in range(2):
        st = train_encoder(split, spec, "grace", toy_cfg(ct_epochs=5), seed=9)
        runs.append([p.values.copy() for p in st.online_parameters()])
    assert all(np.array_equal(a, b) for a, b in zip(*runs))


def test_train_encoder_seed_changes_trajectory():
    split = _toy_split()
    spec = AugmentationSpec()
    st1 = train_encoder(split, spec, "grace", toy_cfg(ct_epochs=5), seed=1)
    st2 = train_encoder(split, spec, "grace", toy_cfg(ct_epochs=5), seed=2)
    diffs = [not np.array_equal(a.values, b.values)
             for a, b in zip(st1.online_parameters(),
                             st2.online_parameters())]
    assert any(diffs)


@pytest.mark.parametrize("model", ["bgrl", "lbgrl"])
def test_ema_target_replay(model):
    # determinism lets the 1-, 2- and 3-epoch runs expose the online
    # trajectory; the final shadows must equal the EMA recursion over it
    split = _toy_split()
    spec = AugmentationSpec(drop_edge_rate_1=0.1, drop_edge_rate_2=0.1)
    cfgs = {t: toy_cfg(model=model, ct_epochs=t) for t in (0, 1, 2, 3)}
    states = {t: train_encoder(split, spec, model, cfgs[t], seed=6)
              for t in (0, 1, 2, 3)}
    final = states[3]
    for i, param in enumerate(final.tracked):
        name = param.name
        shadow = states[0].tracked[i].values.copy()
        decay = final.shadows[name].decay
        for t in (1, 2, 3):
            online_t = next(p for p in states[t].tracked if p.name == name)
            shadow *= decay
            shadow += (1.0 - decay) * online_t.values
        assert np.array_equal(final.shadows[name].values, shadow), name


def test_train_encoder_skips_empty_intersection_epochs():
    g = Graph(4, np.array([(0, 1), (1, 2), (2, 3)]))
    split = random_link_split(g, (1.0, 0.0, 0.0), seed=0)
    spec = AugmentationSpec(drop_edge_rate_1=0.9, drop_edge_rate_2=0.9)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        state = train_encoder(split, spec, "lgrace", toy_cfg(ct_epochs=30),
                              seed=0)
    skipped = [v for _, v in state.loss_history if not np.isfinite(v)]
    assert skipped
    assert any("share no edge" in str(w.message) for w in caught)


def test_train_encoder_detects_blocks_when_needed():
    split = _toy_split()
    spec = AugmentationSpec(kind="scom", drop_edge_rate_1=0.3,
                            drop_edge_rate_2=0.3)
    state = train_encoder(split, spec, "grace", toy_cfg(ct_epochs=5), seed=2)
    assert state.epoch == 5


def test_train_encoder_accepts_oracle_block_state():
    split = _toy_split()
    blocks = louvain(two_triangles(), seed=0)
    spec = AugmentationSpec(kind="sbm_oracle")
    state = train_encoder(split, spec, "grace", toy_cfg(ct_epochs=5), seed=2,
                          block_state=blocks)
    assert state.epoch == 5


def test_train_encoder_rejects_unknown_model():
    with pytest.raises(ValueError):
        train_encoder(_toy_split(), AugmentationSpec(), "gcn_supervised",
                      toy_cfg(), seed=0)


# -------------------------------------------------------------- decoder stage

class StubEncoder:
    def __init__(self, h, layer_size=64):
        self._h = h
        self.cfg = EncoderConfig(layer_size=layer_size)

    def forward(self, graph, mode="train", weight_source=None):
        return ad.Tensor(self._h)


def _two_cliques_split():
    edges = [(u, v) for u in range(4) for v in range(u + 1, 4)]
    edges += [(u + 4, v + 4) for u, v in edges]
    g = Graph(8, np.array(edges))
    return random_link_split(g, (0.8, 0.0, 0.2), seed=3)


def test_train_decoder_separable_embeddings_reach_full_accuracy():
    split = _two_cliques_split()
    h = np.zeros((8, 64))
    h[:4, 0] = 1.0
    h[4:, 1] = 1.0
    state = SimpleNamespace(encoder=StubEncoder(h))
    dec = train_decoder(state, split, toy_cfg(loss_func="bce"), seed=5)
    pos_scores = predict_scores(state, dec, split.train_graph,
                                split.train_pos)
    cross = [(u, v) for u in range(4) for v in range(4, 8)]
    neg_scores = predict_scores(state, dec, split.train_graph, cross)
    assert (pos_scores > 0.5).all()
    assert (neg_scores < 0.5).all()


@pytest.mark.parametrize("loss_func", ["bce", "log_sig"])
def test_train_decoder_loss_funcs_run(loss_func):
    split = _two_cliques_split()
    h = np.random.default_rng(6).normal(size=(8, 64))
    state = SimpleNamespace(encoder=StubEncoder(h))
    dec = train_decoder(state, split, toy_cfg(loss_func=loss_func), seed=5)
    s = predict_scores(state, dec, split.train_graph, split.train_pos)
    assert s.shape == (len(split.train_pos),)
    assert ((s > 0.0) & (s < 1.0)).all()


def test_train_decoder_zero_embeddings_constant_scores():
    split = _two_cliques_split()
    state = SimpleNamespace(encoder=StubEncoder(np.zeros((8, 64))))
    dec = train_decoder(state, split, toy_cfg(), seed=7)
    s = predict_scores(state, dec, split.train_graph,
                       [(0, 1), (0, 5), (2, 7), (3, 4)])
    assert np.allclose(s, s[0])


def test_train_decoder_mask_input_changes_training():
    split = _two_cliques_split()
    h = np.random.default_rng(8).normal(size=(8, 64))
    state = SimpleNamespace(encoder=StubEncoder(h))
    dec_plain = train_decoder(state, split, toy_cfg(mask_input=False), seed=9)
    dec_masked = train_decoder(state, split, toy_cfg(mask_input=True), seed=9)
    a = predict_scores(state, dec_plain, split.train_graph, split.train_pos)
    b = predict_scores(state, dec_masked, split.train_graph, split.train_pos)
    assert not np.allclose(a, b)


def test_predict_scores_contracts():
    split = _two_cliques_split()
    h = np.random.default_rng(10).normal(size=(8, 64))
    state = SimpleNamespace(encoder=StubEncoder(h))
    dec = train_decoder(state, split, toy_cfg(), seed=11)
    pairs = [(0, 5), (5, 0), (1, 6)]
    s = predict_scores(state, dec, split.train_graph, pairs)
    assert s.shape == (3,)
    assert s[0] == s[1]
    assert ((s > 0.0) & (s < 1.0)).all()
    again = predict_scores(state, dec, split.train_graph, pairs)
    assert np.array_equal(s, again)


def test_train_supervised_gcn_separates_cliques():
    split = _two_cliques_split()
    cfg = toy_cfg(model="gcn_supervised", ct_epochs=100,
                  encoder=EncoderConfig(n_layers=2, layer_size=64,
                                        norm="layer"))
    state, dec = train_supervised_gcn(split, cfg, seed=12)
    pos = predict_scores(state, dec, split.train_graph, split.train_pos)
    cross = [(u, v) for u in range(4) for v in range(4, 8)]
    neg = predict_scores(state, dec, split.train_graph, cross)
    assert pos.mean() > neg.mean() + 0.2


def test_embed_uses_eval_mode_running_stats():
    split = _toy_split()
    spec = AugmentationSpec()
    state = train_encoder(split, spec, "grace",
                          toy_cfg(ct_epochs=5, norm="batch"), seed=3)
    h1 = embed(state, split.train_graph)
    h2 = embed(state, split.train_graph)
    assert np.array_equal(h1, h2)
    assert h1.shape == (6, 64)
