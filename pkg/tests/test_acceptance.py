"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line with the measured value next to its pinned tolerance.

Run with `pytest tests/test_acceptance.py -v -s`.
"""

import time

import numpy as np
import pytest

from vqclassifier.ansatz import AnsatzConfig, AnsatzParams, circuit_forward, init_params
from vqclassifier.data import Dataset, LabeledExample, synthesize
from vqclassifier.encoding import EncodingConfig, amplitude_encode
from vqclassifier.errors import DegenerateInputError
from vqclassifier.explain import AttributionRequest, FeatureGroup, shapley_exact, shapley_sampled
from vqclassifier.gradients import finite_diff_jacobian, parameter_shift_jacobian
from vqclassifier.model import (
    TrainConfig,
    build_model,
    evaluate,
    load_checkpoint,
    loss_gradients,
    mcc,
    save_checkpoint,
    train,
)
from vqclassifier.statevector import apply_cnot, apply_rotation, zero_state

from oracles import cnot_matrix, embed_single, forward_oracle, rotation_gate


def note(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_gradient_correctness():
    rng = np.random.default_rng(1001)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 7))
        layers = int(rng.integers(1, 5))
        axis = "XYZ"[rng.integers(0, 3)]
        cfg = AnsatzConfig(n, layers, axis)
        params = AnsatzParams(rng.uniform(0, 2 * np.pi, (layers, n)))
        x = rng.normal(size=2**n)
        enc = EncodingConfig(2**n)
        ps = parameter_shift_jacobian(x, params, cfg, enc).entries
        fd = finite_diff_jacobian(x, params, cfg, enc, epsilon=1e-5).entries
        worst = max(worst, float(np.abs(ps - fd).max()))
    elapsed = time.perf_counter() - start
    note(
        "gradient correctness",
        worst < 1e-6 and elapsed < 30.0,
        f"max |shift - fd| = {worst:.3e} (tol 1e-6), {elapsed:.1f}s (limit 30s)",
    )


def test_simulator_oracle_equivalence():
    rng = np.random.default_rng(1002)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 4))
        # random state via a short prefix circuit
        state = zero_state(n)
        for _ in range(4):
            state = apply_rotation(state, int(rng.integers(0, n)), "XYZ"[rng.integers(0, 3)], rng.uniform(-6, 6))
        vec = state.amplitudes.copy()
        # single gates against the Kronecker oracle
        q = int(rng.integers(0, n))
        axis = "XYZ"[rng.integers(0, 3)]
        theta = rng.uniform(-6, 6)
        got = apply_rotation(state, q, axis, theta).amplitudes
        want = embed_single(rotation_gate(axis, theta), q, n) @ vec
        worst = max(worst, float(np.abs(got - want).max()))
        if n > 1:
            c = int(rng.integers(0, n))
            t = int(rng.integers(0, n - 1))
            t = t if t < c else t + 1
            got = apply_cnot(state, c, t).amplitudes
            want = cnot_matrix(n, c, t) @ vec
            worst = max(worst, float(np.abs(got - want).max()))
        # full ansatz forward against the matrix-product oracle
        layers = int(rng.integers(1, 4))
        cfg = AnsatzConfig(n, layers)
        params = AnsatzParams(rng.uniform(0, 2 * np.pi, (layers, n)))
        x = rng.normal(size=2**n)
        got_fwd = circuit_forward(x, params, cfg, EncodingConfig(2**n))
        want_fwd = forward_oracle(x, params.angles, "X")
        worst = max(worst, float(np.abs(got_fwd - want_fwd).max()))
    elapsed = time.perf_counter() - start
    note(
        "simulator oracle equivalence",
        worst < 1e-12 and elapsed < 5.0,
        f"max dev = {worst:.3e} (tol 1e-12), {elapsed:.1f}s (limit 5s)",
    )


def test_encoding_normalization():
    rng = np.random.default_rng(1003)
    worst = 0.0
    for trial in range(1000):
        if trial % 10 == 0:
            dim, scale = 768, 10.0 ** rng.uniform(-2, 2)  # the paper-shaped pad case
            x = rng.normal(size=dim) * scale
        else:
            dim = int(rng.integers(2, 65))
            x = rng.normal(size=dim) * 10.0 ** rng.uniform(-3, 3)
        state = amplitude_encode(x, EncodingConfig(dim))
        worst = max(worst, abs(float(np.sum(np.abs(state.amplitudes) ** 2)) - 1.0))
        if dim == 768:
            assert state.num_qubits == 10
    zero_raises = False
    try:
        amplitude_encode(np.zeros(16), EncodingConfig(16))
    except DegenerateInputError:
        zero_raises = True
    note(
        "encoding normalization",
        worst < 1e-12 and zero_raises,
        f"max |norm-1| = {worst:.3e} (tol 1e-12), zero vector raises: {zero_raises}",
    )


def test_end_to_end_training():
    dataset = synthesize(100, 16, 6.0, 7)
    enc = EncodingConfig(16)
    assert enc.num_qubits == 4
    model = build_model(enc, num_layers=6, seed=1)
    cfg = TrainConfig(batch_size=32, epochs=50, seed=1, lr=1e-3, threads=1)
    start = time.perf_counter()
    trained, history = train(model, dataset, dataset, cfg)
    elapsed = time.perf_counter() - start
    report = evaluate(trained, dataset)
    loss_drops = history[4]["train_loss"] < history[0]["train_loss"]
    ok = report.accuracy >= 0.95 and report.mcc >= 0.90 and loss_drops and elapsed < 120.0
    note(
        "end-to-end training",
        ok,
        f"train acc = {report.accuracy:.3f} (>=0.95), MCC = {report.mcc:.3f} (>=0.90), "
        f"epoch5 loss {history[4]['train_loss']:.4f} < epoch1 {history[0]['train_loss']:.4f}: {loss_drops}, "
        f"{elapsed:.1f}s (limit 120s)",
    )


def test_end_to_end_loss_gradient():
    rng = np.random.default_rng(1004)
    model = build_model(EncodingConfig(4), 1, seed=2)
    batch = [LabeledExample(f"b{i}", int(rng.integers(0, 2)), rng.normal(size=4) * 2) for i in range(4)]
    grads, _ = loss_gradients(batch, model)
    analytic = np.concatenate([grads["angles"].ravel(), grads["weights"].ravel(), grads["biases"]])

    from vqclassifier.model import MlpHead, HybridModel, cross_entropy, hybrid_forward

    def loss_at(theta):
        angles = theta[:2].reshape(1, 2)
        weights = theta[2:6].reshape(2, 2)
        biases = theta[6:]
        m = HybridModel(model.enc_cfg, model.ansatz_cfg, AnsatzParams(angles), MlpHead(weights, biases))
        return float(np.mean([cross_entropy(hybrid_forward(ex.features, m), ex.label) for ex in batch]))

    theta0 = np.concatenate([model.ansatz_params.angles.ravel(), model.head.weights.ravel(), model.head.biases])
    eps = 1e-5
    numeric = np.empty_like(theta0)
    for j in range(theta0.size):
        up, down = theta0.copy(), theta0.copy()
        up[j] += eps
        down[j] -= eps
        numeric[j] = (loss_at(up) - loss_at(down)) / (2 * eps)
    dev = float(np.abs(analytic - numeric).max())
    note("end-to-end loss gradient", dev < 1e-5, f"max deviation = {dev:.3e} (tol 1e-5)")


def test_metrics_against_correlation_oracle():
    rng = np.random.default_rng(1005)
    worst = 0.0
    checked = 0
    for _ in range(1000):
        c = rng.integers(0, 400, size=(2, 2))
        if c.sum() == 0:
            continue
        value = mcc(c)
        y_true = np.concatenate([np.zeros(c[0].sum()), np.ones(c[1].sum())])
        y_pred = np.concatenate([np.zeros(c[0, 0]), np.ones(c[0, 1]), np.zeros(c[1, 0]), np.ones(c[1, 1])])
        if np.std(y_true) == 0 or np.std(y_pred) == 0:
            assert value == 0.0
            continue
        worst = max(worst, abs(value - float(np.corrcoef(y_true, y_pred)[0, 1])))
        checked += 1
    degenerate = mcc([[25, 0], [70, 0]])
    perfect = mcc([[30, 0], [0, 20]])
    inverted = mcc([[0, 30], [30, 0]])
    ok = worst < 1e-12 and degenerate == 0.0 and perfect == 1.0 and inverted == -1.0
    note(
        "metrics (MCC)",
        ok,
        f"max |mcc - pearson| = {worst:.3e} over {checked} matrices (tol 1e-12), "
        f"degenerate={degenerate}, perfect={perfect}, inverted={inverted}",
    )


def test_shapley_attribution():
    rng = np.random.default_rng(1006)
    worst_eff = 0.0
    for _ in range(50):
        x = rng.normal(size=8)
        baseline = rng.normal(size=8)
        quad = rng.normal(size=(8, 8)) * 0.3
        coef = rng.normal(size=8)

        def predict(v):
            return float(coef @ v + v @ quad @ v)

        req = AttributionRequest(
            LabeledExample("s", 0, x),
            [FeatureGroup(f"g{i}", (i,)) for i in range(8)],
            baseline,
        )
        report = shapley_exact(predict, req)
        worst_eff = max(worst_eff, abs(report.phi.sum() - (report.fx - report.base_value)))

    # linear closed form, integer-valued so the equality is exact
    w = np.array([2.0, -1.0, 4.0, 3.0, -5.0, 1.0, 0.0, 6.0])
    x_lin = np.array([1.0, 2.0, -1.0, 3.0, 0.0, -2.0, 5.0, 1.0])
    b_lin = np.array([0.0, 1.0, 1.0, -2.0, 2.0, 0.0, 3.0, -1.0])
    req_lin = AttributionRequest(
        LabeledExample("lin", 0, x_lin),
        [FeatureGroup(f"g{i}", (i,)) for i in range(8)],
        b_lin,
    )
    lin_report = shapley_exact(lambda v: float(w @ v), req_lin)
    linear_exact = np.array_equal(lin_report.phi, w * (x_lin - b_lin))

    # sampled mode against exact on a fixed instance
    rng2 = np.random.default_rng(1007)
    x_s = rng2.normal(size=8)
    b_s = rng2.normal(size=8)
    quad_s = rng2.normal(size=(8, 8)) * 0.2

    def predict_s(v):
        return float(np.tanh(v).sum() + v @ quad_s @ v * 0.1)

    groups = [FeatureGroup(f"g{i}", (i,)) for i in range(8)]
    exact = shapley_exact(predict_s, AttributionRequest(LabeledExample("s", 0, x_s), groups, b_s))
    sampled = shapley_sampled(
        predict_s,
        AttributionRequest(LabeledExample("s", 0, x_s), groups, b_s, "sampled", 2000, 3),
    )
    within = all(
        abs(sampled.phi[j] - exact.phi[j]) <= 3.0 * sampled.stderr[j] + 1e-12 for j in range(8)
    )
    ok = worst_eff < 1e-8 and linear_exact and within
    note(
        "shapley attribution",
        ok,
        f"max efficiency gap = {worst_eff:.3e} over 50 m=8 instances (tol 1e-8), "
        f"linear closed form exact: {linear_exact}, sampled within 3 stderr: {within}",
    )


def test_training_determinism():
    dataset = synthesize(10, 4, 6.0, 7)
    val = synthesize(5, 4, 6.0, 8)
    enc = EncodingConfig(4)
    results = []
    for threads in (1, 4, 1, 4):  # repeated runs at thread counts 1 and 4
        model = build_model(enc, num_layers=2, seed=6)
        cfg = TrainConfig(batch_size=8, epochs=3, seed=6, lr=1e-2, threads=threads)
        trained, history = train(model, dataset, val, cfg)
        results.append(
            (
                history,
                trained.ansatz_params.angles.tobytes(),
                trained.head.weights.tobytes(),
                trained.head.biases.tobytes(),
            )
        )
    identical = all(r == results[0] for r in results[1:])
    note(
        "training determinism",
        identical,
        f"4 runs (threads 1/4/1/4) bitwise identical: {identical}",
    )


def test_checkpoint_roundtrip(tmp_path):
    dataset = synthesize(10, 4, 6.0, 9)
    model = build_model(EncodingConfig(4), 2, seed=4)
    before = evaluate(model, dataset)
    path = tmp_path / "model.ckpt"
    save_checkpoint(model, path)
    loaded, _ = load_checkpoint(path)
    after = evaluate(loaded, dataset)
    identical = before.to_dict() == after.to_dict()
    note(
        "checkpoint round-trip",
        identical,
        f"EvalReport identical after save/load: {identical} "
        f"(acc {before.accuracy:.3f}, mcc {before.mcc:.3f})",
    )
