"""Command-line entry point: synth, train, eval, predict, explain, gradcheck.

All randomness flows from one --seed, expanded per purpose via derive_seed
(seed, "init"/"head"/"shuffle"/"shap"), so individual stages stay
reproducible when unrelated options change. Every artifact embeds the
effective configuration for provenance. Exit codes: 0 success, 1 runtime or
data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import data as data_mod
from .ansatz import AnsatzConfig, AnsatzParams, init_params
from .encoding import EncodingConfig
from .errors import ShapeError
from .explain import AttributionRequest, FeatureGroup, attribute, equal_blocks, export_report, mean_baseline
from .gradients import finite_diff_jacobian, parameter_shift_jacobian
from .model import (
    TrainConfig,
    build_model,
    evaluate,
    load_checkpoint,
    predict,
    save_checkpoint,
    train,
)
from .seeding import derive_seed

class UsageError(Exception):
    """Bad flags or config contents; maps to exit code 2."""


CONFIG_KEYS = {
    "pad_value": float,
    "num_layers": int,
    "rotation_axis": str,
    "batch_size": int,
    "epochs": int,
    "lr": float,
    "seed": int,
    "shuffle": bool,
    "freeze_circuit": bool,
    "threads": int,
}

DEFAULTS = {
    "pad_value": 0.01,
    "num_layers": 6,
    "rotation_axis": "X",
    "batch_size": 32,
    "epochs": 7,
    "lr": 1e-5,
    "seed": 0,
    "shuffle": True,
    "freeze_circuit": False,
    "threads": 1,
}


def load_run_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise UsageError("config file must hold a JSON object")
    unknown = set(raw) - set(CONFIG_KEYS)
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    try:
        return {k: CONFIG_KEYS[k](v) for k, v in raw.items()}
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad config value: {exc}") from exc


def _effective_config(args) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(load_run_config(args.config))
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; explicit flags win")
    p.add_argument("--pad-value", dest="pad_value", type=float)
    p.add_argument("--layers", dest="num_layers", type=int)
    p.add_argument("--axis", dest="rotation_axis", choices=["X", "Y", "Z"])
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--no-shuffle", dest="shuffle", action="store_const", const=False)
    p.add_argument("--freeze-circuit", dest="freeze_circuit", action="store_const", const=True)
    p.add_argument("--threads", type=int)


def cmd_synth(args) -> int:
    ds = data_mod.synthesize(args.per_class, args.dim, args.sep, args.seed)
    provenance = json.dumps(
        {"command": "synth", "per_class": args.per_class, "dim": args.dim, "sep": args.sep, "seed": args.seed},
        sort_keys=True,
    )
    data_mod.write_csv(ds, args.output, comments=[f"config: {provenance}"])
    print(data_mod.stats_json(ds))
    return 0


def cmd_train(args) -> int:
    cfg = _effective_config(args)
    train_set = data_mod.load_csv(args.train)
    val_set = data_mod.load_csv(args.val) if args.val else train_set
    enc_cfg = EncodingConfig(train_set.feature_dim, cfg["pad_value"])
    model = build_model(enc_cfg, cfg["num_layers"], cfg["seed"], cfg["rotation_axis"])
    train_cfg = TrainConfig(
        batch_size=cfg["batch_size"],
        epochs=cfg["epochs"],
        seed=cfg["seed"],
        shuffle=cfg["shuffle"],
        freeze_circuit=cfg["freeze_circuit"],
        lr=cfg["lr"],
        threads=cfg["threads"],
    )
    trained, history = train(model, train_set, val_set, train_cfg)
    save_checkpoint(trained, args.output)
    if args.history:
        with open(args.history, "w", encoding="utf-8") as fh:
            json.dump({"config": cfg, "history": history}, fh, indent=2)
            fh.write("\n")
        if not args.no_figure:
            from .plots import plot_history

            plot_history(history, Path(args.history).with_suffix(".png"))
    last = history[-1]
    print(
        json.dumps(
            {
                "final_val_accuracy": last["val_accuracy"],
                "final_val_mcc": last["val_mcc"],
                "final_train_loss": last["train_loss"],
                "epochs": len(history),
                "checkpoint": str(args.output),
            }
        )
    )
    return 0


def cmd_eval(args) -> int:
    model, _ = load_checkpoint(args.model)
    dataset = data_mod.load_csv(args.data)
    report = evaluate(model, dataset, threads=args.threads or 1)
    payload = report.to_dict()
    payload["count"] = len(dataset)
    payload["config"] = {"model": str(args.model), "data": str(args.data)}
    print(json.dumps(payload, indent=2))
    return 0


def cmd_predict(args) -> int:
    model, _ = load_checkpoint(args.model)
    dataset = data_mod.load_csv(args.data)
    if dataset.feature_dim != model.enc_cfg.feature_dim:
        raise ShapeError(
            f"data has feature_dim {dataset.feature_dim}, model expects {model.enc_cfg.feature_dim}"
        )
    out = sys.stdout if args.output is None else open(args.output, "w", encoding="utf-8")
    try:
        if out is not sys.stdout:
            provenance = json.dumps({"command": "predict", "model": str(args.model), "data": str(args.data)})
            out.write(f"# config: {provenance}\n")
        out.write("id,label,predicted,p0,p1\n")
        for ex in dataset.examples:
            pred, probs = predict(model, ex.features)
            out.write(f"{ex.id},{ex.label},{pred},{probs[0]:.17g},{probs[1]:.17g}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _load_groups(args, dataset, example) -> list[FeatureGroup]:
    if args.groups_json:
        with open(args.groups_json, encoding="utf-8") as fh:
            doc = json.load(fh)
        for record in doc.get("sentences", []):
            if record.get("id") == example.id:
                return [
                    FeatureGroup(g["name"], tuple(range(g["feature_span"][0], g["feature_span"][1])))
                    for g in record["groups"]
                ]
        raise ValueError(f"no token groups found for example id {example.id!r}")
    return equal_blocks(dataset.feature_dim, args.groups)


def cmd_explain(args) -> int:
    model, _ = load_checkpoint(args.model)
    dataset = data_mod.load_csv(args.data)
    if not 0 <= args.index < len(dataset):
        raise ValueError(f"--index {args.index} out of range for {len(dataset)} examples")
    example = dataset.examples[args.index]
    groups = _load_groups(args, dataset, example)
    request = AttributionRequest(
        example=example,
        groups=groups,
        baseline=mean_baseline(dataset.features_matrix()),
        method=args.method,
        samples=args.samples,
        seed=derive_seed(args.seed, "shap"),
    )
    report = attribute(model, request)
    effective = {
        "command": "explain",
        "model": str(args.model),
        "data": str(args.data),
        "index": args.index,
        "method": args.method,
        "samples": args.samples,
        "seed": args.seed,
    }
    export_report(report, args.output, format=args.format, config=effective)
    if args.format.upper() == "JSON" and not args.no_figure:
        from .plots import plot_dendrogram

        plot_dendrogram(report, Path(args.output).with_suffix(".png"))
    print(
        json.dumps(
            {
                "example_id": report.example_id,
                "method": report.method,
                "fx": report.fx,
                "base_value": report.base_value,
                "phi_sum": float(np.sum(report.phi)),
                "report": str(args.output),
            }
        )
    )
    return 0


def cmd_gradcheck(args) -> int:
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(args.trials):
        n = int(rng.integers(1, args.qubits + 1))
        layers = int(rng.integers(1, args.layers + 1))
        axis = ("X", "Y", "Z")[int(rng.integers(0, 3))]
        enc_cfg = EncodingConfig(2**max(n, 1))
        cfg = AnsatzConfig(n, layers, axis)
        params = AnsatzParams(rng.uniform(0.0, 2.0 * np.pi, size=(layers, n)))
        x = rng.normal(size=enc_cfg.feature_dim)
        analytic = parameter_shift_jacobian(x, params, cfg, enc_cfg, shift=args.shift)
        numeric = finite_diff_jacobian(x, params, cfg, enc_cfg, epsilon=args.epsilon)
        worst = max(worst, float(np.abs(analytic.entries - numeric.entries).max()))
    print(
        json.dumps(
            {
                "max_deviation": worst,
                "tolerance": args.tol,
                "trials": args.trials,
                "config": {"qubits": args.qubits, "layers": args.layers, "seed": args.seed, "shift": args.shift},
            }
        )
    )
    return 0 if worst < args.tol else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vqc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a seeded synthetic embedding CSV")
    p.add_argument("--per-class", type=int, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--sep", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a hybrid model and write checkpoint + history")
    p.add_argument("--train", required=True, help="training CSV")
    p.add_argument("--val", help="validation CSV (defaults to the training set)")
    p.add_argument("-o", "--output", required=True, help="checkpoint path")
    p.add_argument("--history", help="write per-epoch history JSON here (PNG rendered alongside)")
    p.add_argument("--no-figure", action="store_true")
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a labeled CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--threads", type=int)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="per-example predictions for a CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("explain", help="Shapley attribution report for one example")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--groups", type=int, default=8, help="number of equal feature blocks")
    p.add_argument("--groups-json", help="token-group JSON from the embedding extractor")
    p.add_argument("--method", choices=["exact", "sampled"], default="exact")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["json", "dot"], default="json")
    p.add_argument("--no-figure", action="store_true")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("gradcheck", help="compare parameter-shift gradients against finite differences")
    p.add_argument("--qubits", type=int, default=4, help="max qubits per random instance")
    p.add_argument("--layers", type=int, default=3, help="max layers per random instance")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shift", type=float, default=np.pi / 2, help="diagnostic: exact only at pi/2")
    p.add_argument("--epsilon", type=float, default=1e-5)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 1
    except Exception as exc:  # data/runtime errors -> exit 1 with a message
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
