"""Command-line surface tying the modules into reproducible pipelines.

Tensors travel as RGT1 files, scores as JSON. Every JSON output embeds a
run manifest (subcommand, resolved configuration, FNV-1a digests of the
input files, seed, toolkit version) and uses sorted keys, so identical
inputs produce byte-identical outputs. Exit codes: 0 success, 2 input
validation, 3 I/O, 4 internal guard.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from . import baselines, labelnoise, metrics, noisegen, outlier, relmap
from . import kernel as K
from .errors import GuardError, ValidationError
from .tensorio import load_tensor, save_tensor, validate_dataset

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash."""
    digest = _FNV_OFFSET
    for byte in data:
        digest = ((digest ^ byte) * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return digest


def _digest_file(path: str) -> str:
    with open(path, "rb") as fh:
        return f"{fnv1a64(fh.read()):016x}"


def _manifest(subcommand: str, config: dict, inputs: dict, seed: int | None) -> dict:
    return {
        "subcommand": subcommand,
        "config": config,
        "inputs": {name: _digest_file(path) for name, path in inputs.items()},
        "seed": seed,
        "version": __version__,
    }


def _jsonable_scores(values) -> list:
    out = []
    for v in values:
        v = float(v)
        if np.isinf(v):
            out.append("inf" if v > 0 else "-inf")
        else:
            out.append(v)
    return out


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_dump(obj))


def _kernel_config(args, default_t: float) -> K.KernelConfig:
    return K.KernelConfig(
        kind=K.RBF if args.kernel == "rbf" else K.COSINE,
        temperature=args.t if args.t is not None else default_t,
        clamp=args.clamp,
        use_compatibility=not args.no_compat,
        rbf_gamma=args.rbf_gamma,
    )


def _kernel_flags(parser: argparse.ArgumentParser, default_t: float) -> None:
    parser.add_argument("--t", type=float, default=None,
                        help=f"kernel temperature (default {default_t})")
    parser.add_argument("--clamp", type=float, default=K.DEFAULT_CLAMP,
                        help="zero kernel bases below this value (default 0.03)")
    parser.add_argument("--kernel", choices=["cos", "rbf"], default="cos",
                        help="feature similarity: truncated cosine or RBF")
    parser.add_argument("--rbf-gamma", type=float, default=1.0,
                        help="RBF bandwidth (rbf kernel only)")
    parser.add_argument("--no-compat", action="store_true",
                        help="drop the prediction-compatibility factor")


def _kernel_config_dict(config: K.KernelConfig) -> dict:
    return {
        "kernel": config.kind,
        "t": config.temperature,
        "clamp": config.clamp,
        "use_compatibility": config.use_compatibility,
        "rbf_gamma": config.rbf_gamma,
    }


# -- subcommands --------------------------------------------------------------


def cmd_detect_labels(args) -> int:
    handle = validate_dataset(
        load_tensor(args.features), load_tensor(args.probs), load_tensor(args.labels)
    )
    kconfig = _kernel_config(args, default_t=4.0)
    mconfig = labelnoise.MaxCutConfig(
        lam=args.lam,
        max_iters=args.max_iters,
        partition_size=args.partition_size,
        seed=args.seed,
    )
    if args.single_node:
        result = labelnoise.detect_label_noise_single(handle, kconfig, mconfig)
    elif args.partition_size > 0:
        result = labelnoise.detect_partitioned(handle, kconfig, mconfig, threads=args.threads)
    else:
        result = labelnoise.detect_label_noise(handle, kconfig, mconfig, threads=args.threads)
    payload = result.to_json_dict()
    payload["manifest"] = _manifest(
        "detect-labels",
        {
            **_kernel_config_dict(kconfig),
            "lambda": args.lam,
            "max_iters": args.max_iters,
            "partition_size": args.partition_size,
            "single_node": args.single_node,
        },
        {"features": args.features, "probs": args.probs, "labels": args.labels},
        args.seed,
    )
    _write_json(args.out, payload)
    return 0


def cmd_detect_outliers(args) -> int:
    query = validate_dataset(load_tensor(args.query_features), load_tensor(args.query_probs))
    ref = validate_dataset(load_tensor(args.ref_features), load_tensor(args.ref_probs))
    kconfig = _kernel_config(args, default_t=1.0)
    config = outlier.OutlierConfig(subset_size=args.subset_size, seed=args.seed, kernel=kconfig)
    subset = outlier.sample_reference(ref, config)
    scores = outlier.outlier_scores(query, ref, subset, config, threads=args.threads)
    payload = {
        "scores": _jsonable_scores(scores),
        "subset": [int(i) for i in subset],
        "manifest": _manifest(
            "detect-outliers",
            {**_kernel_config_dict(kconfig), "subset_size": args.subset_size},
            {
                "query_features": args.query_features,
                "query_probs": args.query_probs,
                "ref_features": args.ref_features,
                "ref_probs": args.ref_probs,
            },
            args.seed,
        ),
    }
    _write_json(args.out, payload)
    return 0


def cmd_baseline(args) -> int:
    inputs: dict[str, str] = {}
    extra: dict = {}
    if args.kind in baselines.LABEL_KINDS:
        if not args.probs or not args.labels:
            raise ValidationError(f"--kind {args.kind} needs --probs and --labels")
        probs = load_tensor(args.probs)
        labels = load_tensor(args.labels)
        scores = baselines.score_label_baseline(args.kind, probs, labels)
        inputs = {"probs": args.probs, "labels": args.labels}
    elif args.kind == "msp":
        if not args.probs:
            raise ValidationError("--kind msp needs --probs")
        scores = baselines.score_ood_baseline("msp", probs=load_tensor(args.probs)).scores
        inputs = {"probs": args.probs}
    elif args.kind in ("max_logit", "energy"):
        if not args.logits:
            raise ValidationError(f"--kind {args.kind} needs --logits")
        scores = baselines.score_ood_baseline(args.kind, logits=load_tensor(args.logits)).scores
        inputs = {"logits": args.logits}
    else:  # knn
        if not args.features or not args.ref_features:
            raise ValidationError("--kind knn needs --features and --ref-features")
        result = baselines.score_ood_baseline(
            "knn",
            features=load_tensor(args.features),
            ref_features=load_tensor(args.ref_features),
            ref_total=args.ref_total,
            k=args.k,
        )
        scores = result.scores
        extra = {"k": result.k, "k_clamped": result.k_clamped}
        inputs = {"features": args.features, "ref_features": args.ref_features}
    payload = {
        "scores": _jsonable_scores(scores),
        **extra,
        "manifest": _manifest(
            "baseline",
            {"kind": args.kind, "ref_total": args.ref_total, "k": args.k},
            inputs,
            None,
        ),
    }
    _write_json(args.out, payload)
    return 0


def _load_score_json(path: str) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        blob = json.load(fh)
    raw = blob["scores"] if isinstance(blob, dict) else blob
    return np.array([float(v) for v in raw], dtype=np.float64)


def cmd_eval(args) -> int:
    scores = _load_score_json(args.scores)
    truth = load_tensor(args.truth).astype(bool)
    summary = {
        "ap": metrics.average_precision(scores, truth),
        "auroc": metrics.auroc(scores, truth),
        "tnr95": metrics.tnr_at_tpr(scores, truth, args.tpr_target),
    }
    sys.stdout.write(_dump(summary))
    if args.out:
        payload = {
            **summary,
            "manifest": _manifest(
                "eval",
                {"tpr_target": args.tpr_target},
                {"scores": args.scores, "truth": args.truth},
                None,
            ),
        }
        _write_json(args.out, payload)
    return 0


def cmd_gen_noise(args) -> int:
    probs = load_tensor(args.probs)
    labels = load_tensor(args.labels)
    spec = noisegen.NoiseSpec(ratio=args.ratio, seed=args.seed)
    new_labels, mask = noisegen.inject_noise(probs, labels, spec)
    save_tensor(args.out_labels, new_labels)
    save_tensor(args.out_mask, mask.astype(np.int64))
    payload = {
        "flipped": int(mask.sum()),
        "flip_indices": [int(i) for i in np.flatnonzero(mask)],
        "manifest": _manifest(
            "gen-noise",
            {"ratio": args.ratio},
            {"probs": args.probs, "labels": args.labels},
            args.seed,
        ),
    }
    _write_json(args.out, payload)
    return 0


def cmd_relmap(args) -> int:
    with open(args.checkpoints, "r", encoding="utf-8") as fh:
        entries = json.load(fh)
    if not isinstance(entries, list) or not entries:
        raise ValidationError(f"{args.checkpoints}: expected a non-empty JSON list")
    labels = load_tensor(args.labels)
    pairs = []
    inputs = {"checkpoints": args.checkpoints, "labels": args.labels}
    for idx, entry in enumerate(entries):
        pairs.append((load_tensor(entry["features"]), load_tensor(entry["probs"])))
        inputs[f"features_{idx}"] = entry["features"]
        inputs[f"probs_{idx}"] = entry["probs"]
    series = relmap.checkpoint_series(pairs, labels)
    kconfig = _kernel_config(args, default_t=1.0)
    points = relmap.relation_map(series, args.anchor, kconfig)
    fmt = args.format or ("svg" if str(args.out).endswith(".svg") else "csv")
    relmap.emit_scatter(points, args.out, fmt)
    summary = {
        "anchor": args.anchor,
        "points": len(points),
        "checkpoints": len(series),
        "out": str(args.out),
        "manifest": _manifest(
            "relmap",
            {**_kernel_config_dict(kconfig), "format": fmt},
            inputs,
            None,
        ),
    }
    sys.stdout.write(_dump(summary))
    return 0


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relgraph",
        description="Relation-graph data diagnosis: label errors, outliers, metrics.",
    )
    parser.add_argument("--version", action="version", version=f"relgraph {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("detect-labels", help="score label noisiness via max-cut")
    p.add_argument("--features", required=True)
    p.add_argument("--probs", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True)
    _kernel_flags(p, default_t=4.0)
    p.add_argument("--lambda", dest="lam", type=float, default=0.05,
                   help="cardinality regularizer on scaled scores (default 0.05)")
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--partition-size", type=int, default=0,
                   help="solve shuffled partitions of this size (0 = whole graph)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--single-node", action="store_true",
                   help="use the single-node local search (dense, small n)")
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_detect_labels)

    p = sub.add_parser("detect-outliers", help="inverse-kernel-mass outlier scores")
    p.add_argument("--query-features", required=True)
    p.add_argument("--query-probs", required=True)
    p.add_argument("--ref-features", required=True)
    p.add_argument("--ref-probs", required=True)
    p.add_argument("--out", required=True)
    _kernel_flags(p, default_t=1.0)
    p.add_argument("--subset-size", type=int, default=0,
                   help="reference subsample size (0 = all)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_detect_outliers)

    p = sub.add_parser("baseline", help="reference scorers (entropy, margin, knn, ...)")
    p.add_argument("--kind", required=True,
                   choices=list(baselines.LABEL_KINDS) + list(baselines.OOD_KINDS))
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--probs")
    p.add_argument("--labels")
    p.add_argument("--logits")
    p.add_argument("--features")
    p.add_argument("--ref-features")
    p.add_argument("--ref-total", type=int, default=None,
                   help="full reference size for the knn 1000*alpha rule")
    p.add_argument("--k", type=int, default=None, help="override the knn neighbor count")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("eval", help="AP / AUROC / TNR95 of a score file against truth")
    p.add_argument("--scores", required=True, help="JSON scores (array or {scores: ...})")
    p.add_argument("--truth", required=True, help="RGT1 int64 vector of 0/1 ground truth")
    p.add_argument("--tpr-target", type=float, default=0.95)
    p.add_argument("--out", default=None)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gen-noise", help="inject synthetic top-2 label noise")
    p.add_argument("--probs", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--ratio", type=float, required=True)
    p.add_argument("--out-labels", required=True)
    p.add_argument("--out-mask", required=True)
    p.add_argument("--out", required=True, help="JSON flip report")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_gen_noise)

    p = sub.add_parser("relmap", help="relation-map scatter for one anchor sample")
    p.add_argument("--checkpoints", required=True,
                   help="JSON list of {features, probs} RGT1 path pairs")
    p.add_argument("--labels", required=True)
    p.add_argument("--anchor", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["csv", "svg"], default=None,
                   help="default: by --out extension, csv otherwise")
    _kernel_flags(p, default_t=1.0)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_relmap)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, json.JSONDecodeError, KeyError) as err:
        print(f"relgraph: invalid input: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"relgraph: I/O error: {err}", file=sys.stderr)
        return 3
    except GuardError as err:
        print(f"relgraph: {err}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
