"""Command-line interface: synth | train | apply | eval | basis | trace | validate.

Exit codes: 0 success, 1 usage or config error, 2 data error, 3 cap or
budget refusal. Every command is deterministic given its flags and seed;
--threads only affects speed.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import jsonschema

from . import arch as arch_mod
from . import data as data_mod
from . import train as train_mod
from .errors import ConfigError, DataFormatError, InvalidGraphError, WindowCapExceeded
from .graph import basis_of, evaluate, window_of
from .graphio import format_basis, load_graph
from .lattice import rewindow

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_CAP = 3

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["architecture", "train", "data"],
    "properties": {
        "architecture": {
            "type": "object",
            "required": ["layers"],
            "properties": {"layers": {"type": "array", "minItems": 1}},
        },
        "train": {
            "type": "object",
            "required": ["algorithm", "epochs"],
            "properties": {
                "algorithm": {"enum": ["lda", "slda"]},
                "epochs": {"type": "integer", "minimum": 1},
                "batch_size": {"type": "integer", "minimum": 1},
                "neighbors_sampled": {"type": "integer", "minimum": 1},
                "loss": {"enum": ["absolute", "iou"]},
                "seed": {"type": "integer"},
                "perturbation": {"type": "integer", "minimum": 0},
            },
        },
        "data": {
            "type": "object",
            "required": ["train_dir"],
            "properties": {
                "train_dir": {"type": "string"},
                "val_dir": {"type": "string"},
            },
        },
        "output_dir": {"type": "string"},
    },
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _load_json(path, what: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise DataFormatError(f"{path}: no such file")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: not valid JSON: {e}") from e


def _load_arch(path) -> arch_mod.ArchitectureSpec:
    data = _load_json(path, "architecture")
    if "architecture" in data:  # allow a full experiment config
        data = data["architecture"]
    return arch_mod.ArchitectureSpec.from_json(data)


def _load_params(path) -> arch_mod.ParamVector:
    p = Path(path)
    if not p.exists():
        raise DataFormatError(f"{path}: no such file")
    return arch_mod.deserialize_params(p.read_text())


def _check_arch_match(arch, params) -> None:
    if params.arch != arch:
        raise ConfigError("params file does not match the architecture")


def cmd_synth(args) -> int:
    spec = data_mod.CorpusSpec(
        count=args.count, width=args.width, height=args.height,
        noise_rate=args.noise, shape_kind=args.shapes, seed=args.seed,
    )
    manifest = data_mod.gen_corpus(spec, args.out)
    print(f"wrote {len(manifest['files'])} pairs to {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    config = _load_json(args.config, "config")
    try:
        jsonschema.validate(config, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        pointer = "/" + "/".join(str(p) for p in e.absolute_path)
        raise ConfigError(f"{args.config}: at {pointer or '/'}: {e.message}") from e

    arch = arch_mod.ArchitectureSpec.from_json(config["architecture"])
    tcfg = config["train"]
    seed = args.seed if args.seed is not None else tcfg.get("seed", 0)
    cfg = train_mod.TrainConfig(
        algorithm=tcfg["algorithm"],
        epochs=tcfg["epochs"],
        batch_size=tcfg.get("batch_size", 1),
        neighbors_sampled=tcfg.get("neighbors_sampled", 1),
        loss=tcfg.get("loss", "absolute"),
        seed=seed,
    )
    out_dir = Path(args.out if args.out else config.get("output_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)

    sample = data_mod.load_pairs(config["data"]["train_dir"])
    val = None
    if config["data"].get("val_dir"):
        val = data_mod.load_pairs(config["data"]["val_dir"])

    import random as _random
    init = arch_mod.init_params(arch, _random.Random(seed),
                                perturbation=tcfg.get("perturbation", 2))
    t0 = time.perf_counter()
    report = train_mod.train(arch, init, sample, cfg, threads=args.threads,
                             metrics_path=out_dir / "metrics.csv")
    wall_ms = int((time.perf_counter() - t0) * 1000)

    (out_dir / "params.json").write_text(arch_mod.serialize_params(report.best_params))
    val_loss = None
    if val is not None:
        val_loss = train_mod.mean_loss(arch, report.best_params, val, cfg.loss_fn)
    summary = {
        "train_loss": float(report.best_loss),
        "val_loss": None if val_loss is None else float(val_loss),
        "epochs_to_min": report.epoch_of_best,
        "wall_ms": wall_ms,
    }
    (out_dir / "report.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"best training loss {float(report.best_loss):.6f} "
          f"(epoch {report.epoch_of_best}); outputs in {out_dir}")
    return EXIT_OK


def cmd_apply(args) -> int:
    arch = _load_arch(args.arch)
    params = _load_params(args.params)
    _check_arch_match(arch, params)
    g = arch_mod.compile(arch, params)
    img = data_mod.read_pbm(args.input)
    data_mod.write_pbm(evaluate(g, img), args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    arch = _load_arch(args.arch)
    params = _load_params(args.params)
    _check_arch_match(arch, params)
    sample = data_mod.load_pairs(args.data)
    lossfn = train_mod.LOSSES[args.loss]
    value = train_mod.mean_loss(arch, params, sample, lossfn)
    result = {"loss": args.loss, "mean_loss": float(value), "pairs": len(sample)}
    print(json.dumps(result))
    if args.out:
        Path(args.out).write_text(json.dumps(result, indent=2) + "\n")
    return EXIT_OK


def cmd_basis(args) -> int:
    if args.graph:
        g = load_graph(args.graph)
        g.require_valid()
        basis = basis_of(g, budget=args.budget)
    else:
        arch = _load_arch(args.arch)
        params = _load_params(args.params)
        _check_arch_match(arch, params)
        g = arch_mod.compile(arch, params)
        declared = arch.declared_window()
        if len(declared) > args.budget:
            raise WindowCapExceeded(len(declared), args.budget, "declared window")
        basis = rewindow(basis_of(g, budget=args.budget), declared)
    sys.stdout.write(format_basis(basis))
    return EXIT_OK


def cmd_trace(args) -> int:
    arch = _load_arch(args.arch)
    params = _load_params(args.params)
    _check_arch_match(arch, params)
    img = data_mod.read_pbm(args.input)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    current = img
    for i, (layer, entry) in enumerate(zip(arch.layers, params.entries), start=1):
        sub_arch = arch_mod.ArchitectureSpec((layer,))
        sub_params = arch_mod.ParamVector(sub_arch, (entry,))
        current = evaluate(arch_mod.compile(sub_arch, sub_params), current)
        name = out_dir / f"layer_{i:02d}.pbm"
        data_mod.write_pbm(current, name)
        print(f"wrote {name}")
    return EXIT_OK


def cmd_validate(args) -> int:
    g = load_graph(args.graph)
    violations = g.validate()
    if not violations:
        print(f"ok: {len(g.vertices)} vertices, {len(g.edges)} edges")
        return EXIT_OK
    for v in violations:
        print(str(v))
    return EXIT_DATA


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="morphgraph", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic noisy-shape corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--width", type=int, default=56)
    p.add_argument("--height", type=int, default=56)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--shapes", choices=["blobs", "digits-font"], default="blobs")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("train", help="train an architecture from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None, help="override the config output_dir")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("apply", help="apply trained params to one image")
    p.add_argument("--arch", required=True)
    p.add_argument("--params", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_apply)

    p = sub.add_parser("eval", help="mean loss of params over a corpus")
    p.add_argument("--arch", required=True)
    p.add_argument("--params", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--loss", choices=["absolute", "iou"], default="absolute")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("basis", help="window and interval basis of an operator")
    p.add_argument("--arch")
    p.add_argument("--params")
    p.add_argument("--graph", help="graph JSON file instead of arch+params")
    p.add_argument("--budget", type=int, default=12)
    p.set_defaults(fn=cmd_basis)

    p = sub.add_parser("trace", help="write each layer's output image")
    p.add_argument("--arch", required=True)
    p.add_argument("--params", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_trace)

    p = sub.add_parser("validate", help="check a graph JSON file against the axioms")
    p.add_argument("--graph", required=True)
    p.set_defaults(fn=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.fn is cmd_basis and not args.graph and not (args.arch and args.params):
        print("morphgraph basis: need --graph or both --arch and --params", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except WindowCapExceeded as e:
        print(f"refused: {e}", file=sys.stderr)
        return EXIT_CAP
    except (DataFormatError, InvalidGraphError, FileNotFoundError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
