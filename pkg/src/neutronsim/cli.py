"""Command-line front end: ``neutronsim <subcommand> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, RunManifest, load_config, manifest_from_items

EXPERIMENT_OF = {
    "run-interferometer": "interferometer",
    "run-bell": "bell",
    "run-ozawa": "ozawa",
}


def _key_value(text: str) -> tuple[str, str]:
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    return key.strip(), value.strip()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="neutronsim",
        description="Event-by-event neutron interferometry, Bell and error-disturbance simulations.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=False):
        p.add_argument("--config", "-c", required=config_required, help="flat key = value config file")
        p.add_argument("--set", dest="overrides", action="append", type=_key_value, default=[],
                       metavar="KEY=VALUE", help="override one config entry (repeatable)")
        p.add_argument("--seed", type=int, help="seed override")
        p.add_argument("--output-dir", help="directory for CSV files "
                       "(default: $NEUTRONSIM_OUTPUT_DIR or ./results)")
        p.add_argument("--parallelism", "-j", type=int, help="concurrent grid points")

    for name, experiment in EXPERIMENT_OF.items():
        common(sub.add_parser(name, help=f"simulate the {experiment} experiment and write a CSV"))
    oracle_p = sub.add_parser("emit-oracle", help="write closed-form predictions only")
    oracle_p.add_argument("experiment", choices=sorted(set(EXPERIMENT_OF.values())))
    common(oracle_p)
    verify = sub.add_parser("verify", help="run the acceptance checks")
    verify.add_argument("--seed", type=int, help="seed (default: the fixed acceptance seed)")
    verify.add_argument("--parallelism", "-j", type=int, default=4)
    verify.add_argument("--only", type=int, action="append", choices=range(1, 7),
                        help="run just this criterion (repeatable)")
    return parser


def resolve_manifest(args, experiment: str) -> RunManifest:
    if args.config:
        manifest = load_config(args.config)
        if manifest.experiment != experiment:
            raise ConfigError(f"config is for {manifest.experiment!r}, not {experiment!r}",
                              key="experiment")
        if args.overrides:
            raw = {"experiment": experiment, "seed": str(manifest.seed)}
            raw.update(_manifest_text(manifest))
            raw.update(dict(args.overrides))
            manifest = manifest_from_items(raw)
    else:
        raw = {"experiment": experiment}
        if args.seed is not None:
            raw["seed"] = str(args.seed)
        raw.update(dict(args.overrides))
        if raw.get("experiment") != experiment:
            raise ConfigError("experiment cannot be overridden", key="experiment")
        manifest = manifest_from_items(raw)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.parallelism is not None:
        changes["parallelism"] = args.parallelism
    return manifest.with_overrides(**changes) if changes else manifest


def _manifest_text(m: RunManifest) -> dict[str, str]:
    """Render a manifest back into config entries (grids as comma lists)."""
    out = {}
    for key, value in m.canonical().items():
        if key in ("experiment", "seed"):
            continue
        out[key] = ", ".join(repr(float(v)) for v in value) if isinstance(value, tuple) else str(value)
    if m.output:
        out["output"] = m.output
    out["parallelism"] = str(m.parallelism)
    return out


def _verify(args) -> int:
    from .acceptance import ACCEPTANCE_SEED, CRITERIA

    seed = ACCEPTANCE_SEED if args.seed is None else args.seed
    chosen = args.only or range(1, len(CRITERIA) + 1)
    ok = True
    for k in chosen:
        res = CRITERIA[k - 1](seed, args.parallelism)
        print(res.line(), flush=True)
        ok &= res.passed
    return 0 if ok else 1


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "verify":
        return _verify(args)

    from .harness import HarnessError, emit_oracle, run_manifest

    experiment = args.experiment if args.command == "emit-oracle" else EXPERIMENT_OF[args.command]
    try:
        manifest = resolve_manifest(args, experiment)
    except (ConfigError, OSError) as exc:
        print(f"neutronsim: config error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "emit-oracle":
            path = emit_oracle(manifest, args.output_dir)
        else:
            path = run_manifest(manifest, args.output_dir)
    except HarnessError as exc:
        print(f"neutronsim: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
