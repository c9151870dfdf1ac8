"""Command-line entry point.

Subcommands: `train` (fit the predictor and write a checkpoint), `eval`
(Monte Carlo sweeps producing CSV + plots), `complexity` (analytic cost
table). Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 checkpoint/architecture mismatch. NTNLINK_OUTDIR overrides the default
output directory.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import platform
import sys
import time

import ntnlink
from ntnlink.backend import BACKEND
from ntnlink.errors import (CheckpointMismatch, ConfigurationError, NumericalError,
                            UsageError)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CHECKPOINT = 4


def _out_dir(arg: str | None, command: str) -> str:
    if arg:
        return arg
    base = os.environ.get("NTNLINK_OUTDIR", "ntnlink-out")
    return os.path.join(base, command)


def _manifest(command: str, args: argparse.Namespace, config_snapshot: dict,
              artifacts: list[str], t0: float, extra: dict | None = None) -> dict:
    return {
        "command": command,
        "argv": [a for a in sys.argv[1:]],
        "tool_version": ntnlink.__version__,
        "backend": BACKEND,
        "platform": platform.platform(),
        "config": config_snapshot,
        "artifacts": sorted(artifacts),
        "started_utc": datetime.datetime.fromtimestamp(
            t0, datetime.timezone.utc).isoformat(),
        "wall_time_s": time.time() - t0,
        **(extra or {}),
    }


def _parse_values(spec: str) -> list:
    """Comma list or lo:hi:step range (inclusive upper bound)."""
    if ":" in spec:
        lo, hi, step = (float(x) for x in spec.split(":"))
        if step <= 0:
            raise ConfigurationError(f"bad range step in {spec!r}")
        out = []
        v = lo
        while v <= hi + 1e-9:
            out.append(round(v, 9))
            v += step
        return out
    return [x.strip() for x in spec.split(",") if x.strip()]


def cmd_train(args) -> int:
    from ntnlink import results
    from ntnlink.config import load_config
    from ntnlink.predictor import ChannelPredictor
    from ntnlink.training import train

    t0 = time.time()
    cfg = load_config(args.config)
    tc = cfg.train_config(seed=args.seed, batch_size=args.batch,
                          max_epochs=args.epochs)
    out = _out_dir(args.out, "train")
    os.makedirs(out, exist_ok=True)
    model = ChannelPredictor(rng_seed=tc.seed)

    rows = []

    def log(row):
        rows.append(row)
        if args.verbose or row.epoch % 25 == 0:
            print(f"epoch {row.epoch:4d}  lr {row.lr:.5f}  loss {row.train_loss:.5f}  "
                  f"val {row.val_nmse:.5f}", flush=True)

    try:
        result = train(model, tc, log_fn=log, threads=args.threads)
    except NumericalError as e:
        diag = os.path.join(out, "failure_diagnostic.json")
        results.write_manifest(diag, {
            "error": str(e),
            "epochs_completed": len(rows),
            "last_rows": [vars(r) for r in rows[-5:]],
        })
        print(f"error: {e} (diagnostic written to {diag})", file=sys.stderr)
        return EXIT_NUMERICAL

    ckpt_prefix = os.path.join(out, "checkpoint")
    optimizer = None  # moments are not retained across CLI invocations
    model.save(ckpt_prefix, optimizer=optimizer, epoch=result.epochs_run,
               meta={"best_epoch": result.best_epoch,
                     "best_val_nmse": result.best_val_nmse})
    log_path = os.path.join(out, "training_log.csv")
    lines = ["epoch,lr,train_loss,val_nmse"]
    lines += [f"{r.epoch},{r.lr!r},{r.train_loss!r},{r.val_nmse!r}" for r in rows]
    results._atomic_write(log_path, "\n".join(lines) + "\n")
    artifacts = [ckpt_prefix + ".bin", ckpt_prefix + ".json", log_path]
    manifest_path = os.path.join(out, "manifest.json")
    results.write_manifest(manifest_path, _manifest(
        "train", args, cfg.snapshot(), artifacts, t0,
        extra={"epochs_run": result.epochs_run, "best_epoch": result.best_epoch,
               "best_val_nmse": result.best_val_nmse, "seed": tc.seed,
               "threads": args.threads}))
    print(f"trained {result.epochs_run} epochs (best val NMSE "
          f"{result.best_val_nmse:.5f} at epoch {result.best_epoch}); "
          f"checkpoint at {ckpt_prefix}.bin")
    return EXIT_OK


def _eval_series(records):
    xs = [r.eb_n0_db for r in records]
    return {
        "uncoded_ber": ({"estimation": (xs, [r.ber_uncoded_est for r in records]),
                         "prediction": (xs, [r.ber_uncoded_pred for r in records])},
                        "uncoded BER", True),
        "bler": ({"estimation": (xs, [r.bler_e for r in records]),
                  "prediction": (xs, [r.bler_p for r in records])},
                 "BLER", True),
        "throughput": ({"estimation": (xs, [r.tp_e_bps / 1e6 for r in records]),
                        "prediction": (xs, [r.tp_p_bps / 1e6 for r in records])},
                       "throughput [Mbit/s]", False),
        "nmse": ({"prediction": (xs, [r.nmse_pred_db for r in records]),
                  "estimation": (xs, [r.nmse_est_db for r in records])},
                 "NMSE [dB]", False),
    }


def cmd_eval(args) -> int:
    from ntnlink import results
    from ntnlink.config import load_config
    from ntnlink.harness import sweep

    t0 = time.time()
    cfg = load_config(args.config)
    base = cfg.scenario_config(seed=args.seed, predictor_path=args.checkpoint,
                               perfect_csi=args.perfect_csi)
    values = _parse_values(args.values) if args.values else [base.eb_n0_db]
    axis = args.axis
    train_ckpts = None
    if axis == "channel":
        train_ckpts = {}
        if args.train_ckpt_a:
            train_ckpts["NTN-TDL-A"] = args.train_ckpt_a
        if args.train_ckpt_c:
            train_ckpts["NTN-TDL-C"] = args.train_ckpt_c
        if not train_ckpts:
            train_ckpts = {"persistence": None}
        if not args.values:
            values = ["NTN-TDL-A", "NTN-TDL-C"]

    records = sweep(base, axis, values, threads=args.threads,
                    train_ckpts=train_ckpts)
    out = _out_dir(args.out, "eval")
    os.makedirs(out, exist_ok=True)
    csv_path = os.path.join(out, "records.csv")
    results.write_records_csv(records, csv_path)
    artifacts = [csv_path]
    if axis == "ebn0":
        for name, (series, ylabel, logy) in _eval_series(records).items():
            for label, (xs, ys) in series.items():
                dat = os.path.join(out, f"{name}_{label}.txt")
                results.write_plot_data(dat, xs, ys, "eb_n0_db", name)
                artifacts.append(dat)
            svg = os.path.join(out, f"{name}.svg")
            results.svg_line_chart(svg, series, "Eb/N0 [dB]", ylabel,
                                   title=f"{name} vs Eb/N0", log_y=logy)
            artifacts.append(svg)
    manifest_path = os.path.join(out, "manifest.json")
    results.write_manifest(manifest_path, _manifest(
        "eval", args, cfg.snapshot(), artifacts, t0,
        extra={"axis": axis, "values": [str(v) for v in values],
               "seed": base.seed, "threads": args.threads,
               "warnings": sorted({w for r in records for w in r.warnings})}))
    for r in records:
        print(f"eb_n0 {r.eb_n0_db:5.2f} dB  [{r.label or r.channel_profile}]  "
              f"BLERe {r.bler_e:.4f}  BLERp {r.bler_p:.4f}  "
              f"TPe {r.tp_e_bps/1e6:.3f}M  TPp {r.tp_p_bps/1e6:.3f}M  "
              f"({r.iterations_run} iters)")
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_complexity(args) -> int:
    from ntnlink.complexity import (EXPECTED_CORE_PARAMS, EXPECTED_TOTAL_MULS,
                                    complexity_report, report_from_arch_file)

    if args.arch_file:
        rep = report_from_arch_file(args.arch_file)
    elif args.checkpoint:
        from ntnlink.predictor import ChannelPredictor

        ChannelPredictor.from_checkpoint(args.checkpoint)  # fingerprint check
        rep = complexity_report()
    else:
        rep = complexity_report()
    print(rep.table())
    print(f"normalization params (excluded from core count): {rep.aux_params}")
    if args.json:
        from ntnlink import results

        results.write_manifest(args.json, rep.as_dict())
        print(f"wrote {args.json}")
    if args.assert_expected:
        ok = (rep.total_muls == EXPECTED_TOTAL_MULS
              and rep.trainable_params == EXPECTED_CORE_PARAMS)
        if not ok:
            print(f"expected {EXPECTED_TOTAL_MULS} multiplications and "
                  f"{EXPECTED_CORE_PARAMS} parameters, got {rep.total_muls} / "
                  f"{rep.trainable_params}", file=sys.stderr)
            return 1
        print("totals match the pinned reference values")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ntnlink",
        description="Link-level simulator for LEO-satellite uplink OFDM with a "
                    "CNN-LSTM slot-ahead channel predictor.")
    p.add_argument("--version", action="version", version=ntnlink.__version__)
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train the channel predictor")
    t.add_argument("--config", help="INI config file (defaults used if omitted)")
    t.add_argument("--out", help="output directory (default $NTNLINK_OUTDIR/train)")
    t.add_argument("--epochs", type=int, help="override max training epochs")
    t.add_argument("--batch", type=int, help="override batch size")
    t.add_argument("--seed", type=int, help="override the run seed")
    t.add_argument("--threads", type=int, default=1,
                   help="dataset-generation workers (1 = bit-reproducible)")
    t.add_argument("--verbose", action="store_true", help="log every epoch")
    t.set_defaults(fn=cmd_train)

    e = sub.add_parser("eval", help="Monte Carlo evaluation sweeps")
    e.add_argument("--config", help="INI config file")
    e.add_argument("--checkpoint", help="predictor checkpoint prefix "
                                        "(omit to run the persistence baseline)")
    e.add_argument("--axis", choices=["ebn0", "speed", "channel", "mod"],
                   default="ebn0", help="sweep axis")
    e.add_argument("--values", help="comma list or lo:hi:step range")
    e.add_argument("--train-ckpt-a", help="checkpoint trained on NTN-TDL-A "
                                          "(channel-mismatch sweeps)")
    e.add_argument("--train-ckpt-c", help="checkpoint trained on NTN-TDL-C "
                                          "(channel-mismatch sweeps)")
    e.add_argument("--perfect-csi", action="store_true",
                   help="equalize with the true channel (sanity limit)")
    e.add_argument("--out", help="output directory (default $NTNLINK_OUTDIR/eval)")
    e.add_argument("--seed", type=int, help="override the run seed")
    e.add_argument("--threads", type=int, default=1,
                   help="Monte Carlo workers (1 = bit-reproducible)")
    e.set_defaults(fn=cmd_eval)

    c = sub.add_parser("complexity", help="analytic multiplication/parameter counts")
    c.add_argument("--checkpoint", help="verify a checkpoint's architecture first")
    c.add_argument("--arch-file", help="JSON list of layers to cost instead of "
                                       "the built-in architecture")
    c.add_argument("--assert-expected", action="store_true",
                   help="exit nonzero unless totals equal the pinned values")
    c.add_argument("--json", help="also write the report as JSON")
    c.set_defaults(fn=cmd_complexity)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigurationError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except CheckpointMismatch as e:
        print(f"checkpoint mismatch: {e}", file=sys.stderr)
        return EXIT_CHECKPOINT


if __name__ == "__main__":
    sys.exit(main())
