"""Command-line entry points.

Subcommands: graph-info, as-enum, train, select, simulate, dump-profile,
dump-cdf.  Every flag can also be supplied through --config FILE, a plain
key=value text file (flag names with dashes replaced by underscores);
explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import absorbing, bp, channel, diversity, harness, tanner, training


def _read_config(path: str) -> dict[str, str]:
    values = {}
    for i, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SystemExit(f"{path}:{i}: expected key=value")
        key, val = line.split("=", 1)
        values[key.strip().replace("-", "_")] = val.strip()
    return values


def _coerce(action: argparse.Action, raw: str):
    if isinstance(action, (argparse._StoreTrueAction,
                           argparse._StoreFalseAction)):
        return raw.lower() in ("1", "true", "yes", "on")
    convert = action.type or str
    if action.nargs in ("+", "*"):
        return [convert(tok) for tok in raw.split()]
    return convert(raw)


def _apply_config(sub: argparse.ArgumentParser, argv: list[str]) -> None:
    """Install key=value file entries as defaults of the subcommand parser
    (explicit flags still win); file-supplied required flags become
    optional."""
    path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
    if path is None:
        return
    file_vals = _read_config(path)
    actions = {a.dest: a for a in sub._actions}
    unknown = set(file_vals) - set(actions)
    if unknown:
        raise SystemExit(f"{path}: unknown config keys {sorted(unknown)}")
    for dest, raw in file_vals.items():
        action = actions[dest]
        sub.set_defaults(**{dest: _coerce(action, raw)})
        action.required = False


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alist", required=True, help="parity-check matrix file")
    p.add_argument("--config", help="key=value config file")


def cmd_graph_info(args) -> int:
    g = tanner.load_alist(args.alist)
    print("N,M,E,girth,multiplicity")
    print(tanner.summary_row(g))
    print(f"weights per decoder: {tanner.count_weights(g)}", file=sys.stderr)
    return 0


def cmd_as_enum(args) -> int:
    g = tanner.load_alist(args.alist)
    store = "all" if (args.dump or args.brute_force_verify) else "sample"
    cls = absorbing.enumerate_all(g, args.nu, store=store)
    if args.brute_force_verify:
        brute = absorbing.brute_force_enum(g, args.nu)
        mine = {a.members for c in cls.classes.values() for a in c.sets}
        if mine != brute:
            print(f"MISMATCH: dfs={len(mine)} brute={len(brute)}",
                  file=sys.stderr)
            return 1
        print(f"brute-force verify OK ({len(brute)} sets)", file=sys.stderr)
    if args.dump:
        with open(args.dump, "w") as fh:
            for et in sorted(cls.classes):
                for aset in cls.classes[et].sets:
                    members = " ".join(str(n + 1) for n in aset.members)
                    fh.write(f"{et}: {members}\n")
    print(cls.summary_csv(), end="")
    return 0


def cmd_train(args) -> int:
    g = tanner.load_alist(args.alist)
    cfg = training.TrainConfig(
        snr_db=args.snr_db, i_train=args.i_train, batch_size=args.batch_size,
        n_batches=args.n_batches, epochs=args.epochs,
        learning_rate=args.learning_rate, error_class=args.error_class)
    rng = channel.make_rng(args.seed)
    if cfg.error_class == "unspecialized":
        class_sets = []
    else:
        et = absorbing.ExtendedType.parse(cfg.error_class)
        cls = absorbing.enumerate_all(g, et.nu)
        if et not in cls.classes:
            raise SystemExit(f"no absorbing sets of type {et} in this code")
        class_sets = [a.members for a in cls.classes[et].sets]
    weights, report = training.train(g, cfg, class_sets, rng)
    bp.save_weights(args.out, g, weights)
    if args.loss_csv:
        lines = ["epoch,batch,loss"]
        lines += [f"{e},{b},{l:.8g}" for e, b, l in report.history]
        Path(args.loss_csv).write_text("\n".join(lines) + "\n")
    print(f"final loss {report.final:.6g}; weights -> {args.out}")
    return 0


def cmd_select(args) -> int:
    g = tanner.load_alist(args.alist)
    pool = harness.load_pool_manifest(args.pool, g, args.i_test)
    params = channel.snr_to_sigma(args.snr_db)
    rng = channel.make_rng(args.seed)
    parts = [[] for _ in pool.entries]
    remaining = args.test_words
    while remaining > 0:
        n = min(remaining, args.batch_size)
        words = channel.sample_awgn(params, g.n_vars, rng, size=n)
        for j, m in enumerate(diversity.failure_sets(g, pool, words.llr)):
            parts[j].append(m)
        remaining -= n
    masks = [np.concatenate(p) for p in parts]
    order = diversity.select_order(masks)
    out = {
        "order": [pool.entries[j].decoder_id for j in order],
        "labels": [pool.entries[j].label for j in order],
        "failure_rates": [float(masks[j].mean()) for j in order],
        "test_words": int(args.test_words),
        "snr_db": args.snr_db,
        "seed": args.seed,
    }
    Path(args.out).write_text(json.dumps(out, indent=1) + "\n")
    print(f"selection order -> {args.out}")
    return 0


def cmd_simulate(args) -> int:
    g = tanner.load_alist(args.alist)
    cfg = harness.ExperimentConfig(
        alist=args.alist, snr_db=[float(s) for s in args.snr_db],
        decoder=args.decoder, i_test=args.i_test, osd_mode=args.osd_mode,
        osd_order=args.osd_order, min_frame_errors=args.min_frame_errors,
        max_frames=args.max_frames, seed=args.seed, workers=args.workers,
        batch_size=args.batch_size, weights=args.weights, pool=args.pool)
    if cfg.decoder == "bp":
        pool = harness.single_pool(g, None, cfg.i_test)
    elif cfg.decoder == "bprnn-single":
        if not cfg.weights:
            raise SystemExit("bprnn-single needs --weights")
        pool = harness.single_pool(g, bp.load_weights(cfg.weights, g),
                                   cfg.i_test, label="bprnn")
    else:
        if not cfg.pool:
            raise SystemExit("diversity decoding needs --pool")
        pool = harness.load_pool_manifest(cfg.pool, g, cfg.i_test)
    rows = harness.run_sweep(g, pool, cfg, csv_path=args.out,
                             log_path=args.log)
    print(harness.CSV_HEADER)
    for r in rows:
        print(r.csv())
    return 0


def cmd_dump_profile(args) -> int:
    g = tanner.load_alist(args.alist)
    weights = bp.load_weights(args.weights, g)
    text = harness.weight_profile_csv(weights)
    Path(args.out).write_text(text) if args.out else print(text, end="")
    return 0


def cmd_dump_cdf(args) -> int:
    g = tanner.load_alist(args.alist)
    w = (bp.load_weights(args.weights, g) if args.weights
         else bp.WeightSet.ones(g))
    rng = channel.make_rng(args.seed)
    values, cdf = harness.dump_failure_cdf(
        g, w, args.snr_db, args.n_failures, rng, i_test=args.i_test)
    if values.size == 0:
        print("no failures collected", file=sys.stderr)
        return 1
    text = harness.cdf_csv(values, cdf)
    Path(args.out).write_text(text) if args.out else print(text, end="")
    return 0


def build_parser() -> tuple[argparse.ArgumentParser,
                            dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="ldpclab",
        description="Short-LDPC decoding workbench: weighted BP decoding, "
                    "absorbing-set enumeration, per-class training, decoder "
                    "diversity and OSD post-processing.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("graph-info", help="graph summary diagnostics")
    _add_common(p)
    p.set_defaults(func=cmd_graph_info)

    p = sub.add_parser("as-enum", help="enumerate absorbing sets")
    _add_common(p)
    p.add_argument("--nu", type=int, required=True)
    p.add_argument("--dump", help="write one line per set")
    p.add_argument("--brute-force-verify", action="store_true")
    p.set_defaults(func=cmd_as_enum)

    p = sub.add_parser("train", help="train one BP-RNN decoder")
    _add_common(p)
    p.add_argument("--class", dest="error_class", required=True,
                   help="extended-type string, or 'unspecialized'")
    p.add_argument("--snr-db", type=float, required=True)
    p.add_argument("--i-train", type=int, default=10)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch-size", type=int, default=8192)
    p.add_argument("--n-batches", type=int, default=64)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="weight file to write")
    p.add_argument("--loss-csv", help="loss history CSV")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("select", help="order a decoder pool by "
                                      "failure-set complementarity")
    _add_common(p)
    p.add_argument("--pool", required=True, help="pool manifest JSON")
    p.add_argument("--test-words", type=int, default=1_000_000)
    p.add_argument("--snr-db", type=float, default=5.0)
    p.add_argument("--i-test", type=int, default=25)
    p.add_argument("--batch-size", type=int, default=8192)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="order JSON to write")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("simulate", help="Monte Carlo FER sweep")
    _add_common(p)
    p.add_argument("--decoder", choices=harness.DECODER_SPECS, default="bp")
    p.add_argument("--snr-db", nargs="+", required=True)
    p.add_argument("--i-test", type=int, default=25)
    p.add_argument("--osd-mode", choices=harness.OSD_MODES, default="off")
    p.add_argument("--osd-order", type=int, choices=(0, 1, 2), default=1)
    p.add_argument("--min-frame-errors", type=int, default=100)
    p.add_argument("--max-frames", type=int, default=10_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--batch-size", type=int, default=2048)
    p.add_argument("--weights", help="weight file (bprnn-single)")
    p.add_argument("--pool", help="pool manifest (diversity)")
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--log", help="run log path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("dump-profile", help="sorted weight profiles")
    _add_common(p)
    p.add_argument("--weights", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_dump_profile)

    p = sub.add_parser("dump-cdf", help="CDF of a-posteriori LLRs on "
                                        "failed frames")
    _add_common(p)
    p.add_argument("--weights")
    p.add_argument("--snr-db", type=float, required=True)
    p.add_argument("--n-failures", type=int, default=100)
    p.add_argument("--i-test", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_dump_cdf)

    return parser, dict(sub.choices)


def main(argv: list[str] | None = None) -> int:
    parser, commands = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] in commands:
        _apply_config(commands[argv[0]], argv)
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
