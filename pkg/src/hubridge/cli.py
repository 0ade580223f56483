"""Command-line entry point: ``hubridge {synth,experiment,verify,hubness}``.

Exit codes: 0 success, 1 invalid input or configuration, 2 a verification
check failed. Reports are TSV (default) or JSON. TSV reports start with
``#`` comment lines carrying the resolved configuration and its digest.
"""
import argparse
import hashlib
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .data import (
    SyntheticConfig,
    dataset_from_manifest,
    generate_synthetic,
    load_embeddings,
    load_lexicon,
    pair_by_lexicon,
    read_manifest,
    save_embeddings,
    split,
    write_manifest,
)
from .errors import HubridgeError
from .evaluation import DEFAULT_FOLDS, DEFAULT_GRID, expand_methods, run_experiment
from .hubness import hubness_report
from .neighbors import DEFAULT_NICDM_K, nicdm, pairwise_euclidean
from .theory import VerifyConfig, delta_closed_form, run_verification

EXIT_OK, EXIT_INVALID, EXIT_VERIFY_FAILED = 0, 1, 2


class UsageError(HubridgeError):
    pass


def _int_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("values must be positive integers")
    return values


def _float_list(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _digest(config):
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()


def _num(x):
    return repr(float(x))


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _tsv(config, header, rows, notes=()):
    lines = [
        f"# config_digest\t{_digest(config)}",
        f"# config\t{json.dumps(config, sort_keys=True)}",
        *(f"# {note}" for note in notes),
        "\t".join(header),
    ]
    lines.extend("\t".join(str(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _json(config, key, records):
    payload = {"config": config, "config_digest": _digest(config), key: records}
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


# --- synth -------------------------------------------------------------------


def cmd_synth(args):
    source_dim = args.source_dim or args.dim
    target_dim = args.target_dim or args.dim
    cfg = SyntheticConfig(args.n, args.latent, source_dim, target_dim, args.seed)
    split_seed = args.seed if args.split_seed is None else args.split_seed
    ds = generate_synthetic(cfg)
    train, test = split(ds, args.train_fraction, split_seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_embeddings(out / "source.txt", ds.ids, ds.source, precision=args.precision)
    save_embeddings(out / "target.txt", ds.ids, ds.target, precision=args.precision)
    write_manifest(out / "manifest.tsv", train.ids, test.ids)
    config = {
        "command": "synth", "n": cfg.num_pairs, "latent": cfg.latent_dim,
        "source_dim": source_dim, "target_dim": target_dim, "seed": cfg.seed,
        "split_seed": split_seed, "train_fraction": args.train_fraction,
        "precision": args.precision,
    }
    (out / "config.json").write_text(
        json.dumps({"config": config, "config_digest": _digest(config)}, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    print(f"wrote {len(train)} train / {len(test)} test pairs to {out}", file=sys.stderr)
    return EXIT_OK


# --- experiment --------------------------------------------------------------


def _load_pairs(args):
    source = load_embeddings(args.source)
    target = load_embeddings(args.target)
    inputs = {"source": _file_digest(args.source), "target": _file_digest(args.target)}
    if args.manifest:
        inputs["manifest"] = _file_digest(args.manifest)
        train, test = dataset_from_manifest(source, target, read_manifest(args.manifest))
        return train, test, inputs
    inputs["lexicon"] = _file_digest(args.lexicon)
    pairing = pair_by_lexicon(source, target, load_lexicon(args.lexicon), dedupe=not args.keep_duplicates)
    if pairing.skipped:
        print(f"skipped {len(pairing.skipped)} lexicon entries with unknown tokens", file=sys.stderr)
    train, test = split(pairing.dataset, args.train_fraction, args.split_seed)
    inputs.update(train_fraction=args.train_fraction, split_seed=args.split_seed,
                  skipped=len(pairing.skipped), dedupe=not args.keep_duplicates)
    return train, test, inputs


def cmd_experiment(args):
    methods = expand_methods(args.methods.split(","), with_nicdm=args.nicdm)
    train, test, inputs = _load_pairs(args)
    ks = sorted(set(args.k))
    reports = run_experiment(
        train, test, methods, k_list=ks, lam=args.lam, grid=args.grid,
        folds=args.folds, seed=args.cv_seed, nicdm_k=args.nicdm_k, macro=args.macro,
    )
    config = {
        "command": "experiment", "inputs": inputs, "methods": [m.key for m in methods],
        "k": ks, "lambda": args.lam, "grid": None if args.lam is not None else sorted(set(args.grid)),
        "folds": args.folds, "cv_seed": args.cv_seed, "nicdm_k": args.nicdm_k,
        "macro": args.macro, "num_train": len(train), "num_test": len(test),
        "chosen_lambda": {r.method_name: r.lam for r in reports},
    }
    header = ["method", "MAP"] + [f"Acc_{k}" for k in ks] + [f"N{k}_skew" for k in ks]
    if args.format == "json":
        records = []
        for r in reports:
            rec = {"method": r.method_name, "MAP": r.map, "lambda": r.lam,
                   "num_queries": r.num_queries, "config_digest": r.config_digest}
            rec.update({f"Acc_{k}": r.acc[k] for k in ks})
            rec.update({f"N{k}_skew": r.nk_skewness[k] for k in ks})
            records.append(rec)
        _emit(_json(config, "reports", records), args.out)
    else:
        rows = [
            [r.method_name, _num(r.map)] + [_num(r.acc[k]) for k in ks] + [_num(r.nk_skewness[k]) for k in ks]
            for r in reports
        ]
        _emit(_tsv(config, header, rows), args.out)
    return EXIT_OK


# --- verify ------------------------------------------------------------------


def cmd_verify(args):
    cfg = VerifyConfig.quick() if args.quick else VerifyConfig()
    cfg = replace(cfg, seed=args.seed)
    closed_form = delta_closed_form
    if args.corrupt_closed_form:
        def closed_form(gamma, dim, s2):
            return 1.5 * delta_closed_form(gamma, dim, s2) + 1.0
    checks = run_verification(cfg, closed_form)
    config = {"command": "verify", "quick": args.quick, "seed": args.seed,
              "corrupt_closed_form": args.corrupt_closed_form}
    if args.format == "json":
        records = [
            {"check": c.name, "params": c.params, "estimate": c.estimate, "expected": c.expected,
             "tolerance": c.tolerance, "passed": c.passed, "detail": c.detail}
            for c in checks
        ]
        _emit(_json(config, "checks", records), args.out)
    else:
        rows = [
            [c.name, json.dumps(c.params, sort_keys=True), _num(c.estimate), _num(c.expected),
             _num(c.tolerance), "pass" if c.passed else "FAIL"]
            for c in checks
        ]
        _emit(_tsv(config, ["check", "params", "estimate", "expected", "tolerance", "status"], rows), args.out)
    failed = [c for c in checks if not c.passed]
    if failed:
        print(f"{len(failed)} of {len(checks)} checks failed", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    return EXIT_OK


# --- hubness -----------------------------------------------------------------


def cmd_hubness(args):
    q_ids, queries = load_embeddings(args.queries)
    t_ids, targets = load_embeddings(args.targets, expected_dim=queries.shape[0])
    ks = sorted(set(args.k))
    if ks[-1] >= len(t_ids):
        raise UsageError(f"k={ks[-1]} must be smaller than the vocabulary size {len(t_ids)}")
    dist = pairwise_euclidean(queries, targets)
    if args.nicdm_k is not None:
        dist = nicdm(dist, args.nicdm_k)
    reports = {k: hubness_report(dist, k) for k in ks}
    config = {"command": "hubness", "queries": _file_digest(args.queries),
              "targets": _file_digest(args.targets), "k": ks, "nicdm_k": args.nicdm_k}
    if args.format == "json":
        records = {
            "skewness": {str(k): reports[k].skewness for k in ks},
            "targets": list(t_ids),
            "counts": {str(k): reports[k].counts.tolist() for k in ks},
            "num_queries": len(q_ids),
        }
        _emit(_json(config, "hubness", records), args.out)
    else:
        rows = [[t] + [int(reports[k].counts[j]) for k in ks] for j, t in enumerate(t_ids)]
        notes = ["skewness\t" + "\t".join(f"N{k}={_num(reports[k].skewness)}" for k in ks)]
        _emit(_tsv(config, ["target"] + [f"N_{k}" for k in ks], rows, notes), args.out)
    return EXIT_OK


# --- parser ------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="hubridge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_output(p):
        p.add_argument("--format", choices=("tsv", "json"), default="tsv")
        p.add_argument("--out", default="-", help="report path ('-' for stdout)")

    p = sub.add_parser("synth", help="generate a synthetic paired dataset")
    p.add_argument("--n", type=int, default=2000, help="number of pairs")
    p.add_argument("--latent", type=int, default=1000, help="latent dimension")
    p.add_argument("--dim", type=int, default=100, help="source and target dimension")
    p.add_argument("--source-dim", type=int)
    p.add_argument("--target-dim", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split-seed", type=int, help="defaults to --seed")
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--precision", type=int, default=9, help="significant digits written")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("experiment", help="compare mapping directions on a train/test split")
    p.add_argument("--source", required=True, help="source embedding file")
    p.add_argument("--target", required=True, help="target embedding file")
    pairing = p.add_mutually_exclusive_group(required=True)
    pairing.add_argument("--manifest", help="id<TAB>split file; ids shared by both embedding files")
    pairing.add_argument("--lexicon", help="gold 'src tgt' pairs, split at random")
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--keep-duplicates", action="store_true", help="keep repeated lexicon entries")
    p.add_argument("--methods", default="ridge-xy,ridge-yx")
    p.add_argument("--nicdm", action="store_true", help="also run the NICDM variant of each method")
    p.add_argument("--nicdm-k", type=int, default=DEFAULT_NICDM_K)
    p.add_argument("--lambda", dest="lam", type=float, help="fixed ridge parameter (skips calibration)")
    p.add_argument("--grid", type=_float_list, default=list(DEFAULT_GRID))
    p.add_argument("--folds", type=int, default=DEFAULT_FOLDS)
    p.add_argument("--cv-seed", type=int, default=0)
    p.add_argument("--k", type=_int_list, default=[1, 10])
    p.add_argument("--macro", action="store_true", help="macro-average Acc_k over gold classes")
    add_output(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("verify", help="numerical checks of the hubness and shrinkage results")
    p.add_argument("--quick", action="store_true", help="smaller problem sizes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--corrupt-closed-form", action="store_true", help=argparse.SUPPRESS)
    add_output(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("hubness", help="N_k counts and skewness for query/target files")
    p.add_argument("--queries", required=True)
    p.add_argument("--targets", required=True)
    p.add_argument("--k", type=_int_list, default=[1, 10])
    p.add_argument("--nicdm-k", type=int, help="apply NICDM with this neighborhood size")
    add_output(p)
    p.set_defaults(func=cmd_hubness)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return args.func(args)
    except (HubridgeError, ValueError, KeyError, OSError) as exc:
        print(f"hubridge {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
