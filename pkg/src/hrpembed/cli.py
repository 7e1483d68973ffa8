"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import storage
from .binvec import BinaryEmbedding
from .errors import HrpError
from .evaluation import Dataset, TrainConfig, binary_features, cross_validate, holdout_evaluate, sts_eval
from .projection import CompressionConfig, Method, init_projection, quantize_matrix
from .retrieval import BinaryStore, knn
from .similarity import memory_consumption_rate
from .synthetic import gaussian_blobs, gaussian_corpus, sts_pairs

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
SWEEP_BITS = (256, 384, 512, 768, 1024, 1536, 2048)
MAX_BITS = 1 << 16


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _bits_list(text):
    try:
        bits = tuple(int(b) for b in text.split(",") if b.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid bit list {text!r}") from None
    if not bits or any(not 1 <= b <= MAX_BITS for b in bits):
        raise argparse.ArgumentTypeError(f"bit widths must lie in [1, {MAX_BITS}]")
    return bits


def _bits(text):
    bits = _bits_list(text)
    if len(bits) != 1:
        raise argparse.ArgumentTypeError(f"expected one bit width, got {text!r}")
    return bits[0]


def _seed(text):
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _emit(args, payload, lines):
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        for line in lines:
            print(line)


def _tsv(*fields):
    return "\t".join(str(f) for f in fields)


def _read_matrix(path):
    X = storage.read_embeddings(path)
    if X.shape[0] == 0:
        raise DataError(f"{path}: no embeddings")
    return X


def _read_column(path, kind):
    values = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            values.append(kind(line))
        except ValueError:
            raise DataError(f"{path}:{lineno}: cannot parse {line!r}") from None
    return np.asarray(values)


# -- subcommands -------------------------------------------------------------

def cmd_gen(args):
    out = Path(args.out)
    written = {}
    if args.kind == "gaussian":
        written["vectors"] = storage.write_fvecs(out, gaussian_corpus(args.dim, args.count, args.seed))
        paths = [out]
    elif args.kind == "sts":
        A, B, gold = sts_pairs(args.dim, args.count, args.seed)
        paths = [out.with_name(out.name + s) for s in (".a.fvecs", ".b.fvecs", ".gold.txt")]
        storage.write_fvecs(paths[0], A)
        storage.write_fvecs(paths[1], B)
        paths[2].write_text("".join(f"{g!r}\n" for g in gold.tolist()))
    else:
        X, y = gaussian_blobs(args.dim, args.count, args.classes, args.seed, separation=args.separation)
        labels = out.with_name(out.stem + ".labels.txt")
        storage.write_fvecs(out, X)
        labels.write_text("".join(f"{v}\n" for v in y.tolist()))
        paths = [out, labels]
    _emit(args, {"kind": args.kind, "files": [str(p) for p in paths], "count": args.count, "dim": args.dim},
          [_tsv("wrote", p) for p in paths])


def cmd_compress(args):
    X = _read_matrix(args.input)
    d_s = X.shape[1]
    method = Method(args.method)
    if method is Method.HRP:
        if args.bits is None:
            raise UsageError("--bits is required for --method hrp")
        cfg = CompressionConfig(method, d_s, args.bits, args.seed)
    else:
        if args.bits is not None and args.bits != d_s:
            raise UsageError(f"--method sigmoid keeps the source dimension ({d_s}); drop --bits")
        cfg = CompressionConfig(method, d_s, d_s, args.seed)
    store = BinaryStore(quantize_matrix(X, cfg), cfg)
    size = storage.write_hrpb(args.out, store)
    report = memory_consumption_rate(d_s, cfg.d_t, method)
    payload = {"count": store.count, "d_s": d_s, "d_t": cfg.d_t, "seed": cfg.seed, "bytes": size,
               "out": str(args.out), **report.as_dict()}
    _emit(args, payload, [
        f"method={method.value} count={store.count} d_s={d_s} d_t={cfg.d_t} seed={cfg.seed} "
        f"bytes={size} {report.describe()}"
    ])


def cmd_stats(args):
    store = storage.read_hrpb(args.input)
    cfg = store.config
    report = memory_consumption_rate(cfg.d_s, cfg.d_t, cfg.method)
    payload = {"magic": "HRPB", "version": storage.HRPB_VERSION, "method": cfg.method.value, "d_s": cfg.d_s,
               "d_t": cfg.d_t, "seed": cfg.seed, "count": store.count, "header_bytes": storage.HEADER_SIZE,
               "payload_bytes": store.codes.nbytes, **report.as_dict()}
    lines = [f"{k}={payload[k]}" for k in ("magic", "version", "method", "d_s", "d_t", "seed", "count",
                                          "header_bytes", "payload_bytes")]
    lines.append(report.describe())
    _emit(args, payload, lines)


def cmd_knn(args):
    store = storage.read_hrpb(args.store)
    Q = _read_matrix(args.query)
    cfg = store.config
    if Q.shape[1] != cfg.d_s:
        raise DataError(f"queries have dimension {Q.shape[1]}, store was built from {cfg.d_s}-dim vectors")
    codes = quantize_matrix(Q, cfg)
    results = []
    lines = [_tsv("query", "rank", "id", "distance")]
    for qi, row in enumerate(codes):
        hits = knn(store, BinaryEmbedding(row.tobytes(), cfg.d_t), args.k)
        results.append([{"id": i, "distance": d} for i, d in hits])
        lines.extend(_tsv(qi, r, i, d) for r, (i, d) in enumerate(hits, 1))
    _emit(args, {"k": args.k, "results": results}, lines)


def cmd_eval_sts(args):
    A = _read_matrix(args.a)
    B = _read_matrix(args.b)
    gold = _read_column(args.gold, float)
    if A.shape != B.shape:
        raise DataError(f"pair files differ in shape: {A.shape} vs {B.shape}")
    if gold.size != A.shape[0]:
        raise DataError(f"{gold.size} gold scores for {A.shape[0]} pairs")
    seeds = [(args.seed + i) % 2**64 for i in range(args.seeds)]
    rows = []
    for d_t in args.bits:
        rhos = []
        rho_f = None
        for s in seeds:
            rho_f, rho_b = sts_eval(A, B, gold, CompressionConfig(Method.HRP, A.shape[1], d_t, s))
            rhos.append(rho_b)
        rows.append({"bits": d_t, "rho_float": rho_f, "rho_binary_mean": float(np.mean(rhos)),
                     "rho_binary_min": min(rhos), "rho_binary_max": max(rhos), "seeds": len(rhos),
                     "rate": memory_consumption_rate(A.shape[1], d_t).rate_float})
    lines = [_tsv("bits", "rate", "rho_float", "rho_binary_mean", "rho_binary_min", "rho_binary_max", "seeds")]
    lines += [_tsv(r["bits"], f"{r['rate']:.6f}", f"{r['rho_float']:.4f}", f"{r['rho_binary_mean']:.4f}",
                   f"{r['rho_binary_min']:.4f}", f"{r['rho_binary_max']:.4f}", r["seeds"]) for r in rows]
    _emit(args, {"rows": rows}, lines)


def _train_config(args):
    overrides = {"seed": args.seed}
    if args.epochs is not None:
        overrides["epochs"] = args.epochs
    if args.learning_rate is not None:
        overrides["learning_rate"] = args.learning_rate
    factory = TrainConfig.senteval if args.protocol == "senteval" else TrainConfig.seeg
    return factory(**overrides)


def _holdout_split(n, seed):
    perm = np.random.default_rng(seed).permutation(n)
    n_test = max(1, n // 5)
    return perm[n_test:], perm[:n_test]


def cmd_eval_clf(args):
    X = _read_matrix(args.features)
    y = _read_column(args.labels, int)
    if y.size != X.shape[0]:
        raise DataError(f"{y.size} labels for {X.shape[0]} feature rows")
    cfg = _train_config(args)
    proj = CompressionConfig(Method.HRP, X.shape[1], args.bits, args.seed)
    W = init_projection(proj.seed, proj.d_s, proj.d_t)

    def features(M, kind):
        return M if kind == "float" else binary_features(M, proj, W)

    rows = []
    if args.protocol == "senteval":
        for kind in ("float", "binary"):
            res = cross_validate(Dataset(features(X, kind), y), cfg)
            rows.append({"features": kind, "bits": 32 * X.shape[1] if kind == "float" else args.bits,
                         "mean": res.mean, "folds": list(res.fold_accuracies)})
    else:
        if (args.test_features is None) != (args.test_labels is None):
            raise UsageError("--test-features and --test-labels go together")
        if args.test_features is not None:
            Xt = _read_matrix(args.test_features)
            yt = _read_column(args.test_labels, int)
            if yt.size != Xt.shape[0]:
                raise DataError(f"{yt.size} test labels for {Xt.shape[0]} test rows")
            if Xt.shape[1] != X.shape[1]:
                raise DataError("train and test features differ in dimension")
            Xtr, ytr = X, y
        else:
            tr, te = _holdout_split(X.shape[0], args.seed)
            Xtr, ytr, Xt, yt = X[tr], y[tr], X[te], y[te]
        C = int(max(ytr.max(), yt.max())) + 1
        for kind in ("float", "binary"):
            acc = holdout_evaluate(Dataset(features(Xtr, kind), ytr, C), features(Xt, kind), yt, cfg)
            rows.append({"features": kind, "bits": 32 * X.shape[1] if kind == "float" else args.bits,
                         "mean": acc, "folds": [acc]})
    echo = f"protocol={args.protocol} {cfg.describe(args.protocol)}"
    lines = [echo, _tsv("features", "bits", "mean_accuracy", "fold_accuracies")]
    lines += [_tsv(r["features"], r["bits"], f"{r['mean']:.4f}", ",".join(f"{a:.4f}" for a in r["folds"]))
              for r in rows]
    if rows[0]["mean"] > 0:
        lines.append(_tsv("retention", f"{rows[1]['mean'] / rows[0]['mean']:.4f}"))
    _emit(args, {"config": echo, "rows": rows}, lines)


# -- wiring ------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit one JSON document instead of text")

    p = _Parser(prog="hrpembed", description="Binary embedding compression via hashed random projections.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="write a synthetic corpus")
    g.add_argument("--dim", type=_positive, required=True)
    g.add_argument("--count", type=_positive, required=True)
    g.add_argument("--seed", type=_seed, required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--kind", choices=("gaussian", "sts", "blobs"), default="gaussian",
                   help="sts writes OUT.a.fvecs, OUT.b.fvecs and OUT.gold.txt; "
                        "blobs writes OUT and OUT-stem.labels.txt")
    g.add_argument("--classes", type=_positive, default=4)
    g.add_argument("--separation", type=float, default=10.0)
    g.set_defaults(subparser=g, func=cmd_gen)

    c = sub.add_parser("compress", parents=[common], help="quantize float embeddings into an HRPB file")
    c.add_argument("--in", dest="input", required=True)
    c.add_argument("--out", required=True)
    c.add_argument("--bits", type=_bits)
    c.add_argument("--seed", type=_seed, default=0)
    c.add_argument("--method", choices=[m.value for m in Method], default="hrp")
    c.set_defaults(subparser=c, func=cmd_compress)

    s = sub.add_parser("stats", parents=[common], help="describe an HRPB file")
    s.add_argument("--in", dest="input", required=True)
    s.set_defaults(subparser=s, func=cmd_stats)

    k = sub.add_parser("knn", parents=[common], help="Hamming nearest neighbours of float queries")
    k.add_argument("--store", required=True)
    k.add_argument("--query", required=True)
    k.add_argument("--k", type=_positive, default=10)
    k.set_defaults(subparser=k, func=cmd_knn)

    e = sub.add_parser("eval-sts", parents=[common], help="Spearman correlation for float vs binary pairs")
    e.add_argument("--a", required=True)
    e.add_argument("--b", required=True)
    e.add_argument("--gold", required=True)
    e.add_argument("--bits", type=_bits_list, default=SWEEP_BITS)
    e.add_argument("--seeds", type=_positive, default=1)
    e.add_argument("--seed", type=_seed, default=0, help="first projection seed")
    e.set_defaults(subparser=e, func=cmd_eval_sts)

    f = sub.add_parser("eval-clf", parents=[common], help="linear-probe accuracy for float vs binary features")
    f.add_argument("--features", required=True)
    f.add_argument("--labels", required=True)
    f.add_argument("--bits", type=_bits, required=True)
    f.add_argument("--protocol", choices=("senteval", "seeg"), default="senteval")
    f.add_argument("--seed", type=_seed, default=0)
    f.add_argument("--epochs", type=_positive)
    f.add_argument("--learning-rate", type=float)
    f.add_argument("--test-features")
    f.add_argument("--test-labels")
    f.set_defaults(subparser=f, func=cmd_eval_clf)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except BrokenPipeError:
        # downstream reader closed early (e.g. piped into head)
        sys.stderr.close()
        return EXIT_OK
    except UsageError as e:
        args.subparser.print_usage(sys.stderr)
        print(f"hrpembed {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, HrpError, OSError, ValueError) as e:
        print(f"hrpembed {args.command}: {e}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
