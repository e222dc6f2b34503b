"""Command-line front end.

Subcommands wrap the library one-to-one: compress / decompress (universal
binary compression of whole files), sketch / recover (sparse measurement),
storage-set, eta-curve / eta-star-curve, dom-region, compound, and trials
(seeded empirical harnesses).  Every stochastic command requires --seed and
echoes the full configuration in its output header, so identical invocations
produce byte-identical outputs.

Exit codes: 2 configuration, 3 malformed container, 4 resource limit, 5 I/O.
"""

from __future__ import annotations

import argparse
import struct
import sys

import numpy as np

from . import codec, compound, measures, storage
from ._util import mix64, sample_blocks, wilson_interval
from .errors import FormatError, PolarError, ResourceLimitError
from .sketch import (
    brut_univ_sketching,
    build_sketch_spec,
    load_sketch_spec,
    save_sketch_spec,
)
from .sketch import recover as sketch_recover
from .sketch import sketch as sketch_apply

EXIT_CONFIG = 2
EXIT_FORMAT = 3
EXIT_RESOURCE = 4
EXIT_IO = 5

_PLRF_MAGIC = b"PLRF"
_PLRF_VERSION = 1


def _params_line(args, keys) -> str:
    parts = [f"{k}={getattr(args, k)}" for k in keys if getattr(args, k, None) is not None]
    return "# params: " + " ".join(parts)


def _write_csv(path, params_line, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(params_line + "\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")


def _fmt(x) -> str:
    return f"{x:.12g}"


def _parse_dist(text) -> measures.Dist:
    probs = [float(t) for t in text.split(",")]
    return measures.Dist(len(probs), np.asarray(probs))


# ---------------------------------------------------------------------------
# File container: original bit length + framed compressed blocks
# ---------------------------------------------------------------------------

def _file_to_bits(data: bytes) -> np.ndarray:
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little").astype(np.int64)


def _bits_to_file(bits: np.ndarray) -> bytes:
    return np.packbits(bits.astype(np.uint8), bitorder="little").tobytes()


def _write_plrf(path, bit_count, encoded_blocks):
    with open(path, "wb") as fh:
        fh.write(_PLRF_MAGIC)
        fh.write(struct.pack("<BQI", _PLRF_VERSION, bit_count, len(encoded_blocks)))
        for blob in encoded_blocks:
            fh.write(struct.pack("<I", len(blob)))
            fh.write(blob)


def _read_plrf(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 4 or data[:4] != _PLRF_MAGIC:
        raise FormatError("bad PLRF magic", offset=0)
    head = struct.calcsize("<BQI")
    if len(data) < 4 + head:
        raise FormatError("truncated PLRF header", offset=len(data))
    version, bit_count, nblocks = struct.unpack_from("<BQI", data, 4)
    if version != _PLRF_VERSION:
        raise FormatError(f"unsupported PLRF version {version}", offset=4)
    pos = 4 + head
    blobs = []
    for _ in range(nblocks):
        if len(data) < pos + 4:
            raise FormatError("truncated block frame", offset=pos)
        (length,) = struct.unpack_from("<I", data, pos)
        pos += 4
        if len(data) < pos + length:
            raise FormatError("truncated block payload", offset=pos)
        blobs.append(data[pos : pos + length])
        pos += length
    if pos != len(data):
        raise FormatError("trailing bytes", offset=pos)
    return bit_count, blobs


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_compress(args) -> int:
    with open(args.infile, "rb") as fh:
        data = fh.read()
    bits = _file_to_bits(data)
    n = args.n
    pad = (-len(bits)) % n
    if pad:
        bits = np.concatenate([bits, np.zeros(pad, dtype=np.int64)])
    sset = codec.design_storage_set(args.rate, n, args.delta, args.samples, args.guard, args.seed)
    blobs = []
    rates = []
    for start in range(0, len(bits), n):
        block = codec.universal_compress(bits[start : start + n], args.rate, args.delta, storage=sset)
        rates.append(block.rate)
        blobs.append(codec.encode_block(block))
    _write_plrf(args.out, len(data) * 8, blobs)
    print(_params_line(args, ("rate", "n", "delta", "samples", "guard", "seed")))
    print(f"blocks={len(blobs)} rate={_fmt(float(np.mean(rates)) if rates else 0.0)}")
    return 0


def cmd_decompress(args) -> int:
    bit_count, blobs = _read_plrf(args.infile)
    pieces = []
    for blob in blobs:
        block = codec.decode_block(blob)
        pieces.append(codec.universal_decompress(block, seed=args.seed))
    bits = np.concatenate(pieces) if pieces else np.zeros(0, dtype=np.int64)
    if bit_count > bits.size:
        raise FormatError("container shorter than its declared bit length")
    with open(args.out, "wb") as fh:
        fh.write(_bits_to_file(bits[:bit_count]))
    print(_params_line(args, ("seed",)))
    print(f"blocks={len(blobs)} bits={bit_count}")
    return 0


def _read_symbols(path, a) -> np.ndarray:
    with open(path, "rb") as fh:
        raw = np.frombuffer(fh.read(), dtype=np.uint8)
    if raw.size and raw.max() >= a:
        raise ValueError(f"input symbol {raw.max()} out of range for a={a}")
    return raw.astype(np.int64)


def cmd_sketch(args) -> int:
    spec = build_sketch_spec(
        args.a, args.epsilon, args.n, args.delta, method=args.method,
        samples=args.samples, guard=args.guard, seed=args.seed, hull_grid=args.grid,
    )
    symbols = _read_symbols(args.infile, args.a)
    if symbols.size % args.n:
        raise ValueError(f"input length {symbols.size} is not a multiple of n={args.n}")
    x = symbols.reshape(-1, args.n)
    y = sketch_apply(spec, x)
    with open(args.out, "wb") as fh:
        fh.write(y.astype(np.uint8).tobytes())
    if args.spec_out:
        save_sketch_spec(spec, args.spec_out)
    print(_params_line(args, ("a", "epsilon", "n", "delta", "method", "samples", "guard", "seed")))
    print(f"m={spec.m} rate={_fmt(spec.measurement_rate)}")
    return 0


def cmd_recover(args) -> int:
    spec = load_sketch_spec(args.spec)
    y = _read_symbols(args.infile, spec.a)
    if y.size % spec.m:
        raise ValueError(f"measurement length {y.size} is not a multiple of m={spec.m}")
    x_hat = sketch_recover(spec, y.reshape(-1, spec.m))
    with open(args.out, "wb") as fh:
        fh.write(x_hat.astype(np.uint8).tobytes())
    print(f"blocks={y.size // spec.m} n={spec.n}")
    return 0


def _dist_from_args(args) -> measures.Dist:
    if args.dist is not None:
        return _parse_dist(args.dist)
    if args.rate is not None:
        return measures.binary_dist_with_entropy(args.rate, 0)
    if args.epsilon is not None:
        return measures.make_spike(args.a, 0, args.epsilon)
    raise ValueError("specify the source with --dist, --rate or --epsilon")


def cmd_storage_set(args) -> int:
    p = _dist_from_args(args)
    if args.construction == "exact":
        sset = storage.storage_set_exact(p, args.n, args.delta)
    elif args.construction == "bec":
        sset = storage.storage_set_bec(p, args.n, args.delta)
    else:
        if args.seed is None:
            raise ValueError("--seed is required for the Monte-Carlo construction")
        sset = storage.storage_set_mc(p, args.n, args.delta, args.samples, args.seed, args.guard)
    if args.out:
        storage.save_pset(sset, args.out)
    if args.csv:
        _write_csv(
            args.csv,
            _params_line(args, ("a", "n", "delta", "construction", "samples", "guard", "seed")),
            "index,entropy,stderr",
            list(storage.entropy_csv_lines(sset))[1:],
        )
    print(_params_line(args, ("a", "n", "delta", "construction", "samples", "guard", "seed")))
    print(f"size={sset.size} rate={_fmt(sset.rate)}")
    return 0


def _eps_grid(a, count):
    hi = (a - 1) / a
    return [hi * (i + 1) / (count + 1) for i in range(count)]


def cmd_eta_curve(args) -> int:
    rows = []
    for eps in _eps_grid(args.a, args.grid):
        rows.append(f"{_fmt(eps)},{_fmt(measures.eta(args.a, eps))}")
    _write_csv(args.out, _params_line(args, ("a", "grid")), "epsilon,eta", rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_eta_star_curve(args) -> int:
    rows = []
    for eps in _eps_grid(args.a, args.grid):
        e = measures.eta(args.a, eps)
        res = brut_univ_sketching(
            args.a, eps, args.n, args.delta, variant=args.variant,
            samples=args.samples, guard=args.guard, seed=args.seed,
        )
        rows.append(f"{_fmt(eps)},{_fmt(e)},{_fmt(res.eta_star)}")
    _write_csv(
        args.out,
        _params_line(args, ("a", "n", "delta", "variant", "grid", "samples", "guard", "seed")),
        "epsilon,eta,eta_star",
        rows,
    )
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_dom_region(args) -> int:
    anchor = _parse_dist(args.dist)
    records = measures.dom_region_grid(anchor, args.mode, args.grid)
    rows = [
        f"{_fmt(d.probs[0])},{_fmt(d.probs[1])},{int(flag)}" for d, flag in records
    ]
    _write_csv(args.out, _params_line(args, ("dist", "mode", "grid")), "x,y,flag", rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_compound(args) -> int:
    p = _parse_dist(args.dist) if args.dist else None
    q = _parse_dist(args.dist2) if args.dist2 else None
    report = compound.counterexample_report(p, q)
    for line in report.lines():
        print(line)
    if args.out:
        tp = compound.synthesized_entropies(report.p, args.level)
        tq = compound.synthesized_entropies(report.q, args.level)
        rows = [
            f"{i},{_fmt(tp.values[i])},{_fmt(tq.values[i])},{_fmt(max(tp.values[i], tq.values[i]))}"
            for i in range(2 ** args.level)
        ]
        _write_csv(
            args.out,
            _params_line(args, ("dist", "dist2", "level")),
            "sigma_index,H_p_sigma,H_q_sigma,max",
            rows,
        )
    return 0


def _trials_compress(args):
    theta = args.epsilon
    source = measures.Dist(2, np.array([1.0 - theta, theta]))
    sset = codec.design_storage_set(args.rate, args.n, args.delta, args.samples, args.guard, args.seed)
    x = sample_blocks(source.probs, args.n, args.trials, mix64(args.seed, 1))
    successes = 0
    sides = []
    for t in range(args.trials):
        block = codec.universal_compress(x[t], args.rate, args.delta, storage=sset)
        x_hat, model = codec.universal_decompress(block, seed=mix64(args.seed, 2 + t), return_model=True)
        ok = bool((x_hat == x[t]).all())
        successes += ok
        if ok:
            sides.append(model)
    center, radius = wilson_interval(successes, args.trials)
    expected_side = 0 if theta <= 0.5 else 1
    good_sides = sum(1 for s in sides if s == expected_side)
    print(f"successes={successes}/{args.trials} ci=[{_fmt(center - radius)},{_fmt(center + radius)}]")
    print(f"correct_side={good_sides}/{len(sides)} rate={_fmt((sset.size + 1) / args.n)}")


def _trials_sketch(args):
    spec = build_sketch_spec(
        args.a, args.epsilon, args.n, args.delta, method=args.method,
        samples=args.samples, guard=args.guard, seed=args.seed,
    )
    probs = np.full(args.a, args.epsilon / (args.a - 1))
    probs[0] = 1.0 - args.epsilon
    x = sample_blocks(probs, args.n, args.trials, mix64(args.seed, 1))
    y = sketch_apply(spec, x)
    x_hat = sketch_recover(spec, y)
    successes = int((x_hat == x).all(axis=1).sum())
    center, radius = wilson_interval(successes, args.trials)
    print(f"successes={successes}/{args.trials} ci=[{_fmt(center - radius)},{_fmt(center + radius)}]")
    print(f"m={spec.m} rate={_fmt(spec.measurement_rate)}")


def _trials_mismatch(args):
    p1 = _parse_dist(args.dist)
    p2 = _parse_dist(args.dist2)
    mism = codec.estimate_mismatch_error(p1, p2, args.n, args.delta, args.trials, args.seed,
                                         samples=args.samples, guard=args.guard)
    base = codec.estimate_mismatch_error(p2, p2, args.n, args.delta, args.trials, args.seed,
                                         samples=args.samples, guard=args.guard)
    print(f"P_e(p1|p2)={_fmt(mism.error_rate)} +-{_fmt(mism.ci_radius)}")
    print(f"P_e(p2|p2)={_fmt(base.error_rate)} +-{_fmt(base.ci_radius)}")
    ok = mism.error_rate <= base.error_rate + 2 * (mism.ci_radius + base.ci_radius)
    print(f"within_two_radii={'yes' if ok else 'no'}")


def cmd_trials(args) -> int:
    print(_params_line(args, ("kind", "a", "n", "rate", "epsilon", "delta", "method",
                              "trials", "samples", "guard", "seed", "dist", "dist2")))
    if args.kind == "compress":
        _trials_compress(args)
    elif args.kind == "sketch":
        _trials_sketch(args)
    else:
        _trials_mismatch(args)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polarsketch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_mc(p):
        p.add_argument("--samples", type=int, default=2000)
        p.add_argument("--guard", type=float, default=2.0)

    p = sub.add_parser("compress", help="losslessly compress a file of unknown bias")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--n", type=int, default=4096)
    p.add_argument("--delta", type=float, default=0.01)
    add_mc(p)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decompress", help="reconstruct a compressed file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_decompress)

    p = sub.add_parser("sketch", help="measure sparse symbol blocks")
    p.add_argument("--a", type=int, default=2)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--n", type=int, default=4096)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--method", choices=("known", "pcp", "brutA", "brutB"), default="pcp")
    p.add_argument("--grid", type=int, default=4)
    add_mc(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--spec-out", dest="spec_out")
    p.set_defaults(func=cmd_sketch)

    p = sub.add_parser("recover", help="reconstruct sketched blocks")
    p.add_argument("--spec", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("storage-set", help="compute a storage set")
    p.add_argument("--a", type=int, default=2)
    p.add_argument("--dist")
    p.add_argument("--rate", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--construction", choices=("exact", "mc", "bec"), default="mc")
    add_mc(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_storage_set)

    p = sub.add_parser("eta-curve", help="worst-case spike mass vs sparsity")
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--grid", type=int, default=50)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eta_curve)

    p = sub.add_parser("eta-star-curve", help="empirical containment mass vs sparsity")
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--variant", choices=("A", "B"), default="B")
    p.add_argument("--grid", type=int, default=8)
    add_mc(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eta_star_curve)

    p = sub.add_parser("dom-region", help="domination-region grid over the ternary simplex")
    p.add_argument("--dist", required=True)
    p.add_argument("--mode", choices=measures.GRID_MODES, required=True)
    p.add_argument("--grid", type=int, default=30)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dom_region)

    p = sub.add_parser("compound", help="compound-source bound report")
    p.add_argument("--dist")
    p.add_argument("--dist2")
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compound)

    p = sub.add_parser("trials", help="seeded empirical harnesses")
    p.add_argument("--kind", choices=("compress", "sketch", "mismatch"), required=True)
    p.add_argument("--a", type=int, default=2)
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--rate", type=float, default=0.5)
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--method", choices=("known", "pcp", "brutA", "brutB"), default="pcp")
    p.add_argument("--trials", type=int, default=100)
    add_mc(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--dist")
    p.add_argument("--dist2")
    p.set_defaults(func=cmd_trials)

    return parser


_METHOD_ALIASES = {"known": "known_dist", "pcp": "pcp", "brutA": "brut_A", "brutB": "brut_B"}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "method", None) in _METHOD_ALIASES:
        args.method = _METHOD_ALIASES[args.method]
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, PolarError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
