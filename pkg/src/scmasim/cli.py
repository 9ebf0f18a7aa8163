"""Command-line front end: codebook, decode, sweep, primer subcommands."""

from __future__ import annotations

import argparse
import sys as _sys

import numpy as np

from .codebook import build_codebook_set, export_codebooks, import_codebooks
from .decoder import DecoderConfig, decode_frames, system_index
from .errors import ConfigInvalid, ScmaError
from .harness import (
    SimConfig,
    emit_results,
    frame_rng,
    load_config_file,
    oma_baseline,
    parse_ebn0_grid,
    run_sweep,
)
from .repetition import decision_table, hard_decode, soft_llr
from .signature import load_signature
from .transceiver import complex_randn, draw_channel, ebn0_db_to_n0, encode


def _add_system_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--signature", default="builtin46", help="signature matrix file or builtin name")
    p.add_argument("--m", type=int, default=4, help="codewords per user (power of two)")


def _add_decode_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--channel", default="rayleigh", choices=("awgn", "rayleigh"))
    p.add_argument("--iters", type=int, default=10, help="message-passing iterations")
    p.add_argument("--epsilon", type=float, default=1e-6, help="early-stop threshold (0 disables)")
    p.add_argument("--seed", type=int, default=0)


def build_parser(sweep_defaults: dict | None = None) -> argparse.ArgumentParser:
    """CLI parser; sweep_defaults (from a config file) override flag defaults."""
    ap = argparse.ArgumentParser(prog="scmasim", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("codebook", help="generate, audit, export codebooks")
    _add_system_flags(p)
    p.add_argument("--no-normalize", action="store_true", help="keep raw construction energies")
    p.add_argument("--out", help="write codebooks to this file")
    p.add_argument("--from", dest="from_file", help="audit an exported codebook file instead")
    p.set_defaults(func=cmd_codebook)

    p = sub.add_parser("decode", help="decode one random frame and print per-user results")
    _add_system_flags(p)
    _add_decode_flags(p)
    p.add_argument("--decoder", default="spa", choices=("spa", "maxlog", "map-oracle"))
    p.add_argument("--ebn0", default="10", help="Eb/N0 in dB for this frame")
    p.add_argument("--frame", type=int, default=0, help="frame index within the seed's stream")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("sweep", help="Monte-Carlo BER/FER sweep over an Eb/N0 grid")
    _add_system_flags(p)
    _add_decode_flags(p)
    p.add_argument("--decoder", default="spa",
                   help="comma list of spa, maxlog, map-oracle, oma-l<N>")
    p.add_argument("--ebn0", default="0:2:16", help="grid as start:step:stop, list, or value")
    p.add_argument("--min-errors", type=int, default=200, help="bit errors to stop a point")
    p.add_argument("--max-frames", type=int, default=1_000_000, help="frame budget per point")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.add_argument("--format", default="csv", choices=("csv", "json"))
    p.add_argument("--timing", default="wall", choices=("wall", "none"),
                   help="none zeroes elapsed_s for byte-stable output")
    p.add_argument("--config", help="key=value file of defaults; flags override")
    if sweep_defaults:
        p.set_defaults(**sweep_defaults, config_resolved=True)
    else:
        p.set_defaults(config_resolved=False)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("primer", help="repetition-code walkthrough: table and one decode")
    p.add_argument("--samples", default="0.02,-2,-0.4", help="three received samples")
    p.add_argument("--sigma2", type=float, default=1.0, help="noise variance per sample")
    p.set_defaults(func=cmd_primer)
    return ap


def cmd_codebook(args) -> int:
    if args.from_file:
        cbs = import_codebooks(args.from_file)
        print(f"imported {args.from_file}")
    else:
        F = load_signature(args.signature)
        cbs = build_codebook_set(F, args.m, normalize=not args.no_normalize)
    p = cbs.params
    energies = np.mean(np.abs(cbs.codebooks) ** 2, axis=(1, 2)) * p.K
    supports_ok = bool(((np.abs(cbs.codebooks).sum(axis=2) > 0).T == cbs.signature).all())
    print(f"resources K={p.K} users J={p.J} M={cbs.M} dv={p.dv} df={p.df} "
          f"overloading={p.overloading:.3g}")
    print(f"normalized={cbs.normalized} avg codeword energy per user="
          + " ".join(f"{e:.6g}" for e in energies))
    print(f"codeword supports match signature: {supports_ok}")
    ud = cbs.unique_decodable
    print(f"all codeword superpositions distinct: {'not audited (too many)' if ud is None else ud}")
    for j in range(p.J):
        rows = ",".join(str(k + 1) for k in np.nonzero(cbs.signature[:, j])[0])
        print(f"user {j + 1}: resources {{{rows}}}")
    if args.out:
        export_codebooks(cbs, args.out)
        print(f"wrote {args.out}")
    return 0


def cmd_decode(args) -> int:
    F = load_signature(args.signature)
    cbs = build_codebook_set(F, args.m)
    sys_idx = system_index(cbs)
    b = sys_idx.n_bits
    rng = frame_rng(args.seed, args.frame)
    bits = rng.integers(0, 2, size=(sys_idx.J, b))
    H = draw_channel(args.channel, sys_idx.K, sys_idx.J, rng)
    z = complex_randn(sys_idx.K, rng)
    ebn0 = float(args.ebn0)
    n0 = ebn0_db_to_n0(ebn0, b)
    frame = encode(bits, cbs)
    y = np.einsum("kj,jk->k", H, frame.codewords) + np.sqrt(n0) * z
    cfg = DecoderConfig(
        n_iter=args.iters,
        epsilon=args.epsilon,
        domain="log" if args.decoder == "maxlog" else "probability",
    )
    res = decode_frames(y[None], H[None], cbs, n0, cfg, args.decoder)
    print(f"decoder={args.decoder} channel={args.channel} Eb/N0={ebn0:g} dB "
          f"N0={n0:.6g} seed={args.seed} frame={args.frame} "
          f"iterations={int(res.iterations[0])}")
    wrong_users = 0
    for j in range(sys_idx.J):
        tx = "".join(str(v) for v in bits[j])
        rx = "".join(str(v) for v in res.hard_bits[0, j])
        llrs = " ".join(f"{v:+.3f}" for v in res.bit_llrs[0, j])
        ok = "ok" if tx == rx else "ERR"
        wrong_users += tx != rx
        print(f"user {j + 1}: sent {tx} (index {int(frame.indices[j])}) "
              f"decoded {rx} (index {int(res.hard_indices[0, j])}) llr [{llrs}] {ok}")
    print(f"users in error: {wrong_users}/{sys_idx.J}")
    return 0


def cmd_sweep(args) -> int:
    if args.config and not args.config_resolved:
        file_vals = load_config_file(args.config)
        known = {
            "signature": str, "m": int, "channel": str, "decoder": str, "ebn0": str,
            "iters": int, "epsilon": float, "min_errors": int, "max_frames": int,
            "seed": int, "workers": int, "out": str, "format": str, "timing": str,
        }
        defaults = {}
        for key, val in file_vals.items():
            if key not in known:
                raise ConfigInvalid(f"unknown config key {key!r}")
            defaults[key] = known[key](val)
        args = build_parser(defaults).parse_args(_orig_argv())
        return args.func(args)

    grid = parse_ebn0_grid(args.ebn0)
    decoders = [d.strip() for d in args.decoder.split(",") if d.strip()]
    if not decoders:
        raise ConfigInvalid("no decoder given")
    records = []
    for dec in decoders:
        if dec.startswith("oma-l"):
            try:
                L = int(dec[len("oma-l"):])
            except ValueError:
                raise ConfigInvalid(f"bad baseline name {dec!r}, want oma-l<N>") from None
            records += oma_baseline(
                L, args.m, grid, seed=args.seed, min_bit_errors=args.min_errors,
                max_frames=args.max_frames, timing=args.timing,
            )
        else:
            cfg = SimConfig(
                signature=args.signature, m=args.m, channel=args.channel, decoder=dec,
                ebn0_db=grid, min_bit_errors=args.min_errors, max_frames=args.max_frames,
                n_iter=args.iters, epsilon=args.epsilon, seed=args.seed,
                workers=args.workers, timing=args.timing,
            )
            records += run_sweep(cfg)
    text = emit_results(records, args.format, args.out)
    if not args.out:
        print(text, end="")
    else:
        print(f"wrote {len(records)} records to {args.out}")
    return 0


def cmd_primer(args) -> int:
    print("repetition code, length 3, BPSK 0 -> +1, 1 -> -1")
    print("sliced -> majority codeword -> decoded bit")
    for sliced, cw, bit in decision_table():
        print(f"  {''.join(map(str, sliced))} -> {''.join(map(str, cw))} -> {bit}")
    samples = [float(t) for t in args.samples.split(",")]
    hard = hard_decode(samples)
    llr = soft_llr(samples, args.sigma2)
    print(f"received samples: {', '.join(f'{v:g}' for v in samples)} (sigma^2 = {args.sigma2:g})")
    print(f"hard path: sliced {''.join(map(str, hard.sliced))} -> codeword "
          f"{''.join(map(str, hard.codeword))} -> bit {hard.bit}")
    print(f"soft path: LLR = (y1+y2+y3)/(2 sigma^2) = {llr:.4g} -> bit {1 if llr < 0 else 0}")
    return 0


_ARGV: list[str] | None = None


def _orig_argv() -> list[str]:
    return _ARGV if _ARGV is not None else _sys.argv[1:]


def main(argv=None) -> int:
    global _ARGV
    _ARGV = list(argv) if argv is not None else None
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScmaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
