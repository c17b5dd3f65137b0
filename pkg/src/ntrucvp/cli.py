"""Command line entry point: ntrucvp {keygen,encrypt,decrypt,attack,experiment,check-params,reduce-basis}.

Exit codes: 0 ok, 2 usage, 3 invalid parameters, 4 corrupt basis cache.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import REFERENCE_TUPLES, check_params
from .attack import (
    AStrategy,
    AttackConfig,
    EVector,
    attack_with_oracle,
    compute_c_ground_truth,
    run_attack,
    verify_candidate,
)
from .harness import (
    DESK_SCALE,
    PRESETS,
    BasisCache,
    CacheCorruptError,
    Preset,
    derive_a,
    run_experiment,
    run_sweep,
    scaled_preset,
    spec_from_preset,
    threshold,
)
from .ntru import (
    NtruParams,
    ParameterError,
    decrypt,
    encrypt,
    format_poly,
    keygen,
    load_ciphertext,
    load_keypair,
    load_public_key,
    parse_poly,
    sample_message,
    sample_nonce,
    save_ciphertext,
    save_keypair,
    save_public_key,
)
from .ring import RingError

EXIT_OK, EXIT_USAGE, EXIT_PARAMS, EXIT_CACHE = 0, 2, 3, 4
DEFAULT_CACHE = ".ntrucvp-cache"


class UsageError(Exception):
    pass


def _emit(args, payload: dict, text: str) -> None:
    print(json.dumps(payload, sort_keys=True, indent=1) if args.json else text)


def _params(args) -> NtruParams:
    return NtruParams(n=args.N, q=args.q, d=args.d, p=args.p)


def _r_range(spec: str) -> list[int]:
    """'0:12' or '0:12:2' (inclusive) or '0,3,5'."""
    if ":" in spec:
        parts = [int(x) for x in spec.split(":")]
        lo, hi, step = (parts + [1])[:3]
        return list(range(lo, hi + 1, step))
    return [int(x) for x in spec.split(",")]


# ----------------------------------------------------------------- commands

def cmd_keygen(args) -> int:
    params = _params(args)
    kp = keygen(params, np.random.default_rng(args.seed))
    save_keypair(args.out, kp, params)
    if args.pub:
        save_public_key(args.pub, kp.h, params)
    _emit(args, {"N": params.n, "q": params.q, "d": params.d, "h": list(kp.h.coeffs)},
          f"wrote {args.out}" + (f" and {args.pub}" if args.pub else ""))
    return EXIT_OK


def cmd_encrypt(args) -> int:
    h, q = load_public_key(args.pub)
    params = NtruParams(n=h.n, q=q, d=args.d, p=args.p)
    rng = np.random.default_rng(args.seed)
    m = parse_poly(Path(args.message).read_text().strip())[0] if args.message else sample_message(params, rng)
    ct = encrypt(h, m, sample_nonce(params, rng), params)
    save_ciphertext(args.out, ct, q)
    if args.message_out:
        Path(args.message_out).write_text(format_poly(m, params.p) + "\n")
    _emit(args, {"e": list(ct.e.coeffs)}, f"wrote {args.out}")
    return EXIT_OK


def cmd_decrypt(args) -> int:
    kp, p, q = load_keypair(args.key)
    ct, _ = load_ciphertext(args.ct)
    params = NtruParams(n=kp.h.n, q=q, d=args.d, p=p)
    m = decrypt(ct, kp, params)
    _emit(args, {"m": list(m.coeffs)}, " ".join(map(str, m.coeffs)))
    return EXIT_OK


def cmd_attack(args) -> int:
    cfg = AttackConfig(y=args.y, R=args.R, a_strategy=args.strategy, max_oracle_calls=args.max_calls, mode=args.mode)
    if args.ct:
        if not (args.pub and args.E):
            raise UsageError("--ct needs --pub and --E")
        # one CVP call on a given ciphertext and oracle output E
        h, q = load_public_key(args.pub)
        ct, _ = load_ciphertext(args.ct)
        params = NtruParams(n=h.n, q=q, d=args.d, p=args.p)
        E = EVector(tuple(int(t) for t in Path(args.E).read_text().split()))
        a = derive_a(cfg.a_strategy, h.n, q, cfg.y, args.seed)
        m = run_attack(ct, cfg, a, E, q)
        v = verify_candidate(m, ct, h, params)
        _emit(args, {"m": list(m.coeffs), "verdict": v.verdict.value},
              f"{v.verdict.value}: " + " ".join(map(str, m.coeffs)))
        return EXIT_OK
    # simulated instance: fresh keys, message and nonce, oracle built from the true c
    if args.N is None or args.q is None:
        raise UsageError("a simulated attack needs --N and --q")
    params = _params(args)
    rng = np.random.default_rng(args.seed)
    a = derive_a(cfg.a_strategy, params.n, params.q, cfg.y, args.seed)
    kp = keygen(params, rng)
    m = sample_message(params, rng)
    r = sample_nonce(params, rng)
    ct = encrypt(kp.h, m, r, params)
    c = compute_c_ground_truth(a, r, kp.h, params.p, params.q)
    out = attack_with_oracle(ct, kp.h, params, cfg, a, c, rng)
    payload = {"success": out.success, "oracle_calls": out.oracle_calls, "message_matches": out.message == m}
    _emit(args, payload, f"success={out.success} oracle_calls={out.oracle_calls}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    if args.example is not None:
        pre = scaled_preset(args.example, None if args.full else (args.scale or DESK_SCALE))
    else:
        if args.N is None:
            raise UsageError("experiment needs --example or --N/--q/--d/--y")
        pre = Preset(args.N, args.d, args.p, args.q, args.y, args.R or 0, args.strategy)
    spec = spec_from_preset(pre, R=args.R, trials=args.trials, seed=args.seed,
                            max_oracle_calls=args.max_calls, mode=args.mode,
                            label=f"example {args.example}" if args.example else "")
    cache = BasisCache(args.cache_dir) if args.cache_dir else None
    if args.sweep:
        reports = run_sweep(spec, _r_range(args.sweep), cache, args.workers)
        rates = {r.spec["R"]: r.success_rate for r in reports}
        out = {"reports": [r.to_dict(args.volatile) for r in reports], "rates": {str(k): v for k, v in rates.items()},
               "threshold": threshold(rates)}
        if args.example is not None:
            out["full_scale_R"] = PRESETS[args.example].R
        text = "\n".join(f"R={R:3d} rate={rate:.2f}" for R, rate in rates.items()) + f"\nR*={threshold(rates)}"
    else:
        rep = run_experiment(spec, cache, args.workers)
        out = rep.to_dict(args.volatile)
        text = f"N={pre.n} R={spec.attack.R}: {rep.successes}/{spec.trials} recovered"
    blob = json.dumps(out, sort_keys=True, indent=1)
    if args.out:
        Path(args.out).write_text(blob + "\n")
    print(blob if args.json else text)
    return EXIT_OK


def cmd_check_params(args) -> int:
    tuples = list(REFERENCE_TUPLES) if args.reference else [(args.N, args.q, args.y)]
    if not args.reference and None in tuples[0]:
        raise UsageError("check-params needs --N, --q and --y (or --reference)")
    reports = []
    for n, q, y in tuples:
        rep = check_params(n, q, y, args.R, exact=not args.no_exact, a_seed=args.seed)
        reports.append(rep.to_dict())
    if args.json:
        print(json.dumps(reports if args.reference else reports[0], sort_keys=True, indent=1))
    else:
        for r in reports:
            lam = "n/a" if r["lambda1"] is None else f"{r['lambda1']:.4f}"
            print(f"N={r['n']} q={r['q']} y={r['y']} R={r['R']}: q^(1/y)={r['q_root']:.4f} gh={r['gh_estimate']:.4f} "
                  f"lambda1={lam} heuristic_ok={r['heuristic_ok']} assumption_ok={r['assumption_ok']} "
                  f"structured_ok={r['structured_ok']} y_bound_ok={r['y_bound_ok']}")
            for note in r["notes"]:
                print(f"  note: {note}")
    return EXIT_OK


def cmd_reduce_basis(args) -> int:
    a = derive_a(args.strategy, args.N, args.q, args.y, args.seed)
    cache = BasisCache(args.cache_dir or DEFAULT_CACHE)
    t0 = time.perf_counter()
    red = cache.get_or_build(a, args.q, args.y, args.strategy, args.seed, args.delta)
    path = cache.path(args.N, args.q, args.y, args.strategy, args.seed, args.delta)
    payload = {"path": str(path), "basis_cache_hit": red.cache_hit, "seconds": time.perf_counter() - t0,
               "first_row_norm": float(np.linalg.norm(red.basis.rows[0]))}
    _emit(args, payload, f"{path} basis_cache_hit={red.cache_hit}")
    return EXIT_OK


# ------------------------------------------------------------------- parser

def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # accepted before or after the subcommand; SUPPRESS keeps the subparser from
    # overwriting a value given before it
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--seed", type=int, help="master seed", **(kw or {"default": 0}))
    g.add_argument("--json", action="store_true", help="machine-readable output", **kw)
    g.add_argument("--cache-dir", help="directory for reduced bases", **(kw or {"default": None}))
    return g


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags(suppress=True)
    ap = argparse.ArgumentParser(prog="ntrucvp", description=__doc__.splitlines()[0], parents=[_global_flags(False)])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def ntru_args(p, need_n=True):
        if need_n:
            p.add_argument("--N", type=int, required=True)
            p.add_argument("--q", type=int, required=True)
        p.add_argument("--d", type=int, required=True)
        p.add_argument("--p", type=int, default=3)

    def attack_args(p):
        p.add_argument("--y", type=float, required=True)
        p.add_argument("--R", type=int, default=0)
        p.add_argument("--strategy", choices=[s.value for s in AStrategy], default="algorithm1")
        p.add_argument("--max-calls", type=int, default=100)
        p.add_argument("--mode", choices=["auto", "babai", "exact"], default="auto")

    p = sub.add_parser("keygen", parents=[common], help="generate a key pair")
    ntru_args(p)
    p.add_argument("--out", required=True, help="private key file")
    p.add_argument("--pub", help="public key file")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("encrypt", parents=[common], help="encrypt a message (random if none given)")
    ntru_args(p, need_n=False)
    p.add_argument("--pub", required=True)
    p.add_argument("--message", help="file with one polynomial line")
    p.add_argument("--message-out", help="where to write the message that was encrypted")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encrypt)

    p = sub.add_parser("decrypt", parents=[common], help="decrypt with a private key")
    p.add_argument("--key", required=True)
    p.add_argument("--ct", required=True)
    p.add_argument("--d", type=int, default=1, help="only used to validate parameters")
    p.set_defaults(func=cmd_decrypt)

    p = sub.add_parser("attack", parents=[common], help="attack a simulated instance, or one given ciphertext")
    p.add_argument("--N", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--p", type=int, default=3)
    attack_args(p)
    p.add_argument("--pub", help="public key (with --ct and --E)")
    p.add_argument("--ct", help="ciphertext file")
    p.add_argument("--E", help="file with the 2N integers of the oracle output")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("experiment", parents=[common], help="run seeded trials, optionally sweeping R")
    p.add_argument("--example", type=int, choices=sorted(PRESETS))
    scale = p.add_mutually_exclusive_group()
    scale.add_argument("--scale", type=int, help=f"override N (default {DESK_SCALE}); d scales with N")
    scale.add_argument("--full", action="store_true", help="the example's own N (slow)")
    p.add_argument("--N", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--p", type=int, default=3)
    p.add_argument("--y", type=float)
    p.add_argument("--R", type=int)
    p.add_argument("--strategy", choices=[s.value for s in AStrategy], default="algorithm1")
    p.add_argument("--max-calls", type=int, default=100)
    p.add_argument("--mode", choices=["auto", "babai", "exact"], default="auto")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--sweep", help="R values, e.g. 0:12 or 0:12:2 or 0,4,8")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--volatile", action="store_true", help="include wall times and cache state")
    p.add_argument("--out", help="write the JSON report here")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("check-params", parents=[common], help="evaluate the attack's inequalities")
    p.add_argument("--N", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--y", type=float)
    p.add_argument("--R", type=int, default=0)
    p.add_argument("--no-exact", action="store_true", help="skip exact SVP")
    p.add_argument("--reference", action="store_true", help="the four small reference tuples")
    p.set_defaults(func=cmd_check_params)

    p = sub.add_parser("reduce-basis", parents=[common], help="LLL-reduce M_a and store it in the cache")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--strategy", choices=[s.value for s in AStrategy], default="algorithm1")
    p.add_argument("--delta", type=float, default=0.99)
    p.set_defaults(func=cmd_reduce_basis)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        ap.print_usage(sys.stderr)
        print(f"ntrucvp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CacheCorruptError as exc:
        print(f"ntrucvp: corrupt basis cache: {exc}", file=sys.stderr)
        return EXIT_CACHE
    except (ParameterError, RingError, ValueError) as exc:
        print(f"ntrucvp: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_PARAMS


if __name__ == "__main__":
    sys.exit(main())
