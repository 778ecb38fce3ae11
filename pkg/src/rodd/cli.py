"""Command-line front end: experiment orchestration and CSV emission.

Every randomized command requires an explicit --seed and produces
byte-identical output when rerun with the same flags.  dB values are
converted to linear SNR here and nowhere else; the library works in
linear units throughout.

Exit codes: 0 success, 2 usage error, 3 check failure (--check).
"""

import argparse
import math
import sys

import numpy as np

from . import analysis, discovery, sparsecode, validate


class UsageError(Exception):
    pass


class CheckFailure(Exception):
    pass


def parse_grid(text):
    """`start:stop:step` inclusive grid, or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, step = (float(tok) for tok in text.split(":"))
            if step <= 0:
                raise UsageError(f"grid step must be positive in {text!r}")
            if stop < start:
                raise UsageError(f"empty grid {text!r}")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [start + i * step for i in range(count)]
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse grid {text!r}: {exc}") from None


def parse_int_list(text):
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse integer list {text!r}: {exc}") from None


def parse_q_grid(text):
    grid = parse_grid(text)
    if not grid:
        raise UsageError(f"empty q grid {text!r}")
    if any(not (0.0 < q < 1.0) for q in grid):
        raise UsageError("q grid must lie strictly inside (0,1)")
    return grid


def db_to_linear(db):
    if not math.isfinite(db):
        raise UsageError(f"dB value must be finite, got {db}")
    return 10.0 ** (db / 10.0)


def _write_text(path, text):
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)


def _say(args, message):
    stream = sys.stderr if args.out == "-" else sys.stdout
    print(message, file=stream)


def _require_seed(args):
    if args.seed is None:
        raise UsageError("--seed is required (rerunning with the same seed "
                         "must reproduce the output byte for byte)")


def _load_config(path, subparser):
    """Flat `key = value` file applied as subcommand defaults.

    Keys match the long flag names (dashes or underscores); values go
    through the same conversion as flag strings.  Flags given on the
    command line still win because argparse only consults defaults for
    absent flags.
    """
    actions = {a.dest: a for a in subparser._actions}
    out = {}
    try:
        with open(path, encoding="utf-8") as f:
            lines = f.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected `key = value`")
        key, value = (tok.strip() for tok in line.split("=", 1))
        dest = key.replace("-", "_")
        action = actions.get(dest)
        if action is None or dest in ("help", "config"):
            raise UsageError(f"{path}:{lineno}: unknown option {key!r}")
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            if value.lower() not in ("0", "1", "true", "false", "yes", "no"):
                raise UsageError(f"{path}:{lineno}: boolean expected for {key!r}")
            out[dest] = value.lower() in ("1", "true", "yes")
        else:
            try:
                out[dest] = action.type(value) if action.type else value
            except ValueError as exc:
                raise UsageError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from None
            if action.choices and out[dest] not in action.choices:
                raise UsageError(f"{path}:{lineno}: {key!r} must be one of "
                                 f"{sorted(action.choices)}")
    return out


def _add_common(sub):
    sub.add_argument("--config", help="flat key=value file; flags override it")
    sub.add_argument("--out", default="-", help="output path ('-' = stdout)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rodd",
        description="On-off duplex signaling: throughput tables, neighbor "
                    "discovery and sparse-recovery message code experiments.",
    )
    subs = parser.add_subparsers(dest="command", metavar="command")
    registry = {}

    p = subs.add_parser("fig2", help="OR-channel sum rate/capacity vs ALOHA sweep")
    p.add_argument("--K", default="3,5,20", help="comma list of node counts")
    p.add_argument("--q", default="0.02:0.98:0.02", help="q grid start:stop:step")
    p.add_argument("--check", action="store_true",
                   help="verify dominance per row, exit 3 on failure")
    _add_common(p)
    registry["fig2"] = p

    p = subs.add_parser("fig3", help="Gaussian-channel sweep at fixed SNR")
    p.add_argument("--K", default="3,5,20", help="comma list of node counts")
    p.add_argument("--q", default="0.02:0.98:0.02", help="q grid start:stop:step")
    p.add_argument("--gamma-db", type=float, default=20.0, help="link SNR in dB")
    p.add_argument("--check", action="store_true",
                   help="verify dominance per row, exit 3 on failure")
    _add_common(p)
    registry["fig3"] = p

    p = subs.add_parser("discover", help="network-wide compressed neighbor discovery")
    p.add_argument("--n", type=int, default=10000, help="expected node count")
    p.add_argument("--neighbors", type=float, default=50.0, help="mean neighbor degree")
    p.add_argument("--M", type=int, default=2500, help="signature length in slots")
    p.add_argument("--q", type=float, default=0.02, help="signature on-probability")
    p.add_argument("--mode", choices=("or", "energy"), default="or")
    p.add_argument("--snr-db", type=float, default=20.0,
                   help="link SNR at the neighborhood boundary, dB")
    p.add_argument("--noise-var", type=float, default=1.0)
    p.add_argument("--threshold", type=float, default=None,
                   help="energy elimination threshold (default: tuned)")
    p.add_argument("--threshold-sweep", default=None, metavar="LO:HI:STEP",
                   help="energy mode: sweep thresholds, emit tradeoff CSV")
    p.add_argument("--receivers", type=int, default=None,
                   help="evaluate only the first R receivers")
    p.add_argument("--area", type=float, default=1000.0, help="square side, meters")
    p.add_argument("--alpha", type=float, default=4.0, help="path-loss exponent")
    p.add_argument("--no-torus", action="store_true",
                   help="disable wraparound distances (edge effects return)")
    p.add_argument("--seed", type=int, default=None)
    _add_common(p)
    registry["discover"] = p

    p = subs.add_parser("sparsecode", help="mu-signatures-per-node message code trial")
    p.add_argument("--K", type=int, default=10, help="clique size")
    p.add_argument("--mu", type=int, default=1024, help="messages per node")
    p.add_argument("--q", type=float, default=0.09, help="signature on-probability")
    p.add_argument("--M", type=int, default=512, help="signature length in slots")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None)
    _add_common(p)
    registry["sparsecode"] = p

    p = subs.add_parser("validate", help="Monte Carlo vs closed-form rate checks")
    p.add_argument("--suite", choices=("all", "or", "gauss"), default="all")
    p.add_argument("--M", type=int, default=100000, help="slots per estimate")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--check", action="store_true", help="exit 3 if any row fails")
    _add_common(p)
    registry["validate"] = p

    p = subs.add_parser("asym", help="per-node achievable rates from a gain matrix")
    p.add_argument("--gains-file", required=True,
                   help="whitespace K x K matrix, gamma[i][j] = SNR of j at i")
    p.add_argument("--q", default="0.2",
                   help="per-node on-probabilities (single value or comma list)")
    _add_common(p)
    registry["asym"] = p

    p = subs.add_parser("trace", help="slot-by-slot observation of one receiver")
    p.add_argument("--n", type=int, default=4, help="expected node count")
    p.add_argument("--receiver", type=int, default=0)
    p.add_argument("--M", type=int, default=50, help="frame length in slots")
    p.add_argument("--q", type=float, default=0.35)
    p.add_argument("--mode", choices=("or", "gauss"), default="or")
    p.add_argument("--noise-var", type=float, default=0.0)
    p.add_argument("--area", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=None)
    _add_common(p)
    registry["trace"] = p

    return parser, registry


def _cmd_fig2(args):
    Ks = parse_int_list(args.K)
    grid = parse_q_grid(args.q)
    if not Ks:
        raise UsageError("empty K list")
    table = analysis.sweep_or(Ks, grid)
    _write_text(args.out, table.to_csv())
    _say(args, f"fig2: wrote {len(table.rows)} rows to {args.out}")
    if args.check:
        _check_dominance(args, table)
    return 0


def _cmd_fig3(args):
    Ks = parse_int_list(args.K)
    grid = parse_q_grid(args.q)
    if not Ks:
        raise UsageError("empty K list")
    gamma = db_to_linear(args.gamma_db)
    table = analysis.sweep_gauss(Ks, grid, gamma)
    _write_text(args.out, table.to_csv())
    _say(args, f"fig3: wrote {len(table.rows)} rows to {args.out} "
               f"(gamma = {gamma:.6g})")
    if args.check:
        _check_dominance(args, table)
    return 0


def _check_dominance(args, table):
    failures = 0
    for row in table.rows:
        ok = (row.rodd_sum_rate >= row.aloha - 1e-9
              and row.rodd_sum_capacity >= row.rodd_sum_rate - 1e-9)
        _say(args, f"check K={row.K} q={row.q:.12g} {'PASS' if ok else 'FAIL'}")
        failures += not ok
    if failures:
        raise CheckFailure(f"dominance failed on {failures} rows")


def _cmd_discover(args):
    _require_seed(args)
    mode = discovery.OR_NOISELESS if args.mode == "or" else discovery.ENERGY
    topo, radius = discovery.poisson_discovery_topology(
        args.n, args.neighbors, args.seed, area_side=args.area,
        alpha=args.alpha, snr_db=args.snr_db, torus=not args.no_torus)
    receivers = None if args.receivers is None else np.arange(
        min(args.receivers, topo.num_nodes))
    if args.threshold_sweep is not None:
        if mode != discovery.ENERGY:
            raise UsageError("--threshold-sweep needs --mode energy")
        lines = ["threshold,mean_miss_rate,mean_false_alarm_rate,mean_accuracy"]
        for thr in parse_grid(args.threshold_sweep):
            rep = discovery.run_discovery_experiment(
                topo, radius, args.M, args.q, mode, noise_var=args.noise_var,
                threshold=thr, seed=args.seed, receivers=receivers)
            counted = [r for r in rep.records if r[1] > 0]
            miss = sum(r[3] / r[1] for r in counted) / len(counted)
            fa = sum(r[4] / r[1] for r in counted) / len(counted)
            lines.append(f"{thr:.12g},{miss:.12g},{fa:.12g},{rep.mean_accuracy:.12g}")
            _say(args, f"discover: threshold {thr:g} -> accuracy "
                       f"{rep.mean_accuracy:.6f}")
        _write_text(args.out, "\n".join(lines) + "\n")
        return 0
    rep = discovery.run_discovery_experiment(
        topo, radius, args.M, args.q, mode, noise_var=args.noise_var,
        threshold=args.threshold, seed=args.seed, receivers=receivers)
    _write_text(args.out, rep.to_csv())
    _say(args, f"discover: {topo.num_nodes} nodes, {args.M} slots, mode={args.mode}, "
               f"mean accuracy {rep.mean_accuracy:.6f}, "
               f"misses {rep.total_misses}, false alarms {rep.total_false_alarms}")
    return 0


def _cmd_sparsecode(args):
    _require_seed(args)
    rep = sparsecode.run_sparsecode_experiment(
        args.K, args.mu, args.q, args.M, args.trials, args.seed)
    _write_text(args.out, rep.to_csv())
    s = rep.summary
    _say(args, f"sparsecode: {s.pairs} pairs, success {s.success_rate:.6f}, "
               f"no-miss {s.no_miss_rate:.6f}, ambiguous {s.ambiguous}, "
               f"eliminated-all {s.eliminated_all}")
    return 0


def _cmd_validate(args):
    _require_seed(args)
    rep = validate.validate_suite(args.seed, args.M, suite=args.suite)
    _write_text(args.out, rep.to_csv())
    n_pass = sum(r.passed for r in rep.rows)
    _say(args, f"validate: {n_pass}/{len(rep.rows)} rows within 3 standard errors")
    if args.check and not rep.all_passed:
        raise CheckFailure(f"{len(rep.rows) - n_pass} validation rows failed")
    return 0


def _read_gains_file(path):
    from .model import LinkGains
    rows = []
    try:
        with open(path, encoding="utf-8") as f:
            for raw in f:
                line = raw.split("#", 1)[0].strip()
                if line:
                    rows.append([float(tok) for tok in line.split()])
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read gains file {path!r}: {exc}") from None
    if not rows or any(len(r) != len(rows) for r in rows):
        raise UsageError(f"gains file {path!r} must hold a square matrix")
    return LinkGains(gamma=np.array(rows))


def _cmd_asym(args):
    gains = _read_gains_file(args.gains_file)
    K = gains.num_nodes
    qs = parse_grid(args.q)
    if len(qs) == 1:
        qs = qs * K
    if len(qs) != K:
        raise UsageError(f"need 1 or {K} q values, got {len(qs)}")
    if any(not (0.0 < q < 1.0) for q in qs):
        raise UsageError("q values must lie strictly inside (0,1)")
    q = np.array(qs)
    lines = ["node,q,rate_bound"]
    for k in range(K):
        bound = analysis.asymmetric_rate_bound(gains, q, k)
        lines.append(f"{k},{qs[k]:.12g},{bound:.12g}")
    _write_text(args.out, "\n".join(lines) + "\n")
    _say(args, f"asym: {K} nodes from {args.gains_file}")
    return 0


def _cmd_trace(args):
    _require_seed(args)
    from . import channels, model, signatures
    topo = model.generate_poisson_network(args.area, args.n / args.area**2,
                                          args.seed)
    n = topo.num_nodes
    if not (0 <= args.receiver < n):
        raise UsageError(f"receiver {args.receiver} out of range: the Poisson "
                         f"draw produced {n} nodes")
    gains = model.link_gains(topo, args.seed)
    book = signatures.reconstruct_book(range(n), args.q, args.M)
    rng = np.random.default_rng((args.seed, 0x7ACE))
    if args.mode == "or":
        peers = [(book[j], rng.integers(0, 2, args.M).astype(np.uint8))
                 for j in range(n) if j != args.receiver]
        obs = channels.or_channel(book[args.receiver], peers)
    else:
        frames = []
        for j in range(n):
            symbols = rng.normal(0.0, 1.0, args.M)
            power = float(np.sum(book[j].bits * symbols**2))
            if power > args.M:
                symbols *= math.sqrt(args.M / power)
            frames.append(channels.TransmitFrame(symbols=symbols, mask=book[j]))
        obs = channels.gaussian_mac(args.receiver, gains, frames,
                                    args.noise_var, seed=args.seed)
    _write_text(args.out, channels.dump_observation(obs))
    _say(args, f"trace: receiver {args.receiver} of {n} nodes, {args.M} slots, "
               f"mode={args.mode}")
    return 0


_COMMANDS = {
    "fig2": _cmd_fig2,
    "fig3": _cmd_fig3,
    "discover": _cmd_discover,
    "sparsecode": _cmd_sparsecode,
    "validate": _cmd_validate,
    "asym": _cmd_asym,
    "trace": _cmd_trace,
}


def _peek_config(argv):
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def main(argv=None):
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser, registry = build_parser()
    try:
        cfg_path = _peek_config(argv)
        if cfg_path is not None:
            command = next((tok for tok in argv if not tok.startswith("-")), None)
            if command not in registry:
                raise UsageError("--config needs a known subcommand")
            registry[command].set_defaults(**_load_config(cfg_path, registry[command]))
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 2
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, discovery.ConvergenceError,
            analysis.WaterLevelBracketError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CheckFailure as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
