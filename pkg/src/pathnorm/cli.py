"""Command-line interface.

Subcommands: gamma-table, approx-1d, norm, rewrite, embed, rad-check,
bounds, train, apriori.  Every command accepts --seed, --out and
--format {csv,json}; reports go to stdout unless --out is given.

Exit codes: 0 ok, 1 verification failure, 2 usage error, 3 numeric
failure.  Output for identical flags and seed is byte-identical.
"""

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import activations as act_mod
from . import bounds as bounds_mod
from . import resnet as res_mod
from .activations import DEFAULT_QUAD, QuadConfig, by_name
from .errors import NumericalError, ParseError, PathNormError
from .parallel import thread_map
from .relu1d import approximate_activation
from .resnet import eval_resnet
from .rng import make_rng
from .serialize import load_model, save_model
from .train import TrainConfig, apriori_experiment, empirical_risk, fit, init_two_layer
from .twolayer import (
    Dataset,
    DiscreteBarronRep,
    TwoLayerNet,
    eval_two_layer,
    modified_path_norm,
    path_norm,
    rewrite_to_relu,
)

OK, VERIFY_FAIL, USAGE, NUMERIC = 0, 1, 2, 3


def _intf(text: str) -> int:
    """Integer flag value; accepts scientific notation like 1e6."""
    return int(float(text))

# reference instances reproducing the closed-form table
_TABLE_REFS = (
    "relu",
    "leaky_relu:lam=0.1",
    "sigmoid",
    "tanh",
    "elu:alpha=1",
    "gelu",
    "softplus",
    "swish:beta=1",
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _emit(rows, fmt: str, out) -> None:
    """Write a list of uniform dict rows as CSV or JSON."""
    if fmt == "json":
        text = json.dumps(rows, indent=1) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if rows:
            writer.writerow(rows[0].keys())
            for row in rows:
                writer.writerow([_fmt(v) for v in row.values()])
        text = buf.getvalue()
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _quad(args) -> QuadConfig:
    tol = getattr(args, "abs_tol", None)
    if tol is None:
        return DEFAULT_QUAD
    return QuadConfig(abs_tol=tol, rel_tol=DEFAULT_QUAD.rel_tol,
                      max_subdivisions=DEFAULT_QUAD.max_subdivisions,
                      tail_cutoff_tol=DEFAULT_QUAD.tail_cutoff_tol)


# ---------------------------------------------------------------------------
# commands


def cmd_gamma_table(args) -> int:
    refs = args.only if args.only else list(_TABLE_REFS)
    cfg = _quad(args)

    def one(ref):
        act = by_name(ref)
        parts = act_mod.gamma_parts(act, cfg)
        closed = act.closed_form_gamma
        return {
            "activation": act.label,
            "gamma0": parts.gamma0,
            "linear_term": parts.linear_term,
            "gamma": parts.total,
            "closed_form": closed,
            "abs_error": abs(parts.total - closed) if closed is not None else None,
        }

    rows = thread_map(one, refs)
    _emit(rows, args.format, args.out)
    bad = [r for r in rows if r["abs_error"] is not None and r["abs_error"] > args.tol]
    return VERIFY_FAIL if bad else OK


def cmd_approx_1d(args) -> int:
    act = by_name(args.activation)
    net, cert = approximate_activation(act, args.eps, _quad(args))
    if args.save_model:
        save_model(net, args.save_model)
    row = {
        "activation": act.label,
        "eps": cert.epsilon_requested,
        "sup_error": cert.sup_error_measured,
        "path_norm": cert.path_norm,
        "gamma": cert.gamma_reference,
        "norm_bound": cert.gamma_reference + cert.epsilon_requested,
        "width": net.width,
        "anchor": cert.anchor,
        "window": cert.window_halfwidth,
        "partition": cert.partition_size,
    }
    _emit([row], args.format, args.out)
    ok = (
        cert.sup_error_measured <= cert.epsilon_requested
        and cert.path_norm <= cert.gamma_reference + cert.epsilon_requested
    )
    return OK if ok else VERIFY_FAIL


def cmd_norm(args) -> int:
    model = load_model(args.model)
    if isinstance(model, TwoLayerNet):
        rows = [{
            "kind": "two_layer",
            "width": model.width,
            "path_norm": path_norm(model),
            "modified_path_norm": modified_path_norm(model),
        }]
        _emit(rows, args.format, args.out)
        return OK
    closed = res_mod.norm_closed(model)
    rec = res_mod.norm_recursive(model)
    try:
        brute = res_mod.norm_bruteforce(model)
        brute_delta = abs(brute - closed)
    except PathNormError:
        brute, brute_delta = "skipped", None
    scale = max(abs(closed), 1.0)
    rows = [{
        "kind": "resnet",
        "depth": model.depth,
        "closed": closed,
        "recursive": rec.total,
        "weighted_path_norm": rec.weighted_path_norm,
        "r": rec.r,
        "bruteforce": brute,
        "closed_vs_recursive": abs(closed - rec.total) / scale,
        "closed_vs_bruteforce": brute_delta,
    }]
    _emit(rows, args.format, args.out)
    ok = abs(closed - rec.total) / scale <= 1e-10
    if brute_delta is not None:
        ok = ok and brute_delta / scale <= 1e-10
    return OK if ok else VERIFY_FAIL


def cmd_rewrite(args) -> int:
    model = load_model(args.model)
    if not isinstance(model, TwoLayerNet):
        raise ParseError("rewrite expects a two_layer model")
    relu_net, report = rewrite_to_relu(model, args.eps, _quad(args), seed=args.seed)
    if args.save_model:
        save_model(relu_net, args.save_model)
    row = {
        "eps": report.eps,
        "width": report.width,
        "path_norm": report.path_norm_rewritten,
        "norm_bound": report.path_norm_bound,
        "max_deviation": report.max_deviation,
        "deviation_bound": report.deviation_bound,
        "n_check_points": report.n_check_points,
    }
    _emit([row], args.format, args.out)
    ok = (
        report.path_norm_rewritten <= report.path_norm_bound * (1 + 1e-12)
        and report.max_deviation <= report.deviation_bound * (1 + 1e-12)
    )
    return OK if ok else VERIFY_FAIL


def cmd_embed(args) -> int:
    model = load_model(args.model)
    if not isinstance(model, TwoLayerNet):
        raise ParseError("embed expects a two_layer model")
    c = args.weight_c
    if c is None:
        c = res_mod.default_weight_constant(model.activation, _quad(args))
    net = res_mod.embed_two_layer(model, args.depth, args.width, c)
    if args.save_model:
        save_model(net, args.save_model)
    rng = make_rng(args.seed)
    x = rng.uniform(-1.0, 1.0, size=(args.n_check, model.input_dim))
    dev = float(np.max(np.abs(eval_resnet(net, x) - eval_two_layer(model, x))))
    closed = res_mod.norm_closed(net)
    bound = max(c, 1.0) * modified_path_norm(model)
    row = {
        "depth": net.depth,
        "width": net.width,
        "weight_c": c,
        "norm": closed,
        "norm_bound": bound,
        "max_eval_deviation": dev,
        "n_check_points": args.n_check,
    }
    _emit([row], args.format, args.out)
    return OK if dev <= 1e-10 and closed <= bound * (1 + 1e-12) else VERIFY_FAIL


def _resolve_gamma(spec: str, cfg: QuadConfig) -> float:
    if spec.startswith("from:"):
        return act_mod.gamma(by_name(spec[5:]), cfg)
    return float(spec)


def cmd_rad_check(args) -> int:
    cfg = _quad(args)
    rng = make_rng(args.seed)
    x = rng.uniform(-1.0, 1.0, size=(args.n, args.d))
    if args.family == "two-layer":
        act = by_name(args.activation)
        gam = act_mod.gamma(act, cfg)
        cands = bounds_mod.random_two_layer_candidates(
            args.candidates, args.d, args.m, act, args.budget, seed=args.seed
        )
        bound = bounds_mod.rad_bound_two_layer(args.budget, args.d, args.n, gam)
        norm_fn = modified_path_norm
    elif args.family == "relu":
        act = act_mod.relu()
        cands = bounds_mod.random_two_layer_candidates(
            args.candidates, args.d, args.m, act, args.budget, seed=args.seed,
            modified=False,
        )
        bound = bounds_mod.rad_bound_relu(args.budget, args.d, args.n)
        norm_fn = path_norm
    elif args.family == "resnet":
        act = by_name(args.activation)
        gam = _resolve_gamma(args.gamma, cfg) if args.gamma else act_mod.gamma(act, cfg)
        weight_c = 4.0 * gam + 1.0
        cands = bounds_mod.random_resnet_candidates(
            args.candidates, args.d, args.depth, args.res_dim, args.m, act,
            weight_c, args.budget, seed=args.seed,
        )
        bound = bounds_mod.rad_bound_resnet(args.budget, args.d, args.n, gam)
        norm_fn = res_mod.norm_closed
    else:  # linear
        cands = bounds_mod.random_linear_candidates(args.candidates, args.d, seed=args.seed)
        bound = bounds_mod.rad_bound_linear(x)
        norm_fn = None
    est = bounds_mod.empirical_rademacher(
        x, cands, n_sign_draws=args.sign_draws, seed=args.seed,
        budget=args.budget if norm_fn else None, norm_fn=norm_fn,
    )
    row = {
        "family": args.family,
        "d": args.d,
        "n": args.n,
        "budget": args.budget,
        "candidates": est.n_candidates,
        "sign_draws": est.n_sign_draws,
        "estimate": est.value,
        "bound": bound,
        "margin": bound - est.value,
    }
    _emit([row], args.format, args.out)
    return OK if est.value <= bound else VERIFY_FAIL


def cmd_bounds(args) -> int:
    cfg = _quad(args)
    gam = act_mod.gamma(by_name(args.activation), cfg)
    kind = args.kind
    if kind == "rad-two-layer":
        value = bounds_mod.rad_bound_two_layer(args.q, args.d, args.n, gam)
    elif kind == "rad-relu":
        value = bounds_mod.rad_bound_relu(args.q, args.d, args.n)
    elif kind == "rad-resnet":
        value = bounds_mod.rad_bound_resnet(args.q, args.d, args.n, gam)
    elif kind == "lambda-two-layer":
        value = bounds_mod.lambda_n_two_layer(args.d, args.n, gam)
    elif kind == "lambda-resnet":
        value = bounds_mod.lambda_n_resnet(args.d, args.n, gam)
    elif kind == "posterior":
        value = bounds_mod.posterior_gap_bound(args.q, args.d, args.n, args.delta, gam)
    elif kind == "apriori-two-layer":
        lam = args.lam if args.lam is not None else bounds_mod.lambda_n_two_layer(args.d, args.n, gam)
        value = bounds_mod.apriori_bound_two_layer(
            args.q, args.m, args.d, args.n, args.delta, lam, by_name(args.activation), cfg
        )
    else:  # apriori-resnet
        lam = args.lam if args.lam is not None else bounds_mod.lambda_n_resnet(args.d, args.n, gam)
        value = bounds_mod.apriori_bound_resnet(
            args.q, args.depth, args.m, args.d, args.n, args.delta, lam,
            by_name(args.activation), cfg,
        )
    row = {"kind": kind, "d": args.d, "n": args.n, "activation": args.activation,
           "gamma": gam, "value": value}
    _emit([row], args.format, args.out)
    return OK


def _load_csv_dataset(path: str) -> Dataset:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ParseError(f"cannot read data file: {exc}")
    if not rows:
        raise ParseError("empty data file")
    header, body = rows[0], rows[1:]
    if header[-1] != "y":
        raise ParseError("last data column must be named y", 1)
    try:
        arr = np.array([[float(v) for v in row] for row in body], float)
    except ValueError as exc:
        raise ParseError(f"non-numeric data value: {exc}")
    return Dataset(arr[:, :-1], arr[:, -1])


def _synth_dataset(model_path: str, n: int, seed: int) -> Dataset:
    model = load_model(model_path)
    if not isinstance(model, TwoLayerNet):
        raise ParseError("train --target expects a two_layer model")
    rng = make_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=(n, model.input_dim))
    y = np.clip(eval_two_layer(model, x), 0.0, 1.0)
    return Dataset(x, y)


def cmd_train(args) -> int:
    if (args.data is None) == (args.target is None):
        raise ParseError("give exactly one of --data or --target")
    if args.data:
        data = _load_csv_dataset(args.data)
    else:
        data = _synth_dataset(args.target, args.n, args.seed)
    d = data.inputs.shape[1]
    init = init_two_layer(d, args.width, by_name(args.activation), seed=args.seed)
    cfg = TrainConfig(steps=args.steps, step_size=args.step_size, lam=args.lam,
                      batch=args.batch, seed=args.seed)
    net, trace = fit(data, cfg, init)
    if args.save_model:
        save_model(net, args.save_model)
    row = {
        "n": data.inputs.shape[0],
        "d": d,
        "width": args.width,
        "lam": args.lam,
        "steps": args.steps,
        "initial_objective": float(trace[0]),
        "final_objective": float(trace.min()),
        "final_risk": empirical_risk(net, data),
        "modified_path_norm": modified_path_norm(net),
    }
    _emit([row], args.format, args.out)
    return OK


def _load_rep(path: str, d: int) -> DiscreteBarronRep:
    if path is None:
        # default: single atom aligned with the first axis
        w = np.zeros((1, d + 1))
        w[0, :2] = [1.0, 0.5] if d > 1 else [1.0, 1.0]
        return DiscreteBarronRep(np.ones(1), w, np.ones(1))
    try:
        with open(path) as fh:
            obj = json.load(fh)
        return DiscreteBarronRep(
            np.array(obj["probs"], float),
            np.array(obj["ws"], float),
            np.array(obj["coeffs"], float),
        )
    except OSError as exc:
        raise ParseError(f"cannot read atoms file: {exc}")
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc.msg}", exc.lineno, exc.colno)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed atoms file: {exc}")


def cmd_apriori(args) -> int:
    rep = _load_rep(args.atoms, args.d)
    act = by_name(args.activation)
    seeds = range(args.seed, args.seed + args.seeds)

    report = apriori_experiment(
        rep, act, args.d, args.n, args.m, seeds,
        lam_multiplier=args.lam_mult, delta=args.delta,
        steps=args.steps, step_size=args.step_size, cfg=_quad(args),
    )
    rows = [{
        "seed": r.seed,
        "train_objective": r.train_objective,
        "population_risk": r.population_risk,
        "bound": r.bound,
        "ok": r.ok,
    } for r in report.rows]
    _emit(rows, args.format, args.out)
    return OK if report.fraction_ok >= args.require else VERIFY_FAIL


# ---------------------------------------------------------------------------
# argument plumbing


def _common(sub):
    sub.add_argument("--seed", type=_intf, default=0)
    sub.add_argument("--out", default=None, help="write report to this path")
    sub.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pathnorm", description=__doc__.splitlines()[0])
    sp = ap.add_subparsers(dest="command", required=True)

    p = sp.add_parser("gamma-table", help="quadrature vs closed-form activation norms")
    p.add_argument("--only", action="append", help="activation ref, repeatable")
    p.add_argument("--abs-tol", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-3, help="max |quadrature - closed|")
    _common(p)
    p.set_defaults(fn=cmd_gamma_table)

    p = sp.add_parser("approx-1d", help="certified ReLU approximant of an activation")
    p.add_argument("--activation", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--abs-tol", type=float, default=None)
    p.add_argument("--save-model", default=None)
    _common(p)
    p.set_defaults(fn=cmd_approx_1d)

    p = sp.add_parser("norm", help="path norms of a model file")
    p.add_argument("--model", required=True)
    _common(p)
    p.set_defaults(fn=cmd_norm)

    p = sp.add_parser("rewrite", help="rewrite a general-activation net as a ReLU net")
    p.add_argument("--model", required=True)
    p.add_argument("--eps", type=float, default=1e-2)
    p.add_argument("--abs-tol", type=float, default=None)
    p.add_argument("--save-model", default=None)
    _common(p)
    p.set_defaults(fn=cmd_rewrite)

    p = sp.add_parser("embed", help="embed a two-layer net into a residual net")
    p.add_argument("--model", required=True)
    p.add_argument("--depth", type=_intf, required=True)
    p.add_argument("--width", type=_intf, required=True)
    p.add_argument("--weight-c", type=float, default=None,
                   help="residual scale constant; default 4*gamma+1")
    p.add_argument("--n-check", type=_intf, default=1000)
    p.add_argument("--abs-tol", type=float, default=None)
    p.add_argument("--save-model", default=None)
    _common(p)
    p.set_defaults(fn=cmd_embed)

    p = sp.add_parser("rad-check", help="empirical Rademacher estimate vs bound")
    p.add_argument("--family", choices=("two-layer", "relu", "resnet", "linear"),
                   default="two-layer")
    p.add_argument("--d", type=_intf, default=4)
    p.add_argument("--n", type=_intf, default=256)
    p.add_argument("--m", type=_intf, default=8)
    p.add_argument("--depth", type=_intf, default=2)
    p.add_argument("--res-dim", type=_intf, default=8)
    p.add_argument("--budget", type=float, default=2.0)
    p.add_argument("--candidates", type=_intf, default=32)
    p.add_argument("--sign-draws", type=_intf, default=256)
    p.add_argument("--activation", default="sigmoid")
    p.add_argument("--gamma", default=None,
                   help="resnet only: number or from:<activation>")
    p.add_argument("--abs-tol", type=float, default=None)
    _common(p)
    p.set_defaults(fn=cmd_rad_check)

    p = sp.add_parser("bounds", help="evaluate a bound formula")
    p.add_argument("--kind", required=True, choices=(
        "rad-two-layer", "rad-relu", "rad-resnet", "lambda-two-layer",
        "lambda-resnet", "posterior", "apriori-two-layer", "apriori-resnet"))
    p.add_argument("--q", type=float, default=1.0,
                   help="norm budget (or trained norm / target norm)")
    p.add_argument("--d", type=_intf, required=True)
    p.add_argument("--n", type=_intf, required=True)
    p.add_argument("--m", type=_intf, default=64)
    p.add_argument("--depth", type=_intf, default=2)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--lam", type=float, default=None)
    p.add_argument("--activation", default="relu")
    p.add_argument("--abs-tol", type=float, default=None)
    _common(p)
    p.set_defaults(fn=cmd_bounds)

    p = sp.add_parser("train", help="path-norm-regularized two-layer training")
    p.add_argument("--data", default=None, help="CSV with columns x0..x{d-1},y")
    p.add_argument("--target", default=None, help="two_layer model JSON to synthesize from")
    p.add_argument("--n", type=_intf, default=256, help="synthesized sample count")
    p.add_argument("--width", type=_intf, default=32)
    p.add_argument("--activation", default="relu")
    p.add_argument("--steps", type=_intf, default=500)
    p.add_argument("--step-size", type=float, default=0.05)
    p.add_argument("--lam", type=float, default=0.0)
    p.add_argument("--batch", type=_intf, default=None)
    p.add_argument("--save-model", default=None)
    _common(p)
    p.set_defaults(fn=cmd_train)

    p = sp.add_parser("apriori", help="trained risk vs a-priori bound over seeds")
    p.add_argument("--d", type=_intf, default=2)
    p.add_argument("--n", type=_intf, default=512)
    p.add_argument("--m", type=_intf, default=64)
    p.add_argument("--seeds", type=_intf, default=20)
    p.add_argument("--lam-mult", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--steps", type=_intf, default=300)
    p.add_argument("--step-size", type=float, default=0.05)
    p.add_argument("--activation", default="sigmoid")
    p.add_argument("--atoms", default=None, help="JSON with probs/ws/coeffs")
    p.add_argument("--require", type=float, default=0.95,
                   help="minimum fraction of seeds below the bound")
    p.add_argument("--abs-tol", type=float, default=None)
    _common(p)
    p.set_defaults(fn=cmd_apriori)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        return args.fn(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except NumericalError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return NUMERIC
    except PathNormError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
