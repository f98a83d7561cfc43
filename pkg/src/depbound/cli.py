"""Command-line entry point: ``depbound <command> [options]``.

Exit codes: 0 success, 2 invalid input or configuration, 3 computation error.
Errors are also written to standard error as one JSON object.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .baselines import PAIRS, binary_median_ours, binary_pair_logs, crossover_threshold
from .engine import (
    BoundParams,
    general_process_bound,
    markov_chain_bound,
    mcdiarmid_dep_bound,
    optimize_alpha,
)
from .errors import DepboundError, PreconditionT
from .harness import (
    RNG_NAME,
    TailQuery,
    empirical_tails,
    exact_tail,
    functional_by_name,
)
from .kernels import (
    Kernel,
    apply_kernel,
    backward_channel,
    dobrushin_tv,
    gamma_star_numeric,
    k_step,
    operator_norm,
    spectral,
)
from .measures import (
    Dist,
    DivergenceKind,
    divergence,
    hellinger_integral_exact,
    log_hellinger,
    parse_prob,
)
from .processes import SSRW, NonMarkovBinary
from .report import emit_report
from .scenarios import (
    binary_chain,
    binary_chain_bound,
    min_burnin,
    mcmc_bound,
    nonmarkov_bound,
    ssrw_bound,
)
from .tensorize import (
    HolderSchedule,
    exact_joint_hellinger,
    tensor_lower_general,
    tensor_lower_markov,
    tensor_upper_general,
    tensor_upper_markov,
)

SCENARIOS = ("binary", "ssrw", "nonmarkov")
ROUTES = ("closed", "tensor", "hyper", "sdpi", "general")
ENUM_MAX_N = 20


class ConfigError(Exception):
    """Invalid configuration or arguments (exit code 2)."""


# name -> (kind, default, help).  kind is a python type, a tuple of choices, or "num" / "alpha".
COMMON = {
    "seed": (int, 0, "RNG seed (DEPBOUND_SEED overrides)"),
    "format": (("json", "csv"), "json", "output format"),
    "out": (str, None, "output file (default: standard output)"),
}

OPTIONS: dict[str, dict[str, tuple]] = {
    "divergence": {
        "kind": (("kl", "tv", "chi2", "hellinger", "renyi"), "hellinger", "divergence"),
        "alpha": ("alpha", "2", "order for hellinger / renyi"),
        "nu": (str, None, "first law, e.g. 1/3,2/3"),
        "mu": (str, None, "second law"),
    },
    "kernel": {
        "matrix": (str, None, "rows separated by ';', entries by ','"),
        "stay": (str, None, "binary kernel with this stay probability"),
        "flip": (str, None, "binary kernel with this flip probability"),
        "mu": (str, None, "reference law for push-forward and backward channel"),
        "alpha": ("alpha", None, "output exponent for the hypercontractivity exponent"),
        "gamma": ("num", None, "input exponent for the operator norm"),
        "power": (int, 1, "report the k-step kernel"),
    },
    "tensor": {
        "scenario": (SCENARIOS, "binary", "process"),
        "n": (int, 6, "length"),
        "alpha": ("alpha", "2", "order"),
        "lambda": (str, "1/4", "flip probability (binary)"),
        "schedule": (("to_one", "geometric"), "to_one", "Hölder exponents"),
    },
    "bound": {
        "scenario": (SCENARIOS, "binary", "process"),
        "n": (int, 100, "length"),
        "t": (str, "0.5", "deviation, a number or sqrt_n"),
        "alpha": (str, "inf", "order, a number, inf, or opt for the grid minimum"),
        "lambda": (str, "1/4", "flip probability (binary)"),
        "route": (ROUTES, "closed", "closed form or generic route"),
        "centering": (("product", "joint"), "product", "center of the deviation"),
    },
    "compare": {
        "scenario": (("binary", "general"), "binary", "binary flip chain or a general kernel"),
        "lambda": (str, "1/4", "flip probability"),
        "matrix": (str, None, "kernel for the general pairs"),
        "pair": (PAIRS, "ours-vs-fan", "which comparison"),
        "alpha": ("alpha", "inf", "order"),
        "n": (int, 10000, "length"),
        "points": (int, 20, "number of t values in the sweep"),
        "t_min": ("num", None, "sweep start (default half the crossover)"),
        "t_max": ("num", None, "sweep end (default twice the crossover)"),
    },
    "simulate": {
        "scenario": (SCENARIOS, "binary", "process"),
        "n": (int, 100, "length"),
        "t": (str, "0.1,0.2,0.3", "comma-separated deviations"),
        "samples": (int, 100000, "Monte Carlo paths"),
        "lambda": (str, "1/4", "flip probability (binary)"),
        "alpha": ("alpha", "inf", "order"),
        "functional": (("normalized_mean", "adjacent_agreement"), "normalized_mean", "path functional"),
    },
    "oracle": {
        "scenario": (SCENARIOS, "binary", "process"),
        "n": (int, 8, "length"),
        "t": (str, "0.3", "deviation"),
        "alpha": ("alpha", "2", "order"),
        "lambda": (str, "1/4", "flip probability (binary)"),
        "functional": (("normalized_mean", "adjacent_agreement"), "normalized_mean", "path functional"),
        "center": (("product", "joint", "median"), "product", "center of the deviation"),
    },
    "mcmc": {
        "lambda": (str, "1/4", "flip probability"),
        "matrix": (str, None, "kernel rows instead of a binary flip chain"),
        "nu": (str, None, "starting law (default: point mass at the first state)"),
        "n0": (int, 0, "burn-in"),
        "n": (int, 1000, "number of averaged steps"),
        "t": ("num", 0.5, "deviation"),
        "alpha": ("alpha", "inf", "order"),
        "range": (str, "0,1", "range a,b of f"),
        "target": ("num", None, "log probability target for the minimal burn-in"),
    },
}

TRACE = {
    "divergence": "Hellinger integral, Rényi / KL / TV / chi-square divergences",
    "kernel": "push-forward, k-step kernel, backward channel, Dobrushin coefficient, spectrum, "
              "hypercontractivity exponent (closed form and bisection), operator norm",
    "tensor": "joint-vs-product Hellinger integral: exact enumeration, Markov tensorisation "
              "upper/lower bounds, prefix (non-Markov) bounds",
    "bound": "dependent McDiarmid bound; binary chain closed form; random-walk bound from the "
             "quadratic Hellinger growth; whole-past process bound; hypercontractive and SDPI routes; "
             "mean-gap shift for joint centering",
    "compare": "crossovers against the contraction-coefficient (Kontorovich), spectral-gap (Fan) "
               "and blowing-up (Marton) bounds",
    "simulate": "Monte Carlo tails with exact binomial 99%% intervals vs. every bound",
    "oracle": "exact tails, joint/product means, median, exact Hellinger integral",
    "mcmc": "burn-in bound with its spectral baseline and the minimal burn-in",
}


# ---------------------------------------------------------------------------
# Parsing


def parse_alpha(v) -> float:
    if isinstance(v, (int, float)):
        a = float(v)
    else:
        s = str(v).strip().lower()
        a = math.inf if s in ("inf", "infinity", "∞") else float(parse_prob(s))
    return a


def parse_num(v) -> float:
    return float(parse_prob(v)) if isinstance(v, str) else float(v)


def parse_matrix(text: str) -> Kernel:
    rows = [[c.strip() for c in r.split(",") if c.strip()] for r in text.split(";") if r.strip()]
    return Kernel.from_rows(rows)


def _kind_schema(kind) -> dict:
    if kind is int:
        return {"type": "integer"}
    if kind is str:
        return {"type": ["string", "number"]}
    if kind in ("num", "alpha"):
        return {"type": ["string", "number"]}
    if isinstance(kind, tuple):
        return {"enum": list(kind)}
    raise TypeError(kind)


def build_schema() -> dict:
    """JSON schema for configuration files; one branch per command."""
    branches = []
    for cmd, opts in OPTIONS.items():
        props = {"command": {"const": cmd}}
        for name, (kind, default, help_) in {**COMMON, **opts}.items():
            sch = _kind_schema(kind)
            if default is None:
                sch["type"] = [*sch["type"], "null"] if isinstance(sch["type"], list) else [sch["type"], "null"]
            props[name] = {**sch, "description": help_}
        branches.append({"type": "object", "properties": props, "required": ["command"],
                         "additionalProperties": False})
    return {"$schema": "https://json-schema.org/draft/2020-12/schema",
            "title": "depbound run configuration", "oneOf": branches}


def load_schema() -> dict:
    return json.loads(resources.files("depbound").joinpath("schema.json").read_text(encoding="utf-8"))


def validate_config(cfg: dict) -> None:
    import jsonschema

    try:
        jsonschema.validate(cfg, load_schema())
    except jsonschema.ValidationError as e:
        raise ConfigError(f"configuration rejected: {e.message}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="depbound", description="Concentration bounds for dependent processes.",
                formatter_class=argparse.RawDescriptionHelpFormatter,
                epilog="scenarios: " + ", ".join(SCENARIOS + ("mcmc",)) + "\n\n" +
                       "\n".join(f"{c}: {d}" for c, d in TRACE.items()))
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for cmd, opts in OPTIONS.items():
        sp = sub.add_parser(cmd, help=TRACE[cmd], description=TRACE[cmd],
                            epilog="scenarios: " + ", ".join(opts.get("scenario", ((),))[0] or ()),
                            formatter_class=argparse.RawDescriptionHelpFormatter)
        sp.add_argument("--config", default=argparse.SUPPRESS, help="JSON configuration file")
        for name, (kind, default, help_) in {**COMMON, **opts}.items():
            flag = "--" + name.replace("_", "-")
            kw: dict[str, Any] = {"dest": name, "default": argparse.SUPPRESS,
                                  "help": f"{help_} (default: {default})"}
            if isinstance(kind, tuple):
                kw["choices"] = kind
            elif kind is int:
                kw["type"] = int
            sp.add_argument(flag, **kw)
    return p


def resolve(argv: list[str]) -> dict:
    """defaults <- config file <- command-line flags; env DEPBOUND_SEED wins over all."""
    ns = vars(make_parser().parse_args(argv))
    cmd = ns.pop("command")
    cfg: dict[str, Any] = {}
    if "config" in ns:
        path = ns.pop("config")
        try:
            cfg = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        cfg.setdefault("command", cmd)
        if cfg["command"] != cmd:
            raise ConfigError(f"config is for {cfg['command']!r}, not {cmd!r}")
        validate_config(cfg)
    merged = {name: default for name, (_, default, _) in {**COMMON, **OPTIONS[cmd]}.items()}
    merged.update({k: v for k, v in cfg.items() if k != "command"})
    merged.update(ns)
    if os.environ.get("DEPBOUND_SEED"):
        try:
            merged["seed"] = int(os.environ["DEPBOUND_SEED"])
        except ValueError:
            raise ConfigError("DEPBOUND_SEED must be an integer") from None
    merged["command"] = cmd
    validate_config(merged)
    return merged


# ---------------------------------------------------------------------------
# Commands


def _t_value(text, n: int) -> float:
    s = str(text).strip()
    if s == "sqrt_n":
        return math.sqrt(n)
    return parse_num(s)


def _process(cfg):
    sc = cfg["scenario"]
    if sc == "binary":
        return binary_chain(parse_prob(cfg["lambda"]))
    if sc == "ssrw":
        return SSRW()
    return NonMarkovBinary()


def cmd_divergence(cfg):
    if cfg["nu"] is None or cfg["mu"] is None:
        raise ConfigError("--nu and --mu are required")
    nu, mu = Dist.parse(cfg["nu"]), Dist.parse(cfg["mu"])
    kind = cfg["kind"]
    alpha = parse_alpha(cfg["alpha"])
    out: dict[str, Any] = {"kind": kind}
    if kind == "hellinger":
        out["alpha"] = alpha
        lv = log_hellinger(nu, mu, alpha)
        out["log_H_alpha"] = lv
        if math.isinf(alpha):
            out["H_alpha"] = f"ess-sup ratio ≈ {math.exp(lv):.4f}"
        elif alpha == int(alpha) and nu.exact is not None and mu.exact is not None:
            fr = hellinger_integral_exact(nu, mu, int(alpha))
            out["H_alpha"] = f"{fr} ≈ {float(fr):.4f}"
            out["value"] = float(fr)
        else:
            out["H_alpha"] = f"≈ {math.exp(lv):.4f}"
        out.setdefault("value", math.exp(lv))
    else:
        k = {"kl": DivergenceKind.kl(), "tv": DivergenceKind.tv(), "chi2": DivergenceKind.chi2(),
             "renyi": DivergenceKind.renyi(alpha)}[kind]
        if kind == "renyi":
            out["alpha"] = alpha
        out["value"] = divergence(k, nu, mu)
    return out, [out]


def _kernel_from(cfg) -> Kernel:
    given = [k for k in ("matrix", "stay", "flip") if cfg.get(k) is not None]
    if len(given) > 1:
        raise ConfigError("give only one of --matrix, --stay, --flip")
    if cfg.get("matrix"):
        return parse_matrix(cfg["matrix"])
    if cfg.get("stay") is not None:
        return Kernel.binary_stay(cfg["stay"])
    if cfg.get("flip") is not None:
        return Kernel.binary_flip(cfg["flip"])
    return Kernel.binary_flip(parse_prob(cfg.get("lambda", "1/4")))


def cmd_kernel(cfg):
    if not any(cfg.get(k) is not None for k in ("matrix", "stay", "flip")):
        raise ConfigError("one of --matrix, --stay, --flip is required")
    K = _kernel_from(cfg)
    an = spectral(K)
    out: dict[str, Any] = {"kernel": K.to_json(), "analysis": an.to_dict(), "eta_tv": dobrushin_tv(K)}
    if cfg["power"] != 1:
        out["power"] = {"k": cfg["power"], "kernel": k_step(K, cfg["power"]).to_json()}
    mu = Dist.parse(cfg["mu"], K.states) if cfg["mu"] else an.stationary
    out["mu"] = mu.to_json()
    if cfg["mu"]:
        out["mu_K"] = apply_kernel(mu, K).to_json()
    B = backward_channel(K, mu)
    out["backward_channel"] = B.to_json()
    if cfg["alpha"] is not None:
        alpha = parse_alpha(cfg["alpha"])
        gs: dict[str, Any] = {"alpha": alpha}
        if an.gamma_star is not None and np.allclose(mu.probs, an.stationary.probs):
            gs["closed_form"] = an.gamma_star(alpha)
        if math.isfinite(alpha):
            gs["bisection"] = gamma_star_numeric(K, mu, alpha, tol=1e-4)
        out["gamma_star"] = gs
        if cfg["gamma"] is not None:
            est = operator_norm(K, mu, alpha, parse_num(cfg["gamma"]))
            out["operator_norm"] = {"alpha": alpha, "gamma": parse_num(cfg["gamma"]), "value": est.value}
    return out, [{"eta_tv": out["eta_tv"], "second_eigenvalue": an.second_eigenvalue,
                  "absolute_gap": an.absolute_gap}]


def cmd_tensor(cfg):
    proc = _process(cfg)
    n, alpha = cfg["n"], parse_alpha(cfg["alpha"])
    out: dict[str, Any] = {"scenario": cfg["scenario"], "n": n, "alpha": alpha}
    if n <= ENUM_MAX_N:
        out["exact_log_H"] = exact_joint_hellinger(proc, n, alpha).value
    if proc.is_markov:
        up_s = HolderSchedule.geometric(n) if cfg["schedule"] == "geometric" else HolderSchedule.to_one()
        lo_s = HolderSchedule.geometric_lower(n) if cfg["schedule"] == "geometric" else HolderSchedule.to_one()
        up = tensor_upper_markov(proc, n, alpha, up_s)
        lo = tensor_lower_markov(proc, n, alpha, lo_s)
        out["schedule"] = cfg["schedule"]
    else:
        up = tensor_upper_general(proc, n, alpha)
        lo = tensor_lower_general(proc, n, alpha)
        out["schedule"] = "whole-prefix extremes"
    out.update(upper_log_H=up.value, lower_log_H=lo.value, per_step_upper=up.per_step,
               argmax_states=up.argmax_states)
    row = {k: out.get(k) for k in ("scenario", "n", "alpha", "exact_log_H", "lower_log_H", "upper_log_H")}
    return out, [row]


def _bound_one(cfg, proc, n, t, alpha):
    sc, route = cfg["scenario"], cfg["route"]
    if route == "closed":
        if sc == "binary":
            return binary_chain_bound(parse_prob(cfg["lambda"]), n, t, alpha)
        if sc == "ssrw":
            return ssrw_bound(n, t, alpha, cfg["centering"])
        return nonmarkov_bound(n, t, BoundParams(n, t, alpha).beta)
    if route == "general":
        return general_process_bound(proc, BoundParams(n, t, alpha))
    return markov_chain_bound(proc, BoundParams(n, t, alpha), route)


def cmd_bound(cfg):
    n = cfg["n"]
    t = _t_value(cfg["t"], n)
    proc = _process(cfg)
    if cfg["centering"] == "joint" and not (cfg["scenario"] == "ssrw" and cfg["route"] == "closed"):
        raise ConfigError("joint centering is available for the random-walk closed form")
    a = str(cfg["alpha"]).strip().lower()
    if a == "opt":
        alpha, rep = optimize_alpha(lambda al: _bound_one(cfg, proc, n, t, al))
    else:
        alpha = parse_alpha(a)
        rep = _bound_one(cfg, proc, n, t, alpha)
    out = rep.to_dict()
    out["scenario"] = cfg["scenario"]
    out["alpha"] = alpha
    row = {"method": rep.method, "n": n, "t": t, "log_bound": rep.log_bound, "centering": rep.centering,
           "trivial": rep.trivial}
    return out, [row]


def cmd_compare(cfg):
    n, alpha, pair = cfg["n"], parse_alpha(cfg["alpha"]), cfg["pair"]
    lam = float(parse_prob(cfg["lambda"]))
    general = pair.endswith("-general")
    if general != (cfg["scenario"] == "general"):
        raise ConfigError("general pairs go with --scenario general, binary pairs with binary")
    K = parse_matrix(cfg["matrix"]) if cfg["matrix"] else None
    cr = crossover_threshold(pair, n, alpha, lam=lam, K=K)
    tbar = cr.exact
    t_min = parse_num(cfg["t_min"]) if cfg["t_min"] is not None else 0.5 * tbar
    t_max = parse_num(cfg["t_max"]) if cfg["t_max"] is not None else 2.0 * tbar
    ts = np.linspace(t_min, t_max, cfg["points"]) if cfg["points"] > 1 else np.array([t_min])
    rows = []
    for t in ts:
        t = float(t)
        if general:
            ours, theirs = _general_pair_logs(pair, cr, n, t, alpha)
        else:
            try:
                ours, theirs = binary_pair_logs(pair, n, t, lam, alpha)
            except PreconditionT:
                # below the blowing-up bound's validity floor only our side is defined
                ours, theirs = binary_median_ours(n, t, lam).log_bound, None
        rows.append({"pair": pair, "n": n, "t": t, "crossover_t": tbar, "ours_log_bound": ours,
                     "baseline_log_bound": theirs,
                     "ours_smaller": None if theirs is None else bool(ours < theirs)})
    return {"crossover": cr.to_dict(), "alpha": alpha, "rows": rows}, rows


def _general_pair_logs(pair, cr, n, t, alpha):
    beta = BoundParams(n, t, alpha).beta
    L = cr.extras["L"]
    ours = (math.log(2) - 2 * n * t * t + (n - 1) * L) / beta
    if pair == "ours-vs-kontorovich-general":
        M = cr.extras["M_n"]
        theirs = math.log(2) - n * t * t / (2 * M * M)
    else:
        lam = cr.extras["lambda_abs"]
        theirs = math.log(2) - (1 - lam) / (1 + lam) * 2 * n * t * t
    return ours, theirs


def _scenario_bounds(cfg, proc, n, t, alpha, exact_H=None):
    """Every applicable bound for the scenario at (n, t, alpha)."""
    sc = cfg["scenario"]
    reps = []
    if sc == "binary":
        reps.append(binary_chain_bound(parse_prob(cfg["lambda"]), n, t, alpha))
        for route in ("sdpi", "hyper"):
            reps.append(markov_chain_bound(proc, BoundParams(n, t, alpha), route))
    elif sc == "ssrw":
        reps.append(ssrw_bound(n, t, alpha))
        reps.append(markov_chain_bound(proc, BoundParams(n, t, alpha), "tensor"))
        reps.append(markov_chain_bound(proc, BoundParams(n, t, alpha), "sdpi"))
    else:
        reps.append(nonmarkov_bound(n, t, BoundParams(n, t, alpha).beta))
        if n <= ENUM_MAX_N:
            reps.append(general_process_bound(proc, BoundParams(n, t, alpha)))
    if exact_H is not None:
        r = mcdiarmid_dep_bound(BoundParams(n, t, alpha), exact_H, "exact_H")
        reps.append(r)
    return reps


def cmd_simulate(cfg):
    proc = _process(cfg)
    n, alpha = cfg["n"], parse_alpha(cfg["alpha"])
    f = functional_by_name(cfg["functional"])
    if f.name != "normalized_mean":
        raise ConfigError("bounds are certified for normalized_mean only; use oracle for other functionals")
    ts = [_t_value(s, n) for s in str(cfg["t"]).split(",") if s.strip()]
    ests = empirical_tails(proc, n, f, "product", ts, cfg["samples"], cfg["seed"])
    rows = []
    for t, est in zip(ts, ests):
        for rep in _scenario_bounds(cfg, proc, n, t, alpha):
            bound = math.exp(min(rep.log_bound, 0.0))
            rows.append({"scenario": cfg["scenario"], "n": n, "t": t, "method": rep.method,
                         "log_bound": rep.log_bound, "empirical": est.point, "ci_high": est.ci_high,
                         "dominated": bool(est.ci_high <= bound)})
    return {"rng": RNG_NAME, "samples": cfg["samples"], "rows": rows}, rows


def cmd_oracle(cfg):
    proc = _process(cfg)
    n, alpha = cfg["n"], parse_alpha(cfg["alpha"])
    if n > ENUM_MAX_N:
        raise ConfigError(f"enumeration is limited to n <= {ENUM_MAX_N}")
    t = _t_value(cfg["t"], n)
    f = functional_by_name(cfg["functional"])
    et = exact_tail(TailQuery(proc, n, t, f, cfg["center"]))
    logH = exact_joint_hellinger(proc, n, alpha).value
    out = {"scenario": cfg["scenario"], "n": n, "t": t, "alpha": alpha, "center": cfg["center"],
           "exact_tail": et.prob, "joint_mean": et.joint_mean, "product_mean": et.product_mean,
           "median": et.median, "exact_log_H": logH}
    rows = []
    if f.name == "normalized_mean" and cfg["center"] == "product":
        for rep in _scenario_bounds(cfg, proc, n, t, alpha, logH):
            rows.append({"scenario": cfg["scenario"], "n": n, "t": t, "method": rep.method,
                         "log_bound": rep.log_bound, "exact": et.prob,
                         "dominated": bool(et.prob <= math.exp(min(rep.log_bound, 0.0)))})
    out["bounds"] = rows
    return out, rows or [out]


def cmd_mcmc(cfg):
    if cfg["matrix"]:
        K = parse_matrix(cfg["matrix"])
    else:
        K = Kernel.binary_flip(parse_prob(cfg["lambda"]))
    nu = Dist.parse(cfg["nu"], K.states) if cfg["nu"] else Dist.point(K.states[0], K.states)
    a, b = (parse_num(v) for v in str(cfg["range"]).split(","))
    alpha, t = parse_alpha(cfg["alpha"]), parse_num(cfg["t"])
    rep = mcmc_bound(nu, K, cfg["n0"], cfg["n"], t, alpha, (a, b))
    out = rep.to_dict()
    if cfg["target"] is not None:
        out["min_burnin"] = min_burnin(nu, K, cfg["n"], t, alpha, parse_num(cfg["target"]))
    rows = [{"method": "ours", "n": cfg["n"], "t": t, "log_bound": rep.log_bound, "centering": rep.centering},
            {"method": "fan", "n": cfg["n"], "t": t, "log_bound": rep.extras["fan_log_bound"],
             "centering": rep.centering}]
    return out, rows


COMMANDS = {"divergence": cmd_divergence, "kernel": cmd_kernel, "tensor": cmd_tensor,
            "bound": cmd_bound, "compare": cmd_compare, "simulate": cmd_simulate,
            "oracle": cmd_oracle, "mcmc": cmd_mcmc}


def _fail(code: int, err: BaseException) -> int:
    sys.stderr.write(json.dumps({"error": type(err).__name__, "message": str(err), "exit_code": code},
                                sort_keys=True) + "\n")
    return code


def run(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    if any(a in ("-h", "--help", "--version") for a in argv):
        try:
            make_parser().parse_args(argv)
        except SystemExit as e:
            return int(e.code or 0)
    try:
        cfg = resolve(argv)
    except ConfigError as e:
        return _fail(2, e)
    manifest = {"config": cfg, "version": __version__, "rng": RNG_NAME}
    try:
        payload, rows = COMMANDS[cfg["command"]](cfg)
    except ConfigError as e:
        return _fail(2, e)
    except DepboundError as e:
        return _fail(3, e)
    except (ValueError, ZeroDivisionError) as e:
        return _fail(2, e)
    out = cfg["out"]
    try:
        if cfg["format"] == "json":
            text = emit_report({**payload, "manifest": manifest}, "json", out)
        else:
            text = emit_report(rows, "csv", out)
            if out:
                emit_report(manifest, "json", str(out) + ".manifest.json")
            else:
                sys.stderr.write(json.dumps({"manifest": manifest}, sort_keys=True, default=str) + "\n")
    except OSError as e:
        return _fail(3, e)
    if out is None:
        sys.stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
