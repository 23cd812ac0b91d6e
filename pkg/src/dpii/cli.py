"""Command-line entry point: ``dpii <command> [--flags]``.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure,
3 certificate did not pass (``certify`` only).
"""
from __future__ import annotations

import argparse
import contextlib
import hashlib
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NotDominant, NumericalFailure, ParseError

log = logging.getLogger("dpii")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_CERT = 0, 1, 2, 3

COMMON = {
    "out_dir": (str, "dpii_out"),
    "seed": (int, 0),
    "tol": (float, 1e-10),
    "x_left": (float, -12.0),
    "x_anchor": (float, -4.5),
    "delta_split": (float, 1.0),
}

REQUIRED = object()

SCHEMA = {
    "solve": {"n": (int, REQUIRED), "t": (float, REQUIRED), "eps": (float, REQUIRED),
              "solve_tol": (float, 1e-12)},
    "pii": {"form": (str, "U"), "omega": (float, None), "b": (float, 0.0), "x_stop": (float, 5.0)},
    "polemap": {"omegas": ("floats", [3.0, 2.0, 1.0, 0.5, 0.0, -0.5, -1.0, -2.0, -3.0, -4.0]),
                "cache": (str, None)},
    "hm": {"rel_gap": (float, 1e-3)},
    "verify-bounds": {"omegas": ("floats", [2.0, 0.5, -1.0])},
    "certify": {"n": (int, REQUIRED), "omega": (float, REQUIRED), "eps": (float, 1.0),
                "solve_tol": (float, 1e-12)},
    "scaling": {"sigma": (float, 0.0), "eps": (float, 1.0), "n_list": ("ints", [2000, 8000, 32000]),
                "x_probe": ("floats", [-0.5, -1.0, -2.0, -4.0]), "solve_tol": (float, 1e-12)},
    "figure1": {"sigma": (float, 1.0), "x_lo": (float, -12.0), "x_hi": (float, None),
                "num": (int, 400)},
}

POSITIVE = {"tol", "solve_tol", "delta_split", "rel_gap", "num", "n"}


@dataclass
class RunConfig:
    """A validated command with its parameters."""

    command: str
    parameters: dict = field(default_factory=dict)
    out_dir: str = "dpii_out"
    seed: int = 0

    def to_dict(self):
        return dict(command=self.command, out_dir=self.out_dir, seed=self.seed, **self.parameters)

    def serialize(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def config_hash(self):
        """Hash of everything that affects the results (not the output location)."""
        d = self.to_dict()
        d.pop("out_dir")
        canon = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _coerce(key, kind, value):
    try:
        if value is None:
            return None
        if kind == "floats":
            if isinstance(value, str):
                value = [v for v in value.split(",") if v.strip()]
            return [float(v) for v in value]
        if kind == "ints":
            if isinstance(value, str):
                value = [v for v in value.split(",") if v.strip()]
            return [int(v) for v in value]
        if kind is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            if isinstance(value, bool):
                raise ValueError
            return int(value)
        if kind is float:
            if isinstance(value, bool):
                raise ValueError
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise ParseError(f"bad value {value!r} for key {key!r}", key=key) from None


def validate(raw):
    """Build a RunConfig from a plain mapping; unknown keys are rejected."""
    if not isinstance(raw, dict):
        raise ParseError("configuration must be a JSON object")
    command = raw.get("command")
    if command not in SCHEMA:
        raise ParseError(f"unknown or missing command {command!r}", key="command")
    schema = dict(COMMON, **SCHEMA[command])
    for key in raw:
        if key != "command" and key not in schema:
            raise ParseError(f"unknown key {key!r} for command {command!r}", key=key)
    params = {}
    for key, (kind, default) in schema.items():
        if key in raw and raw[key] is not None:
            val = _coerce(key, kind, raw[key])
        elif default is REQUIRED:
            raise ParseError(f"missing required key {key!r}", key=key)
        else:
            val = default
        if key in POSITIVE and val is not None and not val > 0:
            raise ParseError(f"key {key!r} must be positive, got {val!r}", key=key)
        if isinstance(val, float) and not math.isfinite(val):
            raise ParseError(f"key {key!r} must be finite", key=key)
        params[key] = val
    out_dir = params.pop("out_dir")
    seed = params.pop("seed")
    return RunConfig(command, params, out_dir, seed)


def load_config(path):
    """Read and validate a JSON configuration file.

    Raises
    ------
    ParseError
        On malformed JSON (with its line), unknown keys or invalid values.
    """
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}: {exc.msg}", line=exc.lineno) from None
    return validate(raw)


@contextlib.contextmanager
def atomic_path(path):
    """Yield a temporary path that replaces ``path`` on success."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    os.close(fd)
    try:
        yield tmp
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def _write_json(path, payload):
    with atomic_path(path) as tmp:
        with open(tmp, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _finite_or_none(v):
    return v if v is None or math.isfinite(v) else None


# ---------------------------------------------------------------- commands

def _cmd_solve(cfg, ctx):
    from .discrete import DpiiInstance, SolveInfo, solve
    p = cfg.parameters
    inst = DpiiInstance(p["n"], p["t"], p["eps"])
    info = SolveInfo()
    state = solve(inst, "AUTO", p["solve_tol"], info=info)
    with atomic_path(ctx.path("solution.csv")) as tmp:
        state.write_csv(tmp, ctx.comments)
    with atomic_path(ctx.path("instance.json")) as tmp:
        inst.to_json(tmp, config_hash=ctx.hash)
    head = ", ".join(f"{v:.6f}" for v in state.a[:3])
    more = ", ..." if state.a.size > 3 else ""
    ctx.summary(f"solve n={inst.n} t={inst.t:g} eps={inst.eps:g}: a_0 = {state.a[0]:.6f} "
                f"[{head}{more}] residual {info.residual:.2e} in {info.iterations} iterations")
    return EXIT_OK


def _cmd_pii(cfg, ctx):
    from .pii import PiiForm, asymptotic_init, integrate, write_trajectory_csv
    p = cfg.parameters
    form = PiiForm(p["form"], p["omega"] if p["form"] == "NU" else None)
    x0 = p["x_left"]
    u0, up0 = asymptotic_init(form, x0, p["b"])
    traj = integrate(form, (x0, u0, up0), p["x_stop"], p["tol"])
    with atomic_path(ctx.path("trajectory.csv")) as tmp:
        write_trajectory_csv(tmp, traj, ctx.comments)
    end = f"pole at {traj.pole:.12g}" if traj.pole is not None else f"reached x={traj.grid[-1]:.6g}"
    ctx.summary(f"pii {form} b={p['b']:g} from x={x0:g}: {len(traj)} samples, {end}")
    return EXIT_OK


def _cmd_polemap(cfg, ctx):
    from .tronquee import PoleMap, b_of_pole
    p = cfg.parameters
    cache = PoleMap()
    if p["cache"] and os.path.exists(p["cache"]):
        cache = PoleMap.read_csv(p["cache"])
    keys = []
    for w in p["omegas"]:
        k = b_of_pole(w, p["tol"], x_left=p["x_anchor"], cache=cache)
        cache = cache.with_keys(k)
        keys.append(k)
        log.info("omega=%g -> b=%.12g delta=%.6g x_left=%g", w, k.b, k.delta, k.x_left)
    out = PoleMap(tuple(keys))
    with atomic_path(ctx.path("polemap.csv")) as tmp:
        out.write_csv(tmp, ctx.comments)
    if p["cache"]:
        with atomic_path(p["cache"]) as tmp:
            cache.write_csv(tmp, ctx.comments)
    ctx.summary(f"polemap: {len(keys)} members, b in [{min(k.b for k in keys):.6g}, "
                f"{max(k.b for k in keys):.6g}]")
    return EXIT_OK


def _cmd_hm(cfg, ctx):
    from .pii import PiiForm, convert, identity_residual, write_trajectory_csv
    from .special import airy_ai
    from .tronquee import hastings_mcleod
    p = cfg.parameters
    hm = hastings_mcleod(p["tol"], x_left=p["x_anchor"], x_ext=p["x_left"], rel_gap=p["rel_gap"])
    yy = convert(hm, PiiForm.yy())
    y0 = yy.evaluate(0.0)[0]
    ratio = yy.evaluate(4.0)[0] / airy_ai(4.0) if yy.grid[-1] >= 4.0 else math.nan
    with atomic_path(ctx.path("hm.csv")) as tmp:
        write_trajectory_csv(tmp, yy, ctx.comments)
    _write_json(ctx.path("hm.json"), dict(
        config_hash=ctx.hash, yy0_at_0=y0, yy0_over_ai_at_4=_finite_or_none(ratio),
        resolved_to_yy=float(yy.grid[-1]), identity_residual_at_0=identity_residual(hm, 0.0)))
    ctx.summary(f"hm: yy0(0) = {y0:.10f}, yy0(4)/Ai(4) = {ratio:.6f}, "
                f"resolved to x = {yy.grid[-1]:.4g} (YY)")
    return EXIT_OK


def _cmd_verify_bounds(cfg, ctx):
    from .pii import identity_residual, yprime_bound_margin
    from .tronquee import (b_of_pole, family_trajectory, hastings_mcleod,
                           lower_bound_margin)
    p = cfg.parameters
    rows = []
    trajs = [("hm", math.inf, hastings_mcleod(p["tol"], x_left=p["x_anchor"], x_ext=p["x_left"]))]
    for w in p["omegas"]:
        k = b_of_pole(w, p["tol"], x_left=p["x_anchor"])
        trajs.append((f"omega={w:g}", w, family_trajectory(k.delta, k.x_left, tol=p["tol"],
                                                           x_ext=p["x_left"])))
    ok = True
    for name, w, tr in trajs:
        m = lower_bound_margin(tr)
        x_id = tr.grid[-1] if not math.isfinite(w) else w - 0.5
        rows.append(dict(trajectory=name, omega=_finite_or_none(w),
                         margin_4=m.min_margin, argmin_4=m.argmin_x,
                         margin_2=m.alt_min_margin, argmin_2=m.alt_argmin_x,
                         yprime_margin=yprime_bound_margin(tr),
                         identity_residual=float(abs(identity_residual(tr, x_id)))))
        ok &= m.min_margin > 0
    _write_json(ctx.path("bounds.json"), dict(config_hash=ctx.hash, rows=rows))
    worst = min(r["margin_4"] for r in rows)
    worst2 = min(r["margin_2"] for r in rows)
    ctx.summary(f"verify-bounds: {len(rows)} trajectories, min margin {worst:.4g} (1-4x^3), "
                f"{worst2:.4g} (1-2x^3)")
    return EXIT_OK if ok else EXIT_NUMERICAL


def _cmd_certify(cfg, ctx):
    from .approx import ApproxConfig, approximation_error, build_a0, nu_for
    from .certify import kantorovich_certificate
    from .discrete import solve
    p = cfg.parameters
    acfg = ApproxConfig(p["omega"], p["eps"], p["n"], p["delta_split"])
    inst = acfg.instance()
    a0 = build_a0(acfg, nu_for(acfg, p["tol"]))
    base = dict(n=acfg.n, omega=acfg.omega, eps=acfg.eps, config_hash=ctx.hash)
    try:
        cert = kantorovich_certificate(inst, a0)
        payload = dict(cert.to_dict(), **base)
    except (NotDominant, DomainError) as exc:
        payload = dict(beta=None, M=None, product=None, t_star=None, gamma_min=None,
                       gammaD_min=None, f_norm=float(np.max(np.abs(_f(inst, a0)))),
                       reason=str(exc), **base)
        payload["pass"] = False
    if payload["pass"]:
        a_star = solve(inst, a0, p["solve_tol"])
        dist = approximation_error(a_star, a0)
        payload["distance"] = dist
        payload["contained"] = bool(dist <= payload["t_star"])
    _write_json(ctx.path("certificate.json"), payload)
    if payload["pass"]:
        ctx.summary(f"certify n={acfg.n} omega={acfg.omega:g}: pass, beta*M = "
                    f"{payload['product']:.3e}, t* = {payload['t_star']:.3e}, "
                    f"|a*-a0| = {payload['distance']:.3e}")
        return EXIT_OK
    why = payload.get("reason")
    if why is None:
        why = ("Lipschitz ball leaves the interior" if payload["product"] is None
               else f"beta*M = {payload['product']:.3g}")
    ctx.summary(f"certify n={acfg.n} omega={acfg.omega:g}: FAIL ({why})")
    return EXIT_CERT


def _f(inst, a0):
    from .discrete import f_map
    return f_map(inst, a0)


def _cmd_scaling(cfg, ctx):
    from .scaling import ScalingConfig, run_scaling
    p = cfg.parameters
    scfg = ScalingConfig(p["sigma"], p["eps"], tuple(p["n_list"]), tuple(p["x_probe"]))
    rep = run_scaling(scfg, p["tol"], out_dir=ctx.out_dir, solve_tol=p["solve_tol"],
                      comments=ctx.comments)
    with atomic_path(ctx.path("scaling.json")) as tmp:
        with open(tmp, "w") as fh:
            fh.write(rep.to_json(config_hash=ctx.hash) + "\n")
    slope = "n/a" if rep.slope is None else f"{rep.slope:.3f}"
    ctx.summary(f"scaling sigma={scfg.sigma:g}: sup errors "
                + ", ".join(f"{e:.3e}" for e in rep.sup_errors) + f"; slope {slope}")
    return EXIT_OK if not rep.missing else EXIT_NUMERICAL


def _cmd_figure1(cfg, ctx):
    from .scaling import figure1_data, write_figure_csv
    p = cfg.parameters
    data = figure1_data(p["sigma"], (p["x_lo"], p["x_hi"]), p["num"], p["tol"])
    with atomic_path(ctx.path("figure1.csv")) as tmp:
        write_figure_csv(tmp, data, ctx.comments)
    m = data["u"] - np.fmax(data["bound_e"], data["bound_third"])
    ctx.summary(f"figure1 sigma={p['sigma']:g}: {data['x'].size} rows, "
                f"min margin {np.nanmin(m):.4g}")
    return EXIT_OK


COMMANDS = {
    "solve": _cmd_solve, "pii": _cmd_pii, "polemap": _cmd_polemap, "hm": _cmd_hm,
    "verify-bounds": _cmd_verify_bounds, "certify": _cmd_certify,
    "scaling": _cmd_scaling, "figure1": _cmd_figure1,
}


class _Context:
    def __init__(self, cfg, stdout):
        self.out_dir = cfg.out_dir
        self.hash = cfg.config_hash()
        self.comments = (f"config_hash={self.hash}", f"command={cfg.command}")
        self._stdout = stdout
        os.makedirs(self.out_dir, exist_ok=True)

    def path(self, name):
        return os.path.join(self.out_dir, name)

    def summary(self, line):
        print(line, file=self._stdout)


# ------------------------------------------------------------------ parser

class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser():
    parser = _Parser(prog="dpii", description="Discrete and continuous Painleve II toolkit.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name, schema in SCHEMA.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON configuration (flags take precedence)")
        sp.add_argument("--out", dest="out_dir", help="output directory")
        for key, (kind, _) in dict(COMMON, **schema).items():
            if key == "out_dir":
                continue
            sp.add_argument("--" + key.replace("_", "-"), dest=key, default=None,
                            type=str, metavar=key.upper())
    return parser


def _configure_logging():
    level = os.environ.get("DPII_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.ERROR), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def run_command(argv, stdout=None, stderr=None):
    """Parse ``argv`` (without the program name), run, return the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.command is None:
            raise _UsageError(parser.format_usage() + "dpii: error: a command is required")
        raw = {}
        if ns.config:
            raw = json.loads(load_config(ns.config).serialize())
            if raw["command"] != ns.command:
                raise ParseError(f"config is for {raw['command']!r}, not {ns.command!r}",
                                 key="command")
        raw["command"] = ns.command
        for key, val in vars(ns).items():
            if key in ("command", "config") or val is None:
                continue
            raw[key] = val
        cfg = validate(raw)
    except _UsageError as exc:
        print(str(exc), file=stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"dpii: configuration error: {exc}", file=stderr)
        return EXIT_USAGE
    try:
        ctx = _Context(cfg, stdout)
        return COMMANDS[cfg.command](cfg, ctx)
    except NumericalFailure as exc:
        print(f"dpii: numerical failure: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_NUMERICAL
    except (DomainError, ValueError) as exc:
        print(f"dpii: invalid input: {exc}", file=stderr)
        return EXIT_USAGE


def main(argv=None):
    _configure_logging()
    sys.exit(run_command(sys.argv[1:] if argv is None else argv))
