"""Command-line front end.

Every run resolves a :class:`RunConfig` (defaults, then an optional
``key = value`` config file, then command-line flags), dispatches it, and
writes exactly one report.  Reports embed the resolved config and version,
so :func:`parse_report` recovers the config that produced them.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from . import __version__
from . import channels as ch
from .dof import gic_dof_formula, xchannel_dof_sweep
from .exactnum import (
    ExactReal,
    PrecisionCapError,
    WorkLimitError,
    dirichlet_approx,
    dirichlet_profile,
    parse_real,
    precision_cap,
    work_limit,
)
from .exactnum.real import DEFAULT_PRECISION_CAP
from .exactnum.search import DEFAULT_WORK_LIMIT
from .latdyn import escape_set, z_membership
from .linforms import (
    LinearFormMatrix,
    effective_lower_bounds,
    joint_witness,
    one_form_witness,
)
from .measures import b1_probability_report, make_event, mc_probability, totient_sum_report

__all__ = ["RunConfig", "ConfigError", "dispatch", "emit_report", "parse_report", "render", "main",
           "EXIT_OK", "EXIT_PARSE", "EXIT_PRECISION", "EXIT_WORK", "EXIT_IO"]

EXIT_OK, EXIT_PARSE, EXIT_PRECISION, EXIT_WORK, EXIT_IO = 0, 2, 3, 4, 5
WORK_LIMIT_ENV = "DIOPHCOMM_WORK_LIMIT"


class ConfigError(ValueError):
    pass


# verb -> {option: default}; list-valued options hold lists of strings
_COMMON = {"seed": "0", "work_limit": None, "precision_cap": str(DEFAULT_PRECISION_CAP),
           "out": "-", "format": None}
_VERBS: dict[str, dict] = {
    "dirichlet": {"xi": None, "Q": None},
    "profile": {"xi": None, "Q": None},
    "witness": {"xi": None, "Q": None},
    "joint-profile": {"columns": None, "Q": None},
    "bound": {"variant": None, "n": None, "kappa": None, "m": "1", "Q": None, "eps": None,
              "psi": "power", "truncation": "100000"},
    "measure-b1": {"Q": None, "kappa": None},
    "totient-sum": {"Q": None},
    "mc": {"event": None, "params": "", "samples": None},
    "orbit": {"xi": None, "n": None, "s": None, "N": None, "eps": None, "delta": None},
    "channel": {"kind": None, "sub": None, "h": None, "alpha": "1", "beta": "1", "gains": None,
                "Q": "1", "lam": "1", "k": "1", "B": "2", "generators": None, "assignment": None,
                "receiver": "1", "method": "full", "samples": "100000", "noise_scale": "1",
                "subthreshold": "false", "Qs": None, "eps": None, "kappa": None},
    "dof": {"scheme": None, "eps": None, "sweep": None, "power_constant": "1", "m_g": "6",
            "model_file": None},
}
_LISTS = {
    "dirichlet": {"xi", "Q"},
    "profile": {"xi", "Q"},
    "witness": {"xi", "Q"},
    "joint-profile": {"columns", "Q"},
    "totient-sum": {"Q"},
    "orbit": {"xi", "delta"},
    "channel": {"h", "gains", "generators", "Qs"},
    "dof": {"sweep"},
}
_POSITIONAL = {"channel": ("kind", "sub"), "dof": ("scheme",)}
_CHOICES = {"kind": ("mac", "xchannel", "gic", "multiant"),
            "sub": ("constellation", "dmin", "bounds", "points", "ser", "kg-check"),
            "scheme": ("xchannel", "gic"),
            "format": ("csv", "json")}


@dataclass
class RunConfig:
    verb: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    work_limit: int = DEFAULT_WORK_LIMIT
    precision_cap: int = DEFAULT_PRECISION_CAP
    out: str = "-"
    format: str = "csv"

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls(**json.loads(text))


# parsing

def _flag(dest: str) -> str:
    return "--" + dest.replace("_", "-")


def _build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(prog="diophcomm", description="Diophantine approximation and channel models")
    parser.add_argument("--version", action="version", version=f"diophcomm {__version__}")
    sub = parser.add_subparsers(dest="verb", metavar="verb")
    subs = {}
    for verb, opts in _VERBS.items():
        sp = sub.add_parser(verb, argument_default=argparse.SUPPRESS)
        for pos in _POSITIONAL.get(verb, ()):
            sp.add_argument(pos, choices=_CHOICES[pos])
        for dest in list(opts) + list(_COMMON):
            if dest in _POSITIONAL.get(verb, ()):
                continue
            kw = {"dest": dest}
            if dest in _LISTS.get(verb, ()):
                kw["nargs"] = "+"
            if dest in _CHOICES:
                kw["choices"] = _CHOICES[dest]
            sp.add_argument(_flag(dest), **kw)
        sp.add_argument("--config", dest="config")
        subs[verb] = sp
    return parser, subs


def read_config_file(path: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment line; dashes in keys become underscores."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _split_list(value) -> list[str]:
    if isinstance(value, list):
        items = value
    else:
        items = [value]
    out = []
    for item in items:
        out.extend(x for x in re.split(r"[,\s]+", item) if x)
    return out


def resolve_config(argv: list[str]) -> RunConfig:
    parser, _ = _build_parser()
    ns = vars(parser.parse_args(argv))
    verb = ns.pop("verb", None)
    if verb is None:
        raise ConfigError("no verb given")
    opts = {**_VERBS[verb], **_COMMON}
    merged = dict(opts)
    env_limit = os.environ.get(WORK_LIMIT_ENV)
    if env_limit:
        merged["work_limit"] = env_limit
    cfg_path = ns.pop("config", None)
    if cfg_path is not None:
        try:
            file_vals = read_config_file(cfg_path)
        except OSError as exc:
            raise ConfigError(f"cannot read config {cfg_path}: {exc}") from exc
        unknown = sorted(set(file_vals) - set(opts))
        if unknown:
            raise ConfigError(f"unknown config keys for {verb}: {', '.join(unknown)}")
        merged.update(file_vals)
    merged.update(ns)
    for pos in _POSITIONAL.get(verb, ()):
        if merged.get(pos) not in _CHOICES[pos]:
            raise ConfigError(f"{pos} must be one of {_CHOICES[pos]}")
    fmt = merged.pop("format") or ("json" if verb == "channel" else "csv")
    if fmt not in _CHOICES["format"]:
        raise ConfigError("format must be csv or json")
    try:
        seed = int(merged.pop("seed"))
        wl = merged.pop("work_limit")
        wl = DEFAULT_WORK_LIMIT if wl is None else int(float(wl))
        pc = int(merged.pop("precision_cap"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = merged.pop("out")
    params = {}
    for key, value in merged.items():
        if value is None:
            continue
        params[key] = _split_list(value) if key in _LISTS.get(verb, ()) else value
    return RunConfig(verb, dict(sorted(params.items())), seed, wl, pc, out, fmt)


# rendering

def render(value) -> str:
    """Exact rationals as ``num/den``, other exact reals as grammar strings, floats by repr."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, ExactReal):
        if value.is_rational():
            return render(value.as_fraction())
        try:
            return value.to_text()
        except ValueError:
            return repr(float(value))
    if isinstance(value, (tuple, list)):
        return " ".join(render(v) for v in value)
    return str(value)


def _json_value(value):
    if value is None or isinstance(value, (bool, int, float)):
        if isinstance(value, float) and not math.isfinite(value):
            return repr(value)
        return value
    return render(value)


def emit_report(config: RunConfig, records: list[dict]) -> str:
    """Serialise records as CSV (``#`` preamble, header, rows) or its JSON mirror."""
    if not records:
        columns: list[str] = []
    else:
        columns = list(records[0])
        if any(list(r) != columns for r in records):
            raise ValueError("records must share one column layout")
    if config.format == "json":
        doc = {"version": __version__, "config": json.loads(config.to_json()), "columns": columns,
               "records": [{c: _json_value(r[c]) for c in columns} for r in records]}
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# diophcomm {__version__}\n")
    buf.write(f"# config {config.to_json()}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in records:
        w.writerow([render(r[c]) for c in columns])
    return buf.getvalue()


def _json_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    return str(v)


def parse_report(text: str) -> tuple[RunConfig, list[dict[str, str]]]:
    """Config and string-valued records of a CSV or JSON report."""
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        cfg = RunConfig(**doc["config"])
        return cfg, [{c: _json_cell(r[c]) for c in doc["columns"]} for r in doc["records"]]
    lines = text.splitlines()
    cfg = None
    body = []
    for line in lines:
        if line.startswith("# config "):
            cfg = RunConfig.from_json(line[len("# config "):])
        elif not line.startswith("#"):
            body.append(line)
    if cfg is None:
        raise ValueError("report has no config line")
    rows = list(csv.reader(body))
    if not rows:
        return cfg, []
    header = rows[0]
    return cfg, [dict(zip(header, r)) for r in rows[1:]]


# verb handlers

def _need(p: dict, key: str):
    if key not in p:
        raise ConfigError(f"missing parameter --{key.replace('_', '-')}")
    return p[key]


def _ints(values) -> list[int]:
    try:
        return [int(v) for v in values]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _int(p: dict, key: str) -> int:
    return _ints([_need(p, key)])[0]


def _reals(values) -> list[ExactReal]:
    return [parse_real(v) for v in values]


def _bool(text: str) -> bool:
    t = str(text).lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _do_dirichlet(cfg, p):
    xi = _reals(_need(p, "xi"))
    if len(xi) != 1:
        raise ConfigError("dirichlet takes one xi")
    rows = []
    for Q in _ints(_need(p, "Q")):
        pp, q = dirichlet_approx(xi[0], Q)
        rows.append({"xi": xi[0], "Q": Q, "p": pp, "q": q, "distance": abs(xi[0] * q - pp),
                     "profile": dirichlet_profile(xi[0], Q)})
    return rows


def _do_witness(cfg, p, with_profile: bool):
    xi = _reals(_need(p, "xi"))
    rows = []
    for Q in _ints(_need(p, "Q")):
        w = one_form_witness(xi, Q)
        row = {"n": len(xi), "Q": Q, "xi": xi, "p": w.p[0], "q": w.q, "value": w.value}
        if with_profile:
            row["profile"] = w.value * Q ** len(xi)
        rows.append(row)
    return rows


def _parse_columns(items: list[str]) -> LinearFormMatrix:
    # columns separated by ';' inside items, entries by ',' or whitespace
    text = " ".join(items)
    cols = [c.split() for c in text.replace(",", " ").split(";") if c.strip()]
    return LinearFormMatrix.from_columns([_reals(c) for c in cols])


def _do_joint(cfg, p):
    Xi = _parse_columns(_need(p, "columns"))
    rows = []
    for Q in _ints(_need(p, "Q")):
        w = joint_witness(Xi, Q)
        rows.append({"n": Xi.n, "m": Xi.m, "Q": Q, "p": w.p, "q": w.q, "value": w.value,
                     "joint_profile": w.value * Q ** Xi.n})
    return rows


def _do_bound(cfg, p):
    variant = _need(p, "variant")
    n, m = _int(p, "n"), int(p["m"])
    kappa = Fraction(_need(p, "kappa"))
    Q = int(p["Q"]) if "Q" in p else None
    eps = float(p["eps"]) if "eps" in p else None
    value = effective_lower_bounds(variant, n=n, kappa=kappa, m=m, Q=Q, eps=eps, psi=p["psi"],
                                   truncation=int(p["truncation"]))
    return [{"variant": variant, "n": n, "m": m, "kappa": kappa, "Q": Q, "eps": eps, "psi": p["psi"],
             "bound": value}]


def _do_measure_b1(cfg, p):
    rep = b1_probability_report(_int(p, "Q"), Fraction(_need(p, "kappa")))
    return [{"Q": rep.Q, "kappa": rep.kappa, "probability": rep.probability,
             "union_bound": rep.union_bound_value, "union_bound_holds": rep.union_bound_holds,
             "asymptotic_figure": rep.asymptotic_figure,
             "asymptotic_verdict": "PASS" if rep.asymptotic_holds else "FAIL"}]


def _do_totient(cfg, p):
    rows = []
    for Q in _ints(_need(p, "Q")):
        rep = totient_sum_report(Q)
        err = float(rep.sum) - rep.asymptote
        band = 2 * math.log(Q + 2)
        rows.append({"Q": Q, "sum": rep.sum, "asymptote": rep.asymptote, "error": err,
                     "band": band, "within_band": abs(err) <= band, "verdict": rep.verdict})
    return rows


def _event_params(text: str) -> dict:
    out = {}
    for item in (x for x in re.split(r"[,\s]+", text) if x):
        if "=" not in item:
            raise ConfigError(f"event parameter {item!r} is not key=value")
        k, v = item.split("=", 1)
        out[k] = int(v) if re.fullmatch(r"-?\d+", v) else v
    return out


def _do_mc(cfg, p):
    name = _need(p, "event")
    params = _event_params(p.get("params", ""))
    try:
        event = make_event(name, **params)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    N = _int(p, "samples")
    est = mc_probability(event, N, cfg.seed)
    tail = getattr(event, "tail_bound", None)
    return [{"event": name, "params": p.get("params", ""), "N": N, "seed": cfg.seed,
             "estimate": est.estimate, "radius": est.radius, "successes": est.successes,
             "unresolved": est.unresolved, "tail_bound": tail,
             "conservative": None if tail is None else est.estimate - tail}]


def _do_orbit(cfg, p):
    xi = _reals(_need(p, "xi"))
    n = int(p.get("n", len(xi)))
    s, N, eps = Fraction(_need(p, "s")), _int(p, "N"), parse_real(_need(p, "eps"))
    rec = escape_set(xi, n, s, N, eps)
    extra = {}
    if "delta" in p:
        deltas = [Fraction(d) for d in p["delta"]]
        v = z_membership([xi], s, N, eps, deltas)
        extra = {"escape_fraction": v.fractions[0], "delta": v.deltas[0], "member": v.members[0],
                 "sum_condition": v.sum_condition, "in_delta_grid": v.in_delta_grid}
    return [{"l": r["l"], "t": r["t"], "norm_lower": r["norm_lower"], "norm_upper": r["norm_upper"],
             "in_K": r["in_K"], "p": r["p"], "q": r["q"], **extra} for r in rec.rows]


def _assignment(text: str) -> dict:
    out = {}
    for item in (x for x in re.split(r"[,\s]+", text) if x):
        pair, _, g = item.partition(":")
        if len(pair) != 2 or not g:
            raise ConfigError(f"assignment entry {item!r} must look like 12:0")
        out[(int(pair[0]), int(pair[1]))] = int(g)
    return out


def _build_model(p: dict):
    kind = p["kind"]
    h = _need(p, "h")
    lam, Q = parse_real(p["lam"]), int(p["Q"])
    if kind == "mac":
        h1, h2 = _reals(h)
        return ch.build_mac(h1, h2, parse_real(p["alpha"]), parse_real(p["beta"]), Q, lam)
    if kind == "xchannel":
        gains = _reals(p["gains"]) if "gains" in p else None
        return ch.build_xchannel(*_reals(h), Q=Q, lam=lam, gains=gains)
    if kind == "gic":
        vals = [None if v.lower() == "none" else parse_real(v) for v in h]
        if len(vals) != 9:
            raise ConfigError("gic needs nine coefficients, row by row")
        gens = _reals(p["generators"]) if "generators" in p else None
        amap = _assignment(p["assignment"]) if "assignment" in p else None
        return ch.build_gic([vals[0:3], vals[3:6], vals[6:9]], int(p["k"]), int(p["B"]), lam, gens, amap)
    raise ConfigError(f"unsupported model kind {kind}")


def _do_channel(cfg, p):
    kind, sub = p["kind"], p["sub"]
    if kind == "multiant":
        if sub != "points":
            raise ConfigError("multiant supports only the points sub-verb")
        rows_text = " ".join(_need(p, "h")).split(";")
        h = [_reals(r.replace(",", " ").split()) for r in rows_text if r.strip()]
        alpha = _reals(_split_list(p["alpha"]))
        Xi = ch.build_multiantenna_xi(h, alpha)
        return [{"row": i + 1, "col1": r[0], "col2": r[1]} for i, r in enumerate(Xi.rows)]
    model = _build_model(p)
    rx = int(p["receiver"])
    if sub == "constellation":
        const = ch.constellation(model, rx, "full")
        return [{"receiver": rx, "index": i, "value": v, "approx": float(v), "digits": rep,
                 "collisions": const.collisions}
                for i, (v, rep) in enumerate(zip(const.values(), const.representatives))]
    if sub == "dmin":
        const = ch.constellation(model, rx, p["method"])
        return [{"receiver": rx, "method": const.provenance, "d_min": const.d_min,
                 "approx": float(const.d_min), "collision": const.has_collision,
                 "collisions": const.collisions, "outcomes": const.outcome_count,
                 "witness": const.witness}]
    if sub == "bounds":
        b = ch.theoretical_bounds(model, rx)
        const = ch.constellation(model, rx, "difference")
        return [{"receiver": rx, "perfect_separation": b.perfect_separation,
                 "upper_bound": b.upper_bound, "constant": b.constant, "note": b.note,
                 "d_min": const.d_min, "approx_d_min": float(const.d_min)}]
    if sub == "points":
        pts = ch.derived_points(model, validate=False)
        ok = ch.check_f_maps(pts)
        return [{"which": d.which, "x": d.point[0], "y": d.point[1], "approx_x": float(d.point[0]),
                 "approx_y": float(d.point[1]), "f_maps_hold": all(ok.values())} for d in pts]
    if sub == "ser":
        N = int(p["samples"])
        est = ch.mc_symbol_error_rate(model, rx, N, cfg.seed, noise_scale=float(p["noise_scale"]),
                                      subthreshold_only=_bool(p["subthreshold"]))
        d = ch.constellation(model, rx, "difference").d_min
        return [{"receiver": rx, "N": N, "kept": est.samples, "errors": est.successes,
                 "rate": est.estimate, "radius": est.radius, "ties": est.notes["ties"],
                 "analytic": ch.analytic_error_prob(d)}]
    if sub == "kg-check":
        Qs = _ints(_need(p, "Qs"))
        kappa = float(p["kappa"]) if "kappa" in p else None
        rep = ch.kg_separation_check(model, rx, Qs, float(_need(p, "eps")), kappa)
        return [{"Q": r["Q"], "d_min": r["d_min"], "C2lam": r["C2lam"], "normalized": r["normalized"],
                 "passes": r["passes"], "kappa_empirical": rep.kappa_empirical} for r in rep.rows]
    raise ConfigError(f"unknown sub-verb {sub}")


def _do_dof(cfg, p):
    sweep = _ints(_need(p, "sweep"))
    if p["scheme"] == "gic":
        rep = gic_dof_formula(sweep, int(p["m_g"]), Fraction(p.get("eps", "0")))
        return [{"k": r["k"], "M": r["M"], "n": r["n"], "value": r["value"], "approx": float(r["value"]),
                 "ceiling": rep.limit} for r in rep.rows]
    model = None
    if "model_file" in p:
        try:
            mp = read_config_file(p["model_file"])
        except OSError as exc:
            raise ConfigError(f"cannot read model file: {exc}") from exc
        unknown = sorted(set(mp) - {"h11", "h12", "h21", "h22"})
        if unknown:
            raise ConfigError(f"unknown model keys: {', '.join(unknown)}")
        model = ch.build_xchannel(*(parse_real(mp[k]) for k in ("h11", "h12", "h21", "h22")))
    rep = xchannel_dof_sweep(float(_need(p, "eps")), sweep, model, float(p["power_constant"]))
    rows = []
    for r in rep.rows:
        rows.append({"Q": r["Q"], "log2_lambda": r["log2_lambda"], "log2_P": r["log2_P"], "bits": r["bits"],
                     "benchmark": r["benchmark"], "ratio": r["ratio"], "limit": rep.limit,
                     "d_min": r.get("d_min"), "reliability": r.get("reliability")})
    return rows


_HANDLERS = {
    "dirichlet": _do_dirichlet,
    "profile": lambda c, p: _do_witness(c, p, True),
    "witness": lambda c, p: _do_witness(c, p, False),
    "joint-profile": _do_joint,
    "bound": _do_bound,
    "measure-b1": _do_measure_b1,
    "totient-sum": _do_totient,
    "mc": _do_mc,
    "orbit": _do_orbit,
    "channel": _do_channel,
    "dof": _do_dof,
}


def dispatch(config: RunConfig) -> tuple[int, str]:
    """Run one config; returns ``(exit status, report text or error message)``."""
    try:
        with work_limit(config.work_limit), precision_cap(config.precision_cap):
            records = _HANDLERS[config.verb](config, dict(config.params))
        return EXIT_OK, emit_report(config, records)
    except PrecisionCapError as exc:
        return EXIT_PRECISION, f"precision cap reached: {exc}"
    except WorkLimitError as exc:
        return EXIT_WORK, f"work limit exceeded: {exc}"
    except (ValueError, TypeError, KeyError) as exc:
        return EXIT_PARSE, f"invalid input: {exc}"


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser, _ = _build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_PARSE
    try:
        config = resolve_config(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ConfigError as exc:
        print(f"diophcomm: {exc}", file=sys.stderr)
        return EXIT_PARSE
    status, text = dispatch(config)
    if status != EXIT_OK:
        print(f"diophcomm: {text}", file=sys.stderr)
        return status
    try:
        if config.out == "-":
            sys.stdout.write(text)
        else:
            with open(config.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
    except OSError as exc:
        print(f"diophcomm: cannot write report: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
