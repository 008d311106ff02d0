"""Command-line surface: zoo, count, invariants, euler, fit, verify.

Configuration is accepted as flags and optionally as a key = value text file
(--config); flags win on conflict. Exit codes: 0 ok, 1 verification failure,
2 usage error. The sieve cache directory is taken from CAMPANA_CACHE_DIR.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import euler, fit, geometry, points, verify
from .arith import SieveTable
from .points import CountSeries, count_series, get_model, zoo_names

SCHEMA = 1

ZOO_SOURCES = {
    "p1": "dimension-one worked example",
    "pn_hyperplane": "hyperplane-boundary family in every dimension",
    "p2_three_lines": "instructive plane example with three weighted lines",
    "by_four_lines": "four-lines example with a thin quadric family",
    "blowup_pn": "first explicit blow-up example",
    "dp_d5": "singular quartic del Pezzo example",
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    model: str = "p1"
    model_file: str | None = None
    weights: dict[str, object] = field(default_factory=dict)
    uniform_m: object = None
    n: int | None = None
    S: tuple[int, ...] = ()
    height: str = "naive"
    kind: str = "campana"
    grid: list[float] = field(default_factory=list)
    threads: int = 1
    prime_bound: int = 100_000
    out: str | None = None
    fmt: str = "csv"
    log_anticanonical: bool = False

    def build_model(self):
        if self.model_file:
            with open(self.model_file) as fh:
                model = geometry.load_model(fh.read())
        else:
            params = {}
            if self.n is not None:
                if self.model not in ("pn_hyperplane", "blowup_pn"):
                    raise UsageError(
                        f"config key 'n' is not accepted by model {self.model}"
                    )
                params["n"] = self.n
            model = get_model(self.model, **params)
        if self.uniform_m is not None:
            model = model.with_weights(
                {cid: points._weight(self.uniform_m) for cid in model.ids}
            )
        if self.weights:
            unknown = set(self.weights) - set(model.ids)
            if unknown:
                raise UsageError(
                    f"config key 'm' names unknown components {sorted(unknown)}; "
                    f"model has {list(model.ids)}"
                )
            model = model.with_weights(
                {cid: points._weight(m) for cid, m in self.weights.items()}
            )
        if self.log_anticanonical:
            model = model.log_anticanonical()
        return model

    def validate(self):
        if self.model_file is None and self.model not in zoo_names():
            raise UsageError(f"config key 'model': unknown model {self.model!r}")
        if self.kind not in points.KINDS:
            raise UsageError(f"config key 'kind': must be one of {points.KINDS}")
        if self.height not in points.HEIGHTS:
            raise UsageError(f"config key 'height': must be one of {points.HEIGHTS}")
        if self.height == "euclidean" and self.model != "p1":
            raise UsageError("config key 'height': euclidean applies to model p1 only")
        if self.kind == "thin-filtered" and self.model != "by_four_lines":
            raise UsageError(
                "config key 'kind': thin-filtered applies to model by_four_lines only"
            )
        if self.threads < 1:
            raise UsageError("config key 'threads': must be >= 1")
        if any(t < 1 for t in self.grid):
            raise UsageError("config key 'grid': thresholds must be >= 1")
        if self.grid != sorted(self.grid):
            raise UsageError("config key 'grid': thresholds must be ascending")


def _parse_weight(tok: str):
    return "dlt" if tok == "dlt" else int(tok)


def _parse_m_spec(spec: str) -> tuple[object, dict]:
    """Either a uniform 'm' or per-component 'D0:2,D1:dlt'."""
    if ":" not in spec:
        return _parse_weight(spec), {}
    out = {}
    for part in spec.split(","):
        cid, _, val = part.partition(":")
        if not val:
            raise UsageError(f"config key 'm': bad component weight {part!r}")
        out[cid.strip()] = _parse_weight(val.strip())
    return None, out


def _parse_grid(spec: str) -> list[float]:
    """Comma list, or geometric 'lo..hi*k' with k points per decade."""
    spec = spec.strip()
    if ".." in spec:
        rng, _, per = spec.partition("*")
        lo, _, hi = rng.partition("..")
        lo, hi = float(lo), float(hi)
        per_decade = int(per) if per else 4
        out = []
        e = math.log10(lo)
        while 10**e <= hi * 1.0000001:
            out.append(float(int(round(10**e))))
            e += 1.0 / per_decade
        return out
    return [float(x) for x in spec.split(",") if x.strip()]


def _load_config_file(path: str) -> dict:
    data = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise UsageError(f"config file line {line!r}: expected key = value")
            data[key.strip()] = val.strip()
    return data


def _config_from(args) -> RunConfig:
    cfg = RunConfig()
    filedata = _load_config_file(args.config) if getattr(args, "config", None) else {}

    def pick(flag_val, key, conv=lambda x: x):
        if flag_val is not None:
            return flag_val
        if key in filedata:
            return conv(filedata[key])
        return None

    model = pick(getattr(args, "model", None), "model")
    if model is not None:
        cfg.model = model
    mf = pick(getattr(args, "model_file", None), "model_file")
    if mf is not None:
        cfg.model_file = mf
    mspec = pick(getattr(args, "m", None), "m")
    if mspec is not None:
        cfg.uniform_m, cfg.weights = _parse_m_spec(str(mspec))
    n = pick(getattr(args, "n", None), "n", int)
    if n is not None:
        cfg.n = int(n)
    sspec = pick(getattr(args, "S", None), "S")
    if sspec:
        try:
            cfg.S = tuple(sorted({int(x) for x in str(sspec).split(",") if x.strip()}))
        except ValueError:
            raise UsageError(f"config key 'S': expected comma-separated primes, got {sspec!r}")
    height = pick(getattr(args, "height", None), "height")
    if height is not None:
        cfg.height = height
    kind = pick(getattr(args, "kind", None), "kind")
    if kind is not None:
        cfg.kind = kind
    grid = pick(getattr(args, "grid", None), "grid")
    if grid is not None:
        cfg.grid = _parse_grid(str(grid))
    threads = pick(getattr(args, "threads", None), "threads", int)
    if threads is not None:
        cfg.threads = int(threads)
    pb = pick(getattr(args, "prime_bound", None), "prime_bound", int)
    if pb is not None:
        cfg.prime_bound = int(pb)
    out = pick(getattr(args, "out", None), "out")
    if out is not None:
        cfg.out = out
    fmt = pick(getattr(args, "format", None), "format")
    if fmt is not None:
        cfg.fmt = fmt
    if getattr(args, "log_anticanonical", False) or filedata.get("log_anticanonical") == "true":
        cfg.log_anticanonical = True
    cfg.validate()
    return cfg


def _sieve_table(limit: int) -> SieveTable:
    cache_dir = os.environ.get("CAMPANA_CACHE_DIR")
    if not cache_dir:
        return SieveTable.build(limit)
    os.makedirs(cache_dir, exist_ok=True)
    path = os.path.join(cache_dir, f"spf_{limit}.bin")
    if os.path.exists(path):
        try:
            return SieveTable.load(path)
        except ValueError as exc:
            print(f"sieve cache {path} unusable ({exc}); rebuilding", file=sys.stderr)
    table = SieveTable.build(limit)
    table.save(path)
    return table


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_zoo(args) -> int:
    rows = []
    for name in zoo_names():
        model = get_model(name)
        rows.append(
            {
                "model": name,
                "source": ZOO_SOURCES[name],
                "note": points.ZOO_NOTES[name],
                "components": [
                    {"id": c.id, "m": str(c.weight), "rho": str(c.rho), "lambda": str(c.lam)}
                    for c in model.components
                ],
                "backend": model.backend,
            }
        )
    if args.json:
        print(json.dumps({"schema": SCHEMA, "models": rows}, indent=2))
    else:
        for r in rows:
            comps = ", ".join(f"{c['id']}(m={c['m']})" for c in r["components"])
            print(f"{r['model']:>16}  {r['note']}")
            print(f"{'':>16}  components: {comps}")
    return 0


def cmd_count(args) -> int:
    cfg = _config_from(args)
    model = cfg.build_model()
    if not cfg.grid:
        series = count_series(model, [], cfg.kind, cfg.S, cfg.height)
        _emit(series.to_csv(), cfg.out)
        print("counted 0 thresholds", file=sys.stderr)
        return 0
    tmax = int(max(cfg.grid))
    if cfg.kind == "weak" and tmax > points.WEAK_BRUTE_LIMIT and cfg.model not in (
        "p1",
        "pn_hyperplane",
    ):
        raise UsageError(
            f"config key 'grid': weak counting on {cfg.model} is certified only "
            f"up to T = {points.WEAK_BRUTE_LIMIT}"
        )
    table = _sieve_table(max(tmax, 3))
    t0 = time.time()
    series = count_series(
        model, cfg.grid, cfg.kind, cfg.S, cfg.height, table=table, threads=cfg.threads
    )
    elapsed = time.time() - t0
    if cfg.fmt == "json":
        _emit(json.dumps({"schema": SCHEMA, "records": series.to_json_records()}, indent=2) + "\n", cfg.out)
    else:
        _emit(series.to_csv(), cfg.out)
    total = series.counts[-1] if series.counts else 0
    print(
        f"counted {model.name}/{cfg.kind} at {len(cfg.grid)} thresholds "
        f"(max N = {total}) in {elapsed:.2f}s",
        file=sys.stderr,
    )
    return 0


def cmd_invariants(args) -> int:
    cfg = _config_from(args)
    model = cfg.build_model()
    try:
        report = geometry.invariant_report(model, S=("inf",))
    except ValueError as exc:
        raise UsageError(f"inconsistent weight or L data: {exc}")
    payload = {
        "schema": SCHEMA,
        "model": model.name,
        "a": str(report.a),
        "b_klt": report.b_klt,
        "b_conjectural": report.b_conjectural,
        "b_dlt": report.b_dlt,
        "adjoint_support": sorted(report.adjoint_support),
        "adjoint_rigid": report.adjoint_rigid,
    }
    _emit(json.dumps(payload, indent=2) + "\n", cfg.out)
    return 0


def cmd_euler(args) -> int:
    cfg = _config_from(args)
    if cfg.model not in ("p1", "pn_hyperplane"):
        raise UsageError("config key 'model': euler evaluation supports p1 and pn_hyperplane")
    if cfg.n not in (None, 1, 2):
        raise UsageError("config key 'n': stratum data is built in for n <= 2 only")
    m = cfg.uniform_m if cfg.uniform_m is not None else 2
    s = Fraction(args.s) if "/" in args.s else float(args.s)
    data = euler.p1_stratum_data(m) if cfg.model == "p1" else euler.p2_one_line_stratum_data(m)
    ev = euler.regularized_euler_product(data, {"D": s}, cfg.prime_bound)
    payload = {
        "schema": SCHEMA,
        "model": cfg.model,
        "m": str(m),
        "s": float(s),
        "prime_bound": ev.prime_bound,
        "regularized_value": _jsonable(ev.value),
        "tail_estimate": ev.tail_estimate,
        "note": ev.truncation_note,
    }
    if args.leading_constant:
        c, note = euler.leading_constant_p1(m, cfg.S, cfg.prime_bound, details=True)
        payload["leading_constant"] = c
        payload["leading_constant_note"] = note
    _emit(json.dumps(payload, indent=2) + "\n", cfg.out)
    return 0


def _jsonable(v):
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    return float(v)


def cmd_fit(args) -> int:
    with open(args.series) as fh:
        series = CountSeries.from_csv(fh.read())
    fixed = None
    if args.fixed_a is not None or args.fixed_b is not None:
        fixed = (args.fixed_a if args.fixed_a is not None else 0.0,
                 args.fixed_b if args.fixed_b is not None else 1.0)
    res = fit.fit_series(series, args.mode, fixed=fixed, min_T=args.min_T)
    payload = {
        "schema": SCHEMA,
        "mode": res.mode,
        "a_hat": res.a_hat,
        "b_hat": res.b_hat,
        "c_hat": res.c_hat,
        "residual_rms": res.residual_rms,
        "a_stderr": res.a_stderr,
        "n_samples": res.n_samples,
    }
    print(json.dumps(payload, indent=2))
    if args.curve_out:
        with open(args.curve_out, "w") as fh:
            fh.write(fit.fitted_curve_csv(series, res))
    return 0


def cmd_verify(args) -> int:
    records, ok = verify.run_verification(args.level, threads=args.threads or 1)
    for r in records:
        status = "PASS" if r["passed"] else ("FAIL" if r["gating"] else "fail (informational)")
        print(f"criterion {r['criterion']:>2}  {r['name']:<40} {status}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"schema": SCHEMA, "level": args.level, "records": records}, fh,
                      indent=2, default=str)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="campana",
        description="Campana point counts, predicted exponents and growth-law checks",
        epilog=(
            "count CSV columns: T, N, model, kind, height. "
            "Set CAMPANA_CACHE_DIR to cache sieve tables between runs."
        ),
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    z = sub.add_parser("zoo", help="list built-in models")
    z.add_argument("--json", action="store_true")
    z.set_defaults(func=cmd_zoo)

    def common(p, grid=False):
        p.add_argument("--config", help="key = value config file; flags win")
        p.add_argument("--model")
        p.add_argument("--model-file", dest="model_file",
                       help="model definition file (see geometry.dump_model)")
        p.add_argument("--m", help="uniform weight, 'dlt', or per-component D0:2,D1:dlt")
        p.add_argument("--n", type=int, help="ambient dimension where supported")
        p.add_argument("-S", dest="S", help="comma-separated exempt primes")
        p.add_argument("--threads", type=int)
        p.add_argument("--prime-bound", dest="prime_bound", type=int)
        p.add_argument("--out")
        p.add_argument("--format", choices=["csv", "json"])
        p.add_argument("--log-anticanonical", action="store_true")
        if grid:
            p.add_argument("--grid", help="comma list or 'lo..hi*perdecade'")
            p.add_argument("--height", choices=list(points.HEIGHTS))
            p.add_argument("--kind", choices=list(points.KINDS))

    c = sub.add_parser("count", help="count points over a threshold grid")
    common(c, grid=True)
    c.set_defaults(func=cmd_count)

    i = sub.add_parser("invariants", help="predicted exponents for a model")
    common(i)
    i.set_defaults(func=cmd_invariants)

    e = sub.add_parser("euler", help="regularized Euler product evaluation")
    common(e)
    e.add_argument("--s", required=True, help="evaluation point (float or fraction)")
    e.add_argument("--leading-constant", action="store_true")
    e.set_defaults(func=cmd_euler)

    f = sub.add_parser("fit", help="fit a count series to c T^a (log T)^(b-1)")
    f.add_argument("--series", required=True, help="CSV produced by count")
    f.add_argument("--mode", choices=list(fit.MODES), default="free_a")
    f.add_argument("--fixed-a", type=float)
    f.add_argument("--fixed-b", type=float)
    f.add_argument("--min-T", type=float, dest="min_T")
    f.add_argument("--curve-out", help="write (T, N, fitted N) CSV here")
    f.set_defaults(func=cmd_fit)

    v = sub.add_parser("verify", help="run the verification suite")
    v.add_argument("--level", choices=["quick", "full"], default="quick")
    v.add_argument("--threads", type=int, default=1)
    v.add_argument("--json", help="write the machine-readable report here")
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
