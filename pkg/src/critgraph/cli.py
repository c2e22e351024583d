"""Command-line interface: ``critgraph <subcommand> ...``.

Exit codes: 0 success, 1 invariant or acceptance failure, 2 usage error.

CSV outputs start with ``#`` header lines naming the config hash, the seed
and (where a law is involved) the law hash. Columns:

* explore  ``walk.csv``: i, walk, degree, cycle_count (degree and
  cycle_count are empty on row 0); ``sizes.csv``: component, size
* ensemble ``records.csv``: n, replicate, size_1..size_k, then per-mode
  extras (simple, first_defect, attempts, horizon, censored, capped).
  A config file may carry ``"checks": [{"tag", "against", "ks_max"}]``;
  ``--tag`` selects among them and any failing check gives exit 1.
* limit    ``path.csv``: t, value; ``excursions.csv``: path, rank, length,
  left, right, censored
* report   ``report.csv``: n, rank, mean, q10, q50, q90
"""

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import degree_model as dm
from . import ensemble as en
from . import explorer as ex
from . import limit_process as lp
from . import poisson_field as pf
from .errors import CritGraphError, LawError, NotCritical
from .excursions import path_excursions


class UsageError(Exception):
    pass


def _seed(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}")
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _add_law_flags(p):
    g = p.add_argument_group("degree law (choose one)")
    g.add_argument("--pmf", help='JSON pmf, e.g. \'{"1":0.75,"3":0.25}\'')
    g.add_argument("--power-law-gamma", type=float, help="calibrated power tail exponent in (3,4)")
    g.add_argument("--k-min", type=int, default=3, help="start of the power tail (default 3)")
    g.add_argument("--poisson", type=float, nargs="?", const=1.0, help="Poisson(mean) degrees (default mean 1)")
    g.add_argument("--law", help="law JSON object or path to a JSON file")


def _law_spec(args, required=True):
    given = [x for x in ("pmf", "power_law_gamma", "poisson", "law") if getattr(args, x, None) is not None]
    if len(given) > 1:
        raise UsageError("--" + given[1].replace("_", "-") + ": give only one law flag")
    if not given:
        if required:
            raise UsageError("a law flag is required (--pmf, --power-law-gamma, --poisson or --law)")
        return None
    if args.pmf is not None:
        try:
            return {"pmf": json.loads(args.pmf)}
        except json.JSONDecodeError as err:
            raise UsageError(f"--pmf: invalid JSON ({err})")
    if args.power_law_gamma is not None:
        return {"power_law": {"gamma": args.power_law_gamma, "k_min": args.k_min}}
    if args.poisson is not None:
        return {"poisson": {"mean": args.poisson}}
    text = args.law
    if os.path.exists(text):
        with open(text) as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise UsageError(f"--law: invalid JSON ({err})")


def _hash(obj):
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()[:16]


def _header(config, seed, law=None):
    line = f"# config_hash={_hash(config)} seed={seed}"
    if law is not None:
        line += f" law_hash={law.law_hash()}"
    return line + "\n"


def _outdir(path):
    if path is None:
        return None
    os.makedirs(path, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise UsageError(f"--out: {path} is not writable")
    return path


def _write(outdir, name, text):
    with open(os.path.join(outdir, name), "w", newline="") as fh:
        fh.write(text)


# --------------------------------------------------------------------------
# subcommands


def cmd_validate(args):
    law = dm.validate(_law_spec(args))
    rep = law.report()
    print(f"regime = {rep['regime']}")
    print(f"mu = {law.mu:.12g}")
    print(f"beta = {law.beta:.12g}")
    for k in ("tail_c", "tail_gamma", "k_min", "zero_mass", "total_mass_residual", "criticality_residual", "law_hash"):
        if rep[k] is not None:
            print(f"{k} = {rep[k]}")
    return 0


def _explore_law(spec):
    """Non-critical pmfs are allowed here (with a warning): a single
    exploration is well defined for any degree law."""
    try:
        return dm.validate(spec)
    except NotCritical as err:
        print(f"warning: law is not critical (residual {err.residual}); exploring anyway", file=sys.stderr)
        return dm.from_pmf(spec.get("pmf", spec), require_critical=False)


def cmd_explore(args):
    spec = _law_spec(args)
    law = _explore_law(spec)
    rng = np.random.default_rng(args.seed)
    deg = dm.sample_degrees(law, args.n, rng)
    res, n_iso = ex.explore_with_isolated(deg, rng)
    config = {"cmd": "explore", "law": spec, "n": args.n, "seed": args.seed}
    head = _header(config, args.seed, law) + f"# n={args.n} isolated={n_iso}\n"
    rows = ["i,walk,degree,cycle_count"]
    sizes = ["component,size"]
    if res is not None:
        rows.append("0,0,,")
        for i in range(res.n):
            rows.append(f"{i + 1},{res.walk[i + 1]},{res.ordered_degrees[i]},{res.cycle_counts[i]}")
        comp = list(res.component_sizes) + [1] * n_iso
    else:
        comp = [1] * n_iso
    sizes += [f"{j + 1},{s}" for j, s in enumerate(comp)]
    walk_csv = head + "\n".join(rows) + "\n"
    sizes_csv = head + "\n".join(sizes) + "\n"
    out = _outdir(args.out)
    if out:
        _write(out, "walk.csv", walk_csv)
        _write(out, "sizes.csv", sizes_csv)
    sys.stdout.write(walk_csv)
    if res is not None:
        print(f"# components={res.n_components + n_iso} simple={res.is_simple} first_defect={res.first_defect}")
    return 0


def _ensemble_config(args):
    """Returns ``(config, checks)``; ``checks`` are the acceptance-tagged KS
    checks from the config file's ``"checks"`` list plus ``--ks-against``,
    filtered by ``--tag``."""
    base = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
    checks = list(base.pop("checks", []))
    if args.ks_against:
        checks.append({"tag": "cli", "against": args.ks_against, "ks_max": args.ks_max})
    for c in checks:
        if c.get("against") not in en.MODES:
            raise UsageError(f"--config: check {c!r} needs 'against' in {en.MODES}")
    if args.tag:
        checks = [c for c in checks if c.get("tag") in args.tag]
    spec = _law_spec(args, required="law" not in base)
    if spec is not None:
        base["law"] = spec
    for flag, key in (("n", "n_list"), ("replicates", "replicates"), ("seed", "seed"), ("horizon", "horizon"),
                      ("dt", "dt"), ("eps", "eps"), ("mode", "mode"), ("top_k", "top_k")):
        v = getattr(args, flag)
        if v is not None:
            base[key] = v
    try:
        return en.EnsembleConfig.from_dict(base), checks
    except (TypeError, ValueError) as err:
        raise UsageError(f"--config: {err}")


def cmd_ensemble(args):
    cfg, wanted = _ensemble_config(args)
    summary = en.run_ensemble(cfg)
    checks = []
    for j, c in enumerate(wanted):
        # each comparison arm gets its own seed offset so no streams are shared
        other = en.run_ensemble(cfg.with_(mode=c["against"], seed=(cfg.seed + 1 + j) % 2**64,
                                          n_list=(cfg.n_list[-1],)))
        ks = en.compare(summary, other)
        limit = c.get("ks_max")
        checks.append({"name": f"ks_vs_{c['against']}", "tag": c.get("tag"), "value": ks, "max": limit,
                       "pass": limit is None or ks <= limit})
    status = 0 if all(c["pass"] for c in checks) else 1
    out = _outdir(args.out)
    doc = summary.to_dict()
    doc["checks"] = checks
    text = json.dumps(doc, sort_keys=True, indent=1)
    if out:
        _write(out, "summary.json", text)
        _write(out, "records.csv", summary.to_csv())
        _write(out, "runtime.json", json.dumps({str(k): v for k, v in summary.runtime.items()}, indent=1))
    else:
        print(text)
    for c in checks:
        print(f"{c['name']}: {c['value']:.4f} ({'PASS' if c['pass'] else 'FAIL'})", file=sys.stderr)
    return status


def cmd_limit(args):
    spec = _law_spec(args)
    law = dm.validate(spec)
    rng = np.random.default_rng(args.seed)
    config = {"cmd": "limit", "law": spec, "horizon": args.horizon, "dt": args.dt, "eps": args.eps,
              "paths": args.replicates, "seed": args.seed}
    head = _header(config, args.seed, law)
    path_rows, exc_rows = ["t,value"], ["path,rank,length,left,right,censored"]
    for p in range(args.replicates):
        if law.is_power_law:
            path = lp.simulate_powerlaw_limit(lp.LevySpec.from_law(law), args.horizon, args.dt, args.eps, rng)
        else:
            path = lp.simulate_brownian_parabolic(law.mu, law.beta, args.horizon, args.dt, rng)
        if p == 0:
            path_rows += [f"{t!r},{v!r}" for t, v in zip(path.grid.tolist(), path.values.tolist())]
        e = path_excursions(path)
        for r in range(len(e)):
            exc_rows.append(f"{p},{r + 1},{float(e.lengths[r])!r},{float(e.left[r])!r},{float(e.right[r])!r},"
                            f"{int(e.censored[r])}")
    out = _outdir(args.out)
    if out:
        _write(out, "path.csv", head + "\n".join(path_rows) + "\n")
        _write(out, "excursions.csv", head + "\n".join(exc_rows) + "\n")
    sys.stdout.write(head + "\n".join(exc_rows[: 1 + min(10, len(exc_rows) - 1)]) + "\n")
    return 0


def poisson_diagnostics(law, n_list, t, fields, rng):
    """Atom-count checks plus the drift and variation ladders."""
    n0 = n_list[0]
    half = t / 2.0
    c1 = np.empty(fields)
    c2 = np.empty(fields)
    for i in range(fields):
        f = pf.simulate_field(law, n0, t, rng)
        c1[i] = f.count(half)
        c2[i] = len(f) - c1[i]
    total = c1 + c2
    se_mean = np.sqrt(t / fields)
    se_var = t * np.sqrt(2.0 / (fields - 1) + 1.0 / (t * fields))
    cov = np.cov(c1, c2)[0, 1]
    se_cov = half / np.sqrt(fields)
    counts = {
        "mean": float(total.mean()), "mean_band": 3 * float(se_mean),
        "var": float(total.var(ddof=1)), "var_band": 3 * float(se_var),
        "cov": float(cov), "cov_band": 3 * float(se_cov),
    }
    counts["pass"] = bool(abs(counts["mean"] - t) <= counts["mean_band"]
                          and abs(counts["var"] - t) <= counts["var_band"]
                          and abs(cov) <= counts["cov_band"])
    ladder = []
    if not law.is_power_law:
        for n in n_list:
            ladder.append({"n": n, "drift_sup": pf.rescaled_drift_sup(law, n),
                           "variation_rel_err": pf.rescaled_variation_error(law, n)})
    return {"counts": counts, "ladder": ladder}


def cmd_poisson_check(args):
    law = dm.validate(_law_spec(args))
    rng = np.random.default_rng(args.seed)
    n_list = args.n or [10**4, 10**5, 10**6]
    diag = poisson_diagnostics(law, n_list, args.t, args.replicates or 1000, rng)
    cnt = diag["counts"]
    print(f"counts mean={cnt['mean']:.4f}±{cnt['mean_band']:.4f} var={cnt['var']:.3f}±{cnt['var_band']:.3f} "
          f"cov={cnt['cov']:.3f}±{cnt['cov_band']:.3f} {'PASS' if cnt['pass'] else 'FAIL'}")
    ok = cnt["pass"]
    for row in diag["ladder"]:
        print(f"n={row['n']:g} drift_sup={row['drift_sup']:.6f} variation_rel_err={row['variation_rel_err']:.3e}")
    sups = [r["drift_sup"] for r in diag["ladder"]]
    if sups:
        mono = all(b < a for a, b in zip(sups, sups[1:]))
        print(f"drift ladder decreasing: {mono}")
        ok = ok and mono
    if args.out:
        _write(_outdir(args.out), "poisson_check.json", json.dumps(diag, indent=1, sort_keys=True))
    return 0 if ok else 1


def cmd_report(args):
    with open(args.summary) as fh:
        doc = json.load(fh)
    lines = [f"ensemble report  config_hash={doc['config_hash']}  seed={doc['config']['seed']}  "
             f"mode={doc['config']['mode']}"]
    if doc.get("label"):
        lines.append(doc["label"])
    csv_rows = ["n,rank,mean,q10,q50,q90"]
    for n, rows in doc["tops"].items():
        a = np.asarray(rows)
        lines.append(f"n = {n}: {len(a)} replicates")
        for r in range(a.shape[1]):
            q = np.quantile(a[:, r], [0.1, 0.5, 0.9])
            lines.append(f"  rank {r + 1}: mean {a[:, r].mean():.4f}  median {q[1]:.4f}  [{q[0]:.4f}, {q[2]:.4f}]")
            csv_rows.append(f"{n},{r + 1},{a[:, r].mean()!r},{q[0]!r},{q[1]!r},{q[2]!r}")
    for row in doc.get("defects", []):
        lines.append(f"  n = {row['n']}: P(T <= n^3/4) = {row['p_T_le_threshold']:.4f}, "
                     f"non-simple rate {row['nonsimple_rate']:.4f}")
    for n, rate in doc.get("acceptance_rate", {}).items():
        lines.append(f"  n = {n}: simplicity acceptance rate {rate:.4f}")
    for c in doc.get("checks", []):
        lines.append(f"check {c['name']}: {c['value']:.4f} {'PASS' if c['pass'] else 'FAIL'}")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        out = _outdir(args.out)
        head = f"# config_hash={doc['config_hash']} seed={doc['config']['seed']}\n"
        _write(out, "report.txt", text)
        _write(out, "report.csv", head + "\n".join(csv_rows) + "\n")
    return 1 if any(not c["pass"] for c in doc.get("checks", [])) else 0


def build_parser():
    p = argparse.ArgumentParser(prog="critgraph", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="validate a degree law and print its report")
    _add_law_flags(v)
    v.set_defaults(func=cmd_validate)

    e = sub.add_parser("explore", help="run one depth-first exploration")
    _add_law_flags(e)
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--seed", type=_seed, default=0)
    e.add_argument("--out")
    e.set_defaults(func=cmd_explore)

    s = sub.add_parser("ensemble", help="run a replicated ensemble")
    _add_law_flags(s)
    s.add_argument("--config", help="JSON ensemble config; flags override its keys")
    s.add_argument("--n", type=int, nargs="+")
    s.add_argument("--replicates", type=int)
    s.add_argument("--seed", type=_seed)
    s.add_argument("--horizon", type=float)
    s.add_argument("--dt", type=float)
    s.add_argument("--eps", type=float)
    s.add_argument("--mode", choices=en.MODES)
    s.add_argument("--top-k", type=int)
    s.add_argument("--ks-against", choices=en.MODES, help="acceptance check: KS of the largest size vs this mode")
    s.add_argument("--ks-max", type=float, help="fail (exit 1) if the KS check exceeds this")
    s.add_argument("--tag", nargs="+", help="run only the acceptance checks carrying one of these tags")
    s.add_argument("--out")
    s.set_defaults(func=cmd_ensemble)

    lm = sub.add_parser("limit", help="simulate limit paths and their excursions")
    _add_law_flags(lm)
    lm.add_argument("--horizon", type=float, default=10.0)
    lm.add_argument("--dt", type=float, default=1e-3)
    lm.add_argument("--eps", type=float, default=lp.DEFAULT_EPS)
    lm.add_argument("--replicates", type=int, default=1)
    lm.add_argument("--seed", type=_seed, default=0)
    lm.add_argument("--out")
    lm.set_defaults(func=cmd_limit)

    pc = sub.add_parser("poisson-check", help="Poissonized-field diagnostics")
    _add_law_flags(pc)
    pc.add_argument("--n", type=float, nargs="+")
    pc.add_argument("--t", type=float, default=100.0)
    pc.add_argument("--replicates", type=int)
    pc.add_argument("--seed", type=_seed, default=0)
    pc.add_argument("--out")
    pc.set_defaults(func=cmd_poisson_check)

    r = sub.add_parser("report", help="render an ensemble summary")
    r.add_argument("--summary", required=True)
    r.add_argument("--out")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 2
    except LawError as err:
        print(f"{type(err).__name__}: {err} (invariant={err.invariant}, residual={err.residual})", file=sys.stderr)
        return 1
    except CritGraphError as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
