"""Replicated simulations and their distributional comparison.

Every replicate draws from its own stream
``SeedSequence([seed, replicate_index])``, and results are folded in index
order, so a summary depends only on ``(config, seed)``. The worker count
comes from the ``CRITGRAPH_WORKERS`` environment variable.
"""

import csv
import hashlib
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy import stats

from . import degree_model as dm
from . import explorer as ex
from . import limit_process as lp
from . import poisson_field as pf
from .errors import CritGraphError, EmptySample, ReplicateFailure
from .excursions import path_excursions
from .paths import LimitPath, PathKind
from .unionfind import gnp_component_sizes

MODES = ("multigraph", "simple", "poissonized", "limit", "er_oracle")
WORKERS_ENV = "CRITGRAPH_WORKERS"
EXPLORATORY_BANNER = "EXPLORATORY: conjecture probe, not an acceptance result"


@dataclass(frozen=True)
class EnsembleConfig:
    law: dict
    n_list: tuple = (1000,)
    replicates: int = 100
    seed: int = 0
    mode: str = "multigraph"
    top_k: int = 3
    horizon: float = 10.0
    dt: float = 1e-4
    eps: float = 0.05
    cap: float = 50.0
    chunk: float = 5.0
    max_attempts: int = 1000
    degrees: tuple = None

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.top_k < 1:
            raise ValueError("top_k must be at least 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        if self.degrees is not None:
            object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "n" in d and "n_list" not in d:
            n = d.pop("n")
            d["n_list"] = n if isinstance(n, (list, tuple)) else (n,)
        return cls(**d)

    def to_dict(self):
        d = asdict(self)
        d["n_list"] = list(self.n_list)
        if self.degrees is not None:
            d["degrees"] = list(self.degrees)
        return d

    def config_hash(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def with_(self, **kw):
        return replace(self, **kw)


def replicate_rng(seed, index):
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def worker_budget():
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        return max(1, int(raw))
    return os.cpu_count() or 1


def size_exponent(law):
    """Time exponent used to rescale component sizes."""
    if law.is_power_law:
        return ex.power_law_exponents(law.tail_gamma)[0]
    return ex.finite_third_moment_exponents()[0]


def _top(sizes, k):
    out = np.zeros(k)
    s = np.sort(np.asarray(sizes))[::-1][:k]
    out[: len(s)] = s
    return out


def _degrees(cfg, law, n, rng):
    if cfg.degrees is not None:
        return np.array(cfg.degrees, dtype=np.int64)
    return dm.sample_degrees(law, n, rng)


# One function per mode; each returns (top_k values, aux dict).


def _rep_multigraph(cfg, law, n, rng):
    d = _degrees(cfg, law, n, rng)
    res, n_iso = ex.explore_with_isolated(d, rng)
    scale = len(d) ** -size_exponent(law)
    if res is None:
        return _top(np.ones(n_iso), cfg.top_k) * scale, {"simple": True, "first_defect": None}
    sizes = np.concatenate((res.component_sizes, np.ones(n_iso, dtype=np.int64)))
    # first_defect is a discovery index among positive-degree vertices
    return _top(sizes, cfg.top_k) * scale, {"simple": res.is_simple, "first_defect": res.first_defect}


def _rep_simple(cfg, law, n, rng):
    d = _degrees(cfg, law, n, rng)
    positive = d[d > 0]
    n_iso = len(d) - len(positive)
    res, attempts = ex.sample_simple(positive, rng, cfg.max_attempts)
    sizes = np.concatenate((res.component_sizes, np.ones(n_iso, dtype=np.int64)))
    return _top(sizes, cfg.top_k) * len(d) ** -size_exponent(law), {"attempts": attempts}


def _rep_poissonized(cfg, law, n, rng):
    time_exp = size_exponent(law)
    space_exp = 1.0 / (law.tail_gamma - 1.0) if law.is_power_law else 1.0 / 3.0
    horizon = min(float(n), cfg.horizon * n**time_exp)
    field_ = pf.simulate_field(law, n, horizon, rng)
    m = int(round(cfg.horizon / cfg.dt))
    grid = np.arange(m + 1) * cfg.dt
    values = field_.S(np.minimum(grid * n**time_exp, horizon)) * n**-space_exp
    path = LimitPath(grid=grid, values=values.astype(float), kind=PathKind.RESCALED_WALK, dt=cfg.dt)
    exc = path_excursions(path)
    return exc.top(cfg.top_k), {"atoms": len(field_), "censored": exc.censored_length}


def _rep_limit(cfg, law, n, rng):
    kw = dict(top_k=cfg.top_k, start=cfg.horizon, chunk=cfg.chunk, cap=cfg.cap)
    if law.is_power_law:
        h = lp.powerlaw_harvest(lp.LevySpec.from_law(law), cfg.dt, cfg.eps, rng, **kw)
    else:
        h = lp.brownian_harvest(law.mu, law.beta, cfg.dt, rng, **kw)
    return h.lengths, {"horizon": h.horizon, "censored": h.censored_length, "capped": h.capped}


def _rep_er(cfg, law, n, rng):
    sizes = gnp_component_sizes(n, 1.0 / n, rng)
    return _top(sizes, cfg.top_k) * n ** (-2.0 / 3.0), {}


_RUNNERS = {
    "multigraph": _rep_multigraph,
    "simple": _rep_simple,
    "poissonized": _rep_poissonized,
    "limit": _rep_limit,
    "er_oracle": _rep_er,
}


@dataclass(eq=False)
class EnsembleSummary:
    """Per-``n`` replicate records of the top ``k`` rescaled sizes.

    ``runtime`` (wall-clock metadata) is kept out of :meth:`to_json` so that
    serialized summaries are byte-identical across reruns.
    """

    config: EnsembleConfig
    tops: dict
    aux: dict
    runtime: dict = field(default_factory=dict)
    label: str = None

    def sample(self, n=None, rank=1):
        n = self.config.n_list[-1] if n is None else int(n)
        return self.tops[n][:, rank - 1]

    def ecdf(self, n=None, rank=1):
        return empirical_cdf(self.sample(n, rank))

    def acceptance_rate(self, n):
        """Accepted replicates per pairing attempt (simple mode)."""
        att = [a["attempts"] for a in self.aux[n]]
        return len(att) / float(sum(att))

    def defect_table(self):
        rows = []
        for n in self.config.n_list:
            recs = self.aux[n]
            thr = n**0.75
            nonsimple = [r for r in recs if not r["simple"]]
            early = sum(1 for r in nonsimple if r["first_defect"] <= thr)
            rows.append({
                "n": n,
                "threshold": thr,
                "replicates": len(recs),
                "nonsimple_rate": len(nonsimple) / len(recs),
                "p_T_le_threshold": early / len(recs),
                "early_fraction_of_nonsimple": early / len(nonsimple) if nonsimple else 0.0,
            })
        return rows

    def to_dict(self):
        d = {
            "config": self.config.to_dict(),
            "config_hash": self.config.config_hash(),
            "law_hash": _law_hash(self.config),
            "tops": {str(n): self.tops[n].tolist() for n in self.config.n_list},
            "aux": {str(n): self.aux[n] for n in self.config.n_list},
        }
        if self.label:
            d["label"] = self.label
        if self.config.mode == "multigraph":
            d["defects"] = self.defect_table()
        if self.config.mode == "simple":
            d["acceptance_rate"] = {str(n): self.acceptance_rate(n) for n in self.config.n_list}
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    def to_csv(self):
        buf = io.StringIO()
        cfg = self.config
        buf.write(f"# config_hash={cfg.config_hash()} seed={cfg.seed} mode={cfg.mode}\n")
        if self.label:
            buf.write(f"# {self.label}\n")
        aux_keys = sorted({k for n in cfg.n_list for r in self.aux[n] for k in r})
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "replicate"] + [f"size_{i + 1}" for i in range(cfg.top_k)] + aux_keys)
        for n in cfg.n_list:
            for i, row in enumerate(self.tops[n]):
                a = self.aux[n][i]
                extra = ["" if a.get(k) is None else a[k] for k in aux_keys]
                w.writerow([n, i] + [repr(float(x)) for x in row] + extra)
        return buf.getvalue()


def _law_hash(cfg):
    law = _law_for(cfg)
    return law.law_hash() if law is not None else None


def _law_for(cfg):
    if cfg.mode == "er_oracle" and not cfg.law:
        return None
    return dm.validate(cfg.law) if cfg.law is not None else None


def run_ensemble(config, workers=None):
    """Run every replicate of every ``n`` and fold the results in order."""
    law = _law_for(config)
    runner = _RUNNERS[config.mode]
    workers = worker_budget() if workers is None else workers
    tops, aux, runtime = {}, {}, {}

    def one(n, i):
        rng = replicate_rng(config.seed, i)
        try:
            top, info = runner(config, law, n, rng)
        except CritGraphError as err:
            raise ReplicateFailure(f"replicate {i} (n = {n}) failed: {err}", seed=config.seed, index=i) from err
        return np.asarray(top, dtype=float), _jsonable(info)

    for n in config.n_list:
        start = time.perf_counter()
        idx = range(config.replicates)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(lambda i: one(n, i), idx))
        else:
            results = [one(n, i) for i in idx]
        tops[n] = np.vstack([r[0] for r in results])
        aux[n] = [r[1] for r in results]
        runtime[n] = time.perf_counter() - start
    return EnsembleSummary(config=config, tops=tops, aux=aux, runtime=runtime)


def _jsonable(info):
    out = {}
    for k, v in info.items():
        if isinstance(v, (np.integer,)):
            v = int(v)
        elif isinstance(v, (np.floating,)):
            v = float(v)
        elif isinstance(v, np.bool_):
            v = bool(v)
        out[k] = v
    return out


# --------------------------------------------------------------------------
# Statistics


def _nonempty(x, name):
    x = np.asarray(x, dtype=float).ravel()
    if len(x) == 0:
        raise EmptySample(f"{name} is empty")
    return x


def ks_distance(sample_a, sample_b):
    """Two-sample Kolmogorov-Smirnov statistic ``sup |F_a - F_b|``."""
    a = _nonempty(sample_a, "sample_a")
    b = _nonempty(sample_b, "sample_b")
    # only the statistic is used; the p-value divides by zero for tiny samples
    with np.errstate(divide="ignore"):
        return float(stats.ks_2samp(a, b, method="asymp").statistic)


class EmpiricalCDF:
    """Right-continuous step function of a sample."""

    def __init__(self, sample):
        self.x = np.sort(_nonempty(sample, "sample"))

    def __call__(self, t):
        return np.searchsorted(self.x, t, side="right") / len(self.x)

    @property
    def jumps(self):
        return np.unique(self.x)


def empirical_cdf(sample):
    return EmpiricalCDF(sample)


def compare(summary_a, summary_b, n_a=None, n_b=None, rank=1):
    return ks_distance(summary_a.sample(n_a, rank), summary_b.sample(n_b, rank))


def paired_l2(summary_a, summary_b, n_a=None, n_b=None):
    """Mean l2 distance between replicate-paired top-k vectors (diagnostic)."""
    a = summary_a.tops[summary_a.config.n_list[-1] if n_a is None else n_a]
    b = summary_b.tops[summary_b.config.n_list[-1] if n_b is None else n_b]
    m = min(len(a), len(b))
    return float(np.mean(np.linalg.norm(a[:m] - b[:m], axis=1)))


def defect_arrival_report(config):
    """``P(T(n) <= n^{3/4})`` per ``n`` from a multigraph ensemble."""
    if config.mode != "multigraph":
        raise ValueError("defect arrival needs multigraph mode")
    return run_ensemble(config).defect_table()


def conjecture_probe(config, limit_replicates=None):
    """Simple-graph power-law ensemble against the limit: exploratory only.

    The multigraph counterpart is reported alongside for contrast.
    """
    law = dm.validate(config.law)
    if not law.is_power_law:
        raise ValueError("conjecture probe needs a power-law law")
    simple = run_ensemble(config.with_(mode="simple"))
    simple.label = EXPLORATORY_BANNER
    multi = run_ensemble(config.with_(mode="multigraph", seed=(config.seed + 1) % 2**64))
    lim = run_ensemble(config.with_(mode="limit", n_list=(config.n_list[-1],), seed=(config.seed + 2) % 2**64,
                                    replicates=limit_replicates or config.replicates))
    rows = []
    for n in config.n_list:
        rows.append({
            "n": n,
            "ks_simple_vs_limit": ks_distance(simple.sample(n), lim.sample()),
            "ks_multigraph_vs_limit": ks_distance(multi.sample(n), lim.sample()),
            "acceptance_rate": simple.acceptance_rate(n),
        })
    return {"banner": EXPLORATORY_BANNER, "rows": rows, "simple": simple}
