"""Experiment configuration, trial execution, CSV persistence and scaling fits.

Config files are INI (``configparser``)::

    [experiment]
    id = ers-cycle
    algorithm = ers
    policy = base            ; optional, defaults to the algorithm's preset
    eps = 0.2
    delta = 0.1
    trials = 100
    seed_base = 0
    budget =                 ; empty means unlimited
    median_reps = 1
    n_advice =               ; ers only; empty means the true n
    workers = 1
    output = ers.csv

    [graph]
    family = cycle           ; or lb-known-pair with side = YES / NO and c = 2
    n = 16384, 65536         ; a list makes a sweep over n
    seed = 1
    ; path = graph.el        ; edge-list file instead of a family

    [constants]
    a_const = 64             ; any estimator constant
"""
from __future__ import annotations

import configparser
import csv
import io
import math
import time
from fractions import Fraction
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import BudgetExhausted, ConfigError, Exhausted, InsufficientPoints
from .graph_model import FAMILIES, Graph, GraphFamilySpec, generate, ground_truth, read_edge_list
from .instances import LB_FAMILIES, LBFamily, lb_instance
from .known_n import ADDITIVE, PAIR, est_avg_deg_edge_only, estimate_average_degree
from .oracle import OPS, PRESETS, OracleSession
from .primitives import DEFAULT_CONSTANTS, Estimate, EstimatorConfig, est_num_coll
from .unknown_n import (AdvancedMode, KnownN, ReMode, bt_driver, ers_est_avg_deg,
                        est_avg_deg_re, est_avg_deg_re_fast_eps, est_numvert_or_estdens,
                        unknown_n_pipeline)

__all__ = [
    "ALGORITHMS", "CSV_COLUMNS", "ExperimentConfig", "TrialRecord", "ScalingReport",
    "load_config", "build_graph", "run_one", "run_trials", "write_csv", "read_csv",
    "fit_scaling",
]

CSV_COLUMNS = [
    "experiment_id", "seed", "algo", "family", "n", "m", "d_true", "status", "value",
    "rel_err", "cost_total", "cost_rv", "cost_rn", "cost_deg", "cost_re", "cost_pair",
    "cost_add", "cost_full", "wall_ms",
]

STATUS_NAMES = {"value": "Value", "assert": "Assert", "abort": "Abort"}


# ---------------------------------------------------------------------------
# algorithm registry

@dataclass(frozen=True)
class Algorithm:
    run: object
    preset: str
    needs: tuple
    target: str = "d"        # ground-truth quantity the value estimates
    unknown_n: bool = False


def _numvert(sess, cfg, advice):
    vd = est_numvert_or_estdens(sess, cfg)
    return Estimate.of(sess, "value", vd.value, kind=vd.kind, s_star=vd.s_star,
                       witness=vd.witness)


def _coll(sess, cfg, advice):
    return Estimate.of(sess, "value", est_num_coll(sess, cfg))


ALGORITHMS = {
    "estimate-pair": Algorithm(lambda s, c, a: estimate_average_degree(s, c, PAIR), "standard+re",
                               ("rand_vert", "rand_edge", "degree", "pair")),
    "estimate-additive": Algorithm(lambda s, c, a: estimate_average_degree(s, c, ADDITIVE),
                                   "advanced+re", ("rand_vert", "rand_edge", "degree", "additive")),
    "edge-only": Algorithm(lambda s, c, a: est_avg_deg_edge_only(s, c), "edge-only",
                           ("rand_edge", "rand_nbr", "degree", "additive")),
    "re": Algorithm(lambda s, c, a: est_avg_deg_re(s, c), "base+re",
                    ("rand_vert", "rand_nbr", "degree", "rand_edge"), unknown_n=True),
    "re-fast": Algorithm(lambda s, c, a: est_avg_deg_re_fast_eps(s, c), "base+re",
                         ("rand_vert", "rand_nbr", "degree", "rand_edge"), unknown_n=True),
    "bt": Algorithm(lambda s, c, a: bt_driver(s, c), "base+re", ("rand_edge", "degree"),
                    unknown_n=True),
    "ers": Algorithm(lambda s, c, a: ers_est_avg_deg(s, c, KnownN(a)), "base",
                     ("rand_vert", "rand_nbr", "degree"), unknown_n=True),
    "pipeline-re": Algorithm(lambda s, c, a: unknown_n_pipeline(s, c, ReMode()), "base+re",
                             ("rand_vert", "rand_nbr", "degree", "rand_edge"), unknown_n=True),
    "pipeline-advanced": Algorithm(lambda s, c, a: unknown_n_pipeline(s, c, AdvancedMode()),
                                   "advanced", ("rand_vert", "rand_nbr", "degree", "additive"),
                                   unknown_n=True),
    "numvert": Algorithm(_numvert, "advanced", ("rand_vert", "rand_nbr", "degree", "additive"),
                         target="n-or-rho", unknown_n=True),
    "coll": Algorithm(_coll, "base", ("rand_vert",), target="n", unknown_n=True),
}


# ---------------------------------------------------------------------------
# configuration

@dataclass
class ExperimentConfig:
    experiment_id: str
    algorithm: str
    graph: dict
    policy: str | None = None
    eps: float = 0.2
    delta: float = 0.1
    trials: int = 1
    seed_base: int = 0
    budget: int | None = None
    median_reps: int = 1
    n_advice: float | None = None
    constants: dict = field(default_factory=dict)
    workers: int = 1
    output: str | None = None

    def validate(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; choose from {sorted(ALGORITHMS)}")
        if self.policy_name not in PRESETS:
            raise ConfigError(f"unknown policy {self.policy_name!r}; choose from {sorted(PRESETS)}")
        algo = ALGORITHMS[self.algorithm]
        pol = self.access_policy()
        missing = [op for op in algo.needs if not pol.enabled(op)]
        if missing:
            raise ConfigError(f"policy {self.policy_name!r} lacks {missing} needed by {self.algorithm}")
        if self.algorithm == "edge-only" and pol.enabled("rand_vert"):
            raise ConfigError("edge-only needs a policy without rand_vert")
        if self.budget is not None and self.budget < 0:
            raise ConfigError("budget must be >= 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        try:
            self.estimator_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if "path" not in self.graph and "family" not in self.graph:
            raise ConfigError("[graph] needs family or path")

    @property
    def policy_name(self) -> str:
        return self.policy or ALGORITHMS[self.algorithm].preset

    def access_policy(self):
        pol = PRESETS[self.policy_name]
        if ALGORITHMS[self.algorithm].unknown_n:
            pol = pol.with_(n_known=False)
        return pol

    def estimator_config(self) -> EstimatorConfig:
        return EstimatorConfig(self.eps, self.delta, dict(self.constants), self.median_reps)

    def graph_sizes(self) -> list:
        ns = self.graph.get("n")
        return list(ns) if isinstance(ns, (list, tuple)) else [ns]


def _parse_num(text: str):
    text = text.strip()
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        return float(text)


def load_config(source: str) -> ExperimentConfig:
    """Parse INI text or a path to an INI file."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        if "\n" in source or "[" in source:
            cp.read_string(source)
        else:
            with open(source, encoding="utf-8") as fh:
                cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    if "experiment" not in cp or "graph" not in cp:
        raise ConfigError("config needs [experiment] and [graph] sections")
    ex = cp["experiment"]
    known = {"id", "algorithm", "policy", "eps", "delta", "trials", "seed_base", "budget",
             "median_reps", "n_advice", "workers", "output"}
    extra = set(ex) - known
    if extra:
        raise ConfigError(f"unknown [experiment] keys: {sorted(extra)}")
    graph: dict = {}
    for key, val in cp["graph"].items():
        if key in ("family", "path", "side"):
            graph[key] = val.strip()
        elif key == "n" and "," in val:
            graph[key] = [_parse_num(v) for v in val.split(",")]
        else:
            graph[key] = _parse_num(val)
    consts = {}
    if "constants" in cp:
        for key, val in cp["constants"].items():
            if key not in DEFAULT_CONSTANTS:
                raise ConfigError(f"unknown constant {key!r}")
            consts[key] = _parse_num(val)
    try:
        cfg = ExperimentConfig(
            experiment_id=ex.get("id", "experiment"),
            algorithm=ex.get("algorithm", ""),
            graph=graph,
            policy=ex.get("policy") or None,
            eps=float(ex.get("eps", "0.2")),
            delta=float(ex.get("delta", "0.1")),
            trials=int(ex.get("trials", "1")),
            seed_base=int(ex.get("seed_base", "0")),
            budget=_parse_num(ex.get("budget", "")),
            median_reps=int(ex.get("median_reps", "1")),
            n_advice=_parse_num(ex.get("n_advice", "")),
            constants=consts,
            workers=int(ex.get("workers", "1")),
            output=ex.get("output") or None,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    cfg.validate()
    return cfg


def build_graph(graph: dict, n=None) -> tuple[Graph, str]:
    """Graph and family label from a [graph] mapping (``n`` overrides a list)."""
    if "path" in graph:
        return read_edge_list(graph["path"]), "edge-list-file"
    family = graph["family"]
    n = graph.get("n") if n is None else n
    seed = int(graph.get("seed") or 0)
    try:
        if family in LB_FAMILIES:
            fam = LBFamily(family, graph.get("side", "YES"), int(n), int(graph.get("c") or 2),
                           int(graph.get("d") or 8))
            return lb_instance(fam, seed), family
        if family not in FAMILIES:
            raise ConfigError(f"unknown family {family!r}")
        keys = {f.name for f in fields(GraphFamilySpec)} - {"family", "seed"}
        kw = {k: v for k, v in graph.items() if k in keys and v is not None}
        kw["n"] = n
        return generate(GraphFamilySpec(family, seed=seed, **kw)), family
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# trials

@dataclass
class TrialRecord:
    experiment_id: str
    seed: int
    algo: str
    family: str
    n: int
    m: int
    d_true: float
    status: str
    value: float | None
    rel_err: float | None
    cost_total: int
    cost_rv: int
    cost_rn: int
    cost_deg: int
    cost_re: int
    cost_pair: int
    cost_add: int
    cost_full: int
    wall_ms: float

    def row(self) -> dict:
        return {k: ("" if v is None else v) for k, v in asdict(self).items()}


def _truth_for(target: str, truth: dict, est: Estimate | None):
    if target == "d":
        return truth["d"]
    if target == "n":
        return truth["n"]
    # numvert: n_hat or rho_hat = n/d
    if est is not None and est.trace.get("kind") == "NHat":
        return truth["n"]
    return truth["n"] / truth["d"]


def run_one(g: Graph, truth: dict, family: str, cfg: ExperimentConfig, seed: int,
            transcript: bool = False) -> tuple[TrialRecord, Estimate | None, OracleSession]:
    algo = ALGORITHMS[cfg.algorithm]
    sess = OracleSession(g, cfg.access_policy(), seed=seed, budget=cfg.budget,
                         transcript=transcript)
    advice = cfg.n_advice if cfg.n_advice is not None else truth["n"]
    est = None
    t0 = time.perf_counter()
    try:
        est = algo.run(sess, cfg.estimator_config(), advice)
        status = STATUS_NAMES[est.status]
    except BudgetExhausted:
        status = "BudgetExhausted"
    except Exhausted:
        status = "Exhausted"
    wall = (time.perf_counter() - t0) * 1000
    value = est.value if est is not None and status == "Value" else None
    rel = None
    if value is not None:
        ref = _truth_for(algo.target, truth, est)
        rel = (value - ref) / ref
    costs = sess.meter.costs
    rec = TrialRecord(cfg.experiment_id, seed, cfg.algorithm, family, truth["n"], truth["m"],
                      truth["d"], status, value, rel, sess.meter.total,
                      *(costs[op] for op in OPS), round(wall, 3))
    return rec, est, sess


def _trial_worker(args):
    g, truth, family, cfg, seed = args
    return run_one(g, truth, family, cfg, seed)[0]


def run_trials(cfg: ExperimentConfig, graph: Graph | None = None) -> list[TrialRecord]:
    """All trials for every n in the config; seed_i = seed_base + i."""
    cfg.validate()
    records: list[TrialRecord] = []
    sizes = [None] if graph is not None else cfg.graph_sizes()
    for n in sizes:
        if graph is not None:
            g, family = graph, cfg.graph.get("family", "given")
        else:
            g, family = build_graph(cfg.graph, n)
        truth = ground_truth(g)
        jobs = [(g, truth, family, cfg, cfg.seed_base + i) for i in range(cfg.trials)]
        if cfg.workers > 1:
            with ProcessPoolExecutor(cfg.workers) as pool:
                records.extend(pool.map(_trial_worker, jobs))
        else:
            records.extend(_trial_worker(j) for j in jobs)
    if cfg.output:
        write_csv(records, cfg.output)
    return records


def write_csv(records, path=None) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow(r.row())
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


_INT_COLS = {"seed", "n", "m", "cost_total", "cost_rv", "cost_rn", "cost_deg", "cost_re",
             "cost_pair", "cost_add", "cost_full"}
_FLOAT_COLS = {"d_true", "value", "rel_err", "wall_ms"}


def read_csv(path_or_text) -> list[TrialRecord]:
    if "\n" in str(path_or_text):
        fh = io.StringIO(path_or_text)
    else:
        fh = open(path_or_text, encoding="utf-8", newline="")
    with fh:
        rows = list(csv.DictReader(fh))
    out = []
    for row in rows:
        if list(row) != CSV_COLUMNS:
            raise ConfigError("CSV columns do not match the trial record layout")
        kw = {}
        for k, v in row.items():
            if k in _INT_COLS:
                kw[k] = _parse_num(v)
            elif k in _FLOAT_COLS:
                kw[k] = None if v == "" else float(v)
            else:
                kw[k] = v
        out.append(TrialRecord(**kw))
    return out


# ---------------------------------------------------------------------------
# scaling fits

@dataclass
class ScalingReport:
    family: str
    algorithm: str
    points: list
    fitted: float
    residual: float
    expected: float | None
    tolerance: float | None
    band: tuple | None
    passed: bool | None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["band"] = list(self.band) if self.band else None
        return d


def fit_scaling(records, expected: float | None = None, tolerance: float | None = None,
                band: tuple | None = None, family: str | None = None,
                algorithm: str | None = None) -> ScalingReport:
    """Least-squares slope of log2(median cost) against log2(n).

    ``band`` (lo, hi) overrides ``expected +- tolerance`` for the pass flag.
    """
    by_n: dict = {}
    for r in records:
        by_n.setdefault(int(r.n), []).append(float(r.cost_total))
    ns = sorted(by_n)
    if len(ns) < 4 or ns[-1] < 64 * ns[0]:
        raise InsufficientPoints(f"need >= 4 distinct n spanning >= 2^6, got {ns}")
    med = [float(np.median(by_n[n])) for n in ns]
    if min(med) <= 0:
        raise InsufficientPoints("median cost must be positive at every n")
    x, y = np.log2(ns), np.log2(med)
    slope, icept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + icept)) ** 2)))
    if band is None and expected is not None and tolerance is not None:
        band = (expected - tolerance, expected + tolerance)
    passed = None if band is None else bool(band[0] <= slope <= band[1])
    fam = family or (records[0].family if records else "")
    alg = algorithm or (records[0].algo if records else "")
    return ScalingReport(fam, alg, [[n, c] for n, c in zip(ns, med)], float(slope), resid,
                         expected, tolerance, tuple(band) if band else None, passed)


def record_json(rec: TrialRecord, est: Estimate | None = None) -> dict:
    out = rec.row()
    out = {k: (None if v == "" else v) for k, v in out.items()}
    if est is not None:
        out["trace"] = {k: _jsonable(v) for k, v in est.trace.items()}
    return out


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating, Fraction)):
        return float(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v
