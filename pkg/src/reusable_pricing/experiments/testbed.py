"""Random testbeds and the worst-case ratio sweeps built on them."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ..demand import PROFIT, DemandCurve, Family, Weights
from ..dynamic_opt import MdpConfig, solution_from_policy, solve_dynamic
from ..guarantees.zspace import ratio_R, z_from_policy
from ..loss_chain import Instance
from ..static_policy import RatioTuple, StaticReport, ratio_report

FAMILY_INDEX = {Family.LINEAR: 0, Family.EXPONENTIAL: 1, Family.LOGISTIC: 2}
TABLE1_C = (2, 3, 4, 5, 10, 20)
TABLE2_C = (2, 3, 4, 5, 10, 15, 20)
TIGHTNESS_MU = (1.0, 1e-1, 1e-2, 1e-3, 1e-4)


@dataclass(frozen=True)
class TestbedSpec:
    """Instance distribution for one demand family over several capacities."""

    __test__ = False  # keep pytest from collecting this class

    family: Family = Family.LINEAR
    C_list: tuple[int, ...] = TABLE1_C
    count: int = 1000
    seed: int = 0
    alpha_mode: str = "fixed"  # "fixed" (pure profit) or "uniform" (simplex)
    inv_mu: tuple[float, float] = (0.05, 50.0)
    a: tuple[float, float] = (0.1, 5.0)
    b: tuple[float, float] = (0.5, 10.0)
    p0: tuple[float, float] = (0.0, 20.0)
    c: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "C_list", tuple(int(C) for C in self.C_list))
        if self.family not in FAMILY_INDEX:
            raise ValueError(f"testbeds support linear, exponential and logistic demand, got {self.family}")
        if self.alpha_mode not in ("fixed", "uniform"):
            raise ValueError(f"alpha_mode must be 'fixed' or 'uniform', got {self.alpha_mode!r}")
        if self.count < 1 or any(C < 1 for C in self.C_list):
            raise ValueError("count and every capacity must be positive")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["family"] = self.family.value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> TestbedSpec:
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        for key in ("inv_mu", "a", "b", "p0", "C_list"):
            if key in known:
                known[key] = tuple(known[key])
        return cls(**known)


def generate_instances(spec: TestbedSpec, C: int) -> list[Instance]:
    """Draw ``spec.count`` instances with capacity ``C``.

    The stream is keyed on (seed, family, C), so each cell is reproducible on
    its own and independent of the other capacities in the list.
    """
    rng = np.random.default_rng([spec.seed, FAMILY_INDEX[spec.family], C])
    out = []
    for _ in range(spec.count):
        mu = 1.0 / rng.uniform(*spec.inv_mu)
        a = rng.uniform(*spec.a)
        b = rng.uniform(*spec.b)
        if spec.family is Family.LOGISTIC:
            curve = DemandCurve.logistic(a, b, rng.uniform(*spec.p0))
        else:
            curve = DemandCurve(spec.family, a, b)
        if spec.alpha_mode == "uniform":
            w = Weights.normalized(*rng.dirichlet(np.ones(3)))
        else:
            w = PROFIT
        out.append(Instance(C, mu, spec.c, w, curve))
    return out


@dataclass(frozen=True)
class InstanceOutcome:
    index: int
    instance: Instance
    report: StaticReport
    iterations: int


def evaluate_instance(inst: Instance, index: int = 0, cfg: MdpConfig | None = None) -> InstanceOutcome:
    sol = solve_dynamic(inst, cfg)
    return InstanceOutcome(index, inst, ratio_report(inst, sol), sol.iterations)


def _evaluate_star(args):
    return evaluate_instance(*args)


def evaluate_all(instances: list[Instance], jobs: int = 1, cfg: MdpConfig | None = None) -> list[InstanceOutcome]:
    """Solve every instance; results come back in input order for any ``jobs``."""
    tasks = [(inst, k, cfg) for k, inst in enumerate(instances)]
    if jobs <= 1:
        return [_evaluate_star(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_evaluate_star, tasks, chunksize=32))


def _worst(ratios: list[RatioTuple]) -> RatioTuple:
    return RatioTuple(*(min(col) for col in zip(*ratios)))


@dataclass(frozen=True)
class SweepRow:
    """Worst ratios over one (family, C) cell.

    ``argmin_tilde`` and ``argmin_best`` index the instance with the smallest
    weighted ratio; ``weights_at_min`` are its objective weights.
    """

    family: str
    C: int
    count: int
    worst_tilde: RatioTuple
    worst_best: RatioTuple
    argmin_tilde: int
    argmin_best: int
    weights_at_min: tuple[float, float, float]
    max_iterations: int = 0
    extra: dict = field(default_factory=dict)

    def flat(self) -> dict:
        out = {"family": self.family, "C": self.C, "count": self.count}
        for name, rt in (("tilde", self.worst_tilde), ("best", self.worst_best)):
            for key, val in rt._asdict().items():
                out[f"worst_{name}_{key}"] = val
        out["argmin_tilde"] = self.argmin_tilde
        out["argmin_best"] = self.argmin_best
        for k, v in zip(("alpha1_at_min", "alpha2_at_min", "alpha3_at_min"), self.weights_at_min):
            out[k] = v
        out["max_iterations"] = self.max_iterations
        return out


def summarize(family: Family | str, C: int, outcomes: list[InstanceOutcome]) -> SweepRow:
    tilde = [o.report.ratios_tilde for o in outcomes]
    best = [o.report.ratios_best for o in outcomes]
    k_t = min(range(len(tilde)), key=lambda k: (tilde[k].weighted, k))
    k_b = min(range(len(best)), key=lambda k: (best[k].weighted, k))
    return SweepRow(Family(family).value, C, len(outcomes), _worst(tilde), _worst(best),
                    outcomes[k_t].index, outcomes[k_b].index,
                    tuple(map(float, outcomes[k_t].instance.weights.as_tuple())),
                    max(o.iterations for o in outcomes))


def run_sweep(spec: TestbedSpec, jobs: int = 1) -> list[SweepRow]:
    rows = []
    for C in spec.C_list:
        outcomes = evaluate_all(generate_instances(spec, C), jobs)
        rows.append(summarize(spec.family, C, outcomes))
    return rows


def run_table1(families=(Family.LINEAR, Family.EXPONENTIAL, Family.LOGISTIC), C_list=TABLE1_C,
               count: int = 1000, seed: int = 0, jobs: int = 1) -> list[SweepRow]:
    """Worst profit ratios of the constructed and the best static rates."""
    rows = []
    for fam in families:
        rows += run_sweep(TestbedSpec(fam, tuple(C_list), count, seed, "fixed"), jobs)
    return rows


def run_table2(C_list=TABLE2_C, count: int = 1000, seed: int = 0, jobs: int = 1,
               family: Family = Family.LINEAR) -> list[SweepRow]:
    """Worst weighted and per-objective ratios with weights drawn on the simplex."""
    return run_sweep(TestbedSpec(family, tuple(C_list), count, seed, "uniform"), jobs)


TABLE1_COLUMNS = ("family", "C", "count", "worst_tilde_profit", "worst_best_profit",
                  "argmin_tilde", "argmin_best", "max_iterations")
TABLE2_COLUMNS = ("family", "C", "count", "worst_tilde_weighted", "worst_tilde_profit",
                  "worst_tilde_market", "worst_tilde_service", "worst_best_weighted",
                  "argmin_tilde", "alpha1_at_min", "alpha2_at_min", "alpha3_at_min", "max_iterations")


def tightness_instance(mu: float, Lambda: float = 1.0) -> Instance:
    return Instance(3, mu, 0.0, Weights(0.0, 0.0, 1.0), DemandCurve.reciprocal(), Lambda)


def run_tightness(mu_list=TIGHTNESS_MU, Lambda: float = 1.0) -> list[dict]:
    """Ratio of the constructed static rate under the policy (0, Lambda, Lambda).

    That policy never lets the last unit go, so its service level is 1 and it
    ties for optimal with the service-only objective.
    """
    floor = 15.0 / 19.0
    rows = []
    for mu in mu_list:
        inst = tightness_instance(mu, Lambda)
        pol = [0.0, Lambda, Lambda]
        rep = ratio_report(inst, solution_from_policy(inst, pol))
        R = ratio_R(z_from_policy(inst, pol))
        rows.append({"mu": mu, "R": R, "gap": R - floor,
                     "service_ratio": rep.ratios_tilde.service,
                     "market_ratio": rep.ratios_tilde.market,
                     "lambda_tilde": rep.lambda_tilde})
    return rows


def gaps_decreasing(rows: list[dict]) -> bool:
    """True when the gap to 15/19 shrinks as ``mu`` shrinks."""
    ordered = sorted(rows, key=lambda r: -r["mu"])
    gaps = [abs(r["gap"]) for r in ordered]
    return all(g1 > g2 for g1, g2 in zip(gaps, gaps[1:]))


def _cell(v):
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return v


def to_csv(rows: list[dict], columns=None) -> str:
    columns = list(columns or rows[0].keys())
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: _cell(r.get(k)) for k in columns})
    return buf.getvalue()


def to_json(rows: list[dict], columns=None) -> str:
    if columns is not None:
        rows = [{k: r.get(k) for k in columns} for r in rows]
    return json.dumps(rows, indent=2, sort_keys=False) + "\n"
