"""Grid evaluation of a scenario: one CSV row per point, deterministic under a fixed seed."""

from __future__ import annotations

import csv
import dataclasses
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .discs import disc_to_record
from .envelope import minimize_envelope
from .errors import NotInConeError, SiciakError
from .oracles import validate_lower
from .scenario import ScenarioConfig, scenario_from_dict

VALUE_COLUMNS = ("rho", "vh_upper", "vh_lower", "gap", "degree", "penalty_residual", "status")


@dataclass
class PointResult:
    index: int
    point: np.ndarray
    rho: Optional[float] = None
    tilde_phi: Optional[float] = None
    vh_upper: Optional[float] = None
    vh_lower: Optional[float] = None
    degree: Optional[int] = None
    penalty_residual: Optional[float] = None
    status: str = "ok"
    kind: str = ""
    disc: str = ""
    traces: dict = dataclasses.field(default_factory=dict)

    @property
    def gap(self) -> Optional[float]:
        if self.vh_upper is None or self.vh_lower is None:
            return None
        return self.vh_upper - self.vh_lower


def columns(dimension: int) -> list:
    coords = []
    for i in range(1, dimension + 1):
        coords += [f"z{i}_re", f"z{i}_im"]
    return coords + list(VALUE_COLUMNS)


def fmt(x) -> str:
    """12 significant digits; empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def evaluate_point(scn: ScenarioConfig, index: int, z, valid_lowers=None, budget_secs=None, hw=None) -> PointResult:
    """Everything reported for one grid point; errors land in ``status``."""
    z = np.asarray(z, dtype=complex)
    res = PointResult(index, z)
    hw = hw or scn.homogenized()
    notes = []
    try:
        res.tilde_phi = hw.tilde_phi(z)
        res.rho = math.exp(res.tilde_phi) if res.tilde_phi > hw.floor else 0.0
    except NotInConeError:
        notes.append("not-in-cone")
    lowers = scn.lower_candidates if valid_lowers is None else valid_lowers
    if lowers:
        res.vh_lower = max(c.at(z) for c in lowers)
    cfg = scn.optimizer
    if budget_secs is not None:
        cfg = dataclasses.replace(cfg, time_budget=budget_secs)
    best = None
    for kind in scn.kinds:
        try:
            r = minimize_envelope(hw, z, kind, cfg)
        except (SiciakError, ValueError) as err:
            notes.append(f"{kind}: {type(err).__name__}")
            continue
        res.traces[kind] = r.trace
        if not r.converged:
            notes.append(f"{kind}: budget-exhausted")
        if best is None or r.value < best.value:
            best = r
    if best is not None:
        res.vh_upper = best.value
        res.degree = best.degree_used
        res.penalty_residual = best.penalty_residual
        res.kind = best.kind
        res.disc = disc_to_record(best.best_disc)
    res.status = "ok" if not notes else ";".join(notes)
    return res


def row(res: PointResult) -> list:
    out = []
    for c in res.point:
        out += [fmt(c.real), fmt(c.imag)]
    return out + [fmt(res.rho), fmt(res.vh_upper), fmt(res.vh_lower), fmt(res.gap), fmt(res.degree),
                  fmt(res.penalty_residual), res.status]


# worker-process state, rebuilt from the JSON document
_WORKER = {}


def _init_worker(doc, budget_secs):
    scn = scenario_from_dict(doc)
    _WORKER.update(scn=scn, hw=scn.homogenized(), budget=budget_secs,
                   lowers=[c for c in scn.lower_candidates if not validate_lower(c, scn.region, scn.weight)])


def _work(args):
    index, z = args
    return evaluate_point(_WORKER["scn"], index, z, _WORKER["lowers"], _WORKER["budget"], _WORKER["hw"])


def eval_scenario_grid(scn: ScenarioConfig, workers: int = 1, budget_secs: Optional[float] = None) -> list:
    """Evaluate every grid point; rows come back ordered by point index.

    Lower candidates failing validation are dropped (they do not contribute to
    ``vh_lower``).  With ``workers > 1`` points are spread over processes that
    rebuild the scenario from its source document.
    """
    jobs = list(enumerate(scn.points))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=(scn.source, budget_secs)) as pool:
            results = list(pool.map(_work, jobs))
    else:
        lowers = [c for c in scn.lower_candidates if not validate_lower(c, scn.region, scn.weight)]
        hw = scn.homogenized()
        results = [evaluate_point(scn, i, z, lowers, budget_secs, hw) for i, z in jobs]
    return sorted(results, key=lambda r: r.index)


def to_csv(results, dimension: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns(dimension))
    for r in results:
        w.writerow(row(r))
    return buf.getvalue()


def discs_sidecar(results) -> str:
    """One line per point: index, kind and the serialized best disc."""
    return "".join(f"{r.index}\t{r.kind or '-'}\t{r.disc or '-'}\n" for r in results)


def write_results(results, dimension: int, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(to_csv(results, dimension))
    with open(f"{path}.discs", "w") as fh:
        fh.write(discs_sidecar(results))
