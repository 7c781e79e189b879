"""Batch runner and exporters (Sankey flows, coverage series, behaviour events)."""
from __future__ import annotations

import csv
import io
import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import behavior
from .config import RunConfig, ScenarioConfig
from .trace import TrialTrace
from .trial import run_trial

log = logging.getLogger(__name__)


@dataclass
class BatchResult:
    scenario: ScenarioConfig
    run: RunConfig
    traces: list[TrialTrace]
    aggregates: dict = field(default_factory=dict)

    @property
    def ok(self) -> list[TrialTrace]:
        return [t for t in self.traces if not t.failed]


def _run_one(args):
    sc, run, seed = args
    return run_trial(sc, run, seed)


def run_batch(sc: ScenarioConfig, run: RunConfig, workers: int = 1, progress=None) -> BatchResult:
    """Trial i uses seed ``base_seed + i``; failed trials are kept and flagged."""
    jobs = [(sc, run, run.base_seed + i) for i in range(run.trials)]
    traces: list[TrialTrace] = []
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            for tr in pool.map(_run_one, jobs):
                traces.append(tr)
                if progress:
                    progress(tr)
    else:
        for job in jobs:
            tr = _run_one(job)
            traces.append(tr)
            if progress:
                progress(tr)
    result = BatchResult(sc, run, traces)
    result.aggregates = aggregates(result.traces, sc)
    return result


def checkpoints(duration: int, m: int) -> list[int]:
    """0, L/4, L/2, 3L/4, L, with the last clamped to the final step where m-ownership exists."""
    last = duration - m
    return [min(int(round(duration * f)), last) for f in (0.0, 0.25, 0.5, 0.75, 1.0)]


def trace_categories(tr: TrialTrace, sc: ScenarioConfig, ks) -> list[str]:
    own = behavior.compute_m_ownership(tr.visibility, sc.ownership_m)
    return [behavior.classify_ownership_profile(own[k], sc.M0, sc.goal, len(sc.targets)) for k in ks]


def coverage_matrix(traces, key: str = "fov_contains") -> np.ndarray:
    """Mean over trials of agents covering each target: (targets, steps)."""
    arrs = [getattr(t, key).sum(axis=1) for t in traces if not t.failed]
    if not arrs:
        raise ValueError("no successful trials")
    return np.mean(arrs, axis=0).T


def interval_mean(cov: np.ndarray, target: int, start: int, end: int) -> float:
    return float(cov[target, start : end + 1].mean())


def occlusion_aware_for(tr: TrialTrace, sc: ScenarioConfig, iv) -> bool:
    own = behavior.compute_m_ownership(tr.visibility, sc.ownership_m)
    h = iv.margin
    k0 = iv.start - h
    L = iv.end - iv.start + 2 * h
    return behavior.detect_occlusion_aware(own, tr.fov_contains, tr.occluded, iv.target, k0, L, h)


def detection_before(tr: TrialTrace, k: int) -> bool:
    """Some agent had an occluder in view strictly before step k."""
    svis = tr.soo_in_fov
    return bool(svis.size and svis[:k].any())


def aggregates(traces: list[TrialTrace], sc: ScenarioConfig) -> dict:
    ok = [t for t in traces if not t.failed]
    out: dict = {"trials": len(traces), "failed": len(traces) - len(ok)}
    if not ok:
        return out
    ks = checkpoints(sc.duration, sc.ownership_m)
    cats = [trace_categories(t, sc, ks) for t in ok]
    out["checkpoints"] = ks
    out["category_frequency"] = [
        {c: sum(1 for row in cats if row[n] == c) / len(ok) for c in behavior.CATEGORIES} for n in range(len(ks))
    ]
    out["goal_final_frequency"] = out["category_frequency"][-1][behavior.GOAL]
    cov = coverage_matrix(ok)
    out["coverage_mean"] = cov.mean(axis=1).tolist()
    out["interval_coverage"] = [
        {
            "name": iv.name,
            "target": iv.target,
            "start": iv.start,
            "end": iv.end,
            "per_target": [interval_mean(cov, t, iv.start, iv.end) for t in range(len(sc.targets))],
        }
        for iv in sc.intervals
    ]
    return out


# exporters ----------------------------------------------------------------


def export_sankey(traces: list[TrialTrace], sc: ScenarioConfig, ks=None) -> dict:
    ok = [t for t in traces if not t.failed]
    ks = checkpoints(sc.duration, sc.ownership_m) if ks is None else list(ks)
    rows = [trace_categories(t, sc, ks) for t in ok]
    nodes = []
    for col, k in enumerate(ks):
        counts = Counter(r[col] for r in rows)
        for c in behavior.CATEGORIES:
            if counts[c]:
                nodes.append({"id": f"{col}:{c}", "column": col, "k": k, "category": c, "count": counts[c]})
    links = []
    for col in range(len(ks) - 1):
        flows = Counter((r[col], r[col + 1]) for r in rows)
        for (a, b), v in sorted(flows.items()):
            links.append({"source": f"{col}:{a}", "target": f"{col + 1}:{b}", "value": v})
    return {"scenario": sc.name, "trials": len(ok), "checkpoints": ks, "nodes": nodes, "links": links}


def sankey_csv(flow: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["source", "target", "value"])
    for link in flow["links"]:
        w.writerow([link["source"], link["target"], link["value"]])
    return buf.getvalue()


def export_coverage(traces: list[TrialTrace], sc: ScenarioConfig, key: str = "fov_contains") -> dict:
    cov = coverage_matrix(traces, key)
    return {
        "scenario": sc.name,
        "dt": sc.dt,
        "measure": key,
        "targets": [t.name for t in sc.targets],
        "series": cov.tolist(),
        "intervals": [iv.model_dump() for iv in sc.intervals],
    }


def coverage_csv(cov: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    names = cov["targets"]
    occluded_cols = [f"occluded_{names[iv['target']]}" for iv in cov["intervals"]]
    w.writerow(["k", "time", *names, *occluded_cols])
    series = np.asarray(cov["series"])
    for k in range(series.shape[1]):
        flags = [int(iv["start"] <= k <= iv["end"]) for iv in cov["intervals"]]
        w.writerow([k, round(k * cov["dt"], 10), *(repr(float(v)) for v in series[:, k]), *flags])
    return buf.getvalue()


def export_events(traces: list[TrialTrace], sc: ScenarioConfig) -> list[dict]:
    events = []
    last = sc.duration - sc.ownership_m
    for tr in traces:
        if tr.failed:
            events.append({"seed": tr.seed, "kind": "TrialFailed", "error": tr.error})
            continue
        own = behavior.compute_m_ownership(tr.visibility, sc.ownership_m)
        for ev in behavior.ownership_changes(own, 0, last):
            events.append({"seed": tr.seed, "kind": "OwnershipChange", "giver": ev.giver, "taker": ev.taker,
                           "target": ev.target, "k0": ev.k0, "L": ev.L})
        for iv in sc.intervals:
            try:
                oa = occlusion_aware_for(tr, sc, iv)
            except (behavior.PreconditionError, IndexError) as exc:
                events.append({"seed": tr.seed, "kind": "OcclusionAwareSkipped", "interval": iv.name, "reason": str(exc)})
                continue
            if oa:
                events.append({"seed": tr.seed, "kind": "OcclusionAware", "target": iv.target,
                               "k0": iv.start - iv.margin, "L": iv.end - iv.start + 2 * iv.margin, "h": iv.margin})
        if tr.occlusions:
            for ev in behavior.occlusion_detections(tr.soo_in_fov):
                events.append({"seed": tr.seed, "kind": "OcclusionDetection", "occluder": ev.occluder,
                               "agent": ev.agent, "k": ev.k})
    return events


def occlusion_share(traces: list[TrialTrace], sc: ScenarioConfig, interval_index: int = -1):
    """Event e: an occluder was seen before the interval; OA evaluated on that interval.

    Trials where the target is not occluded throughout the interval (truth noise can
    shift it off the nominal path) are left out, since the behaviour is undefined there.
    """
    iv = sc.intervals[interval_index]
    pairs = []
    for tr in traces:
        if tr.failed:
            continue
        try:
            oa = occlusion_aware_for(tr, sc, iv)
        except behavior.PreconditionError:
            log.info("seed %d: precondition fails on interval %s", tr.seed, iv.name)
            continue
        pairs.append((detection_before(tr, iv.start), oa))
    return behavior.occlusion_share_stats(pairs)


def drop_step(series: np.ndarray, baseline: float, start: int, run: int) -> int | None:
    """First step >= start from which ``series`` stays below ``baseline`` for ``run`` steps."""
    below = np.asarray(series) < baseline
    for k in range(max(start, 0), len(below) - run + 1):
        if below[k : k + run].all():
            return k
    return None
