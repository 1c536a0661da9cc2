"""Trajectory drivers, report generation, and the top-level run.

Two drivers implement the same stochastic law:

* ``steps``   -- honest per-step integration: exact propagator steps,
                 per-substep trigger sampling, lazy frontier extension.
                 Cost grows with duration / dt.
* ``renewal`` -- event-driven: each epoch's hit (target, time) is drawn
                 in one shot from the epoch template's delivery curves.
                 This is exact for the same law (the per-substep hazards
                 telescope to the delivered-mass distribution) and makes
                 long desk-scale runs cheap.

The no-observer mode has no stochastic events at all; it runs the flow
forward in large exact jumps on the truncated graph and reports the
stationarity residual.

Seed splitting: trajectory i of a run with master seed s uses
``numpy.random.Generator(PCG64(SeedSequence((s, i))))``. This rule is
part of the output contract and must stay stable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .analysis import (
    WeakTiming,
    classify_weak_timing,
    interval_stats,
    segment_telegraph,
)
from .config import RunConfig
from .configurations import (
    ConfigKind,
    EpochGraph,
    LaserDrive,
    build_epoch,
    chain_from_graph,
    extend_frontier,
)
from .epochs import EpochTemplate
from .errors import EmptyLog, InvariantBreach
from .eventlog import EventKind, EventRecord, hits, serialize_log
from .flow import FlowSystem, RateSet, step
from .rules import active_edges, apply_mode, collapse, trigger
from .state import AtomLevel, ChainState, ComponentLabel, Mode, make_label

MASS_ABORT_TOL = 1e-6
EXTENSION_MASS_EPS = 1e-10
EXTENSION_CHECK_EVERY = 64


def derive_rng(master_seed: int, index: int) -> np.random.Generator:
    """Per-trajectory generator derived from (master seed, trajectory index)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((master_seed, index))))


@dataclass
class TrajectoryResult:
    records: list[EventRecord]
    epochs: int
    steps_taken: int = 0
    collapses: int = 0
    max_mass_residual: float = 0.0
    collapse_check_failures: int = 0
    extensions: int = 0
    stationarity_residual: Optional[float] = None
    final_time: float = 0.0


class _TemplateCache:
    """Epoch templates for canonical roots (ledger counts zeroed).

    The epoch graph's shape depends only on the configuration, depth and
    the root's atom level; detector and photon counts just translate the
    labels. One template per root atom therefore serves every epoch.
    """

    def __init__(self, kind: ConfigKind, rates: RateSet, depth: int):
        self.kind = kind
        self.rates = rates
        self.depth = depth
        self._by_atom: dict[tuple[AtomLevel, int], EpochTemplate] = {}

    def get(self, root: ComponentLabel, depth: Optional[int] = None) -> EpochTemplate:
        depth = self.depth if depth is None else depth
        key = (root.atom, depth)
        tpl = self._by_atom.get(key)
        if tpl is None:
            canonical = make_label(root.atom, 0, 0, 0)
            graph = build_epoch(self.kind, canonical, self.rates, depth)
            chain = chain_from_graph(graph)
            tpl = EpochTemplate.from_chain(chain, active_edges(chain))
            if tpl.conservation_residual > MASS_ABORT_TOL:
                raise InvariantBreach(
                    f"epoch template violates conservation by {tpl.conservation_residual:.3e}"
                )
            self._by_atom[key] = tpl
        return tpl


def _shift_to(label: ComponentLabel, root: ComponentLabel) -> ComponentLabel:
    return label.shifted(clicks=root.clicks, strong=root.strong, weak=root.weak)


def _crossing_records(
    tpl: EpochTemplate,
    sink: ComponentLabel,
    tau: float,
    root: ComponentLabel,
    t_epoch: float,
    epoch: int,
) -> list[EventRecord]:
    out = []
    for edge, c in tpl.crossing_times(sink, tau):
        t = min(max(t_epoch + c, t_epoch), t_epoch + tau)
        out.append(
            EventRecord.for_label(
                t, EventKind.WEAK_EDGE_CROSSING, epoch, _shift_to(edge.target, root), aux=1.0
            )
        )
    out.sort(key=lambda r: r.time)
    return out


def run_trajectory_renewal(cfg: RunConfig, rng: np.random.Generator) -> TrajectoryResult:
    """Event-driven trajectory: one uniform draw per epoch."""
    kind = cfg.config_kind()
    rates = cfg.rate_set()
    cache = _TemplateCache(kind, rates, cfg.depth)
    records: list[EventRecord] = []
    root = make_label(AtomLevel.GROUND, 0, 0, 0)
    t = 0.0
    epoch = 0
    residual = 0.0
    while t < cfg.duration:
        records.append(EventRecord.for_label(t, EventKind.EPOCH_START, epoch, root))
        tpl = cache.get(root)
        residual = max(residual, tpl.conservation_residual)
        if not tpl.has_sinks:
            t = cfg.duration
            break
        u = rng.random()
        sink_c, tau, delivered = tpl.sample_hit(u)
        t_hit = t + tau
        if t_hit > cfg.duration:
            t = cfg.duration
            break
        if sink_c.weak > 0:
            records.extend(_crossing_records(tpl, sink_c, tau, root, t, epoch))
        realized = _shift_to(sink_c.without_marks(), root)
        records.append(
            EventRecord.for_label(t_hit, EventKind.HIT, epoch, realized, aux=delivered)
        )
        root = realized
        t = t_hit
        epoch += 1
    return TrajectoryResult(
        records=records,
        epochs=epoch,
        collapses=epoch,
        max_mass_residual=residual,
        final_time=t,
    )


def run_trajectory_steps(
    cfg: RunConfig,
    rng: np.random.Generator,
    max_steps: Optional[int] = None,
) -> TrajectoryResult:
    """Per-step trajectory with explicit transport, trigger, and collapse."""
    kind = cfg.config_kind()
    rates = cfg.rate_set()
    profile = apply_mode(cfg.mode_enum())
    cache = _TemplateCache(kind, rates, cfg.depth)
    propagators: dict[tuple, dict] = {}

    records: list[EventRecord] = []
    res = TrajectoryResult(records=records, epochs=0)
    root = make_label(AtomLevel.GROUND, 0, 0, 0)
    t = 0.0
    epoch = 0
    depth = cfg.depth

    while t < cfg.duration and (max_steps is None or res.steps_taken < max_steps):
        records.append(EventRecord.for_label(t, EventKind.EPOCH_START, epoch, root))
        graph = build_epoch(kind, root, rates, depth, profile)
        state = chain_from_graph(graph, mode=cfg.mode_enum(), time=t, epoch=epoch)
        state._system = _shared_system(state, propagators, (root.atom, depth))
        active = active_edges(state)
        ready = set(graph.ready_labels)
        t_epoch = t
        hit = None

        while t < cfg.duration and (max_steps is None or res.steps_taken < max_steps):
            dt = min(cfg.dt_max, cfg.duration - t)
            state, report = step(state, active, dt)
            res.steps_taken += 1
            t = state.time
            drift = abs(float(state.masses.sum()) - 1.0)
            if drift > MASS_ABORT_TOL:
                raise InvariantBreach(
                    f"mass conservation broke at t={t}: residual {drift:.3e}"
                )
            res.max_mass_residual = max(res.max_mass_residual, drift)
            if profile.trigger_enabled and ready:
                hit = trigger(report, ready, dt, rng)
                if hit is not None:
                    break
            if (
                res.steps_taken % EXTENSION_CHECK_EVERY == 0
                and graph.depth < cfg.max_depth
                and graph.frontier
            ):
                grown = _maybe_extend(graph, state)
                if grown is not None:
                    graph, state = grown
                    state._system = _shared_system(
                        state, propagators, (root.atom, graph.depth)
                    )
                    active = active_edges(state)
                    ready = set(graph.ready_labels)
                    res.extensions += 1

        if hit is None:
            break
        tau = hit.time - t_epoch
        sink_c = hit.target.shifted(
            clicks=-root.clicks, strong=-root.strong, weak=-root.weak
        )
        if sink_c.weak > 0:
            tpl = cache.get(root, depth=graph.depth)
            records.extend(_crossing_records(tpl, sink_c, tau, root, t_epoch, epoch))
        state = collapse(state, hit)
        res.collapses += 1
        if abs(float(state.masses.sum()) - 1.0) > 0 or state.labels[0].ready.any():
            res.collapse_check_failures += 1
        records.append(
            EventRecord.for_label(
                hit.time, EventKind.HIT, epoch, state.labels[0], aux=hit.delivered_mass_at_hit
            )
        )
        root = state.labels[0]
        t = hit.time
        epoch += 1

    res.epochs = epoch
    res.final_time = t
    return res


def _shared_system(state: ChainState, cache: dict, key: tuple) -> FlowSystem:
    """Build the epoch's flow system, sharing propagators across epochs.

    Epoch graphs with the same root atom and depth have identical
    generators up to label translation, so the matrix exponentials can
    be reused as-is.
    """
    sys_ = FlowSystem(state.labels, active_edges(state))
    shared = cache.get(key)
    if shared is None:
        cache[key] = sys_._propagators
    else:
        sys_._propagators = shared
    return sys_


def _maybe_extend(graph: EpochGraph, state: ChainState):
    target = None
    for lab in graph.frontier:
        if lab in state and state.mass_of(lab) > EXTENSION_MASS_EPS:
            target = lab
            break
    if target is None:
        return None
    grown = extend_frontier(graph, target)
    carried = {lab: state.mass_of(lab) for lab in state.labels}
    new_state = chain_from_graph(
        grown, mode=state.mode, time=state.time, epoch=state.epoch, masses=carried
    )
    return grown, new_state


def run_trajectory_flow(cfg: RunConfig, rng: np.random.Generator) -> TrajectoryResult:
    """No-observer driver: uninterrupted deterministic flow, no events.

    The chain is truncated at the configured depth (an unboundedly
    extending chain never reaches a pointwise-stationary profile); mass
    settles into the terminal components and the report carries the
    final max |dm/dt| as the stationarity residual.
    """
    del rng  # nothing stochastic happens without the trigger
    kind = cfg.config_kind()
    rates = cfg.rate_set()
    profile = apply_mode(cfg.mode_enum())
    graph = build_epoch(kind, make_label(AtomLevel.GROUND, 0, 0, 0), rates, cfg.depth, profile)
    state = chain_from_graph(graph, mode=cfg.mode_enum())
    records = [EventRecord.for_label(0.0, EventKind.EPOCH_START, 0, graph.root)]
    active = active_edges(state)
    sys_ = FlowSystem(state.labels, active)
    state._system = sys_
    dt_jump = 10.0 / sys_.max_rate if sys_.max_rate > 0 else cfg.duration
    steps = 0
    residual = 0.0
    while state.time < cfg.duration:
        dt = min(dt_jump, cfg.duration - state.time)
        state, _ = step(state, active, dt)
        steps += 1
        residual = max(residual, abs(float(state.masses.sum()) - 1.0))
        if residual > MASS_ABORT_TOL:
            raise InvariantBreach(f"mass conservation broke: residual {residual:.3e}")
    rate_residual = float(np.abs(sys_.generator @ state.masses).max())
    return TrajectoryResult(
        records=records,
        epochs=1,
        steps_taken=steps,
        max_mass_residual=residual,
        stationarity_residual=rate_residual,
        final_time=state.time,
    )


def run_trajectory(cfg: RunConfig, index: int) -> TrajectoryResult:
    """Dispatch one trajectory on the configured engine."""
    rng = derive_rng(cfg.master_seed, index)
    mode = cfg.mode_enum()
    engine = cfg.engine
    if mode is Mode.ORIGINAL_NO_OBSERVER and engine != "steps":
        return run_trajectory_flow(cfg, rng)
    if engine == "steps":
        return run_trajectory_steps(cfg, rng)
    return run_trajectory_renewal(cfg, rng)


# -- reporting ----------------------------------------------------------


def summarize_trajectory(cfg: RunConfig, index: int, result: TrajectoryResult) -> dict:
    summary: dict = {
        "trajectory": index,
        "engine": cfg.engine,
        "mode": cfg.mode,
        "kind": cfg.kind,
        "lasers": cfg.lasers,
        "epochs": result.epochs,
        "hits": len(hits(result.records)),
        "final_time": result.final_time,
        "max_mass_residual": result.max_mass_residual,
        "collapse_check_failures": result.collapse_check_failures,
        "extensions": result.extensions,
    }
    if result.stationarity_residual is not None:
        summary["stationarity_residual"] = result.stationarity_residual
    hit_times = [r.time for r in hits(result.records)]
    if len(hit_times) >= 2:
        gaps = np.diff(hit_times)
        summary["max_interhit_gap"] = float(gaps.max())
    try:
        seg = segment_telegraph(result.records, cfg.resolved_threshold())
        stats = interval_stats(seg)
        summary.update(
            {
                "bright_intervals": stats.bright_count,
                "dark_intervals": stats.dark_count,
                "bright_mean": stats.bright_mean,
                "dark_mean": stats.dark_mean if stats.dark_count else None,
                "dark_rate_estimate": stats.dark_rate_estimate,
            }
        )
        if cfg.config_kind().lasers is LaserDrive.BOTH and stats.dark_count:
            timing = classify_weak_timing(
                result.records, seg, cfg.config_kind(), cfg.rate_set()
            )
            summary["timing"] = {
                "at_end": timing.count(WeakTiming.AT_END),
                "at_start": timing.count(WeakTiming.AT_START),
                "ambiguous": timing.count(WeakTiming.AMBIGUOUS),
            }
    except EmptyLog:
        summary["bright_intervals"] = 0
        summary["dark_intervals"] = 0
    return summary


def render_text_report(cfg: RunConfig, summaries: list[dict]) -> str:
    lines = [
        "telegraph run report",
        f"  kind={cfg.kind} lasers={cfg.lasers} mode={cfg.mode}",
        f"  rates: ksa={cfg.k_strong_absorb!r} kse={cfg.k_strong_emit!r}"
        f" kwa={cfg.k_weak_absorb!r} kwe={cfg.k_weak_emit!r}",
        f"  duration={cfg.duration!r} dt_max={cfg.dt_max!r} seed={cfg.master_seed}"
        f" trajectories={cfg.trajectories}",
        f"  threshold_gap={cfg.resolved_threshold()!r}",
        "",
    ]
    for s in summaries:
        lines.append(f"trajectory {s['trajectory']}:")
        lines.append(
            f"  epochs={s['epochs']} hits={s['hits']}"
            f" bright={s.get('bright_intervals', 0)} dark={s.get('dark_intervals', 0)}"
        )
        lines.append(f"  max_mass_residual={s['max_mass_residual']!r}")
        if "stationarity_residual" in s:
            lines.append(f"  stationarity_residual={s['stationarity_residual']!r}")
        if "timing" in s:
            t = s["timing"]
            lines.append(
                f"  weak timing: at_end={t['at_end']} at_start={t['at_start']}"
                f" ambiguous={t['ambiguous']}"
            )
        lines.append("")
    return "\n".join(lines)


def run(cfg: RunConfig) -> int:
    """Execute a full run: one log per trajectory plus text/JSON reports.

    Returns 0 on success, 1 for I/O failure, 2 for a runtime invariant
    breach (with a diagnostic dump of the offending trajectory).
    """
    try:
        out = cfg.out_dir()
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"cannot create output directory: {exc}")
        return 1
    summaries = []
    try:
        for i in range(cfg.trajectories):
            result = run_trajectory(cfg, i)
            (out / f"events_{i:03d}.tsv").write_text(
                serialize_log(result.records), encoding="utf-8"
            )
            summaries.append(summarize_trajectory(cfg, i, result))
    except InvariantBreach as exc:
        print(f"invariant breach: {exc}")
        (out / "diagnostic.json").write_text(
            json.dumps({"error": str(exc)}, sort_keys=True), encoding="utf-8"
        )
        return 2
    except OSError as exc:
        print(f"I/O failure: {exc}")
        return 1

    aggregate = {
        "trajectories": cfg.trajectories,
        "total_hits": sum(s["hits"] for s in summaries),
        "total_dark_intervals": sum(s.get("dark_intervals", 0) for s in summaries),
        "worst_mass_residual": max(s["max_mass_residual"] for s in summaries),
    }
    try:
        with (out / "report.jsonl").open("w", encoding="utf-8") as fh:
            for s in summaries:
                fh.write(json.dumps(s, sort_keys=True) + "\n")
            fh.write(json.dumps({"aggregate": aggregate}, sort_keys=True) + "\n")
        (out / "report.txt").write_text(render_text_report(cfg, summaries), encoding="utf-8")
    except OSError as exc:
        print(f"I/O failure: {exc}")
        return 1
    return 0
