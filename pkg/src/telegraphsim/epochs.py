"""Precomputed per-epoch flow solutions and event-time sampling.

Within one epoch the active flow graph is fixed and linear, and every
ready component is absorbing (its outgoing edges are blocked), so the
mass delivered into ready target j by time t is just m_j(t). The hit
law makes the unconditional density of the collapse equal to the
current into each target, hence:

    P(hit lands on j)            = m_j(infinity)
    P(hit on j before t | on j)  = m_j(t) / m_j(infinity)

An EpochTemplate tabulates the m_j(t) curves once on a two-piece grid
(fine over the fast transient, coarse over the slow weak-cycle tail)
and then samples the epoch-ending hit (target, time) exactly from one
uniform draw by inverting the stacked delivery curves. This is the same
law the per-step trigger implements; the two routes are cross-checked
statistically in the tests.

The template also reconstructs, for a hit at time tau, where the
realized history's weak photon was emitted: the crossing-time density
of the mass parcel arriving at the hit is proportional to

    flux across the weak edge at c   *   lag density of the path
                                          from the edge to the target
                                          evaluated at (tau - c)

whose weighted median localizes the emission at the end of the dark
period when the slow stage precedes the weak edge, and at the beginning
when the slow stage follows it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .flow import FlowSystem
from .state import ChainState, ComponentLabel, EdgeKind, FlowEdge

FAST_SPAN_EFOLDS = 60.0
TAIL_EFOLDS = 50.0
CELLS_PER_PIECE = 3000


@dataclass(frozen=True)
class CrossingStage:
    """One weak-photon-creating edge feeding a ready target."""

    edge: FlowEdge
    flux_rate: np.ndarray  # rate * m_source(t) on the template grid
    lag_density: np.ndarray  # arrival density at the target of a unit impulse


class EpochTemplate:
    """Tabulated solution of one epoch's transport problem."""

    def __init__(
        self,
        labels: Sequence[ComponentLabel],
        active_edges: Sequence[FlowEdge],
        ready_labels: Sequence[ComponentLabel],
        initial: np.ndarray,
    ):
        self.system = FlowSystem(labels, active_edges)
        self.labels = self.system.labels
        self.index = self.system.index
        self.sink_labels = tuple(ready_labels)
        self.sink_idx = np.array(
            [self.index[lab] for lab in self.sink_labels], dtype=np.intp
        )

        self.grid, self._piece_props = self._build_grid()
        self.masses = self._propagate(np.asarray(initial, dtype=np.float64))

        if len(self.sink_labels):
            delivered = self.masses[:, self.sink_idx]
            self.delivered = np.maximum.accumulate(delivered, axis=0)
            self.final_delivered = self.delivered[-1]
            self.cum_final = np.cumsum(self.final_delivered)
            self._columns = [np.ascontiguousarray(self.delivered[:, j])
                             for j in range(len(self.sink_labels))]
        else:
            self.delivered = np.zeros((len(self.grid), 0))
            self.final_delivered = np.zeros(0)
            self.cum_final = np.zeros(0)
            self._columns = []
        self.conservation_residual = float(np.abs(self.masses.sum(axis=1) - 1.0).max())
        self._stage_cache: dict[ComponentLabel, list[CrossingStage]] = {}

    # -- construction -------------------------------------------------

    @classmethod
    def from_chain(cls, state: ChainState, active: Sequence[FlowEdge]) -> "EpochTemplate":
        ready = tuple(lab for lab in state.labels if lab.ready.any())
        return cls(state.labels, active, ready, state.masses)

    def _build_grid(self) -> tuple[np.ndarray, list[tuple[int, float]]]:
        outflow = -np.diag(self.system.generator)
        flowing = outflow[outflow > 0]
        if flowing.size == 0:
            return np.array([0.0, 1.0]), [(1, 1.0)]
        k_max = float(flowing.max())
        k_min = float(flowing.min())
        t_end = TAIL_EFOLDS / k_min
        fast_end = min(FAST_SPAN_EFOLDS / k_max, t_end)
        pieces = [(CELLS_PER_PIECE, fast_end / CELLS_PER_PIECE)]
        grid = [np.linspace(0.0, fast_end, CELLS_PER_PIECE + 1)]
        if t_end > fast_end * (1 + 1e-12):
            dt2 = (t_end - fast_end) / CELLS_PER_PIECE
            pieces.append((CELLS_PER_PIECE, dt2))
            grid.append(fast_end + dt2 * np.arange(1, CELLS_PER_PIECE + 1))
        return np.concatenate(grid), pieces

    def _propagate(self, m0: np.ndarray) -> np.ndarray:
        out = np.empty((len(self.grid), len(self.labels)))
        out[0] = m0
        m = m0
        row = 1
        for n_cells, dt in self._piece_props:
            P = self.system.propagator(dt)
            for _ in range(n_cells):
                m = P @ m
                out[row] = m
                row += 1
        return out

    # -- hit sampling ---------------------------------------------------

    @property
    def has_sinks(self) -> bool:
        return len(self.sink_labels) > 0 and float(self.cum_final[-1]) > 0.0

    def sample_hit(self, u: float) -> tuple[ComponentLabel, float, float]:
        """Map one uniform draw to (target, hit time, delivered mass at hit).

        The stacked per-target delivery curves are inverted, so target
        marginals equal the final delivered masses and the hit-time law
        conditional on the target follows that target's delivery curve.
        """
        total = float(self.cum_final[-1])
        if u >= total:  # residual beyond the tabulated horizon (~1e-20)
            j = int(np.argmax(self.final_delivered))
            return self.sink_labels[j], float(self.grid[-1]), float(self.final_delivered[j])
        j = int(np.searchsorted(self.cum_final, u, side="right"))
        v = u - (float(self.cum_final[j - 1]) if j > 0 else 0.0)
        col = self._columns[j]
        k = int(np.searchsorted(col, v, side="left"))
        k = min(max(k, 1), len(col) - 1)
        lo, hi = col[k - 1], col[k]
        frac = 0.0 if hi <= lo else (v - lo) / (hi - lo)
        t = float(self.grid[k - 1] + frac * (self.grid[k] - self.grid[k - 1]))
        return self.sink_labels[j], t, float(v)

    # -- realized weak-photon crossings --------------------------------

    def _descendants(self, start: ComponentLabel) -> set[ComponentLabel]:
        adj: dict[ComponentLabel, list[ComponentLabel]] = {}
        for e in self.system.edges:
            adj.setdefault(e.source, []).append(e.target)
        seen = {start}
        stack = [start]
        while stack:
            lab = stack.pop()
            for nxt in adj.get(lab, ()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return seen

    def _stages(self, sink: ComponentLabel) -> list[CrossingStage]:
        stages = self._stage_cache.get(sink)
        if stages is not None:
            return stages
        stages = []
        cells = np.diff(self.grid)
        for e in self.system.edges:
            if e.kind is not EdgeKind.WEAK_EMIT:
                continue
            if sink not in self._descendants(e.target):
                continue
            flux = self.system.rates[self.system.edges.index(e)] * self.masses[
                :, self.index[e.source]
            ]
            impulse = np.zeros(len(self.labels))
            impulse[self.index[e.target]] = 1.0
            lag_cum = self._propagate(impulse)[:, self.index[sink]]
            lag_cum = np.maximum.accumulate(lag_cum)
            dens = np.zeros_like(lag_cum)
            dens[1:] = np.diff(lag_cum) / cells
            stages.append(CrossingStage(edge=e, flux_rate=flux, lag_density=dens))
        stages.sort(key=lambda s: s.edge.target.weak)
        self._stage_cache[sink] = stages
        return stages

    def crossing_times(
        self, sink: ComponentLabel, tau: float
    ) -> list[tuple[FlowEdge, float]]:
        """Flux-weighted median emission time of each realized weak photon.

        For a hit on ``sink`` at epoch time ``tau``, each weak edge on
        the realized path contributes a crossing-time density
        flux(c) * lag(tau - c); its weighted median is returned per
        stage, ordered by weak-photon count.
        """
        out = []
        for stage in self._stages(sink):
            c = self._conditional_median(stage, tau)
            out.append((stage.edge, c))
        return out

    def _conditional_median(self, stage: CrossingStage, tau: float) -> float:
        # Candidate crossing times from both natural grids: the flux
        # curve's own grid and the lag grid reflected about tau. This
        # keeps resolution fine wherever either factor varies quickly.
        cand = np.concatenate([self.grid, tau - self.grid])
        cand = np.unique(np.clip(cand[(cand >= 0.0) & (cand <= tau)], 0.0, tau))
        if cand.size < 2:
            return tau
        flux = np.interp(cand, self.grid, stage.flux_rate)
        lag = np.interp(tau - cand, self.grid, stage.lag_density)
        dens = flux * lag
        # Trapezoid cell masses, then the interpolated median time.
        w = 0.5 * (dens[1:] + dens[:-1]) * np.diff(cand)
        total = float(w.sum())
        if total <= 0.0:
            return tau
        cum = np.cumsum(w)
        half = 0.5 * total
        k = int(np.searchsorted(cum, half))
        lo = cum[k - 1] if k > 0 else 0.0
        span = cum[k] - lo
        frac = 0.0 if span <= 0 else (half - lo) / span
        return float(cand[k] + frac * (cand[k + 1] - cand[k]))
