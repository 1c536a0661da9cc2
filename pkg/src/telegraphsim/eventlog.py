"""Event-log records and their tab-separated on-disk format.

One line per record: time, kind, epoch, then the label fields (atom
level, detector clicks, strong count, weak count) and an auxiliary
value (delivered mass for hits, crossing flux weight for weak-edge
crossings). Floats are written with Python's shortest round-trip
representation so logs are diffable and parse back bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .state import AtomLevel, ComponentLabel, make_label

FORMAT_VERSION = 1
_HEADER = (
    f"# telegraph-event-log v{FORMAT_VERSION}\n"
    "# time\tkind\tepoch\tatom\tclicks\tstrong\tweak\taux\n"
)


class EventKind(Enum):
    HIT = "hit"
    WEAK_EDGE_CROSSING = "weak_edge_crossing"
    EPOCH_START = "epoch_start"


@dataclass(frozen=True, slots=True)
class EventRecord:
    """One timestamped simulator event."""

    time: float
    kind: EventKind
    epoch: int
    atom: int
    clicks: int
    strong: int
    weak: int
    aux: float

    @classmethod
    def for_label(
        cls,
        time: float,
        kind: EventKind,
        epoch: int,
        label: ComponentLabel,
        aux: float = 0.0,
    ) -> "EventRecord":
        return cls(
            time=float(time),
            kind=kind,
            epoch=int(epoch),
            atom=label.atom.value,
            clicks=label.clicks,
            strong=label.strong,
            weak=label.weak,
            aux=float(aux),
        )

    @property
    def label(self) -> ComponentLabel:
        return make_label(AtomLevel(self.atom), self.clicks, self.strong, self.weak)


def validate_log(records: Sequence[EventRecord]) -> None:
    """Check the ordering invariants: times and epochs nondecreasing."""
    last_t = -float("inf")
    last_e = -1
    starts = set()
    for r in records:
        if r.time < last_t:
            raise ValueError(f"record times decrease at t={r.time}")
        if r.epoch < last_e:
            raise ValueError(f"record epochs decrease at epoch={r.epoch}")
        if r.kind is EventKind.EPOCH_START:
            if r.epoch in starts:
                raise ValueError(f"epoch {r.epoch} starts twice")
            starts.add(r.epoch)
        last_t, last_e = r.time, r.epoch


def serialize_log(records: Iterable[EventRecord]) -> str:
    lines = [_HEADER]
    for r in records:
        lines.append(
            f"{r.time!r}\t{r.kind.value}\t{r.epoch}\t{r.atom}\t{r.clicks}"
            f"\t{r.strong}\t{r.weak}\t{r.aux!r}\n"
        )
    return "".join(lines)


def parse_log(text: str) -> list[EventRecord]:
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 8:
            raise ValueError(f"line {lineno}: expected 8 tab-separated fields")
        t, kind, epoch, atom, clicks, strong, weak, aux = parts
        records.append(
            EventRecord(
                time=float(t),
                kind=EventKind(kind),
                epoch=int(epoch),
                atom=int(atom),
                clicks=int(clicks),
                strong=int(strong),
                weak=int(weak),
                aux=float(aux),
            )
        )
    return records


def write_log(path: Path, records: Iterable[EventRecord]) -> None:
    Path(path).write_text(serialize_log(records), encoding="utf-8")


def read_log(path: Path) -> list[EventRecord]:
    return parse_log(Path(path).read_text(encoding="utf-8"))


def hits(records: Iterable[EventRecord]) -> list[EventRecord]:
    return [r for r in records if r.kind is EventKind.HIT]


def crossings(records: Iterable[EventRecord]) -> list[EventRecord]:
    return [r for r in records if r.kind is EventKind.WEAK_EDGE_CROSSING]
