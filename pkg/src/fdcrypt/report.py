"""Run reports: counts, overheads, timings, bound checks and figures."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass, field

STAGES = ("fakes", "scaling", "conflicts", "fp")
# pipeline timing entry that produces each stage's additions
TIMING_OF = {"fakes": "grouping", "scaling": "split_scale", "conflicts": "conflict", "fp": "fp"}


class BoundViolation(AssertionError):
    """A stage added more (or fewer) records than the theory allows."""


@dataclass
class RunReport:
    n: int
    m: int
    q: int
    h: int
    k: int
    alpha: float
    split_factor: int
    seed: int | None
    added: dict[str, int] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    output_rows: int = 0
    type1: int = 0
    type2: int = 0
    conflict_bound: int = 0
    fp_lower: int = 0
    fp_upper: int = 0
    fp_nodes: int = 0
    per_mas: list[dict] = field(default_factory=list)

    @property
    def overhead(self) -> dict[str, float]:
        s = max(self.n, 1)
        return {stage: self.added.get(stage, 0) / s for stage in STAGES}

    @property
    def total_overhead(self) -> float:
        return (self.output_rows - self.n) / max(self.n, 1)

    def check_bounds(self) -> None:
        extra = sum(self.added.get(s, 0) for s in STAGES)
        if self.output_rows != self.n + extra:
            raise BoundViolation(
                f"row accounting: {self.output_rows} != {self.n} + {extra}")
        if self.added.get("conflicts", 0) > self.conflict_bound:
            raise BoundViolation(
                f"conflict additions {self.added['conflicts']} exceed h*n = {self.conflict_bound}")
        fp = self.added.get("fp", 0)
        if fp and not self.fp_lower <= fp <= self.fp_upper:
            raise BoundViolation(
                f"FP additions {fp} outside [{self.fp_lower}, {self.fp_upper}]")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["overhead"] = self.overhead
        d["total_overhead"] = self.total_overhead
        return d

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "RunReport":
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
        d.pop("overhead", None)
        d.pop("total_overhead", None)
        return cls(**d)

    def stage_table(self) -> list[dict]:
        rows = []
        for stage in STAGES:
            rows.append({"stage": stage, "added": self.added.get(stage, 0),
                         "overhead": round(self.overhead[stage], 6),
                         "seconds": round(self.timings.get(TIMING_OF[stage], 0.0), 6)})
        rows.append({"stage": "total", "added": self.output_rows - self.n,
                     "overhead": round(self.total_overhead, 6),
                     "seconds": round(sum(self.timings.values()), 6)})
        return rows


def write_table(rows: list[dict], path: str | os.PathLike, delimiter: str = ",") -> None:
    if not rows:
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), delimiter=delimiter, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def render_report(reports: list[tuple[str, RunReport]], outdir: str | os.PathLike,
                  attack_rows: list[dict] | None = None) -> list[str]:
    """Write stage tables plus overhead, timing and attack figures into ``outdir``."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    from .plots import plot_attack_rates, plot_overhead, plot_timings

    os.makedirs(outdir, exist_ok=True)
    written: list[str] = []
    table = []
    for label, rep in reports:
        for row in rep.stage_table():
            table.append({"run": label, **row})
    path = os.path.join(outdir, "stages.csv")
    write_table(table, path)
    written.append(path)

    fig = plot_overhead(reports)
    path = os.path.join(outdir, "overhead.png")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    fig = plot_timings(reports)
    path = os.path.join(outdir, "timings.png")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    if attack_rows:
        path = os.path.join(outdir, "attacks.csv")
        write_table(attack_rows, path)
        written.append(path)
        fig = plot_attack_rates(attack_rows)
        path = os.path.join(outdir, "attacks.png")
        fig.savefig(path, dpi=150, bbox_inches="tight")
        plt.close(fig)
        written.append(path)
    return written
