"""Seeded instance generation, the experiment grid and CSV/SVG reporting.

Instances draw every nominal cost and scaling entry from U[0,1] using the
package's own xoshiro256** generator (splitmix64-seeded) so that results are
byte-stable across platforms; the generator name, the seed-derivation rule
and the scaling floor are all recorded in the run metadata.  Scalings below
1e-6 are redrawn to keep d strictly positive.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from ._rng import Xoshiro256StarStar, splitmix64_mix
from .core import SolverError, loads_strict
from .robust import (
    DEFAULT_SUBGRADIENT,
    METHODS,
    RobustInstance,
    SubgradientConfig,
    nominal_value,
    solve_counterpart,
    worst_case,
)

PRNG_NAME = "xoshiro256** (splitmix64-seeded)"
SEED_RULE = "instance_seed = mix64(base_seed XOR mix64((k_index+1)<<40 | (b_index+1)<<20 | instance))"
D_FLOOR = 1e-6

CSV_HEADER = ("cell", "k", "b", "instance", "method", "nominal", "worst_case", "time_s")


def instance_seed(base_seed: int, k_index: int, b_index: int, instance: int) -> int:
    """Per-instance seed derived by splitting the base seed (positional counters)."""
    counter = ((k_index + 1) << 40) | ((b_index + 1) << 20) | instance
    return splitmix64_mix((base_seed ^ splitmix64_mix(counter)) & ((1 << 64) - 1))


def generate_instance(n: int, k: int, b: float, seed: int) -> RobustInstance:
    """Draw a_tilde and d entrywise from U[0,1]; d entries below 1e-6 are redrawn."""
    rng = Xoshiro256StarStar(seed)
    a_tilde = np.array(rng.uniforms(n))
    d = np.empty(n)
    for i in range(n):
        value = rng.uniform()
        while value < D_FLOOR:
            value = rng.uniform()
        d[i] = value
    return RobustInstance(a_tilde=a_tilde, d=d, b=float(b), k=int(k), n=int(n))


@dataclass(frozen=True)
class ExperimentConfig:
    """Grid settings; defaults reproduce the full experiment."""

    n: int = 200
    k_list: tuple = (5, 10, 20)
    b_list: tuple = (5.0, 10.0, 20.0)
    instances_per_cell: int = 10
    seed: int = 0
    methods: tuple = METHODS
    record_wall_time: bool = True
    solver: SubgradientConfig = field(default_factory=lambda: DEFAULT_SUBGRADIENT)

    def __post_init__(self):
        if self.n < 1 or self.instances_per_cell < 1:
            raise ValueError("n and instances_per_cell must be positive")
        if not self.k_list or not self.b_list:
            raise ValueError("k_list and b_list must be nonempty")
        if any(not 1 <= int(k) <= self.n for k in self.k_list):
            raise ValueError("every k must satisfy 1 <= k <= n")
        if any(b < 0 for b in self.b_list):
            raise ValueError("budgets must be nonnegative")
        if not self.methods:
            raise ValueError("methods must be nonempty")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
        object.__setattr__(self, "k_list", tuple(int(k) for k in self.k_list))
        object.__setattr__(self, "b_list", tuple(float(b) for b in self.b_list))
        object.__setattr__(self, "methods", tuple(self.methods))


def parse_experiment_config(obj: dict) -> ExperimentConfig:
    kwargs = {}
    for key in ("n", "instances_per_cell", "seed"):
        if key in obj:
            kwargs[key] = int(obj[key])
    if "k_list" in obj:
        kwargs["k_list"] = tuple(int(k) for k in obj["k_list"])
    if "b_list" in obj:
        kwargs["b_list"] = tuple(float(b) for b in obj["b_list"])
    if "methods" in obj:
        kwargs["methods"] = tuple(obj["methods"])
    if "record_wall_time" in obj:
        kwargs["record_wall_time"] = bool(obj["record_wall_time"])
    if "solver" in obj:
        kwargs["solver"] = SubgradientConfig(**obj["solver"])
    return ExperimentConfig(**kwargs)


def load_experiment_config(path) -> ExperimentConfig:
    return parse_experiment_config(loads_strict(Path(path).read_text()))


def experiment_config_to_dict(config: ExperimentConfig) -> dict:
    solver = config.solver
    return {
        "n": config.n,
        "k_list": list(config.k_list),
        "b_list": list(config.b_list),
        "instances_per_cell": config.instances_per_cell,
        "seed": config.seed,
        "methods": list(config.methods),
        "record_wall_time": config.record_wall_time,
        "solver": {
            "eta0": solver.eta0,
            "max_iter": solver.max_iter,
            "window": solver.window,
            "rtol": solver.rtol,
            "gap_rtol": solver.gap_rtol,
            "polish_rounds": solver.polish_rounds,
        },
    }


@dataclass(frozen=True)
class ExperimentRecord:
    """One (cell, instance, method) outcome of the grid."""

    k: int
    b: float
    instance: int
    method: str
    nominal_value: float
    worst_case: float
    solve_time: float

    @property
    def cell(self) -> str:
        return f"k{self.k}_b{self.b:g}"


@dataclass(frozen=True)
class SolveFailure:
    k: int
    b: float
    instance: int
    method: str
    message: str


@dataclass
class ExperimentRun:
    """Records plus per-record failures and reproducibility metadata."""

    config: ExperimentConfig
    records: list
    failures: list
    metadata: dict


def run_experiment(config: ExperimentConfig) -> ExperimentRun:
    """Solve every configured method on every generated instance of the grid.

    Solver errors are captured per record without aborting the rest of the
    grid.  Output ordering is (k, b, instance, method-position) regardless
    of execution order, and the run is fully deterministic for a fixed
    config (timings aside; set record_wall_time=False to zero them).
    """
    records: list = []
    failures: list = []
    for ki, k in enumerate(config.k_list):
        for bi, b in enumerate(config.b_list):
            for inst_idx in range(config.instances_per_cell):
                seed = instance_seed(config.seed, ki, bi, inst_idx)
                inst = generate_instance(config.n, k, b, seed)
                for method in config.methods:
                    begin = time.perf_counter()
                    try:
                        result = solve_counterpart(method, inst, config.solver)
                    except SolverError as exc:
                        failures.append(SolveFailure(k, b, inst_idx, method, str(exc)))
                        continue
                    elapsed = time.perf_counter() - begin
                    records.append(ExperimentRecord(
                        k=k,
                        b=b,
                        instance=inst_idx,
                        method=method,
                        nominal_value=nominal_value(result.y_star, inst),
                        worst_case=worst_case(result.y_star, inst),
                        solve_time=elapsed if config.record_wall_time else 0.0,
                    ))
    method_pos = {m: i for i, m in enumerate(config.methods)}
    records.sort(key=lambda r: (r.k, r.b, r.instance, method_pos[r.method]))
    metadata = {
        "prng": PRNG_NAME,
        "seed_rule": SEED_RULE,
        "d_floor": D_FLOOR,
        "package_version": __version__,
        "config": experiment_config_to_dict(config),
        "failures": [
            {"k": f.k, "b": f.b, "instance": f.instance, "method": f.method, "message": f.message}
            for f in failures
        ],
    }
    return ExperimentRun(config=config, records=records, failures=failures, metadata=metadata)


# ---------------------------------------------------------------------------
# reporting


def records_to_csv(records) -> str:
    """Render records into the canonical CSV (repr-exact floats)."""
    if not records:
        raise ValueError("no records to report")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow([r.cell, r.k, repr(float(r.b)), r.instance, r.method,
                         repr(float(r.nominal_value)), repr(float(r.worst_case)),
                         repr(float(r.solve_time))])
    return buf.getvalue()


def parse_report_csv(path) -> list:
    """Inverse of the CSV writer (round-trips exactly)."""
    records = []
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header!r}")
        for row in reader:
            _, k, b, instance, method, nominal, worst, time_s = row
            records.append(ExperimentRecord(
                k=int(k), b=float(b), instance=int(instance), method=method,
                nominal_value=float(nominal), worst_case=float(worst),
                solve_time=float(time_s),
            ))
    return records


_MARKER_SHAPES = {
    "nominal": "cross",
    "budgeted": "triangle",
    "ellipsoidal": "diamond",
    "perspective": "circle",
}
_MARKER_COLORS = {
    "nominal": "#808080",
    "budgeted": "#d62728",
    "ellipsoidal": "#1f77b4",
    "perspective": "#2ca02c",
}


def _marker_svg(shape: str, cx: float, cy: float, size: float, color: str, cls: str) -> str:
    if shape == "circle":
        return (f'<circle class="{cls}" cx="{cx:.2f}" cy="{cy:.2f}" r="{size:.2f}" '
                f'fill="{color}" fill-opacity="0.75"/>')
    if shape == "triangle":
        pts = f"{cx:.2f},{cy - size:.2f} {cx - size:.2f},{cy + size:.2f} {cx + size:.2f},{cy + size:.2f}"
        return f'<polygon class="{cls}" points="{pts}" fill="{color}" fill-opacity="0.75"/>'
    if shape == "diamond":
        pts = (f"{cx:.2f},{cy - size:.2f} {cx + size:.2f},{cy:.2f} "
               f"{cx:.2f},{cy + size:.2f} {cx - size:.2f},{cy:.2f}")
        return f'<polygon class="{cls}" points="{pts}" fill="{color}" fill-opacity="0.75"/>'
    # cross
    return (f'<path class="{cls}" d="M {cx - size:.2f} {cy - size:.2f} L {cx + size:.2f} {cy + size:.2f} '
            f'M {cx - size:.2f} {cy + size:.2f} L {cx + size:.2f} {cy - size:.2f}" '
            f'stroke="{color}" stroke-width="1.5" fill="none"/>')


def cell_scatter_svg(records, title: str, width: int = 420, height: int = 420) -> str:
    """Scatter of nominal value (x) against worst case (y), one marker per record."""
    if not records:
        raise ValueError("no records for scatter")
    xs = [r.nominal_value for r in records]
    ys = [r.worst_case for r in records]
    pad_frac = 0.08
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0
    x_lo -= pad_frac * x_span
    x_hi += pad_frac * x_span
    y_lo -= pad_frac * y_span
    y_hi += pad_frac * y_span
    margin = 50.0

    def sx(v):
        return margin + (v - x_lo) / (x_hi - x_lo) * (width - 2 * margin)

    def sy(v):
        return height - margin - (v - y_lo) / (y_hi - y_lo) * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.0f}" y="18" text-anchor="middle" font-size="13">{title}</text>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" '
        f'stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
        f'<text x="{width / 2:.0f}" y="{height - 12}" text-anchor="middle" font-size="11">nominal</text>',
        f'<text x="14" y="{height / 2:.0f}" text-anchor="middle" font-size="11" '
        f'transform="rotate(-90 14 {height / 2:.0f})">worst case</text>',
        f'<text x="{margin}" y="{height - margin + 14:.0f}" font-size="9" text-anchor="middle">{x_lo:.3g}</text>',
        f'<text x="{width - margin}" y="{height - margin + 14:.0f}" font-size="9" '
        f'text-anchor="middle">{x_hi:.3g}</text>',
        f'<text x="{margin - 6}" y="{height - margin:.0f}" font-size="9" text-anchor="end">{y_lo:.3g}</text>',
        f'<text x="{margin - 6}" y="{margin:.0f}" font-size="9" text-anchor="end">{y_hi:.3g}</text>',
    ]
    for r in records:
        shape = _MARKER_SHAPES.get(r.method, "circle")
        color = _MARKER_COLORS.get(r.method, "#000000")
        parts.append(_marker_svg(shape, sx(r.nominal_value), sy(r.worst_case), 4.0,
                                 color, f"pt m-{r.method}"))
    legend_y = 30
    for i, method in enumerate(dict.fromkeys(r.method for r in records)):
        parts.append(_marker_svg(_MARKER_SHAPES.get(method, "circle"), width - margin - 90,
                                 legend_y + 16 * i, 4.0, _MARKER_COLORS.get(method, "#000"),
                                 "legend"))
        parts.append(f'<text x="{width - margin - 80}" y="{legend_y + 16 * i + 4}" '
                     f'font-size="10">{method}</text>')
    parts.append("</svg>")
    return "\n".join(parts)


def emit_report(records, out_dir, formats=("csv", "svg"), metadata=None) -> list:
    """Write results.csv and one scatter SVG per cell; returns written paths.

    I/O failures propagate as OSError naming the path.
    """
    if not records:
        raise ValueError("no records to report")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        path = out_dir / "results.csv"
        path.write_text(records_to_csv(records))
        written.append(path)
    if "svg" in formats:
        cells = {}
        for r in records:
            cells.setdefault((r.k, r.b), []).append(r)
        for (k, b), cell_records in sorted(cells.items()):
            path = out_dir / f"cell_k{k}_b{b:g}.svg"
            path.write_text(cell_scatter_svg(cell_records, title=f"k={k}, b={b:g}"))
            written.append(path)
    if metadata is not None:
        import json

        path = out_dir / "metadata.json"
        path.write_text(json.dumps(metadata, indent=2, sort_keys=True) + "\n")
        written.append(path)
    return written
