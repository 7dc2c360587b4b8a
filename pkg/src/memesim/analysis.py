"""Sigmoid fitting, plateau/ignition detection, and trace export."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DegenerateFitError, ParseError, PreconditionError

LAMBDA_RANGE = (1e-3, 10.0)
_GRID = 41
_TOL = 1e-6
_MAX_SWEEPS = 2000


@dataclass(frozen=True)
class SigmoidFit:
    """``amplitude / (1 + exp(-rate * (x - midpoint)))`` fitted by least squares."""

    amplitude: float
    rate: float
    midpoint: float
    r2: float
    at_grid_edge: bool = False

    def __call__(self, x):
        return _logistic(np.asarray(x, dtype=np.float64), self.rate, self.midpoint) * self.amplitude

    def to_dict(self) -> dict:
        return asdict(self)


def _logistic(x, rate, mid):
    z = -rate * (x - mid)
    return 0.5 * (1.0 - np.tanh(z / 2.0))


def _best_amplitude(s, y):
    ss = float(s @ s)
    return float(s @ y) / ss if ss > 0 else 0.0


def _sse(x, y, amp, rate, mid):
    r = y - amp * _logistic(x, rate, mid)
    return float(r @ r)


def fit_sigmoid(series, x=None) -> SigmoidFit:
    """Fit a three-parameter logistic to a non-decreasing cumulative series.

    A grid over midpoints (spanning the x range) and log-spaced rates in
    ``LAMBDA_RANGE`` picks the start, with the amplitude solved exactly for
    each grid point. Coordinate descent then refines amplitude (closed form),
    log-rate and midpoint (bounded scalar searches) until every parameter
    moves by less than 1e-6 relative. ``at_grid_edge`` flags a rate pinned to
    either end of its range, which is what near-linear input produces.
    """
    y = np.asarray(series, dtype=np.float64)
    if y.ndim != 1 or y.size < 5:
        raise PreconditionError("need a 1-D series with at least 5 points")
    xs = np.arange(y.size, dtype=np.float64) if x is None else np.asarray(x, dtype=np.float64)
    if xs.shape != y.shape:
        raise PreconditionError("x and series lengths differ")
    scale = max(float(np.abs(y).max()), 1.0)
    if np.any(np.diff(y) < -1e-9 * scale):
        raise PreconditionError("series must be non-decreasing")
    sst = float(((y - y.mean()) ** 2).sum())
    if sst == 0.0:
        raise DegenerateFitError("constant series has no sigmoid to fit")

    lo, hi = np.log(LAMBDA_RANGE[0]), np.log(LAMBDA_RANGE[1])
    mids = np.linspace(xs.min(), xs.max(), _GRID)
    log_rates = np.linspace(lo, hi, _GRID)
    best = (math.inf, 0.0, 0.0)
    for lr in log_rates:
        s = _logistic(xs[None, :], math.exp(lr), mids[:, None])
        amp = (s @ y) / np.einsum("ij,ij->i", s, s)
        sse = ((y[None, :] - amp[:, None] * s) ** 2).sum(axis=1)
        i = int(np.argmin(sse))
        if sse[i] < best[0]:
            best = (float(sse[i]), float(lr), float(mids[i]))
    _, lr, mid = best
    amp = float(y[-1])
    d_lr = (hi - lo) / (_GRID - 1)
    d_mid = max((xs.max() - xs.min()) / (_GRID - 1), 1e-12)
    opts = {"xatol": 1e-12, "maxiter": 500}

    for _ in range(_MAX_SWEEPS):
        old = (amp, lr, mid)
        amp = _best_amplitude(_logistic(xs, math.exp(lr), mid), y)
        res = minimize_scalar(lambda v: _sse(xs, y, amp, math.exp(v), mid), method="bounded",
                              bounds=(max(lo, lr - d_lr), min(hi, lr + d_lr)), options=opts)
        lr = float(res.x)
        res = minimize_scalar(lambda v: _sse(xs, y, amp, math.exp(lr), v), method="bounded",
                              bounds=(mid - d_mid, mid + d_mid), options=opts)
        mid = float(res.x)
        moved = max(abs(a - b) / max(abs(b), 1e-12) for a, b in zip((amp, lr, mid), old))
        # shrink brackets to the scale of the last move
        d_lr = max(min(d_lr, 4 * abs(lr - old[1])), 1e-9)
        d_mid = max(min(d_mid, 4 * abs(mid - old[2])), 1e-9 * max(1.0, abs(mid)))
        if moved < _TOL:
            break
    rate = math.exp(lr)
    sse = _sse(xs, y, amp, rate, mid)
    edge = bool(lr <= lo + 1e-6 or lr >= hi - 1e-6)
    return SigmoidFit(amplitude=amp, rate=rate, midpoint=mid, r2=1.0 - sse / sst,
                      at_grid_edge=edge)


@dataclass(frozen=True)
class PlateauReport:
    """Where the flat start of a cascade ends and how sharply it takes off.

    ``plateau_end`` is ``math.inf`` when no core node was ever infected; then
    ``post_rate`` and ``ignition_ratio`` are None.
    """

    plateau_end: float
    pre_rate: float
    post_rate: float | None
    ignition_ratio: float | None

    @property
    def ignited(self) -> bool:
        return math.isfinite(self.plateau_end)


def plateau_report(trace, window: int = 10) -> PlateauReport:
    """Plateau end = first iteration with an infected core node.

    ``pre_rate`` averages new infections over ``[0, plateau_end)`` and
    ``post_rate`` over ``[plateau_end, plateau_end + window]`` (clipped to the
    trace). Iteration 0 counts the seeds as new infections.
    """
    if window < 1:
        raise PreconditionError("window must be >= 1")
    new = np.asarray(trace.new, dtype=np.float64)
    cum_core = np.asarray(trace.cum_core)
    if new.size == 0:
        raise PreconditionError("empty trace")
    hit = np.flatnonzero(cum_core > 0)
    if hit.size == 0:
        return PlateauReport(math.inf, float(new.mean()), None, None)
    end = int(hit[0])
    pre = float(new[:end].mean()) if end > 0 else 0.0
    post = float(new[end:end + window + 1].mean())
    ratio = post / pre if pre > 0 else None
    return PlateauReport(end, pre, post, ratio)


# --- export / import -----------------------------------------------------------

def _fmt_mean(v: float) -> str:
    return format(float(v), ".6g")


def trace_columns(trace) -> tuple[list[str], list[list]]:
    """Column names and per-column values for a trace or an aggregate."""
    if hasattr(trace, "mean"):
        names, cols = ["iteration"], [list(range(trace.iterations))]
        for key in ("new", "cumulative", "cum_core", "cum_periphery"):
            for stat in ("mean", "std"):
                names.append(f"{key}_{stat}")
                cols.append([_fmt_mean(v) for v in getattr(trace, stat)[key]])
        for c in range(trace.mean["community"].shape[1]):
            for stat in ("mean", "std"):
                names.append(f"comm_{c}_{stat}")
                cols.append([_fmt_mean(v) for v in getattr(trace, stat)["community"][:, c]])
        return names, cols
    names = ["iteration", "new", "cumulative", "cum_core", "cum_periphery"]
    cols = [list(range(trace.iterations))] + [
        [int(v) for v in getattr(trace, k)] for k in names[1:]
    ]
    cc = trace.cum_community
    for c in range(cc.shape[1]):
        names.append(f"comm_{c}")
        cols.append([int(v) for v in cc[:, c]])
    return names, cols


def render_trace(trace, fmt: str = "csv", metadata: dict | None = None) -> str:
    if trace.iterations < 1:
        raise PreconditionError("empty trace")
    names, cols = trace_columns(trace)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(names)
        w.writerows(zip(*cols))
        return buf.getvalue()
    if fmt == "json":
        kind = "aggregate" if hasattr(trace, "mean") else "trace"
        data = {n: [_json_num(v) for v in col] for n, col in zip(names, cols)}
        doc = {"kind": kind, "columns": names, "data": data}
        if metadata is not None:
            doc["metadata"] = metadata
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"
    raise PreconditionError(f"unknown trace format {fmt!r}")


def _json_num(v):
    if isinstance(v, str):
        f = float(v)
        return int(f) if f.is_integer() and "e" not in v else f
    return v


def export_trace(trace, dest, fmt: str = "csv", metadata: dict | None = None) -> None:
    """Write a trace (or aggregate) as CSV or JSON to a path or text stream."""
    text = render_trace(trace, fmt, metadata)
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def read_trace(source) -> dict[str, np.ndarray]:
    """Load an exported CSV or JSON trace into ``{column: array}``."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(text)
            return {name: np.asarray(doc["data"][name]) for name in doc["columns"]}
        except (ValueError, KeyError) as exc:
            raise ParseError(f"bad JSON trace: {exc}") from None
    rows = list(csv.reader(io.StringIO(text)))
    if len(rows) < 2:
        raise ParseError("trace file has no data rows")
    header, body = rows[0], rows[1:]
    out = {}
    for j, name in enumerate(header):
        try:
            vals = [float(r[j]) for r in body]
        except (ValueError, IndexError):
            raise ParseError(f"bad value in column {name!r}") from None
        arr = np.asarray(vals)
        out[name] = arr.astype(np.int64) if np.all(arr == np.round(arr)) and not name.endswith(
            ("_mean", "_std")) else arr
    return out


def cumulative_column(columns: dict) -> np.ndarray:
    for key in ("cumulative", "cumulative_mean"):
        if key in columns:
            return np.asarray(columns[key], dtype=np.float64)
    raise ParseError("trace has no cumulative column")
