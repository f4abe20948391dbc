"""CSV tables, SVG line plots and run manifests."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "write_csv",
    "trajectory_columns",
    "correlation_columns",
    "ensemble_columns",
    "fit_columns",
    "plateau_columns",
    "write_svg",
    "write_manifest",
]


def write_csv(columns: Mapping[str, Sequence[float]], path) -> Path:
    """Write equal-length numeric columns with a header row.

    Values use 17 significant digits so that they round-trip exactly. Rows end
    with ``\\n``, including the last one.
    """
    if not columns:
        raise ValueError("nothing to write: no columns")
    names = list(columns)
    for name in names:
        if any(c in name for c in ',"\r\n'):
            raise ValueError(f"column name {name!r} needs quoting")
    data = [np.asarray(columns[n], dtype=np.float64).ravel() for n in names]
    lengths = {len(d) for d in data}
    if len(lengths) != 1:
        raise ValueError(f"columns have unequal lengths {sorted(lengths)}")
    if lengths == {0}:
        raise ValueError("nothing to write: columns are empty")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table = np.column_stack(data)
    with open(path, "w", newline="") as fh:
        np.savetxt(fh, table, fmt="%.17g", delimiter=",", header=",".join(names),
                   comments="", newline="\n")
    return path


def trajectory_columns(traj) -> dict:
    cols = {"t": traj.times}
    pops = traj.populations
    for i in range(pops.shape[1]):
        cols[f"P_{i + 1}"] = pops[:, i]
    cols["P_tot"] = traj.total_population
    return cols


def correlation_columns(traj, max_distance: int = 2) -> dict:
    """Time series of ``C_{mu, mu+d}`` for ``d = 1..max_distance``."""
    pops = traj.populations
    n = pops.shape[1]
    cols = {"t": traj.times}
    for d in range(1, max_distance + 1):
        for mu in range(n - d):
            # C_{mu nu} = P_mu P_nu for a single-excitation pure state
            cols[f"C_{mu + 1}_{mu + 1 + d}"] = pops[:, mu] * pops[:, mu + d]
    return cols


def ensemble_columns(result) -> dict:
    n = np.full(result.times.shape, result.realizations_used, dtype=np.float64)
    return {"t": result.times, "mean": result.mean, "std": result.std, "n": n}


def fit_columns(rows) -> dict:
    """``rows`` are ``(N, Ni, DecayFit)`` triples."""
    rows = list(rows)
    return {
        "N": [r[0] for r in rows],
        "Ni": [r[1] for r in rows],
        "gamma_f": [r[2].gamma_f for r in rows],
        "ci95": [r[2].ci95_half_width for r in rows],
        "window_end": [r[2].fit_window_end for r in rows],
    }


def plateau_columns(plateaus) -> dict:
    pl = list(plateaus)
    return {
        "t_start": [p.t_start for p in pl],
        "t_end": [p.t_end for p in pl],
        "level": [p.level for p in pl],
    }


_COLORS = ("#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def write_svg(path, x, series: Mapping[str, Sequence[float]], *, logy: bool = False,
              title: str = "", xlabel: str = "gamma t", max_points: int = 2000) -> Path:
    """Minimal polyline plot, one line per entry of ``series``."""
    W, H, L, R, T, B = 640, 400, 70, 150, 30, 45
    x = np.asarray(x, dtype=np.float64)
    stride = max(1, math.ceil(len(x) / max_points))
    xs = x[::stride]
    ys = {}
    for name, y in series.items():
        y = np.asarray(y, dtype=np.float64)[::stride]
        if logy:
            y = np.log10(np.clip(y, 1e-300, None))
        ys[name] = y
    finite = np.concatenate([y[np.isfinite(y)] for y in ys.values()])
    ylo, yhi = float(finite.min()), float(finite.max())
    if logy:
        ylo = max(ylo, yhi - 12)
    if yhi == ylo:
        yhi = ylo + 1.0
    xlo, xhi = float(xs[0]), float(xs[-1]) if xs[-1] > xs[0] else float(xs[0]) + 1.0

    def px(v):
        return L + (v - xlo) / (xhi - xlo) * (W - L - R)

    def py(v):
        return T + (yhi - np.clip(v, ylo, yhi)) / (yhi - ylo) * (H - T - B)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">',
        f'<rect x="{L}" y="{T}" width="{W - L - R}" height="{H - T - B}" fill="none" stroke="black"/>',
        f'<text x="{W / 2}" y="18" text-anchor="middle">{title}</text>',
        f'<text x="{(L + W - R) / 2}" y="{H - 8}" text-anchor="middle">{xlabel}</text>',
        f'<text x="{L - 5}" y="{T + 4}" text-anchor="end">{"1e%.3g" % yhi if logy else "%.3g" % yhi}</text>',
        f'<text x="{L - 5}" y="{H - B}" text-anchor="end">{"1e%.3g" % ylo if logy else "%.3g" % ylo}</text>',
        f'<text x="{L}" y="{H - B + 14}" text-anchor="middle">{xlo:.3g}</text>',
        f'<text x="{W - R}" y="{H - B + 14}" text-anchor="middle">{xhi:.3g}</text>',
    ]
    for k, (name, y) in enumerate(ys.items()):
        color = _COLORS[k % len(_COLORS)]
        ok = np.isfinite(y)
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(xs[ok], y[ok]))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>')
        ly = T + 14 * (k + 1)
        out.append(f'<line x1="{W - R + 10}" y1="{ly - 4}" x2="{W - R + 30}" y2="{ly - 4}" stroke="{color}"/>')
        out.append(f'<text x="{W - R + 35}" y="{ly}">{name}</text>')
    out.append("</svg>\n")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(out))
    return path


def write_manifest(out_dir, manifest: dict) -> Path:
    path = Path(out_dir) / "manifest.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")
