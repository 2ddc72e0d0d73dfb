"""CSV artifacts with JSON header sidecars.

Every ``foo.csv`` is accompanied by ``foo.json`` carrying the format name,
a version tag and whatever grid/run metadata the format needs. Floats are
written with shortest round-trip precision so fixed-seed reruns produce
byte-identical files.
"""

import json
import os


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def sidecar_path(csv_path):
    root, _ = os.path.splitext(str(csv_path))
    return root + ".json"


def write_table(path, names, columns, meta):
    """Write named columns as CSV plus a JSON sidecar with metadata."""
    n_rows = len(columns[0]) if columns else 0
    if any(len(c) != n_rows for c in columns):
        raise ValueError("columns differ in length")
    os.makedirs(os.path.dirname(os.path.abspath(str(path))), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(names) + "\n")
        for r in range(n_rows):
            fh.write(",".join(_fmt(c[r]) for c in columns) + "\n")
    doc = {"format": meta.get("format", "table"), "version": 1}
    doc.update(meta)
    with open(sidecar_path(path), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_table(path):
    """Read a CSV written by write_table -> (names, list of string columns)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    names = lines[0].split(",")
    cols = [[] for _ in names]
    for ln in lines[1:]:
        for c, v in zip(cols, ln.split(",")):
            c.append(v)
    return names, cols


def grid_meta(grid):
    return {"x_min": grid.x_min, "x_max": grid.x_max, "n_points": grid.n_points}


def write_density(path, density, meta=None):
    m = {"format": "density", "grid": grid_meta(density.grid),
         "normalized": density.normalized}
    m.update(meta or {})
    write_table(path, ["x", "value"],
                [density.grid.points.tolist(), density.values.tolist()], m)


def write_wave(path, wave, meta=None):
    m = {"format": "wave", "grid": grid_meta(wave.grid)}
    m.update(meta or {})
    write_table(path, ["x", "re", "im"],
                [wave.grid.points.tolist(), wave.values.real.tolist(),
                 wave.values.imag.tolist()], m)


def write_walkers(path, clouds, meta=None):
    el, ks, xs = [], [], []
    for cloud in clouds:
        el.extend([cloud.electron] * cloud.m)
        ks.extend(range(cloud.m))
        xs.extend(cloud.positions.tolist())
    m = {"format": "walkers", "n_electrons": len(clouds),
         "m": clouds[0].m if clouds else 0}
    m.update(meta or {})
    write_table(path, ["electron", "k", "x"], [el, ks, xs], m)


def write_series(path, series_list, meta=None):
    """Paired ObservableSeries from both engines, long format t,value,engine."""
    ts, vs, eng = [], [], []
    for s in series_list:
        ts.extend(s.times.tolist())
        vs.extend(s.values.tolist())
        eng.extend([s.engine] * s.times.size)
    m = {"format": "series", "labels": sorted({s.label for s in series_list})}
    m.update(meta or {})
    write_table(path, ["t", "value", "engine"], [ts, vs, eng], m)


def write_density_matrix(path, rho, meta=None):
    n = rho.grid.n_points
    if n * n > 512 * 512:
        raise ValueError(f"density matrix dump guarded above 512^2 ({n}^2 requested)")
    x = rho.grid.points
    xs = [float(x[i]) for i in range(n) for _ in range(n)]
    xps = [float(x[j]) for _ in range(n) for j in range(n)]
    m = {"format": "density_matrix", "grid": grid_meta(rho.grid)}
    m.update(meta or {})
    write_table(path, ["x", "xp", "re", "im"],
                [xs, xps, rho.values.real.ravel().tolist(),
                 rho.values.imag.ravel().tolist()], m)


def write_trajectories(path, times, bundle, engine, meta=None):
    """Wide-format bundle: one time column plus one column per trajectory."""
    names = ["t"] + [f"traj_{k}" for k in range(bundle.shape[1])]
    cols = [list(times)] + [bundle[:, k].tolist() for k in range(bundle.shape[1])]
    m = {"format": "trajectories", "engine": engine,
         "n_trajectories": int(bundle.shape[1])}
    m.update(meta or {})
    write_table(path, names, cols, m)


def write_json(path, doc):
    os.makedirs(os.path.dirname(os.path.abspath(str(path))), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
