"""CSV and raster emission. Floats are written with 17 significant digits."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .lyapunov import PALETTE, RegimeClass
from .sync import TAG_NAMES

N_EXPONENT_COLUMNS = 6
LAMBDA_COLUMNS = [f"lambda{i}" for i in range(1, N_EXPONENT_COLUMNS + 1)]
SPECTRUM_COLUMNS = ["d_over_r0", "a", *LAMBDA_COLUMNS, "regime", "converged", "n_periods"]
CLOUD_COLUMNS = ["k", "r1", "u1", "r2", "u2", "r3", "u3", "tag"]
FRACTION_COLUMNS = ["param_value", "frac_S", "frac_partial", "frac_async",
                    "frac_S12", "frac_S13", "frac_S23"]
CHART_COLUMNS = ["d_over_r0", "a", *LAMBDA_COLUMNS, "regime"]
PATH_COLUMNS = ["param_value", "d_over_r0", "a", *LAMBDA_COLUMNS, "regime", "converged",
                "n_periods", *FRACTION_COLUMNS[1:], "components", "period"]
CONDITIONAL_COLUMNS = ["phase", "dwell_fraction", "sufficient", *LAMBDA_COLUMNS]


def fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, RegimeClass):
        return x.value
    return format(float(x), ".17g")


def _lambdas(exponents):
    lam = [] if exponents is None else list(exponents)
    return [fmt(v) for v in lam] + [""] * (N_EXPONENT_COLUMNS - len(lam))


def _write(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_spectra(path, rows):
    """``rows``: iterables of ``(d_over_r0, a, spectrum, regime)``."""
    return _write(path, SPECTRUM_COLUMNS, (
        [fmt(d), fmt(a), *_lambdas(s.exponents), fmt(regime), fmt(s.converged),
         fmt(s.n_periods)]
        for d, a, s, regime in rows
    ))


def cloud_rows(cloud):
    # state layout (r1, r2, r3, u1, u2, u3) -> schema (r1, u1, r2, u2, r3, u3)
    order = [0, 3, 1, 4, 2, 5]
    for k, point, tag in zip(cloud.k, cloud.points, cloud.tags):
        yield [fmt(k), *(fmt(point[i]) for i in order), TAG_NAMES[tag]]


def write_cloud(path, cloud):
    return _write(path, CLOUD_COLUMNS, cloud_rows(cloud))


def write_fractions(path, rows):
    """``rows``: iterables of ``(param_value, SyncFractions)``."""
    return _write(path, FRACTION_COLUMNS, (
        [fmt(v), *(fmt(x) for x in f.as_row())] for v, f in rows
    ))


def write_conditional(path, cond):
    rows = []
    for name, part in (("sync", cond.sync), ("async", cond.async_)):
        rows.append([name, fmt(part.dwell_fraction), fmt(part.sufficient),
                     *_lambdas(part.exponents)])
    rows.append(["full", fmt(1.0), fmt(True), *_lambdas(cond.full.exponents)])
    return _write(path, CONDITIONAL_COLUMNS, rows)


def write_chart(path, grid):
    """Row-major: rows of constant amplitude, ascending amplitude then distance."""
    return _write(path, CHART_COLUMNS, (
        [fmt(px.d_over_r0), fmt(px.a), *_lambdas(px.exponents), fmt(px.regime)]
        for row in grid for px in row
    ))


def write_path(path, samples):
    def row(s):
        fr = s.fractions.as_row() if s.fractions is not None else (None,) * 6
        return [fmt(s.param_value), fmt(s.d_over_r0), fmt(s.a), *_lambdas(s.exponents),
                fmt(s.regime), fmt(s.converged), fmt(s.n_periods), *(fmt(x) for x in fr),
                fmt(s.components), fmt(s.period)]

    return _write(path, PATH_COLUMNS, (row(s) for s in samples))


def write_ppm(path, grid):
    """Binary P6 raster, one pixel per cell; the top image row is the largest amplitude."""
    ny, nx = grid.shape
    pixels = np.empty((ny, nx, 3), dtype=np.uint8)
    for j in range(ny):
        for i in range(nx):
            pixels[ny - 1 - j, i] = PALETTE[grid[j, i].regime]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as fh:
        fh.write(f"P6\n{nx} {ny}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())
    return path


def read_ppm(path):
    """Inverse of :func:`write_ppm` returning an ``(ny, nx, 3)`` uint8 array."""
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P6":
        raise ValueError("not a binary P6 file")
    nx, ny = (int(v) for v in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(ny, nx, 3)


def read_rows(path):
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))
