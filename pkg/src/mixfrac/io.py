"""Atomic report writers: JSON reports and commented-header CSV tables."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np


def atomic_write_text(path, text: str):
    """Write ``text`` to ``path`` via a temporary file and ``os.replace``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps_report(report: dict) -> str:
    """JSON text; floats use the shortest repr that round-trips exactly, non-finite become null."""
    return json.dumps(_plain(report), indent=2, sort_keys=False) + "\n"


def write_json(path, report: dict):
    atomic_write_text(path, dumps_report(report))


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def format_csv(columns, rows, notes=()) -> str:
    """CSV text with ``#`` comment lines documenting each column before the header."""
    buf = io.StringIO()
    for line in notes:
        buf.write(f"# {line}\n")
    for name, doc in columns:
        buf.write(f"# {name}: {doc}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([name for name, _ in columns])
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_csv(path, columns, rows, notes=()):
    atomic_write_text(path, format_csv(columns, rows, notes))


def read_csv_rows(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


CONVERGENCE_COLUMNS = [
    ("iteration", "Picard step k (1-based)"),
    ("h2_norm", "H^2 norm of iterate v_k"),
    ("h2_distance", "H^2 norm of v_k - v_(k-1)"),
    ("contraction_ratio", "h2_distance(k) / h2_distance(k-1); empty for k = 1"),
]

SWEEP_COLUMNS = [
    ("eps", "coupling strength"),
    ("iterations", "Picard steps to reach tol"),
    ("converged", "1 when the H^2 step fell below tol"),
    ("residual_h2", "last H^2 step"),
    ("up_h2", "H^2 norm of the perturbation u_p"),
    ("up_h2_over_eps", "up_h2 / eps"),
    ("max_trace_ratio", "largest step ratio observed along the Picard trace"),
    ("probe_max_ratio", "largest Lipschitz ratio over random ball pairs"),
    ("analytic_bound", "eps * sigma"),
]

CONTRACTION_COLUMNS = [
    ("eps", "coupling strength"),
    ("trial", "probe pair index"),
    ("ratio", "||t v1 - t v2|| / ||v1 - v2|| in H^2"),
    ("bound", "eps * sigma"),
]

SEQUENCE_COLUMNS = [
    ("n", "sequence index"),
    ("f_gap_l2", "||f_n - f||_L2"),
    ("f_gap_l1", "||f_n - f||_L1"),
    ("u_gap_h2s2", "||u_n - u|| in H^(2 s2)"),
    ("spectral_gap", "||(-Delta)^s2 (u_n - u)||_L2"),
    ("orthogonality_satisfied", "1 when |f_n_hat(0)| <= tol_orth"),
    ("flagged", "1 when the zero-mass condition fails with s1 >= 3/4"),
]


def emit_convergence_csv(path, trace):
    rows = []
    if trace is not None:
        for k, (norm, dist) in enumerate(zip(trace.h2_norms, trace.h2_distances), start=1):
            ratio = dist / trace.h2_distances[k - 2] if k > 1 and trace.h2_distances[k - 2] > 0 else None
            rows.append((k, norm, dist, ratio))
    write_csv(path, CONVERGENCE_COLUMNS, rows)


def emit_sweep_csv(path, points):
    rows = [
        (p.eps, p.iterations, p.converged, p.residual_h2, p.up_h2,
         p.up_h2 / p.eps if p.eps > 0 else None, p.max_trace_ratio, p.probe_max_ratio, p.analytic_bound)
        for p in points
    ]
    write_csv(path, SWEEP_COLUMNS, rows)


def emit_contraction_csv(path, points):
    rows = [(p.eps, i, r, p.analytic_bound) for p in points for i, r in enumerate(p.ratios)]
    write_csv(path, CONTRACTION_COLUMNS, rows)


def emit_sequences_csv(path, items):
    rows = [
        (it.n, it.f_gap_l2, it.f_gap_l1, it.u_gap_h2s2, it.spectral_gap, it.orthogonality_satisfied, it.flagged)
        for it in items
    ]
    write_csv(path, SEQUENCE_COLUMNS, rows)
