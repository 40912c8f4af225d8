"""Run manifests and write CSV results paired with oracle predictions.

File layout: ``# key=value`` header lines (seed, config hash, parameters and
sweep summaries), then one header row and the data rows.  Floats carry 12
significant digits.  Nothing time- or host-dependent is written, so a replay
of the same manifest yields a byte-identical file.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
from pathlib import Path

import numpy as np

from . import oracle
from .analysis import chsh_max, fringe_stats
from .config import RunManifest
from .networks import OZAWA_STATES
from .sweep import (
    ANALYZER_SETTINGS,
    BellGridResult,
    GridPointError,
    bell_grid,
    interferometer_sweep,
    ozawa_counts,
    ozawa_stream_id,
    ozawa_sweep,
)

log = logging.getLogger(__name__)

OUTPUT_ENV = "NEUTRONSIM_OUTPUT_DIR"
STATE_TAGS = {"+z": "pz", "-z": "mz", "+x": "px", "+y": "py"}
SETTING_TAGS = {(1, 1): "pp", (1, -1): "pm", (-1, 1): "mp", (-1, -1): "mm"}


class HarnessError(RuntimeError):
    pass


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


class CsvDocument:
    def __init__(self, columns: list[str]):
        self.meta: list[tuple[str, object]] = []
        self.columns = columns
        self.rows: list[list[str]] = []

    def note(self, key: str, value) -> None:
        self.meta.append((key, value))

    def add(self, row: dict) -> None:
        self.rows.append([fmt(row[c]) for c in self.columns])

    def render(self) -> str:
        buf = io.StringIO()
        for key, value in self.meta:
            buf.write(f"# {key}={fmt(value)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        writer.writerows(self.rows)
        return buf.getvalue()


def _header(doc: CsvDocument, m: RunManifest) -> None:
    doc.note("experiment", m.experiment)
    doc.note("seed", m.seed)
    doc.note("config_sha256", m.config_hash())
    for key, value in m.canonical().items():
        if key in ("experiment", "seed") or isinstance(value, (tuple, list)):
            continue
        doc.note(key, value)
    doc.note("stream_ids", "per row; one stream per grid point")


# -- interferometer -------------------------------------------------------------

MZI_COLUMNS = [
    "grid_index", "stream_id", "chi", "n_emitted", "n_warmup", "n_O", "n_H", "n_lost",
    "frac_O", "frac_H", "route_fallbacks", "oracle_p_O", "oracle_p_H", "oracle_p_loss",
]


def interferometer_document(m: RunManifest) -> CsvDocument:
    table = interferometer_sweep(
        m.chi, gamma=m.gamma, reflectivity=m.reflectivity, n_particles=m.n_particles,
        seed=m.seed, warmup=m.warmup, parallelism=m.parallelism,
    )
    doc = CsvDocument(MZI_COLUMNS)
    _header(doc, m)
    n_o = [rec.counts["O"] for rec in table]
    n_h = [rec.counts["H"] for rec in table]
    if len(set(np.mod(m.chi, 2 * math.pi))) >= 4 and m.n_particles > 0:
        for beam, counts in (("O", n_o), ("H", n_h)):
            fit = fringe_stats(m.chi, counts)
            doc.note(f"fit_visibility_{beam}", fit.visibility)
            doc.note(f"fit_phase_{beam}", fit.phase)
            doc.note(f"fit_mean_{beam}", fit.mean)
    vis_o, vis_h = oracle.ideal_visibilities(m.reflectivity)
    doc.note("oracle_visibility_O", vis_o)
    doc.note("oracle_visibility_H", vis_h)
    for g, (chi, rec) in enumerate(zip(m.chi, table)):
        p = oracle.mzi_probabilities(m.reflectivity, chi)
        n = rec.n_emitted
        doc.add({
            "grid_index": g, "stream_id": g, "chi": chi, "n_emitted": n,
            "n_warmup": rec.n_warmup, "n_O": rec.counts["O"], "n_H": rec.counts["H"],
            "n_lost": rec.counts["lost"],
            "frac_O": rec.counts["O"] / n if n else float("nan"),
            "frac_H": rec.counts["H"] / n if n else float("nan"),
            "route_fallbacks": rec.diagnostics["route_fallbacks"],
            "oracle_p_O": p.p_O, "oracle_p_H": p.p_H, "oracle_p_loss": p.p_loss,
        })
    return doc


# -- bell -------------------------------------------------------------------------

BELL_COLUMNS = [
    "grid_index", "stream_id", "alpha", "chi", "n_emitted_per_setting",
    "N_a_x", "N_api_xpi", "N_api_x", "N_a_xpi", "E", "oracle_E", "oracle_E_quantum",
]


def _grid_lookup(values: np.ndarray, target: float) -> int | None:
    wrapped = np.mod(np.asarray(values) - target + math.pi, 2 * math.pi) - math.pi
    hits = np.flatnonzero(np.abs(wrapped) < 1e-9)
    return int(hits[0]) if hits.size else None


def s_at(result: BellGridResult, alpha, chi, alpha_p, chi_p) -> float:
    """CHSH value at specific settings, or nan when a setting is off the grid."""
    g = result.grid
    idx = [_grid_lookup(g.alphas, alpha), _grid_lookup(g.chis, chi),
           _grid_lookup(g.alphas, alpha_p), _grid_lookup(g.chis, chi_p)]
    if any(i is None for i in idx):
        return float("nan")
    i, j, k, l = idx
    E = g.values
    return float(E[i, j] + E[i, l] - E[k, j] + E[k, l])


def bell_document(m: RunManifest) -> CsvDocument:
    result = bell_grid(
        m.alpha, m.chi, gamma=m.gamma, reflectivity=m.reflectivity,
        n_particles=m.n_particles, seed=m.seed, mu_metal_axis=m.mu_metal_axis,
        warmup=m.warmup, parallelism=m.parallelism,
    )
    doc = CsvDocument(BELL_COLUMNS)
    _header(doc, m)
    s_max, where = chsh_max(result.grid)
    doc.note("S_grid_max", s_max)
    doc.note("S_grid_max_settings", " ".join(fmt(x) for x in where))
    quarter = 0.25 * math.pi
    doc.note("S_printed_settings", s_at(result, 0.0, quarter, 2 * quarter, quarter))
    doc.note("S_optimal_settings", s_at(result, 0.0, quarter, 2 * quarter, -quarter))
    ncol = len(m.chi)
    for i, alpha in enumerate(m.alpha):
        for j, chi in enumerate(m.chi):
            g = i * ncol + j
            recs = result.table.records[4 * g: 4 * g + 4]
            n = [rec.counts["O"] for rec in recs]
            doc.add({
                "grid_index": g, "stream_id": g, "alpha": alpha, "chi": chi,
                "n_emitted_per_setting": recs[0].n_emitted,
                "N_a_x": n[0], "N_api_xpi": n[1], "N_api_x": n[2], "N_a_xpi": n[3],
                "E": result.grid.values[i, j],
                "oracle_E": oracle.bell_E_ideal(alpha, chi, m.mu_metal_axis),
                "oracle_E_quantum": oracle.bell_E_quantum(m.reflectivity, alpha, chi, m.mu_metal_axis),
            })
    return doc


# -- ozawa ------------------------------------------------------------------------


def _ozawa_columns() -> list[str]:
    cols = ["grid_index", "stream_id_first", "phi"]
    for state in OZAWA_STATES:
        tag = STATE_TAGS[state]
        cols += [f"n_{tag}_{SETTING_TAGS[s]}" for s in ANALYZER_SETTINGS]
        cols += [f"exp_OA_{tag}", f"exp_OB_{tag}"]
    cols += [
        "epsilon", "eta", "lhs_ozawa", "lhs_heisenberg", "clamped",
        "oracle_epsilon", "oracle_eta", "oracle_lhs_ozawa", "oracle_lhs_heisenberg", "oracle_rhs",
    ]
    return cols


def ozawa_document(m: RunManifest) -> CsvDocument:
    result = ozawa_sweep(m.phi, n_particles=m.n_particles, seed=m.seed, parallelism=m.parallelism)
    doc = CsvDocument(_ozawa_columns())
    _header(doc, m)
    doc.note("delta_A", 1.0)
    doc.note("delta_B", 1.0)
    for g, (phi, exp, pt) in enumerate(zip(result.phis, result.expectations, result.points)):
        row = {"grid_index": g, "stream_id_first": ozawa_stream_id(g, OZAWA_STATES[0], 1, 1), "phi": phi}
        for state in OZAWA_STATES:
            tag = STATE_TAGS[state]
            for s, n in zip(ANALYZER_SETTINGS, ozawa_counts(result.table, state, phi)):
                row[f"n_{tag}_{SETTING_TAGS[s]}"] = n
            row[f"exp_OA_{tag}"], row[f"exp_OB_{tag}"] = exp[state]
        curve = oracle.ozawa_curves(phi)
        row.update({
            "epsilon": pt.epsilon, "eta": pt.eta, "lhs_ozawa": pt.lhs_ozawa,
            "lhs_heisenberg": pt.lhs_heisenberg, "clamped": "+".join(pt.clamped) or "none",
            "oracle_epsilon": curve.epsilon, "oracle_eta": curve.eta,
            "oracle_lhs_ozawa": curve.lhs_ozawa, "oracle_lhs_heisenberg": curve.lhs_heisenberg,
            "oracle_rhs": curve.rhs,
        })
        doc.add(row)
    return doc


# -- oracle-only output ---------------------------------------------------------


def oracle_document(m: RunManifest) -> CsvDocument:
    if m.experiment == "interferometer":
        doc = CsvDocument(["chi", "p_O", "p_H", "p_loss"])
        for chi in m.chi:
            p = oracle.mzi_probabilities(m.reflectivity, chi)
            doc.add({"chi": chi, "p_O": p.p_O, "p_H": p.p_H, "p_loss": p.p_loss})
    elif m.experiment == "bell":
        doc = CsvDocument(["alpha", "chi", "E"])
        for alpha in m.alpha:
            for chi in m.chi:
                doc.add({"alpha": alpha, "chi": chi,
                         "E": oracle.bell_E_ideal(alpha, chi, m.mu_metal_axis)})
    else:
        doc = CsvDocument(["phi", "epsilon", "eta", "lhs_ozawa", "lhs_heisenberg", "rhs"])
        for phi in m.phi:
            c = oracle.ozawa_curves(phi)
            doc.add({"phi": phi, "epsilon": c.epsilon, "eta": c.eta, "lhs_ozawa": c.lhs_ozawa,
                     "lhs_heisenberg": c.lhs_heisenberg, "rhs": c.rhs})
    doc.meta.insert(0, ("experiment", m.experiment))
    doc.meta.insert(1, ("oracle", "closed-form quantum prediction"))
    return doc


BUILDERS = {
    "interferometer": interferometer_document,
    "bell": bell_document,
    "ozawa": ozawa_document,
}


def output_path(m: RunManifest, output_dir: str | Path | None = None, suffix: str = "") -> Path:
    if m.output and not suffix:
        path = Path(m.output)
        if output_dir is not None and not path.is_absolute():
            path = Path(output_dir) / path
        return path
    base = Path(output_dir or os.environ.get(OUTPUT_ENV, "results"))
    return base / f"{m.experiment}{suffix}.csv"


def _write(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise HarnessError(f"cannot write {path}: {exc}") from exc
    return path


def run_manifest(m: RunManifest, output_dir: str | Path | None = None) -> Path:
    log.info("running %s: %d grid points, seed %d", m.experiment, m.grid_points(), m.seed)
    try:
        doc = BUILDERS[m.experiment](m)
    except GridPointError as exc:
        raise HarnessError(f"{m.experiment} run failed at {exc}") from exc
    path = _write(output_path(m, output_dir), doc.render())
    log.info("wrote %s", path)
    return path


def emit_oracle(m: RunManifest, output_dir: str | Path | None = None) -> Path:
    return _write(output_path(m, output_dir, suffix="_oracle"), oracle_document(m).render())


def read_csv(path: str | Path) -> tuple[dict[str, str], list[dict[str, str]]]:
    """Parse a result file back into ``(header metadata, rows)``."""
    meta, body = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition("=")
            meta[key] = value
        else:
            body.append(line)
    return meta, list(csv.DictReader(body))
