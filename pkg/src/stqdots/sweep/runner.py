"""Sweep orchestration: grid cells fan out to a thread pool, results come back in grid order."""
from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from ..couplings import ALPHA_FLOOR, capacitive_params, crosstalk_cell
from ..integrals import compute_integrals, extract_hubbard
from ..manybody import track_series
from ..model import solve
from ..spin import ResonanceError, j_eff_bond
from .config import ConfigError, RunConfig

SCHEMA_VERSION = 1

EXCHANGE_AXES = ("eps_L", "hbar_omega0", "a", "R")


@dataclass
class SweepResult:
    columns: list[str]
    rows: list[list]               # floats and ints, grid order
    masked: int = 0                # rows with at least one masked value
    notes: dict = field(default_factory=dict)


def _pool_map(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _axis(cfg: RunConfig, allowed=None, count: int = 1):
    if len(cfg.sweeps) != count:
        raise ConfigError(f"this sweep needs exactly {count} axis section(s), got {len(cfg.sweeps)}")
    if allowed is not None and cfg.sweeps[0].axis not in allowed:
        raise ConfigError(f"axis must be one of {allowed}, got {cfg.sweeps[0].axis!r}")
    return cfg.sweeps[0]


# ---------------------------------------------------------------- spectrum

def _spectrum_cell(cfg: RunConfig, axis: str, x: float):
    sol = solve(cfg.device(**{axis: x}), cfg.mode)
    c = sol.classification
    branch = {b: (sol.energy(b), c.dominance[b], c.ambiguous[b]) for b in ("SS", "ST", "TS")}
    return sol.spectrum.energies, sol.spectrum.vectors, branch, sol.weight("TS", "S(uudd)")


def run_spectrum(cfg: RunConfig, threads: int = 1) -> SweepResult:
    """Tracked low-lying energies and the SS/ST/TS-like branches along one axis.

    Tracking runs serially after all points are solved: E<k> follows the state that
    was the k-th lowest at the first point. A branch counts as dominant when its
    dominance reaches the threshold and it is not tied with another eigenstate.
    """
    sw = _axis(cfg)
    xs = sw.values()
    cells = _pool_map(lambda x: _spectrum_cell(cfg, sw.axis, float(x)), xs, threads)
    ids, lost = track_series([c[1] for c in cells])
    thr = cfg.dominance_threshold
    cols = ([sw.axis] + [f"E{k}" for k in range(cfg.levels)] + ["tracking_lost"]
            + [f"E_{b}" for b in ("SS", "ST", "TS")]
            + [f"dom_{b}" for b in ("SS", "ST", "TS")]
            + ["uudd_TS"] + [f"dominant_{b}" for b in ("SS", "ST", "TS")])
    rows = []
    for p, (x, (energies, _, branch, uudd)) in enumerate(zip(xs, cells)):
        where = np.argsort(ids[p])  # where[b] = eigen-index carrying branch id b
        tracked = [float(energies[where[k]]) for k in range(cfg.levels)]
        rows.append([float(x)] + tracked + [int(lost[p])]
                    + [branch[b][0] for b in ("SS", "ST", "TS")]
                    + [branch[b][1] for b in ("SS", "ST", "TS")]
                    + [float(uudd)]
                    + [int(branch[b][1] >= thr and not branch[b][2]) for b in ("SS", "ST", "TS")])
    return SweepResult(cols, rows, 0, {"tracking_lost_points": int(lost.sum())})


# ---------------------------------------------------------------- exchange

def _exchange_cell(cfg: RunConfig, axis: str, x: float):
    sol = solve(cfg.device(**{axis: x}), cfg.mode)
    st = sol.j_st("L", cfg.dominance_threshold)
    try:
        je, je_bad = j_eff_bond(0, sol.params), 0
    except ResonanceError:
        je, je_bad = 0.0, 1
    return st, je, je_bad


def run_exchange(cfg: RunConfig, threads: int = 1) -> SweepResult:
    """Spectral and second-order exchange of the left qubit along one axis.

    Masked values are written as 0 with their invalid flag set.
    """
    sw = _axis(cfg, EXCHANGE_AXES)
    xs = sw.values()
    cells = _pool_map(lambda x: _exchange_cell(cfg, sw.axis, float(x)), xs, threads)
    cols = [sw.axis, "J_ST_12", "J_ST_12_invalid", "dom_SS", "dom_TS", "J_eff_12", "J_eff_12_invalid"]
    rows, masked = [], 0
    for x, (st, je, je_bad) in zip(xs, cells):
        bad = int(not st.valid)
        masked += bool(bad or je_bad)
        rows.append([float(x), st.value if st.valid else 0.0, bad,
                     st.dominance_singlet, st.dominance_triplet, je, je_bad])
    return SweepResult(cols, rows, masked)


# ---------------------------------------------------------------- couplings

def _couplings_cell(cfg: RunConfig, axis: str, x: float):
    dev = cfg.device(**{axis: x})
    eps_L, eps_R = dev.geometry.detunings.eps_L, dev.geometry.detunings.eps_R
    ints = compute_integrals(dev)
    try:
        j23, j_bad = j_eff_bond(1, extract_hubbard(ints.h, ints.V)), 0
    except ResonanceError:
        j23, j_bad = 0.0, 1
    alpha0 = capacitive_params(eps_L, eps_R, dev, cfg.capacitive).alpha0
    chi_bad = int(j_bad or abs(alpha0) < ALPHA_FLOOR)
    chi = 0.0 if chi_bad else j23 / alpha0
    return j23, j_bad, alpha0, chi, chi_bad


def run_couplings(cfg: RunConfig, threads: int = 1) -> SweepResult:
    """Exchange across the inter-qubit bond, capacitive alpha0 and their ratio."""
    sw = _axis(cfg)
    xs = sw.values()
    cells = _pool_map(lambda x: _couplings_cell(cfg, sw.axis, float(x)), xs, threads)
    cols = [sw.axis, "J_eff_23", "J_eff_23_invalid", "alpha0", "chi", "chi_invalid"]
    rows = [[float(x), *c] for x, c in zip(xs, cells)]
    masked = sum(1 for c in cells if c[1] or c[4])
    return SweepResult(cols, rows, masked)


# ---------------------------------------------------------------- crosstalk

def run_crosstalk(cfg: RunConfig, threads: int = 1) -> SweepResult:
    """J_eff of both qubits over an (eps_L, eps_R) grid, rows in eps_L-major order."""
    if len(cfg.sweeps) != 2 or {s.axis for s in cfg.sweeps} != {"eps_L", "eps_R"}:
        raise ConfigError("crosstalk needs [sweep] and [sweep2] over eps_L and eps_R")
    by_axis = {s.axis: s.values() for s in cfg.sweeps}
    cells = [(float(x), float(y)) for x, y in product(by_axis["eps_L"], by_axis["eps_R"])]
    dev = cfg.device()
    res = _pool_map(lambda xy: crosstalk_cell(dev, *xy), cells, threads)
    cols = ["eps_L", "eps_R", "J_eff_12", "J_eff_34", "J_eff_12_invalid", "J_eff_34_invalid"]
    rows, masked = [], 0
    for (x, y), (j12, j34, m12, m34) in zip(cells, res):
        masked += bool(m12 or m34)
        rows.append([x, y, 0.0 if m12 else j12, 0.0 if m34 else j34, int(m12), int(m34)])
    return SweepResult(cols, rows, masked)


RUNNERS = {
    "spectrum": run_spectrum,
    "exchange": run_exchange,
    "couplings": run_couplings,
    "crosstalk": run_crosstalk,
}


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if not np.isfinite(v):
        raise ValueError("non-finite value reached the CSV writer")
    return format(v, ".17g")


def to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    buf.write(f"# schema={SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(result.columns)
    w.writerows([format_value(v) for v in row] for row in result.rows)
    return buf.getvalue()
