"""Lyapunov scan of the ``(A, a)`` plane flagging strange-attractor candidates.

Every cell draws its initial point from its own stream, derived from the
run seed and the cell's row/column indices, so the table does not depend
on how cells are distributed over workers.
"""
from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..model import TWO_PI
from ..regimes import classify_ratio
from .orbits import lyapunov_spectrum
from .periodic import MapFamily

#: Cells with a larger leading exponent (and contracting area) are flagged.
STRANGE_THRESHOLD = 2e-3


class CellClass(enum.Enum):
    STRANGE = "StrangeCandidate"
    REGULAR = "Regular"
    ESCAPED = "Escaped"


def max_workers() -> int:
    """Worker cap from ``BYKOV_THREADS`` (default: CPU count)."""
    env = os.environ.get("BYKOV_THREADS")
    cpu = os.cpu_count() or 1
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"BYKOV_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ValueError("BYKOV_THREADS must be at least 1")
        return n
    return cpu


def cell_start(seed: int, row: int, col: int, y_lo: float, y_hi: float, draw: int = 0):
    """Initial point of one orbit, from the stream keyed by ``(row, col, draw)``."""
    ss = np.random.SeedSequence(seed, spawn_key=(row, col, draw))
    rng = np.random.Generator(np.random.PCG64(ss))
    return float(rng.uniform(0.0, TWO_PI)), float(rng.uniform(y_lo, y_hi))


@dataclass(frozen=True)
class CellResult:
    lam_max: float
    lam_sum: float
    escape_fraction: float
    cls: CellClass
    regime: str


@dataclass(frozen=True)
class ScanTable:
    """Per-cell results; ``row_values`` label rows (``A`` unless stated)."""

    row_values: np.ndarray
    a: np.ndarray
    lam_max: np.ndarray
    lam_sum: np.ndarray
    escape_fraction: np.ndarray
    cls: tuple[tuple[CellClass, ...], ...]
    regime: tuple[tuple[str, ...], ...]
    seed: int
    row_name: str = "A"

    @property
    def A(self) -> np.ndarray:
        return self.row_values

    @property
    def escaped(self) -> np.ndarray:
        return self.escape_fraction >= 1.0

    @property
    def shape(self) -> tuple[int, int]:
        return self.lam_max.shape

    @property
    def strange_fraction(self) -> float:
        n = self.lam_max.size
        if n == 0:
            return 0.0
        return sum(c is CellClass.STRANGE for row in self.cls for c in row) / n

    def rows(self):
        """Row-major ``(row_value, a, lam_max, lam_sum, escape_fraction, class, regime)``."""
        for i in range(self.shape[0]):
            for j in range(self.shape[1]):
                yield (self.row_values[i], self.a[j], self.lam_max[i, j], self.lam_sum[i, j],
                       self.escape_fraction[i, j], self.cls[i][j].value, self.regime[i][j])


def scan_cell(family: MapFamily, A: float, a: float, seed: int, row: int, col: int,
              n: int, transient: int, n_seeds: int = 1,
              backend: str | None = None) -> CellResult:
    """Average the exponents of ``n_seeds`` orbits started in the annulus band."""
    m = family.at(A, a)
    y_lo = (A * (1.0 - a)) ** family.delta
    y_hi = 2.0 * (A * (1.0 + a)) ** family.delta
    l1s, lss = [], []
    n_esc = 0
    for draw in range(n_seeds):
        p0 = cell_start(seed, row, col, y_lo, y_hi, draw)
        est = lyapunov_spectrum(m, p0, n, transient, backend=backend)
        if est.escaped:
            n_esc += 1
        else:
            l1s.append(est.lam_max)
            lss.append(est.lam_sum)
    frac = n_esc / n_seeds
    regime = classify_ratio(a, family.K_omega).value
    if not l1s:
        return CellResult(math.nan, math.nan, frac, CellClass.ESCAPED, regime)
    l1 = math.fsum(l1s) / len(l1s)
    ls = math.fsum(lss) / len(lss)
    cls = CellClass.STRANGE if (l1 > STRANGE_THRESHOLD and ls < 0) else CellClass.REGULAR
    return CellResult(l1, ls, frac, cls, regime)


def _scan_row(args):
    family, A, a_values, seed, row, n, transient, n_seeds, backend = args
    return [scan_cell(family, A, a, seed, row, j, n, transient, n_seeds, backend)
            for j, a in enumerate(a_values)]


def scan_rows(rows, a_values, n: int = 200_000, transient: int = 10_000, seed: int = 0,
              n_seeds: int = 1, workers: int | None = None, backend: str | None = None,
              row_values=None, row_name: str = "A") -> ScanTable:
    """Scan cells ``(family_i, A_i) x a_values``.

    ``rows`` is a sequence of ``(MapFamily, A)`` pairs. Rows are spread
    over at most ``workers`` processes (capped by ``BYKOV_THREADS``) and
    reassembled in row-major order.
    """
    rows = list(rows)
    a_values = np.asarray(a_values, dtype=float).ravel()
    if any(not A > 0 for _, A in rows) or np.any((a_values < 0) | (a_values >= 1)):
        raise ValueError("grid must satisfy A > 0 and 0 <= a < 1")
    if n_seeds < 1:
        raise ValueError("n_seeds must be at least 1")
    cap = max_workers()
    workers = cap if workers is None else min(workers, cap)
    if workers < 1:
        raise ValueError("workers must be at least 1")
    jobs = [(fam, float(A), tuple(a_values), int(seed), i, n, transient, n_seeds, backend)
            for i, (fam, A) in enumerate(rows)]
    if workers == 1 or len(jobs) <= 1:
        results = [_scan_row(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_scan_row, jobs))
    shape = (len(rows), a_values.size)
    lam_max = np.empty(shape)
    lam_sum = np.empty(shape)
    esc = np.zeros(shape)
    cls, regime = [], []
    for i, row in enumerate(results):
        for j, c in enumerate(row):
            lam_max[i, j] = c.lam_max
            lam_sum[i, j] = c.lam_sum
            esc[i, j] = c.escape_fraction
        cls.append(tuple(c.cls for c in row))
        regime.append(tuple(c.regime for c in row))
    if row_values is None:
        row_values = [A for _, A in rows]
    return ScanTable(np.asarray(row_values, dtype=float), a_values, lam_max, lam_sum, esc,
                     tuple(cls), tuple(regime), int(seed), row_name)


def strange_attractor_scan(family: MapFamily, A_values, a_values, n: int = 200_000,
                           transient: int = 10_000, seed: int = 0, n_seeds: int = 1,
                           workers: int | None = None,
                           backend: str | None = None) -> ScanTable:
    """Lyapunov exponents on the grid ``A_values x a_values`` at fixed ``delta, K_omega``.

    A cell is a ``StrangeCandidate`` when its mean leading exponent exceeds
    ``STRANGE_THRESHOLD``, the exponent sum is negative and some orbit
    stayed on the sheet.
    """
    A_values = np.asarray(A_values, dtype=float).ravel()
    return scan_rows([(family, A) for A in A_values], a_values, n, transient, seed,
                     n_seeds, workers, backend)
