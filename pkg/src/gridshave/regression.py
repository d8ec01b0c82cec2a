"""Least-squares fit of the COP surface and its validation metrics.

The basis is fixed to the six quadratic terms {1, plr, twb, plr^2, twb*plr,
twb^2}. CVRMSE and MBE follow the building-simulation calibration convention:
CVRMSE uses the (n-1) denominator, and MBE is signed so that a model that
underestimates the measurement comes out positive.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .cooling import CopModel
from .errors import MetricUndefinedError, ScenarioParseError, ShapeError, SingularFitError

BASIS_NAMES = ("1", "plr", "twb", "plr^2", "twb*plr", "twb^2")

SAMPLES_HEADER = "plr,twb_c,cop"

#: Minimum rows for a six-coefficient fit (2x overdetermination).
MIN_SAMPLES = 12


@dataclass(frozen=True)
class SampleSet:
    """(PLR, TWB, measured COP) triples with a provenance tag."""

    plr: np.ndarray
    twb: np.ndarray
    cop: np.ndarray
    provenance: str = "synthetic"   # "measured" or "synthetic"

    def __post_init__(self):
        plr = np.asarray(self.plr, dtype=float)
        twb = np.asarray(self.twb, dtype=float)
        cop = np.asarray(self.cop, dtype=float)
        object.__setattr__(self, "plr", plr)
        object.__setattr__(self, "twb", twb)
        object.__setattr__(self, "cop", cop)
        if not (plr.shape == twb.shape == cop.shape) or plr.ndim != 1:
            raise ShapeError("plr, twb and cop must be equal-length 1-D series")
        if plr.shape[0] < MIN_SAMPLES:
            raise ValueError(
                f"need at least {MIN_SAMPLES} samples for a 6-coefficient fit, "
                f"got {plr.shape[0]}")
        if not (np.all(np.isfinite(plr)) and np.all(np.isfinite(twb))
                and np.all(np.isfinite(cop))):
            raise ValueError("samples contain non-finite values")
        if np.any(plr < 0.0) or np.any(plr > 1.0):
            raise ValueError("plr values must lie in [0, 1]")
        if self.provenance not in ("measured", "synthetic"):
            raise ValueError(f"unknown provenance tag {self.provenance!r}")

    def __len__(self):
        return int(self.plr.shape[0])


@dataclass(frozen=True)
class FitReport:
    """Fitted model plus goodness-of-fit metrics on the fitting set."""

    model: CopModel
    cvrmse: float          # percent
    mbe: float             # percent, positive = model underestimates
    n: int
    residual_norm: float

    def metrics_block(self) -> str:
        return "\n".join([
            f"n = {self.n}",
            f"cvrmse_pct = {self.cvrmse:.4f}",
            f"mbe_pct = {self.mbe:.4f}",
            f"residual_norm = {self.residual_norm:.6e}",
        ])


def design_matrix(plr: np.ndarray, twb: np.ndarray) -> np.ndarray:
    plr = np.asarray(plr, dtype=float)
    twb = np.asarray(twb, dtype=float)
    return np.column_stack([
        np.ones_like(plr), plr, twb, plr * plr, twb * plr, twb * twb,
    ])


def _collinear_columns(X: np.ndarray) -> list[str]:
    """Names of basis columns that add no rank (greedy, left to right)."""
    bad = []
    rank = 0
    for j in range(X.shape[1]):
        new_rank = np.linalg.matrix_rank(X[:, : j + 1])
        if new_rank == rank:
            bad.append(BASIS_NAMES[j])
        rank = new_rank
    return bad


def cvrmse(pred, meas) -> float:
    """Coefficient of variation of the RMSE, percent, (n-1) denominator."""
    pred = np.asarray(pred, dtype=float)
    meas = np.asarray(meas, dtype=float)
    if pred.shape != meas.shape or pred.ndim != 1:
        raise ShapeError(f"series shapes differ: {pred.shape} vs {meas.shape}")
    n = meas.shape[0]
    if n < 2:
        raise ShapeError("need at least two samples for CVRMSE")
    mean = float(np.mean(meas))
    if mean == 0.0:
        raise MetricUndefinedError("CVRMSE undefined: measured series has zero mean")
    rmse = np.sqrt(np.sum((meas - pred) ** 2) / (n - 1))
    return float(100.0 * rmse / mean)


def mbe(pred, meas) -> float:
    """Mean bias error, percent. Positive when the model underestimates."""
    pred = np.asarray(pred, dtype=float)
    meas = np.asarray(meas, dtype=float)
    if pred.shape != meas.shape or pred.ndim != 1:
        raise ShapeError(f"series shapes differ: {pred.shape} vs {meas.shape}")
    total = float(np.sum(meas))
    if total == 0.0:
        raise MetricUndefinedError("MBE undefined: measured series sums to zero")
    return float(100.0 * np.sum(meas - pred) / total)


def fit_cop_model(samples: SampleSet, cop_floor: float = 0.5) -> FitReport:
    """Least-squares fit of the six-term COP surface.

    Solved through numpy's SVD-backed lstsq (no normal equations). The
    returned model's validity window is the sample TWB range.
    """
    X = design_matrix(samples.plr, samples.twb)
    if np.linalg.matrix_rank(X) < X.shape[1]:
        bad = _collinear_columns(X)
        raise SingularFitError(
            f"design matrix is rank deficient; collinear columns: {', '.join(bad)}",
            collinear_columns=bad)

    coeffs, _, _, _ = np.linalg.lstsq(X, samples.cop, rcond=None)
    pred = X @ coeffs
    resid = samples.cop - pred

    model = CopModel(
        c0=float(coeffs[0]), c1=float(coeffs[1]), c2=float(coeffs[2]),
        c3=float(coeffs[3]), c4=float(coeffs[4]), c5=float(coeffs[5]),
        twb_min=float(np.min(samples.twb)), twb_max=float(np.max(samples.twb)),
        cop_floor=cop_floor,
    )
    return FitReport(
        model=model,
        cvrmse=cvrmse(pred, samples.cop),
        mbe=mbe(pred, samples.cop),
        n=len(samples),
        residual_norm=float(np.linalg.norm(resid)),
    )


def load_samples(path: str, provenance: str = "measured") -> SampleSet:
    """Read a sample CSV with header `plr,twb_c,cop`."""
    if not os.path.exists(path):
        raise ScenarioParseError(f"samples file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines or lines[0].strip() != SAMPLES_HEADER:
        raise ScenarioParseError(
            f"{path}: expected header {SAMPLES_HEADER!r}, got {lines[0]!r}" if lines
            else f"{path}: empty file")
    plr, twb, cop_vals = [], [], []
    for row_no, line in enumerate(lines[1:], start=1):
        cells = line.split(",")
        if len(cells) != 3:
            raise ScenarioParseError(f"{path}: row {row_no}: expected 3 columns", row=row_no)
        try:
            values = [float(c) for c in cells]
        except ValueError as exc:
            raise ScenarioParseError(
                f"{path}: row {row_no}: non-numeric cell", row=row_no) from exc
        plr.append(values[0])
        twb.append(values[1])
        cop_vals.append(values[2])
    return SampleSet(plr=np.array(plr), twb=np.array(twb), cop=np.array(cop_vals),
                     provenance=provenance)


def save_samples(samples: SampleSet, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(SAMPLES_HEADER + "\n")
        for p, t, c in zip(samples.plr, samples.twb, samples.cop):
            fh.write(f"{float(p)!r},{float(t)!r},{float(c)!r}\n")
