"""Regression of count series against c * T^a * (log T)^(b-1).

Ordinary least squares in (log T, log log T) coordinates. Lower-order terms
pollute the small-T range, so fits accept a min_T cutoff; the verification
layer discards the lower half of the log-range of a series by default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .points import CountSeries

__all__ = ["FitResult", "fit_series", "upper_half_cutoff", "compare_with_prediction"]

MODES = ("free_a", "fixed_ab", "fixed_a_free_b")


@dataclass(frozen=True)
class FitResult:
    a_hat: float
    log_exponent_hat: float  # estimate of b - 1
    c_hat: float
    residual_rms: float
    mode: str
    a_stderr: float = float("nan")
    n_samples: int = 0

    @property
    def b_hat(self) -> float:
        return self.log_exponent_hat + 1


def _design(series: CountSeries, min_T):
    pairs = [
        (t, n)
        for t, n in zip(series.thresholds, series.counts)
        if n >= 1 and t >= 3 and (min_T is None or t >= min_T)
    ]
    if len(pairs) < 3:
        raise ValueError("need at least 3 usable samples (N >= 1, T >= 3)")
    T = np.array([p[0] for p in pairs], dtype=float)
    N = np.array([p[1] for p in pairs], dtype=float)
    return np.log(T), np.log(np.log(T)), np.log(N)


def fit_series(
    series: CountSeries,
    mode: str = "free_a",
    fixed: tuple[float, float] | None = None,
    min_T: float | None = None,
) -> FitResult:
    """Least squares for log N = a log T + (b-1) log log T + log c.

    free_a estimates a and c with the log exponent pinned (to the supplied
    b - 1 when fixed is given, else 0); fixed_ab estimates only c;
    fixed_a_free_b estimates the log exponent and c.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    x, llx, y = _design(series, min_T)
    n = len(x)

    if mode == "free_a":
        le = (fixed[1] - 1) if fixed is not None else 0.0
        target = y - le * llx
        A = np.column_stack([x, np.ones(n)])
        coef, _, rank, _ = np.linalg.lstsq(A, target, rcond=None)
        if rank < 2:
            raise ValueError("degenerate design matrix")
        a_hat, logc = coef
        resid = target - A @ coef
        a_stderr = _slope_stderr(A, resid)
    elif mode == "fixed_ab":
        if fixed is None:
            raise ValueError("fixed_ab needs the (a, b) pair")
        a_hat, le = fixed[0], fixed[1] - 1
        target = y - a_hat * x - le * llx
        logc = float(np.mean(target))
        resid = target - logc
        a_stderr = 0.0
    else:  # fixed_a_free_b
        if fixed is None:
            raise ValueError("fixed_a_free_b needs a in the fixed pair")
        a_hat = fixed[0]
        target = y - a_hat * x
        A = np.column_stack([llx, np.ones(n)])
        coef, _, rank, _ = np.linalg.lstsq(A, target, rcond=None)
        if rank < 2:
            raise ValueError("degenerate design matrix")
        le, logc = coef
        resid = target - A @ coef
        a_stderr = 0.0

    return FitResult(
        a_hat=float(a_hat),
        log_exponent_hat=float(le),
        c_hat=float(math.exp(logc)),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        mode=mode,
        a_stderr=float(a_stderr),
        n_samples=n,
    )


def _slope_stderr(A: np.ndarray, resid: np.ndarray) -> float:
    n, k = A.shape
    if n <= k:
        return float("nan")
    sigma2 = float(resid @ resid) / (n - k)
    cov = sigma2 * np.linalg.inv(A.T @ A)
    return math.sqrt(cov[0, 0])


def residual_trend(series: CountSeries, a: float, b: float = 1.0,
                   min_T: float | None = None) -> float:
    """Slope in log T of the residuals after removing the fixed-(a, b) model."""
    x, llx, y = _design(series, min_T)
    resid = y - a * x - (b - 1) * llx
    resid -= resid.mean()
    A = np.column_stack([x, np.ones(len(x))])
    coef, *_ = np.linalg.lstsq(A, resid, rcond=None)
    return float(coef[0])


def upper_half_cutoff(series: CountSeries) -> float:
    """Geometric midpoint of the threshold range; exponent verification fits
    discard thresholds below it. Slightly slackened so a grid value rounded
    down from the exact midpoint is kept."""
    lo, hi = series.thresholds[0], series.thresholds[-1]
    return math.sqrt(lo * hi) * 0.999


def compare_with_prediction(
    series: CountSeries,
    predicted_a: float,
    predicted_b: float,
    tol_a: float = 0.05,
    tol_b: float = 0.5,
    min_T: float | None = None,
) -> dict:
    """Fit the series and test the exponents against the prediction."""
    res = fit_series(series, "free_a", min_T=min_T)
    res_b = fit_series(series, "fixed_a_free_b", fixed=(predicted_a, 1.0), min_T=min_T)
    dev_a = abs(res.a_hat - predicted_a)
    dev_b = abs(res_b.b_hat - predicted_b)
    return {
        "model": series.model,
        "kind": series.kind,
        "predicted_a": float(predicted_a),
        "predicted_b": float(predicted_b),
        "fitted_a": res.a_hat,
        "fitted_b_at_predicted_a": res_b.b_hat,
        "a_deviation": dev_a,
        "b_deviation": dev_b,
        "tol_a": tol_a,
        "tol_b": tol_b,
        "pass": bool(dev_a <= tol_a and dev_b <= tol_b),
        "c_hat": res.c_hat,
        "residual_rms": res.residual_rms,
        "n_samples": res.n_samples,
    }


def fitted_curve_csv(series: CountSeries, res: FitResult) -> str:
    """CSV of (T, N, fitted N) rows for plotting."""
    lines = ["T,N,N_fit"]
    for t, n in zip(series.thresholds, series.counts):
        nf = res.c_hat * t**res.a_hat * math.log(t) ** res.log_exponent_hat
        lines.append(f"{t:g},{n},{nf:.6g}")
    return "\n".join(lines) + "\n"
