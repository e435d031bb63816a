"""Empirical variograms over network distances and parametric model fitting.

The semivariance of a lag bin is half the mean squared difference of all
site pairs whose along-network separation falls in the bin. Three bounded
model shapes are supported; their range parameter is the practical range,
the distance where the model has reached (almost) its sill.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .errors import (
    EmptyVariogramError,
    FitConvergenceError,
    InsufficientDataError,
    ValidationError,
)

MODEL_KINDS = ("spherical", "exponential", "gaussian")


@dataclass(frozen=True)
class VariogramModel:
    """A fitted (or assumed) variogram: nugget + sill * shape(h / range).

    The model value at lag zero is the nugget; beyond the range it stays at
    nugget + sill (the exponential and gaussian shapes reach 95 percent of
    the sill there and are treated as saturated). ``degenerate`` marks fits
    where the sill collapsed to its lower bound, meaning the data showed no
    usable spatial structure.
    """

    kind: str
    nugget: float
    sill: float
    range_km: float
    rss: float | None = None
    degenerate: bool = False

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValidationError(f"kind must be one of {MODEL_KINDS}, got '{self.kind}'")
        if not (math.isfinite(self.nugget) and self.nugget >= 0):
            raise ValidationError(f"nugget must be nonnegative, got {self.nugget}")
        if not (math.isfinite(self.sill) and self.sill > 0):
            raise ValidationError(f"sill must be positive, got {self.sill}")
        if not (math.isfinite(self.range_km) and self.range_km > 0):
            raise ValidationError(f"range must be positive, got {self.range_km}")


def _shape(kind, h, range_km):
    """Unit-sill model shape, 0 at the origin and saturating at 1."""
    if kind == "spherical":
        r = np.minimum(h, range_km) / range_km
        return 1.5 * r - 0.5 * r**3
    if kind == "exponential":
        return 1.0 - np.exp(-3.0 * h / range_km)
    if kind == "gaussian":
        return 1.0 - np.exp(-3.0 * h**2 / range_km**2)
    raise ValidationError(f"kind must be one of {MODEL_KINDS}, got '{kind}'")


def _model_gamma(kind, nugget, sill, range_km, h):
    return nugget + sill * _shape(kind, h, range_km)


def gamma(model, h):
    """Model semivariance at lag(s) ``h`` in km; h must be nonnegative."""
    h_arr = np.asarray(h, dtype=float)
    if np.any(h_arr < 0):
        raise ValueError("lag distances must be nonnegative")
    values = _model_gamma(model.kind, model.nugget, model.sill, model.range_km, h_arr)
    if np.isscalar(h) or h_arr.ndim == 0:
        return float(values)
    return values


@dataclass(frozen=True)
class EmpiricalVariogram:
    """Binned semivariances: edges, per-bin estimate and pair count.

    Bins are left-closed; the last bin also includes its right edge. Bins
    without pairs carry NaN instead of a semivariance.
    """

    bin_edges: np.ndarray
    gamma_hat: np.ndarray
    pair_counts: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=float)
        gammas = np.asarray(self.gamma_hat, dtype=float)
        counts = np.asarray(self.pair_counts, dtype=int)
        if edges.ndim != 1 or edges.size < 2:
            raise ValidationError("need at least two bin edges")
        if edges[0] <= 0:
            raise ValidationError("bin edges must start above zero")
        if np.any(np.diff(edges) <= 0):
            raise ValidationError("bin edges must be strictly increasing")
        if gammas.shape != (edges.size - 1,) or counts.shape != gammas.shape:
            raise ValidationError("gamma and count arrays must have one entry per bin")
        empty = counts == 0
        if not np.all(np.isnan(gammas[empty])):
            raise ValidationError("bins without pairs must carry NaN")
        if not np.all(np.isfinite(gammas[~empty]) & (gammas[~empty] >= 0)):
            raise ValidationError("populated bins need finite nonnegative semivariances")
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "gamma_hat", gammas)
        object.__setattr__(self, "pair_counts", counts)

    @property
    def centers(self):
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def populated(self):
        return self.pair_counts > 0

    @property
    def n_populated(self):
        return int(self.populated.sum())


def distance_bin_edges(distances, n_bins=15, lower_pct=1.0, upper_pct=95.0):
    """Equal-width lag bins spanning the given percentile range of pair distances.

    The tails are trimmed because extreme lags carry few pairs and destabilise
    the fit. Only finite positive distances count.
    """
    d = np.asarray(distances, dtype=float)
    if d.ndim == 2:
        iu, ju = np.triu_indices(d.shape[0], k=1)
        d = d[iu, ju]
    d = d[np.isfinite(d) & (d > 0)]
    if d.size == 0:
        raise EmptyVariogramError("no finite positive pair distance to bin")
    if n_bins < 1:
        raise ValueError(f"need at least one bin, got {n_bins}")
    lo = float(np.percentile(d, lower_pct))
    hi = float(np.percentile(d, upper_pct))
    lo = max(lo, hi * 1e-9)
    if not hi > lo:
        raise InsufficientDataError(
            "pair distances are too concentrated to form lag bins"
        )
    return np.linspace(lo, hi, n_bins + 1)


def empirical_variogram(values, distances, bin_edges):
    """Bin half the squared differences of all unordered site pairs.

    ``values`` aligns with the rows of the square ``distances`` matrix.
    Pairs with an unreachable (infinite) separation are dropped; if no pair
    is usable at all the variogram is empty and an error is raised. Pairs
    are accumulated in a fixed row-major order so results are reproducible
    to the last bit.
    """
    vals = np.asarray(values, dtype=float)
    dist = np.asarray(distances, dtype=float)
    n = vals.size
    if dist.shape != (n, n):
        raise ValidationError(
            f"distance matrix shape {dist.shape} does not match {n} values"
        )
    if n < 2:
        raise InsufficientDataError("need at least two sites for a variogram")

    edges = np.asarray(bin_edges, dtype=float)
    n_bins = edges.size - 1
    iu, ju = np.triu_indices(n, k=1)
    d = dist[iu, ju]
    reachable = np.isfinite(d)
    if not reachable.any():
        raise EmptyVariogramError("every site pair is unreachable")
    sq = (vals[iu] - vals[ju]) ** 2
    d = d[reachable]
    sq = sq[reachable]

    idx = np.searchsorted(edges, d, side="right") - 1
    idx[d == edges[-1]] = n_bins - 1  # close the last bin on the right
    in_bin = (idx >= 0) & (idx < n_bins) & (d <= edges[-1])

    counts = np.zeros(n_bins, dtype=int)
    sums = np.zeros(n_bins)
    np.add.at(counts, idx[in_bin], 1)
    np.add.at(sums, idx[in_bin], sq[in_bin])

    gammas = np.full(n_bins, np.nan)
    populated = counts > 0
    gammas[populated] = sums[populated] / (2.0 * counts[populated])
    return EmpiricalVariogram(bin_edges=edges, gamma_hat=gammas, pair_counts=counts)


def fit_variogram(empirical, kinds=MODEL_KINDS, min_pairs=5, fixed_range_km=None):
    """Fit a variogram model to binned semivariances by weighted least squares.

    Each candidate shape is fitted with residuals weighted by the bin pair
    counts; the shape with the lowest weighted residual sum of squares wins.
    Bins with fewer than ``min_pairs`` pairs are ignored. The range is
    optimised from three quartile-based starting points unless
    ``fixed_range_km`` pins it. Deterministic: no randomness anywhere.
    """
    kinds = tuple(kinds)
    if not kinds:
        raise ValueError("need at least one candidate kind")
    for kind in kinds:
        if kind not in MODEL_KINDS:
            raise ValueError(f"unknown variogram kind '{kind}'")

    usable = empirical.populated & (empirical.pair_counts >= min_pairs) & np.isfinite(
        empirical.gamma_hat
    )
    if usable.sum() < 3:
        raise InsufficientDataError(
            f"variogram fitting needs at least 3 bins with {min_pairs}+ pairs, "
            f"got {int(usable.sum())}"
        )
    h = empirical.centers[usable]
    g = empirical.gamma_hat[usable]
    weights = np.sqrt(empirical.pair_counts[usable].astype(float))

    g_max = float(g.max())
    g_min = float(max(g.min(), 0.0))
    scale = g_max if g_max > 0 else 1.0
    sill_floor = 1e-8 * scale
    h_max = float(h.max())
    range_bounds = (1e-6 * h_max, 1e3 * h_max)

    if fixed_range_km is not None:
        if not fixed_range_km > 0:
            raise ValueError(f"fixed range must be positive, got {fixed_range_km}")
        range_starts = (float(fixed_range_km),)
    else:
        range_starts = tuple(
            float(np.clip(np.percentile(h, p), *range_bounds)) for p in (25, 50, 75)
        )

    nugget_start = 0.5 * g_min
    sill_start = max(g_max - nugget_start, 10 * sill_floor)

    best = None
    for kind in kinds:
        for range_start in range_starts:
            if fixed_range_km is None:
                def residuals(p):
                    return weights * (_model_gamma(kind, p[0], p[1], p[2], h) - g)

                x0 = (nugget_start, sill_start, range_start)
                bounds = ([0.0, sill_floor, range_bounds[0]], [np.inf, np.inf, range_bounds[1]])
            else:
                def residuals(p):
                    return weights * (_model_gamma(kind, p[0], p[1], fixed_range_km, h) - g)

                x0 = (nugget_start, sill_start)
                bounds = ([0.0, sill_floor], [np.inf, np.inf])
            try:
                result = least_squares(
                    residuals, x0, bounds=bounds, method="trf",
                    xtol=1e-13, ftol=1e-13, gtol=1e-13, max_nfev=2000,
                )
            except Exception:
                continue
            if not result.success:
                continue
            rss = float(2.0 * result.cost)
            if best is None or rss < best[0] - 1e-15 * (1 + abs(best[0])):
                nugget = float(result.x[0])
                sill = float(result.x[1])
                range_km = float(result.x[2]) if fixed_range_km is None else float(fixed_range_km)
                best = (rss, kind, nugget, sill, range_km)
            if fixed_range_km is not None:
                break  # the start grid only varies the range

    if best is None:
        raise FitConvergenceError(
            f"no variogram model converged for kinds {kinds}"
        )
    rss, kind, nugget, sill, range_km = best
    return VariogramModel(
        kind=kind,
        nugget=nugget,
        sill=sill,
        range_km=range_km,
        rss=rss,
        degenerate=sill <= sill_floor * (1 + 1e-6),
    )
