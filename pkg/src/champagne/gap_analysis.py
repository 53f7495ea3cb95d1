"""Statistical checks of the spectral asymptotics against computed spectra.

Four independent verifications live here: consecutive-gap measurements on
a lattice line against the two gap-law variants, the smallest-gap scaling
in 1/|ln h|, the logarithmic Weyl count over a window, and a Monte Carlo
estimate of the phase-space volume whose leading term carries the same
|ln h| factor.  Everything is deterministic: Monte Carlo seeds are fixed
and scans are order independent.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .bohr_sommerfeld import (QuantizationModel, VARIANT_CHAMPAGNE,
                              VARIANT_GENERAL, gap_denominator,
                              reference_model)
from .errors import DomainError, SampleSizeError
from .radial_spectrum import joint_spectrum

TWO_PI = 2.0 * math.pi
SQRT2 = math.sqrt(2.0)

GAPS_CSV_HEADER = ("h,n,x_mid,gap_measured,gap_pred_general,"
                   "gap_pred_champagne,rel_err_general,rel_err_champagne")
WEYL_CSV_HEADER = "h,lnh_abs,N,predicted,residual"


@dataclass(frozen=True)
class GapRecord:
    """One consecutive gap on a lattice line, in zoomed x units."""

    h: float
    n: int
    x_mid: float
    gap_measured: float
    gap_pred_general: float
    gap_pred_champagne: float
    rel_err_general: float
    rel_err_champagne: float


def measure_gaps(spectrum, n: int, x_window,
                 model: QuantizationModel | None = None) -> list[GapRecord]:
    """Consecutive eigenvalue gaps on line n with both predictions attached.

    Predictions are evaluated at the midpoint of each gap (the mean value
    theorem only locates the matching x somewhere inside it).  Returns
    records sorted by x_mid; an empty line gives [] with a warning.
    """
    h = spectrum.h
    if model is None:
        model = reference_model(h)
    x = spectrum.line_x(n)
    x = np.sort(x[(x >= x_window[0]) & (x <= x_window[1])])
    if len(x) == 0:
        warnings.warn(f"no eigenvalues on line n={n} in {x_window}")
        return []
    if len(x) < 2:
        raise DomainError(f"need >= 2 eigenvalues on line n={n} in-window")
    out = []
    for a, b in zip(x[:-1], x[1:]):
        mid = 0.5 * (a + b)
        gap = b - a
        pg = TWO_PI / gap_denominator(mid, n, h, VARIANT_GENERAL, B=model.B)
        pc = TWO_PI / gap_denominator(mid, n, h, VARIANT_CHAMPAGNE)
        out.append(GapRecord(h=h, n=int(n), x_mid=float(mid),
                             gap_measured=float(gap),
                             gap_pred_general=pg, gap_pred_champagne=pc,
                             rel_err_general=abs(gap - pg) / pg,
                             rel_err_champagne=abs(gap - pc) / pc))
    return out


def gap_verdict(records_by_h: dict) -> tuple[str, dict]:
    """Which variant fits better, consistently across h.

    records_by_h maps h -> list of GapRecord.  Returns (winner, table)
    where table[h] = (max_rel_err_general, max_rel_err_champagne); the
    winner must be the same for every h, otherwise DomainError (the
    discrepancy would then be unresolved by this data).
    """
    table = {}
    winners = set()
    for h, recs in records_by_h.items():
        eg = max(r.rel_err_general for r in recs)
        ec = max(r.rel_err_champagne for r in recs)
        table[h] = (eg, ec)
        winners.add(VARIANT_GENERAL if eg < ec else VARIANT_CHAMPAGNE)
    if len(winners) != 1:
        raise DomainError(f"variant verdict inconsistent across h: {table}")
    return winners.pop(), table


def write_gaps_csv(path: str, records: list) -> None:
    with open(path, "w") as fh:
        fh.write(GAPS_CSV_HEADER + "\n")
        for r in records:
            fh.write("%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n"
                     % (r.h, r.n, r.x_mid, r.gap_measured,
                        r.gap_pred_general, r.gap_pred_champagne,
                        r.rel_err_general, r.rel_err_champagne))


# --- smallest gap scaling --------------------------------------------------

@dataclass(frozen=True)
class SmallestGapRow:
    h: float
    lnh_abs: float
    gap_min_measured: float      # in Delta E / h = sqrt(2) Delta x units
    gap_min_general: float
    gap_min_champagne: float
    x_at_min: float


@dataclass(frozen=True)
class SmallestGapScan:
    rows: list
    slope: float                 # of 1/gap_min_measured vs |ln h|
    intercept: float
    r_squared: float


def smallest_gap_scan(h_list, model: QuantizationModel | None = None,
                      x_half_window: float = 2.5,
                      workers: int | None = None) -> SmallestGapScan:
    """Minimum n = 0 gap per h and the 1/|ln h| scaling regression.

    The smallest gap sits at the center of the spectrum where the level
    density peaks, so only a small window around x = 0 is computed per h.
    Gaps are reported in Delta E / h units; the regression of
    1/gap_min_measured against |ln h| has slope 1/(2 pi sqrt 2) to leading
    order.
    """
    rows = []
    for h in sorted(h_list, reverse=True):
        m = model if model is not None and model.h == h else reference_model(h)
        e1 = x_half_window * SQRT2 * h
        spec = joint_spectrum(h, (0, 0), (-e1, e1), workers=workers)
        recs = measure_gaps(spec, 0, (-x_half_window, x_half_window), m)
        best = min(recs, key=lambda r: r.gap_measured)
        rows.append(SmallestGapRow(
            h=h, lnh_abs=abs(math.log(h)),
            gap_min_measured=SQRT2 * best.gap_measured,
            gap_min_general=SQRT2 * TWO_PI
            / gap_denominator(0.0, 0, h, VARIANT_GENERAL, B=m.B),
            gap_min_champagne=SQRT2 * TWO_PI
            / gap_denominator(0.0, 0, h, VARIANT_CHAMPAGNE),
            x_at_min=best.x_mid))
    lnh = np.array([r.lnh_abs for r in rows])
    inv = np.array([1.0 / r.gap_min_measured for r in rows])
    slope, intercept = np.polyfit(lnh, inv, 1)
    fitted = slope * lnh + intercept
    ss_res = float(np.sum((inv - fitted) ** 2))
    ss_tot = float(np.sum((inv - np.mean(inv)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return SmallestGapScan(rows=rows, slope=float(slope),
                           intercept=float(intercept), r_squared=r2)


# --- log-Weyl counting ------------------------------------------------------

@dataclass(frozen=True)
class Window:
    """Rectangle [t1_min, t1_max] x [t2_min, t2_max] in (E1/h, E2/h)."""

    t1_min: float
    t1_max: float
    t2_min: float
    t2_max: float

    def __post_init__(self):
        if self.t1_min > self.t1_max or self.t2_min > self.t2_max:
            raise DomainError("empty-ordered window bounds")

    def area_tilde(self) -> float:
        """Lebesgue area of diag(1/sqrt2, 1) applied to the window."""
        return ((self.t1_max - self.t1_min) / SQRT2
                * (self.t2_max - self.t2_min))

    def n_slices(self) -> range:
        return range(math.ceil(self.t2_min), math.floor(self.t2_max) + 1)

    def slice_length(self) -> float:
        """Length of each integer-height slice after the sqrt2 rescale."""
        return (self.t1_max - self.t1_min) / SQRT2


def weyl_count(spectrum, K: Window) -> tuple[int, float]:
    """Eigenvalue count in the window against the |ln h| leading term.

    The window rescales to x = t1/sqrt2; points with (x, n) inside are
    counted, and the prediction is (|ln h|/2 pi) times the total length
    of the rescaled window's integer-height slices.  Raises DomainError
    when the computed spectrum does not cover the window.
    """
    h = spectrum.h
    x_lo, x_hi = K.t1_min / SQRT2, K.t1_max / SQRT2
    ns = list(K.n_slices())
    if not ns or x_lo >= x_hi:
        return 0, 0.0
    have = set(spectrum.n_values())
    missing = [n for n in ns if n not in have]
    if missing:
        raise DomainError(f"window lines {missing} not in computed spectrum")
    count = 0
    for n in ns:
        x = spectrum.line_x(n)
        if len(x) and (x.min() > x_lo or x.max() < x_hi):
            # the line must extend past the window on both sides,
            # otherwise eigenvalues could be missing from the count
            raise DomainError(
                f"line n={n} computed on [{x.min():.3g}, {x.max():.3g}] "
                f"does not cover the window [{x_lo:.3g}, {x_hi:.3g}]")
        count += int(np.sum((x >= x_lo) & (x <= x_hi)))
    predicted = abs(math.log(h)) / TWO_PI * K.slice_length() * len(ns)
    return count, predicted


def write_weyl_csv(path: str, rows: list) -> None:
    """rows: (h, N, predicted) triples."""
    with open(path, "w") as fh:
        fh.write(WEYL_CSV_HEADER + "\n")
        for h, n, pred in rows:
            fh.write("%.17g,%.17g,%d,%.17g,%.17g\n"
                     % (h, abs(math.log(h)), n, pred, n - pred))


def write_plot_data(path: str, xs, ys) -> None:
    """Two-column whitespace-separated file for direct plotting."""
    with open(path, "w") as fh:
        for x, y in zip(xs, ys):
            fh.write("%.17g %.17g\n" % (x, y))


# --- symplectic volume ------------------------------------------------------

@dataclass(frozen=True)
class VolumeEstimate:
    mu_over_norm: float          # mu(hK) / (2 pi h)^2
    asymptotic: float            # (|ln h| / 2 pi) |K tilde|
    std_error: float             # Monte Carlo SE of mu_over_norm
    samples: int
    r_low: float                 # inner radius cutoff (bias documented)


def dh_volume(K: Window, h: float, samples: int = 10_000_000,
              seed: int = 20260823, r_low: float = 1e-6,
              se_max: float = 0.05) -> VolumeEstimate:
    """Phase-space volume of {(H, L) in hK} by stratified Monte Carlo.

    In polar position/momentum coordinates the volume factorizes as
    2 pi Int r dr Int du Int dpsi 1{r sqrt(2u) sin(psi) in h[t2]} with
    u = |momentum|^2/2 restricted exactly to the conditional H window, so
    only the angular-momentum indicator is sampled.  r is drawn
    log-uniformly (the integral diverges logarithmically at r = 0, which
    is the whole point) and stratified over octaves; the truncation bias
    below r_low is O(r_low^2) and negligible against the standard error.
    Raises SampleSizeError when the standard error exceeds se_max of the
    value.
    """
    if samples < 1000:
        raise SampleSizeError("need at least 1000 samples")
    e_lo, e_hi = h * K.t1_min, h * K.t1_max
    l_lo, l_hi = h * K.t2_min, h * K.t2_max
    if e_hi <= -0.25 or K.t1_min > K.t1_max:
        return VolumeEstimate(0.0, abs(math.log(h)) / TWO_PI * K.area_tilde(),
                              0.0, 0, r_low)
    # outer turning radius of the highest energy in the window
    r_hi = math.sqrt((1.0 + math.sqrt(1.0 + 4.0 * max(e_hi, 0.0) + 1e-300))
                     / 2.0) * 1.0000001
    n_strata = 24
    edges = np.exp(np.linspace(math.log(r_low), math.log(r_hi),
                               n_strata + 1))
    per = samples // n_strata
    rng = np.random.default_rng(seed)
    total = 0.0
    var = 0.0
    used = 0
    for k in range(n_strata):
        z = math.log(edges[k + 1] / edges[k])
        r = np.exp(rng.uniform(math.log(edges[k]),
                               math.log(edges[k + 1]), per))
        v = r ** 4 - r ** 2
        u_lo = np.maximum(e_lo - v, 0.0)
        u_hi = e_hi - v
        w_u = np.maximum(u_hi - u_lo, 0.0)
        u = u_lo + rng.uniform(0.0, 1.0, per) * w_u
        psi = rng.uniform(0.0, TWO_PI, per)
        ell = r * np.sqrt(2.0 * u) * np.sin(psi)
        ind = (ell >= l_lo) & (ell <= l_hi)
        # integrand weight: r^2 z (log-uniform r) * w_u (uniform u) * 2 pi
        f = (r * r * z) * w_u * TWO_PI * ind
        mean = float(np.mean(f))
        total += mean
        var += float(np.var(f)) / per
        used += per
    mu = TWO_PI * total                      # the free theta integral
    se = TWO_PI * math.sqrt(var)
    norm = (TWO_PI * h) ** 2
    value = mu / norm
    if value > 0 and se / mu > se_max:
        raise SampleSizeError(
            f"Monte Carlo SE {se / mu:.1%} exceeds {se_max:.0%}; "
            "increase samples")
    asym = abs(math.log(h)) / TWO_PI * K.area_tilde()
    return VolumeEstimate(mu_over_norm=value, asymptotic=asym,
                          std_error=se / norm, samples=used, r_low=r_low)
