"""Canonical-measurement error distributions, moments, and entropy bounds.

For a probe state with amplitudes psi_n the canonical covariant measurement
has error density p(theta) = |sum_n psi_n e^{i n theta}|^2 / 2pi, a
band-limited function whose trigonometric moments <e^{im Theta}> equal
sum_n psi_{n+m} psi_n*.  This module builds those densities on power-of-two
grids, converts moments to the standard error metrics (average mean-square
error over the circle, Holevo variance, and the cosine-surrogate metrics),
and verifies the entropy-based accuracy bounds:

* entropic uncertainty  H(Theta) + H(G) >= ln 2pi,
* delta >= (2 pi e)^{-1/2} e^{H(Theta)}  (entropic-length bound),
* delta >= k_A / <N+1>  and the median form with <2|G-g|+1>,
* Holevo variance >= tan^2(pi / (width + 2)) for bounded support,
* the arccos sandwich between delta_1 and delta.

Max-entropy reference families (thermal, Laplace, flat) provide the closed
forms behind the k_A bounds; ``max_entropy_bound_checks`` sweeps their
parameter grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import ifft, irfft, rfft

from .states import ProbeState, Spectrum

__all__ = [
    "ErrorDistribution",
    "GeneratorDistribution",
    "MaxEntropyFamily",
    "BoundReport",
    "canonical_distribution",
    "default_grid_size",
    "entropy_and_length",
    "entropy_generator",
    "generator_distribution",
    "max_entropy_bound_checks",
    "metrics_from_moments",
    "moment_deficits",
    "moments",
    "state_metrics",
    "unbias_rotation",
    "verify_bounds",
]

K_A = math.sqrt(2.0 * math.pi / math.e**3)

# Cosine coefficients of f3 = (pi^2/4 - 1)[2(1 - cos t) - (1 - cos 2t)/2]
#                             + 2(1 - cos t)
F3_A0 = 3.0 * math.pi**2 / 8.0 + 0.5
F3_A1 = -math.pi**2 / 2.0
F3_A2 = math.pi**2 / 8.0 - 0.5

_LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class ErrorDistribution:
    """Error density on a uniform theta grid over [-pi, pi)."""

    grid: np.ndarray
    density: np.ndarray
    normalization_check: float

    def __post_init__(self) -> None:
        if self.grid.shape != self.density.shape:
            raise ValueError("grid and density must have the same shape")
        if np.any(self.density < -1e-12):
            raise ValueError("density has negative entries")
        if abs(self.normalization_check - 1.0) > 1e-10:
            raise ValueError(
                f"density integrates to {self.normalization_check}, not 1"
            )

    @property
    def step(self) -> float:
        return 2.0 * math.pi / self.grid.size


@dataclass(frozen=True)
class GeneratorDistribution:
    """Probability distribution over the generator eigenvalues."""

    spectrum: Spectrum
    probabilities: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.probabilities, dtype=float)
        if p.size != self.spectrum.dimension:
            raise ValueError("probabilities do not match the spectrum")
        if np.any(p < -1e-14):
            raise ValueError("negative probability")
        total = p.sum()
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total}, not 1")
        object.__setattr__(self, "probabilities", np.maximum(p, 0.0))


@dataclass(frozen=True)
class MaxEntropyFamily:
    """Maximum-entropy distributions over integers.

    kind = 'thermal': parameter is <N> on the nonnegative integers;
    kind = 'laplace': p_n propto e^{-beta |n - g|} over all integers, with
        parameter = beta and offset r = ceil(g) - g in [0, 1/2];
    kind = 'flat': parameter is n_max, uniform over n_max + 1 values.
    """

    kind: str
    parameter: float
    offset: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("thermal", "laplace", "flat"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == "thermal" and self.parameter < 0.0:
            raise ValueError("thermal parameter <N> must be >= 0")
        if self.kind == "laplace":
            if self.parameter <= 0.0:
                raise ValueError("laplace beta must be > 0")
            if not 0.0 <= self.offset <= 0.5:
                raise ValueError("laplace offset r must lie in [0, 1/2]")
        if self.kind == "flat" and self.parameter < 0:
            raise ValueError("flat n_max must be >= 0")

    def entropy(self) -> float:
        if self.kind == "thermal":
            nbar = self.parameter
            if nbar == 0.0:
                return 0.0
            return math.log(nbar + 1.0) + nbar * math.log1p(1.0 / nbar)
        if self.kind == "flat":
            return math.log(self.parameter + 1.0)
        # Laplace: H = ln Z + beta <|G - g|> with Z the normalization.
        beta, r = self.parameter, self.offset
        z_norm = (math.exp(-beta * r) + math.exp(-beta * (1.0 - r))) / (
            -math.expm1(-beta)
        )
        return math.log(z_norm) + beta * self.mean_abs_deviation()

    def mean_abs_deviation(self) -> float:
        """<|G - g|> for the Laplace family."""
        if self.kind != "laplace":
            raise ValueError("mean_abs_deviation applies to the laplace kind")
        beta, r = self.parameter, self.offset
        num = (math.exp(beta * r) + math.exp(-beta * r)) * (1.0 - r) + (
            math.exp(beta * (1.0 - r)) + math.exp(-beta * (1.0 - r))
        ) * r
        den = (-math.expm1(-beta)) * (math.exp(beta * r) + math.exp(beta * (1.0 - r)))
        return num / den


def default_grid_size(spectrum: Spectrum) -> int:
    """Smallest power of two >= 8 (cutoff + 1)."""
    return 1 << max(8 * (spectrum.cutoff + 1) - 1, 1).bit_length()


def canonical_distribution(
    state: ProbeState, grid_size: int | None = None
) -> ErrorDistribution:
    """Canonical error density p(theta) = |sum psi_n e^{in theta}|^2 / 2pi.

    The density is a trigonometric polynomial of degree equal to the support
    width, so the uniform grid sum integrates it exactly; grid_size must be a
    power of two >= 8 (cutoff + 1) to rule out aliasing.
    """
    size = default_grid_size(state.spectrum) if grid_size is None else int(grid_size)
    if size & (size - 1) or size < 8 * (state.spectrum.cutoff + 1):
        raise ValueError(
            f"grid size {size} would alias: need a power of two >= "
            f"{8 * (state.spectrum.cutoff + 1)}"
        )
    psi = state.amplitudes
    padded = np.zeros(size, dtype=complex)
    # theta_k = -pi + 2 pi k / size, so e^{i u theta_k} = (-1)^u e^{2pi i uk/size}
    signs = 1.0 - 2.0 * (np.arange(psi.size) % 2)
    padded[: psi.size] = signs * psi
    transform = size * ifft(padded)
    density = (transform.real**2 + transform.imag**2) / (2.0 * math.pi)
    grid = -math.pi + 2.0 * math.pi * np.arange(size) / size
    check = float(density.sum() * (2.0 * math.pi / size))
    return ErrorDistribution(grid=grid, density=density, normalization_check=check)


def generator_distribution(state: ProbeState) -> GeneratorDistribution:
    """Distribution of the generator eigenvalues, p_n = psi_n^2."""
    return GeneratorDistribution(
        spectrum=state.spectrum, probabilities=state.amplitudes**2
    )


def moments(state: ProbeState, m_max: int) -> np.ndarray:
    """Trigonometric moments <e^{im Theta}> = sum_n psi_{n+m} psi_n, m = 0..m_max.

    Exact for the canonical measurement; identically zero beyond the support
    width, so requesting m_max = support width captures every moment.
    """
    if m_max > state.spectrum.cutoff and state.spectrum.kind == "nonneg":
        raise ValueError(f"m_max {m_max} exceeds cutoff {state.spectrum.cutoff}")
    if m_max > 2 * state.spectrum.cutoff and state.spectrum.kind == "symmetric":
        raise ValueError(f"m_max {m_max} exceeds width {2 * state.spectrum.cutoff}")
    psi = state.amplitudes
    out = np.empty(m_max + 1, dtype=complex)
    for m in range(m_max + 1):
        out[m] = float(psi[m:] @ psi[: psi.size - m]) if m < psi.size else 0.0
    return out


def all_moments(state: ProbeState) -> np.ndarray:
    """Every nonvanishing moment: m = 0 .. dimension - 1.

    Large states use the FFT autocorrelation (the moments are the lag
    products of psi); the first three lags are recomputed as exact dot
    products since the low-order moments set the headline metrics.
    """
    psi = state.amplitudes
    n = psi.size
    if n <= 4096:
        out = np.empty(n, dtype=complex)
        for m in range(n):
            out[m] = float(psi[m:] @ psi[: n - m])
        for m in range(min(3, n)):
            out[m] = math.fsum(psi[m:] * psi[: n - m])
        return out
    size = 1 << (2 * n - 1).bit_length()
    spectrum_power = np.abs(rfft(psi, size)) ** 2
    lags = irfft(spectrum_power, size)[:n]
    out = lags.astype(complex)
    for m in range(min(3, n)):
        # compensated sum: 1 - c_1 can be ~1e-7 while c_1 is ~1, so the
        # low-order lags need better than plain-dot rounding
        out[m] = math.fsum(psi[m:] * psi[: n - m])
    return out


def moment_deficits(state: ProbeState, m_max: int = 2) -> np.ndarray:
    """Moment deficits q_m = 1 - <cos m Theta> for m = 1 .. m_max.

    Built from the cancellation-free identity

        2 q_m * sum_i psi_i^2 = sum_i (psi_{i+m} - psi_i)^2 + boundary squares

    whose terms are all nonnegative, so q_m keeps full relative precision.
    Forming 1 - c_m from a rounded c_m ~ 1 would cap the accuracy at
    ~1e-16 / q_m relative, which for broad states (q_1 ~ 1e-7) is far worse
    than the metrics derived from the deficits need.
    """
    psi = state.amplitudes
    n = psi.size
    norm_sq = math.fsum(psi * psi)
    out = np.empty(m_max, dtype=float)
    for m in range(1, m_max + 1):
        if m >= n:
            out[m - 1] = 1.0  # the moment vanishes beyond the support
            continue
        diffs = psi[m:] - psi[:-m]
        terms = np.concatenate((diffs * diffs, psi[:m] ** 2, psi[-m:] ** 2))
        out[m - 1] = 0.5 * math.fsum(terms) / norm_sq
    return out


def state_metrics(state: ProbeState) -> dict[str, float]:
    """Canonical-measurement metrics of a state, at full relative precision.

    Same keys as ``metrics_from_moments``; ``amse`` comes from the moment
    series, while the metrics that vanish on the point distribution are
    rebuilt from the deficits q_m = 1 - c_m (see ``moment_deficits``):

        holevo^2  = q1 (2 - q1) / (1 - q1)^2
        delta1^2  = 2 q1
        delta2^2  = (8/3) q1 - q2 / 6
        delta3^2  = -F3_A1 q1 - F3_A2 q2
    """
    metrics = metrics_from_moments(all_moments(state))
    q1, q2 = (float(q) for q in moment_deficits(state, 2))
    if q1 < 1.0:
        metrics["holevo"] = q1 * (2.0 - q1) / (1.0 - q1) ** 2
    metrics["delta1"] = math.sqrt(max(2.0 * q1, 0.0))
    metrics["delta2"] = math.sqrt(max((8.0 / 3.0) * q1 - q2 / 6.0, 0.0))
    metrics["delta3"] = math.sqrt(max(-F3_A1 * q1 - F3_A2 * q2, 0.0))
    return metrics


def metrics_from_moments(moms: np.ndarray) -> dict[str, float]:
    """Error metrics from the full set of trigonometric moments.

    Returns ``amse`` = <Theta^2> (mean-square, via the Fourier series
    pi^2/3 + 4 sum (-1)^m c_m / m^2 which is exact once the moments cover
    the support width), ``holevo`` = (Re<e^{iTheta}>)^{-2} - 1 (+inf when
    the real part is not positive), and the root metrics ``delta1``,
    ``delta2``, ``delta3`` of the cosine surrogates.
    """
    c = np.real(np.asarray(moms))
    if c.size < 1 or abs(c[0] - 1.0) > 1e-9:
        raise ValueError("moments must start with <e^{i0}> = 1")
    c1 = c[1] if c.size > 1 else 0.0
    c2 = c[2] if c.size > 2 else 0.0
    m = np.arange(1, c.size, dtype=float)
    amse = math.pi**2 / 3.0 + 4.0 * float((((-1.0) ** m) * c[1:] / m**2).sum())
    holevo = (1.0 / c1**2 - 1.0) if c1 > 0.0 else math.inf
    delta1_sq = max(2.0 - 2.0 * c1, 0.0)
    delta2_sq = max(2.5 - (8.0 / 3.0) * c1 + c2 / 6.0, 0.0)
    delta3_sq = max(F3_A0 + F3_A1 * c1 + F3_A2 * c2, 0.0)
    return {
        "amse": amse,
        "holevo": holevo,
        "delta1": math.sqrt(delta1_sq),
        "delta2": math.sqrt(delta2_sq),
        "delta3": math.sqrt(delta3_sq),
    }


def unbias_rotation(moms: np.ndarray) -> np.ndarray:
    """Moments of the distribution rotated to zero mean direction.

    Multiplies the m-th moment by e^{-i m theta_av} with
    theta_av = arg <e^{i Theta}>, making the first moment real positive.
    """
    moms = np.asarray(moms, dtype=complex)
    if moms.size < 2 or moms[1] == 0.0:
        raise ValueError("first moment vanishes; rotation angle undefined")
    theta_av = math.atan2(moms[1].imag, moms[1].real)
    m = np.arange(moms.size)
    return moms * np.exp(-1j * theta_av * m)


def _periodic_entropy(density: np.ndarray, step: float) -> float:
    p = np.maximum(density, _LOG_FLOOR)
    return float(-(density * np.log(p)).sum() * step)


def entropy_and_length(dist: ErrorDistribution) -> dict[str, float]:
    """Differential entropy H(Theta) and entropic length L = e^H.

    Trapezoid rule on the periodic extension of the grid (equal to the
    uniform Riemann sum, which is exact for band-limited integrands).
    """
    h = _periodic_entropy(dist.density, dist.step)
    return {"H": h, "L": math.exp(h)}


def entropy_generator(dist: GeneratorDistribution) -> float:
    """Shannon entropy H(G) of the generator distribution."""
    p = dist.probabilities
    mask = p > 0.0
    return float(-(p[mask] * np.log(p[mask])).sum())


def _best_median_deviation(dist: GeneratorDistribution) -> tuple[float, float]:
    """Smallest <|G - g|> over the median and a local scan around it.

    The median (ties broken low) is scanned together with g +- 1 and a 0.1
    grid across that interval, since the minimizing g for a discrete
    distribution need not be unique.
    """
    values = dist.spectrum.values()
    p = dist.probabilities
    cumulative = np.cumsum(p)
    median = values[int(np.searchsorted(cumulative, 0.5))]
    candidates = np.concatenate(
        ([median - 1.0, median, median + 1.0], median + np.arange(-10, 11) * 0.1)
    )
    deviations = np.abs(values[None, :] - candidates[:, None]) @ p
    best = int(np.argmin(deviations))
    return float(candidates[best]), float(deviations[best])


@dataclass(frozen=True)
class BoundReport:
    """Named inequality margins; a negative margin means a violation."""

    margins: dict[str, float]
    details: dict[str, float] = field(default_factory=dict)

    @property
    def violations(self) -> list[str]:
        return [name for name, margin in self.margins.items() if margin < -1e-12]

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_bounds(state: ProbeState, grid_size: int | None = None) -> BoundReport:
    """Check every accuracy bound on one probe state.

    Margins reported (all must be >= 0):

    * ``entropic_ur``      H(Theta) + H(G) - ln 2pi
    * ``heis_k_a``         delta - k_A / <N+1>            (nonneg spectra)
    * ``heis_k_a_median``  delta - k_A / <2|G-g*|+1>      (g* = best median scan)
    * ``tan_bound``        delta_H - tan(pi / (width + 2))
    * ``entropic_length``  delta - (2 pi e)^{-1/2} L
    * ``arccos_lower``     delta - arccos(1 - delta1^2 / 2)
    * ``quadratic_upper``  (pi^2/2)(1 - <cos Theta>) - delta^2
    """
    dist = canonical_distribution(state, grid_size)
    gen = generator_distribution(state)
    moms = all_moments(state)
    metrics = metrics_from_moments(moms)
    delta = math.sqrt(metrics["amse"])
    h_theta = entropy_and_length(dist)
    h_g = entropy_generator(gen)

    margins: dict[str, float] = {}
    details: dict[str, float] = {}

    margins["entropic_ur"] = h_theta["H"] + h_g - math.log(2.0 * math.pi)

    g_best, dev_best = _best_median_deviation(gen)
    margins["heis_k_a_median"] = delta - K_A / (2.0 * dev_best + 1.0)
    details["g_best"] = g_best
    details["mean_abs_dev"] = dev_best
    if state.spectrum.kind == "nonneg":
        n_plus_1 = state.mean_weight() + 1.0
        margins["heis_k_a"] = delta - K_A / n_plus_1
        details["n_plus_1"] = n_plus_1

    width = state.support_width()
    tan_floor = math.tan(math.pi / (width + 2.0))
    delta_h = math.sqrt(metrics["holevo"]) if math.isfinite(metrics["holevo"]) else math.inf
    margins["tan_bound"] = delta_h - tan_floor
    details["support_width"] = float(width)

    margins["entropic_length"] = delta - h_theta["L"] / math.sqrt(2.0 * math.pi * math.e)

    c1 = float(np.real(moms[1])) if moms.size > 1 else 0.0
    margins["arccos_lower"] = delta - math.acos(max(min(1.0 - metrics["delta1"] ** 2 / 2.0, 1.0), -1.0))
    margins["quadratic_upper"] = (math.pi**2 / 2.0) * (1.0 - c1) - metrics["amse"]

    details["delta"] = delta
    details["holevo"] = metrics["holevo"]
    return BoundReport(margins=margins, details=details)


def _thermal_entropy_direct(nbar: float, tol: float = 1e-18) -> float:
    """Direct summation of -sum p_n ln p_n for the thermal distribution.

    Probabilities are built from exact log-domain exponents (n * ln q) rather
    than repeated multiplication, so the oracle itself carries no drift.
    """
    if nbar == 0.0:
        return 0.0
    log_q = -math.log1p(1.0 / nbar)  # ln(nbar/(nbar+1)) without cancellation
    count = int(math.ceil((math.log(tol) + math.log1p(nbar)) / log_q)) + 1
    n = np.arange(min(count, 10_000_000))
    log_p = n * log_q - math.log1p(nbar)
    p = np.exp(log_p)
    return float(-(p @ log_p))


def _laplace_direct(beta: float, r: float, tol: float = 1e-18) -> tuple[float, float]:
    """Direct summation of (<|G-g|>, H) for p_n propto e^{-beta |n - g|}.

    For g = (integer) + r with 0 <= r <= 1/2 the distances |n − g| are
    {r, 1+r, 2+r, ...} on one side and {1−r, 2−r, ...} on the other (for
    r = 0 the zero distance appears once and each positive integer twice).
    """
    count = int(math.ceil(-math.log(tol) / beta)) + 2
    k = np.arange(float(count))
    distances = np.concatenate([k + r, k + (1.0 - r)])
    log_w = -beta * distances
    w = np.exp(log_w)
    z_norm = float(w.sum())
    p = w / z_norm
    mean_dev = float(p @ distances)
    entropy = float(-(p @ (log_w - math.log(z_norm))))
    return mean_dev, entropy


def max_entropy_bound_checks(
    nbar_grid: np.ndarray | None = None,
    beta_grid: np.ndarray | None = None,
    r_grid: np.ndarray | None = None,
) -> BoundReport:
    """Sweep the max-entropy closed forms and their bounding inequalities.

    Margins (>= 0 required):

    * ``thermal_closed_form``: 1e-12 minus the worst closed-vs-direct gap,
      relative as gap/(1 + |closed|) since the entropies grow with the grid.
    * ``x_log_bound``: min over the grid of 1 - x ln(1 + 1/x).
    * ``laplace_closed_form``: 1e-12 minus the worst relative
      closed-vs-direct gap for (mean deviation, entropy).
    * ``laplace_entropy_bound``: min margin of
      ln(2 <|G-g|> + 1) + 1 - H(G) over the (beta, r) grid.
    * ``laplace_first_part`` / ``laplace_second_part``: the two component
      inequalities (beta r + ln Z <= ln(2<|G-g|>+1), beta(<|G-g|> - r) < 1).
    """
    if nbar_grid is None:
        nbar_grid = np.logspace(-3, 4, 36)
    if beta_grid is None:
        beta_grid = np.logspace(-3, 1.5, 28)
    if r_grid is None:
        r_grid = np.linspace(0.0, 0.5, 6)

    worst_thermal = 0.0
    worst_xlog = math.inf
    for nbar in nbar_grid:
        family = MaxEntropyFamily(kind="thermal", parameter=float(nbar))
        closed = family.entropy()
        gap = abs(closed - _thermal_entropy_direct(float(nbar)))
        worst_thermal = max(worst_thermal, gap / (1.0 + abs(closed)))
        worst_xlog = min(worst_xlog, 1.0 - float(nbar) * math.log1p(1.0 / float(nbar)))

    worst_laplace = 0.0
    bound_margin = math.inf
    first_part = math.inf
    second_part = math.inf
    for beta in beta_grid:
        for r in r_grid:
            family = MaxEntropyFamily(kind="laplace", parameter=float(beta), offset=float(r))
            dev = family.mean_abs_deviation()
            entropy = family.entropy()
            dev_direct, entropy_direct = _laplace_direct(float(beta), float(r))
            worst_laplace = max(
                worst_laplace,
                abs(dev - dev_direct) / (1.0 + abs(dev)),
                abs(entropy - entropy_direct) / (1.0 + abs(entropy)),
            )
            bound_margin = min(
                bound_margin, math.log(2.0 * dev + 1.0) + 1.0 - entropy
            )
            log_z = entropy - beta * dev
            first_part = min(
                first_part, math.log(2.0 * dev + 1.0) - (beta * r + log_z)
            )
            second_part = min(second_part, 1.0 - beta * (dev - r))

    margins = {
        "thermal_closed_form": 1e-12 - worst_thermal,
        "x_log_bound": worst_xlog,
        "laplace_closed_form": 1e-12 - worst_laplace,
        "laplace_entropy_bound": bound_margin,
        "laplace_first_part": first_part,
        "laplace_second_part": second_part,
    }
    return BoundReport(margins=margins)
