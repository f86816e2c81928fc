"""Floquet analysis of the 1-periodic background operator -u'' + V0 u = E u.

Provides the one-period transfer matrix and its discriminant, band location,
the folded quasimomentum, and the Floquet solution bundle (periodic factor,
its phase, the Wronskian pairing and the squared-amplitude profile) that every
downstream module consumes.

Conventions
-----------
The reported quasimomentum ``k`` is folded to (0, pi) via arccos of half the
discriminant.  Internally the bundle also carries ``k_eff``, the exponent in
``phi(x) = p(x) e^{i k_eff x}`` chosen so that the periodic factor ``p`` has
winding number zero and the Wronskian pairing ``omega = i(phi conj(phi)' -
phi' conj(phi))`` is positive.  On bands where ``k`` decreases with energy
this makes ``k_eff != k``, but always ``e^{2 i K k_eff} = e^{+-2 i K k}``, so
resonance arithmetic mod 2 pi is unaffected.
"""

from __future__ import annotations

import csv as _csv
import json as _json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import (BandDomainError, ConfigError, DegenerateFloquetError,
                     IntegrationError, UnwrapError)
from .fourier import FourierSeries, fit_with_tail

ODE_RTOL = 1e-10
ODE_ATOL = 1e-12
DEFAULT_GRID = 2048
DEFAULT_ORDER = 64
#: treat 2 - |discriminant| below this as a degenerate (band-edge) energy
EDGE_TOL = 1e-9


class ResolutionWarning(UserWarning):
    """A band/gap feature may be unresolved at the requested resolution."""


class TruncationWarning(UserWarning):
    """A Fourier truncation order sits below the spectral decay floor."""


# --------------------------------------------------------------------------
# periodic background potentials
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PeriodicPotential:
    """Real 1-periodic background with sampled and Fourier representations.

    ``fourier_residual`` records the sup-norm mismatch between the evaluator
    and the truncated Fourier reconstruction on the sample grid; it is small
    for smooth potentials and O(1) near jumps (Gibbs), which is why piecewise
    potentials also carry explicit ``breakpoints`` for the integrator.
    """

    evaluator: Callable
    fourier: FourierSeries
    order: int
    grid: int
    samples: np.ndarray
    fourier_residual: float
    breakpoints: tuple = ()
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __call__(self, x):
        return self.evaluator(x)

    @classmethod
    def from_callable(cls, func, *, name="custom", params=None,
                      order=DEFAULT_ORDER, grid=DEFAULT_GRID,
                      breakpoints=(), periodicity_tol=1e-9):
        xs = np.arange(grid) / grid
        samples = np.asarray(func(xs), dtype=float)
        if samples.shape != xs.shape:
            samples = np.array([float(func(x)) for x in xs])
        probes = np.linspace(0.0, 1.0, 33)[:-1]
        per = np.max(np.abs(np.asarray(func(probes + 1.0), dtype=float)
                            - np.asarray(func(probes), dtype=float)))
        scale = max(1.0, float(np.max(np.abs(samples))))
        if per > periodicity_tol * scale:
            raise ConfigError(
                f"potential '{name}' is not 1-periodic: max |V(x+1)-V(x)| = {per:g}")
        series = FourierSeries.from_samples(samples, order)
        # enforce conjugate symmetry (realness) against FFT roundoff
        sym = 0.5 * (series.coeffs + np.conj(series.coeffs[::-1]))
        series = FourierSeries(sym)
        recon = series.evaluate(xs).real
        residual = float(np.max(np.abs(recon - samples)))
        return cls(evaluator=func, fourier=series, order=order, grid=grid,
                   samples=samples, fourier_residual=residual,
                   breakpoints=tuple(breakpoints), name=name,
                   params=dict(params or {}))


def free_potential(**kw) -> PeriodicPotential:
    """V0 = 0."""
    return PeriodicPotential.from_callable(
        lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        name="free", **kw)


def mathieu_potential(amplitude: float = 2.0, **kw) -> PeriodicPotential:
    """V0(x) = amplitude * cos(2 pi x)."""
    return PeriodicPotential.from_callable(
        lambda x: amplitude * np.cos(2 * np.pi * np.asarray(x, dtype=float)),
        name="mathieu", params={"amplitude": amplitude}, **kw)


def two_cos_potential(a1: float, a2: float, **kw) -> PeriodicPotential:
    """V0(x) = a1 cos(2 pi x) + a2 cos(4 pi x)."""
    def f(x):
        x = np.asarray(x, dtype=float)
        return a1 * np.cos(2 * np.pi * x) + a2 * np.cos(4 * np.pi * x)
    return PeriodicPotential.from_callable(
        f, name="two_cos", params={"a1": a1, "a2": a2}, **kw)


def kronig_penney_potential(height: float, width: float = 0.5, **kw) -> PeriodicPotential:
    """Step of the given height on [0, width), zero on [width, 1)."""
    if not 0.0 < width < 1.0:
        raise ConfigError("kronig_penney width must be in (0, 1)")

    def f(x):
        frac = np.asarray(x, dtype=float) % 1.0
        return np.where(frac < width, float(height), 0.0)

    return PeriodicPotential.from_callable(
        f, name="kronig_penney", params={"height": height, "width": width},
        breakpoints=(width,), **kw)


PRESETS = {
    "free": free_potential,
    "mathieu": mathieu_potential,
    "two_cos": two_cos_potential,
    "kronig_penney": kronig_penney_potential,
}


def potential_from_spec(spec: dict) -> PeriodicPotential:
    """Build a background from a {'preset': name, ...params} mapping."""
    spec = dict(spec)
    name = spec.pop("preset", None)
    if name is None:
        raise ConfigError("background spec needs a 'preset' key")
    if name not in PRESETS:
        raise ConfigError(f"unknown potential preset '{name}' "
                          f"(known: {sorted(PRESETS)})")
    try:
        return PRESETS[name](**spec)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for preset '{name}': {exc}") from exc


def load_potential_file(path: str) -> PeriodicPotential:
    """Load a background from JSON (preset + params) or CSV samples on [0,1)."""
    text = open(path).read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return potential_from_spec(_json.loads(text))
    rows = [r for r in _csv.reader(text.splitlines()) if r and not
            r[0].lstrip().startswith("#")]
    try:
        pts = np.array([[float(r[0]), float(r[1])] for r in rows])
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"cannot parse potential CSV {path}: {exc}") from exc
    order = np.argsort(pts[:, 0])
    xs, vs = pts[order, 0], pts[order, 1]
    if xs[0] < 0.0 or xs[-1] >= 1.0:
        raise ConfigError("potential CSV sample abscissae must lie in [0, 1)")

    xs_ext = np.concatenate([xs, [xs[0] + 1.0]])
    vs_ext = np.concatenate([vs, [vs[0]]])

    def f(x):
        return np.interp(np.asarray(x, dtype=float) % 1.0, xs_ext, vs_ext)

    return PeriodicPotential.from_callable(f, name="csv", params={"path": path})


# --------------------------------------------------------------------------
# monodromy and discriminant
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Monodromy:
    """One-period transfer matrix of (u, u') at fixed energy."""

    entries: np.ndarray
    energy: float
    det_error: float

    @property
    def discriminant(self) -> float:
        return float(self.entries[0, 0] + self.entries[1, 1])


def _integrate_fundamental(V0, E, x_eval=None, rtol=ODE_RTOL, atol=ODE_ATOL):
    """Fundamental system (u1, u1', u2, u2') over one cell, split at jumps."""

    def rhs(x, y):
        w = float(V0.evaluator(x)) - E
        return (y[1], w * y[0], y[3], w * y[2])

    nodes = [0.0] + sorted(b for b in V0.breakpoints if 0.0 < b < 1.0) + [1.0]
    y = np.array([1.0, 0.0, 0.0, 1.0])
    collected_x, collected_y = [], []
    for a, b in zip(nodes[:-1], nodes[1:]):
        if x_eval is not None:
            te = x_eval[(x_eval >= a) & (x_eval < b)]
            te = np.concatenate([te, [b]])
        else:
            te = None
        sol = solve_ivp(rhs, (a, b), y, method="DOP853",
                        rtol=rtol, atol=atol, t_eval=te, dense_output=False)
        if not sol.success:
            raise IntegrationError(
                f"cell integration failed at E={E}: {sol.message}",
                position=float(sol.t[-1]) if sol.t.size else a)
        y = sol.y[:, -1]
        if x_eval is not None:
            keep = sol.t < b
            collected_x.append(sol.t[keep])
            collected_y.append(sol.y[:, keep])
    if x_eval is not None:
        xs = np.concatenate(collected_x)
        ys = np.concatenate(collected_y, axis=1)
        return y, xs, ys
    return y, None, None


def integrate_cell(V0: PeriodicPotential, E: float, *,
                   rtol: float = ODE_RTOL, atol: float = ODE_ATOL) -> Monodromy:
    """Transfer matrix of (u, u') across one period at energy E.

    Columns are the endpoint states of the solutions with initial data (1, 0)
    and (0, 1); the determinant equals 1 up to integration error (recorded).
    """
    if not math.isfinite(E):
        raise ConfigError(f"energy must be finite, got {E}")
    y, _, _ = _integrate_fundamental(V0, E, rtol=rtol, atol=atol)
    m = np.array([[y[0], y[2]], [y[1], y[3]]])
    det_err = abs(float(np.linalg.det(m)) - 1.0)
    return Monodromy(entries=m, energy=float(E), det_error=det_err)


def discriminant(V0: PeriodicPotential, E: float, **kw) -> float:
    return integrate_cell(V0, E, **kw).discriminant


# --------------------------------------------------------------------------
# band structure
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Band:
    lo: float
    hi: float
    branch: int            # +1: k increases with E, -1: decreases
    lo_truncated: bool = False
    hi_truncated: bool = False

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def interior_margin(self, rel: float = 1e-6) -> float:
        return rel * self.width


@dataclass(frozen=True)
class BandStructure:
    bands: tuple
    e_min: float
    e_max: float
    resolution: float

    def containing(self, E: float, *, interior: bool = True,
                   edge_margin_rel: float = 1e-6) -> Optional[int]:
        for i, b in enumerate(self.bands):
            margin = b.interior_margin(edge_margin_rel) if interior else 0.0
            if b.lo + margin <= E <= b.hi - margin:
                return i
        return None

    def nearest(self, E: float) -> Optional[int]:
        if not self.bands:
            return None
        dists = [0.0 if b.lo <= E <= b.hi else min(abs(E - b.lo), abs(E - b.hi))
                 for b in self.bands]
        return int(np.argmin(dists))


def band_structure(V0: PeriodicPotential, e_min: float, e_max: float,
                   resolution: float, *, edge_tol: float = 1e-10,
                   rtol: float = ODE_RTOL, atol: float = ODE_ATOL,
                   discriminants: Optional[tuple] = None) -> BandStructure:
    """Locate spectral bands of -u'' + V0 u on [e_min, e_max].

    Scans the discriminant on a grid of the given resolution and bisects
    |Delta(E)| = 2 crossings down to ``edge_tol`` in energy.  Grid values can
    be supplied precomputed (``discriminants=(energies, values)``) to allow
    parallel sweeps.
    """
    if e_max <= e_min:
        return BandStructure(bands=(), e_min=e_min, e_max=e_max,
                             resolution=resolution)
    if discriminants is not None:
        es, ds = (np.asarray(a, dtype=float) for a in discriminants)
    else:
        n = max(int(math.ceil((e_max - e_min) / resolution)), 2)
        es = np.linspace(e_min, e_max, n + 1)
        ds = np.array([discriminant(V0, e, rtol=rtol, atol=atol) for e in es])

    def h(E):
        return abs(discriminant(V0, E, rtol=rtol, atol=atol)) - 2.0

    inside = np.abs(ds) <= 2.0 + 1e-12
    # warn about interior grazing of |Delta| = 2 without a crossing: such a
    # local maximum marks a closed gap or one narrower than the resolution
    absd = np.abs(ds)
    for i in range(1, es.size - 1):
        if (inside[i - 1] and inside[i] and inside[i + 1]
                and absd[i] > 2.0 - 1e-3
                and absd[i] >= absd[i - 1] and absd[i] >= absd[i + 1]):
            warnings.warn(
                f"discriminant grazes |Delta|=2 near E = {es[i]:.6g} without "
                f"crossing; a gap narrower than the resolution {resolution:g} "
                "may be unresolved", ResolutionWarning, stacklevel=2)

    bands = []
    i = 0
    n_pts = es.size
    while i < n_pts:
        if not inside[i]:
            i += 1
            continue
        j = i
        while j + 1 < n_pts and inside[j + 1]:
            j += 1
        # refine edges
        if i == 0:
            lo, lo_trunc = es[0], True
        else:
            lo, lo_trunc = brentq(h, es[i - 1], es[i], xtol=edge_tol), False
        if j == n_pts - 1:
            hi, hi_trunc = es[-1], True
        else:
            hi, hi_trunc = brentq(h, es[j], es[j + 1], xtol=edge_tol), False
        if hi > lo:
            qlo = lo + 0.25 * (hi - lo)
            qhi = lo + 0.75 * (hi - lo)
            slope = discriminant(V0, qhi, rtol=rtol, atol=atol) - \
                discriminant(V0, qlo, rtol=rtol, atol=atol)
            branch = 1 if slope < 0 else -1   # k = arccos(Delta/2)
            bands.append(Band(float(lo), float(hi), branch,
                              lo_truncated=lo_trunc, hi_truncated=hi_trunc))
        i = j + 1
    return BandStructure(bands=tuple(bands), e_min=e_min, e_max=e_max,
                         resolution=resolution)


def quasimomentum(V0: PeriodicPotential, E: float, bands: BandStructure, *,
                  rtol: float = ODE_RTOL, atol: float = ODE_ATOL) -> float:
    """Folded quasimomentum k(E) = arccos(Delta/2) in (0, pi).

    Continuous and strictly monotone on each band, with the direction given
    by the band's branch sign.
    """
    idx = bands.containing(E, interior=True)
    if idx is None:
        near = bands.nearest(E)
        detail = ""
        if near is not None:
            b = bands.bands[near]
            detail = f"; nearest band is #{near} = [{b.lo:.9g}, {b.hi:.9g}]"
        raise BandDomainError(
            f"E = {E:.9g} is not in any band interior{detail}",
            nearest_band=near)
    d = discriminant(V0, E, rtol=rtol, atol=atol)
    return float(np.arccos(np.clip(d / 2.0, -1.0, 1.0)))


# --------------------------------------------------------------------------
# Floquet solution bundle
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FloquetData:
    """Per-energy Floquet bundle for a band-interior energy.

    ``phi(x) = p(x) e^{i k_eff x}`` solves the unperturbed equation, with
    ``p`` 1-periodic, zero-winding, normalized so sup|p| = 1 and p(0) > 0.
    ``omega`` is the (positive) Wronskian pairing of phi with its conjugate
    and ``phi0 = |p|^2 / omega`` the squared-amplitude profile.
    """

    energy: float
    k: float                      # folded quasimomentum in (0, pi)
    k_eff: float                  # exponent of the Floquet phase factor
    branch: int                   # sign relating k_eff to k mod 2 pi
    omega: float
    grid_x: np.ndarray
    p_samples: np.ndarray
    p_series: FourierSeries
    dp_series: FourierSeries
    varpi_samples: np.ndarray
    varpi_series: FourierSeries
    phi0_samples: np.ndarray
    phi0_series: FourierSeries
    residual_sup: float
    omega_deviation: float
    p_tail_mass: float
    potential_name: str = "custom"
    _exp_cache: dict = field(default_factory=dict, repr=False, compare=False)

    # -- evaluation helpers ------------------------------------------------
    def phi_dphi(self, x):
        """phi and phi' at scalar/array x, from the stored series."""
        xa = np.asarray(x, dtype=float)
        p = self.p_series.evaluate(xa)
        dp = self.dp_series.evaluate(xa)
        e = np.exp(1j * self.k_eff * xa)
        return p * e, (dp + 1j * self.k_eff * p) * e

    def cell_values(self, x: float):
        """(phi0(x), varpi(x)) scalar fast path for flow integrands."""
        n = self._exp_cache.get("n")
        if n is None:
            n = np.arange(-self.phi0_series.order, self.phi0_series.order + 1)
            self._exp_cache["n"] = n
        w = np.exp((2j * np.pi * (x % 1.0)) * n)
        return (float((self.phi0_series.coeffs @ w).real),
                float((self.varpi_series.coeffs @ w).real))

    def exp_varpi_series(self, m: int) -> FourierSeries:
        """Fourier series of e^{i m varpi(x)} (cached)."""
        key = ("exp", m)
        if key not in self._exp_cache:
            vals = np.exp(1j * m * self.varpi_samples)
            self._exp_cache[key] = FourierSeries.from_samples(
                vals, self.p_series.order)
        return self._exp_cache[key]

    def cell_context(self, order: Optional[int] = None) -> "CellContext":
        series = self.p_series if order is None else self.p_series.truncate(order)[0]
        return CellContext(k_eff=self.k_eff, omega=self.omega, p_series=series)


@dataclass(frozen=True)
class CellContext:
    """Minimal table-building context: exponent, pairing and periodic factor.

    Used both as a view of a FloquetData bundle and for synthetic factors in
    genericity scans, where the Fourier data of ``p`` is perturbed directly.
    """

    k_eff: float
    omega: float
    p_series: FourierSeries

    def phase_profiles(self, order: int):
        """Series of phi0 * e^{2 i a varpi} for a = +1, 0, -1.

        These equal p^2/omega, p conj(p)/omega and conj(p)^2/omega, so they
        stay polynomial in the Fourier data of p.
        """
        p = self.p_series
        pc = p.conjugate()
        plus, _ = p.product(p).truncate(order)
        zero, _ = p.product(pc).truncate(order)
        minus, _ = pc.product(pc).truncate(order)
        s = 1.0 / self.omega
        return {+1: plus * s, 0: zero * s, -1: minus * s}


def floquet_solution(V0: PeriodicPotential, E: float, *,
                     order: int = DEFAULT_ORDER, grid: int = DEFAULT_GRID,
                     rtol: float = ODE_RTOL, atol: float = ODE_ATOL,
                     edge_tol: float = EDGE_TOL,
                     max_refine: int = 4) -> FloquetData:
    """Construct the Floquet bundle at a band-interior energy.

    Raises DegenerateFloquetError when |Delta(E)| is within ``edge_tol`` of 2
    (or beyond), where the Floquet pair degenerates.
    """
    mono = integrate_cell(V0, E, rtol=rtol, atol=atol)
    d = mono.discriminant
    if 2.0 - abs(d) < edge_tol:
        raise DegenerateFloquetError(
            f"E = {E:.9g} is at or outside a band edge (|Delta| = {abs(d):.12g})")
    kf = float(np.arccos(np.clip(d / 2.0, -1.0, 1.0)))

    m = mono.entries
    lam = np.exp(1j * kf)
    # eigenvector from the better-conditioned row
    if abs(m[0, 1]) >= abs(m[1, 0]):
        v = np.array([m[0, 1], lam - m[0, 0]])
    else:
        v = np.array([lam - m[1, 1], m[1, 0]])
    # fix the pairing sign: omega = 2 Im(conj(v1) v2) must be positive
    if 2.0 * float(np.imag(np.conj(v[0]) * v[1])) < 0.0:
        v = np.conj(v)
        k_raw = -kf
        branch = -1
    else:
        k_raw = kf
        branch = 1

    grid_n = grid
    for attempt in range(max_refine + 1):
        xs = np.arange(grid_n + 1) / grid_n          # includes x = 1
        y_end, tx, ty = _integrate_fundamental(V0, E, x_eval=xs, rtol=rtol, atol=atol)
        xs_out = np.concatenate([tx, [1.0]])
        ys_out = np.concatenate([ty, np.array([y_end]).T], axis=1)
        if xs_out.size != xs.size or not np.allclose(xs_out, xs, atol=1e-12):
            raise IntegrationError("cell sampling grid mismatch")
        u1, du1, u2, du2 = ys_out
        phi = v[0] * u1 + v[1] * u2
        dphi = v[0] * du1 + v[1] * du2

        p_raw = phi * np.exp(-1j * k_raw * xs)
        ang = np.unwrap(np.angle(p_raw))
        winding = (ang[-1] - ang[0]) / (2 * np.pi)
        m_wind = int(round(winding))
        if abs(winding - m_wind) > 1e-6:
            raise UnwrapError(
                f"periodic factor winding not integral: {winding:.3e}")
        k_eff = k_raw + 2 * np.pi * m_wind
        p = phi * np.exp(-1j * k_eff * xs)
        steps = np.abs(np.diff(np.unwrap(np.angle(p))))
        if steps.size and np.max(steps) > np.pi / 2 and attempt < max_refine:
            grid_n *= 2
            continue
        if steps.size and np.max(steps) > np.pi / 2:
            raise UnwrapError("phase unwrap guard pi/2 still violated after "
                              f"{max_refine} refinements")
        break

    # normalization: sup|p| = 1 and p(0) real positive
    scale = 1.0 / (np.max(np.abs(p)) * (p[0] / abs(p[0])))
    p = p * scale
    phi = phi * scale
    dphi = dphi * scale

    xs_p, p_p = xs[:-1], p[:-1]
    p_series, p_tail = fit_with_tail(p_p, order)

    smooth = not V0.breakpoints and V0.fourier_residual < 1e-7
    if smooth:
        # one inverse-iteration pass on the algebraic coefficient system
        # scrubs the ODE sampling noise that spectral differentiation would
        # otherwise amplify by (2 pi n)^2
        p_series = _refine_p_coefficients(V0, E, k_eff, p_series)
        p_p = p_series.evaluate(xs_p)
        scale = 1.0 / (np.max(np.abs(p_p)) * (p_p[0] / abs(p_p[0])))
        p_series = p_series * scale
        p_p = p_p * scale
        dp_series = p_series.derivative()
        dp_p = dp_series.evaluate(xs_p)
        omega_x = 2.0 * (k_eff * np.abs(p_p) ** 2
                         + np.imag(np.conj(p_p) * dp_p))
    else:
        dp_series = p_series.derivative()
        omega_x = 2.0 * np.imag(np.conj(phi[:-1]) * dphi[:-1])
    omega = float(np.mean(omega_x))
    omega_dev = float(np.max(np.abs(omega_x - omega)))
    if omega <= 0:
        raise DegenerateFloquetError(
            f"non-positive Wronskian pairing at E = {E:.9g}")

    varpi_p = np.unwrap(np.angle(p_p))
    phi0_p = np.abs(p_p) ** 2 / omega
    varpi_series = FourierSeries.from_samples(varpi_p, order)
    phi0_series = FourierSeries.from_samples(phi0_p, order)

    # self-consistency residual of the truncated representation (meaningful
    # for smooth backgrounds; piecewise ones are integrated via breakpoints)
    if smooth:
        d2p = dp_series.derivative()
        vvals = np.asarray(V0.evaluator(xs_p), dtype=float)
        res = (-d2p.evaluate(xs_p) - 2j * k_eff * dp_p
               + (k_eff ** 2 + vvals - E) * p_series.evaluate(xs_p))
        residual = float(np.max(np.abs(res)))
    else:
        residual = float("nan")

    return FloquetData(
        energy=float(E), k=kf, k_eff=float(k_eff), branch=branch, omega=omega,
        grid_x=xs_p, p_samples=p_p, p_series=p_series, dp_series=dp_series,
        varpi_samples=varpi_p, varpi_series=varpi_series,
        phi0_samples=phi0_p, phi0_series=phi0_series,
        residual_sup=residual, omega_deviation=omega_dev,
        p_tail_mass=p_tail, potential_name=V0.name)


def _refine_p_coefficients(V0: PeriodicPotential, E: float, k_eff: float,
                           approx: FourierSeries) -> FourierSeries:
    """Inverse iteration on the coefficient system of the periodic factor.

    The coefficients of p satisfy ((k_eff + 2 pi n)^2 - E) c_n +
    (Vhat * c)_n = 0; one linear solve starting from the sampled coefficients
    projects onto the near-null direction of the truncated system.
    """
    order = approx.order
    n = np.arange(-order, order + 1)
    diag = (k_eff + 2.0 * np.pi * n) ** 2 - E
    v = V0.fourier.pad(order).coeffs
    size = 2 * order + 1
    A = np.diag(diag).astype(complex)
    for i in range(size):
        for j in range(size):
            d = i - j
            if abs(d) <= order:
                A[i, j] += v[d + order]
    try:
        z = np.linalg.solve(A, approx.coeffs)
    except np.linalg.LinAlgError:
        return approx
    # keep the original scale/phase via projection onto the input
    proj = np.vdot(z, approx.coeffs) / np.vdot(z, z)
    return FourierSeries(z * proj)


class FourierOfP(NamedTuple):
    series: FourierSeries
    reconstruction_error: float
    tail_mass: float


def fourier_of_p(F: FloquetData, order: int) -> FourierOfP:
    """Coefficients of the periodic factor p up to the given order.

    Warns when the requested order is below the spectral decay floor of the
    sampled factor, reporting the estimated tail mass.
    """
    series, tail = fit_with_tail(F.p_samples, order)
    recon = series.evaluate(F.grid_x)
    err = float(np.max(np.abs(recon - F.p_samples)))
    if tail > 1e-10 * max(1.0, float(np.max(np.abs(F.p_samples)))):
        warnings.warn(
            f"order {order} is below the spectral decay floor; estimated "
            f"tail mass {tail:.3e}", TruncationWarning, stacklevel=2)
    return FourierOfP(series=series, reconstruction_error=err, tail_mass=tail)
