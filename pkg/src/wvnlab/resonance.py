"""Resonant energy enumeration and small-divisor diagnostics.

An energy inside a band is resonant when its doubled quasimomentum matches,
mod 2 pi and up to sign, a sum of at most p-1 perturbation phases.  Those are
the only candidates for embedded point spectrum; everywhere else the
recursion machinery certifies bounded solutions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError, PreconditionError, SmallDivisorError
from .floquet import (ODE_ATOL, ODE_RTOL, BandStructure, PeriodicPotential,
                      integrate_cell)
from .harmonics import angle_distance, h_value, wrap_angle

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PhaseSum:
    """A value s = sum of l phases reduced to [0, 2 pi), with provenance."""

    value: float
    order: int
    multisets: tuple      # contributing phase multisets (tuples)


def phase_sums(A: Sequence[float], p: int) -> tuple:
    """All sums of l phases from A (with repetition), l = 1..p-1, mod 2 pi.

    Deduplicated by value; each retained sum lists every contributing
    (order, multiset) pair of minimal order first.
    """
    groups: dict = {}
    for l in range(1, p):
        for combo in itertools.combinations_with_replacement(sorted(A), l):
            val = float(sum(combo)) % TWO_PI
            key = round(val / TWO_PI, 12)
            # collapse values equal mod 2 pi within rounding
            found = None
            for existing in groups:
                if abs(existing - key) <= 1e-12 or abs(abs(existing - key) - 1.0) <= 1e-12:
                    found = existing
                    break
            if found is None:
                groups[key] = (val, [(l, combo)])
            else:
                groups[found][1].append((l, combo))
    out = []
    for _, (val, prov) in sorted(groups.items()):
        prov.sort(key=lambda t: (t[0], t[1]))
        out.append(PhaseSum(value=val, order=prov[0][0],
                            multisets=tuple(c for _, c in prov)))
    return tuple(out)


@dataclass(frozen=True)
class ResonantEnergy:
    energy: float
    k: float
    band_index: int
    sum_value: float
    order: int
    multiset: tuple
    target: float
    k_residual: float
    mod_residual: float


@dataclass(frozen=True)
class ResonanceSet:
    sums: tuple
    energies: tuple            # ResonantEnergy, sorted by energy
    boundary_hits: tuple       # (band_index, target) at band edges, excluded
    narrow_bands: tuple        # indices skipped as too narrow to bisect
    tolerance: float
    p: int

    def per_band(self, index: int) -> tuple:
        return tuple(e for e in self.energies if e.band_index == index)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "tolerance": self.tolerance,
            "sums": [{"value": s.value, "order": s.order,
                      "multisets": [list(m) for m in s.multisets]}
                     for s in self.sums],
            "energies": [{
                "energy": e.energy, "k": e.k, "band": e.band_index,
                "sum": e.sum_value, "order": e.order,
                "multiset": list(e.multiset), "target": e.target,
                "k_residual": e.k_residual, "mod_residual": e.mod_residual,
            } for e in self.energies],
            "boundary_hits": [list(b) for b in self.boundary_hits],
            "narrow_bands": list(self.narrow_bands),
        }


def resonant_energies(V0: PeriodicPotential, bands: BandStructure,
                      sums: Sequence[PhaseSum], p: int, *,
                      divisor_floor: float = 1e-6,
                      k_tol: float = 1e-10,
                      edge_margin_rel: float = 1e-6,
                      rtol: float = ODE_RTOL,
                      atol: float = ODE_ATOL) -> ResonanceSet:
    """Solve 2 k(E) = +- s mod 2 pi on every band interior by bisection.

    Each sum s yields at most two folded targets in (0, pi): s/2 and
    pi - s/2 (after reducing s to [0, 2 pi)); monotonicity of k on a band
    makes each target hit at most one energy per band.
    """

    def kfun(E: float) -> float:
        d = integrate_cell(V0, E, rtol=rtol, atol=atol).discriminant
        return float(np.arccos(np.clip(d / 2.0, -1.0, 1.0)))

    found: list = []
    boundary: list = []
    narrow: list = []
    for bi, band in enumerate(bands.bands):
        margin = band.interior_margin(edge_margin_rel)
        lo, hi = band.lo + margin, band.hi - margin
        if hi <= lo or band.width < 64.0 * k_tol:
            narrow.append(bi)
            continue
        k_lo, k_hi = kfun(lo), kfun(hi)
        k_min, k_max = min(k_lo, k_hi), max(k_lo, k_hi)
        for s in sums:
            half = (s.value % TWO_PI) / 2.0
            for target in {half, math.pi - half}:
                if not 0.0 < target < math.pi:
                    continue
                if target <= k_min or target >= k_max:
                    # interiors only; a target at/past the edge quasimomenta
                    # is reported as a boundary hit when it grazes the band
                    if k_min - 1e-6 <= target <= k_max + 1e-6:
                        boundary.append((bi, target))
                    continue
                E_star = brentq(lambda E: kfun(E) - target, lo, hi,
                                xtol=1e-14, rtol=4 * np.finfo(float).eps)
                k_star = kfun(E_star)
                k_res = abs(k_star - target)
                if k_res > k_tol:
                    raise PreconditionError(
                        f"bisection residual {k_res:.3e} above {k_tol:g} "
                        f"for target k = {target:.12g} in band {bi}")
                mod_res = min(angle_distance(2 * k_star - s.value),
                              angle_distance(2 * k_star + s.value))
                found.append(ResonantEnergy(
                    energy=float(E_star), k=float(k_star), band_index=bi,
                    sum_value=s.value, order=s.order, multiset=s.multisets[0],
                    target=float(target), k_residual=float(k_res),
                    mod_residual=float(mod_res)))

    # merge duplicates (same energy reached from different sums/targets)
    found.sort(key=lambda e: e.energy)
    merged: list = []
    for e in found:
        if merged and abs(e.energy - merged[-1].energy) < 1e-9 * max(1.0, abs(e.energy)):
            keep = merged[-1]
            if e.mod_residual < keep.mod_residual:
                merged[-1] = e
            continue
        merged.append(e)

    return ResonanceSet(sums=tuple(sums), energies=tuple(merged),
                        boundary_hits=tuple(boundary),
                        narrow_bands=tuple(narrow),
                        tolerance=divisor_floor, p=p)


class SmallDivisorSum(NamedTuple):
    value: float
    tail_bound: float
    min_divisor: float
    L_max: int
    j: int


def smalldivisor_sum(c: Sequence[complex], phases: Sequence[float], k: float,
                     j: int, L_max: int, *,
                     divisor_floor: float = 1e-6,
                     tail_coefficient_sum: Optional[float] = None) -> SmallDivisorSum:
    """Truncated sum of |c_{l1} ... c_{lj}| h_j over index tuples <= L_max.

    The tail bound multiplies the neglected amplitude mass by a conservative
    envelope for h_j: the Catalan number of recursion shapes times
    max(1/floor, 1)^(2j-1).  It is a diagnostic, not a proof.
    Raises SmallDivisorError when a divisor under the floor is hit: the
    tested quasimomentum lies in the excluded set.
    """
    c = np.asarray(c, dtype=complex)
    phases = np.asarray(phases, dtype=float)
    if c.shape != phases.shape:
        raise ConfigError("amplitudes and phases must have equal length")
    if L_max > c.size:
        raise ConfigError(f"L_max = {L_max} exceeds the supplied family size")
    if j < 1:
        raise ConfigError("j must be >= 1")

    memo: dict = {}
    total = 0.0
    min_div = math.inf
    for tup in itertools.product(range(L_max), repeat=j):
        amp = float(np.prod(np.abs(c[list(tup)])))
        if amp == 0.0:
            continue
        hv = h_value(j, tuple(phases[list(tup)]), k,
                     divisor_floor=divisor_floor, _memo=memo)
        gap = 2.0 * k - float(np.sum(phases[list(tup)]))
        min_div = min(min_div, abs(1.0 - np.exp(1j * gap)))
        total += amp * hv

    if tail_coefficient_sum is None:
        tail_amp = float(np.sum(np.abs(c[L_max:])))
    else:
        tail_amp = float(tail_coefficient_sum)
    full_amp = float(np.sum(np.abs(c[:L_max]))) + tail_amp
    catalan = math.comb(2 * j, j) // (j + 1)
    envelope = catalan * max(1.0 / divisor_floor, 1.0) ** (2 * j - 1)
    # mass of tuples with at least one index beyond L_max
    tail_mass = max(full_amp ** j - float(np.sum(np.abs(c[:L_max]))) ** j, 0.0)
    return SmallDivisorSum(value=total, tail_bound=tail_mass * envelope,
                           min_divisor=float(min_div), L_max=L_max, j=j)


def hausdorff_bound(p: int, frak_a: float) -> float:
    """Dimension cap (p-1) * frak_a for the exceptional quasimomentum set.

    This bounds the Hausdorff dimension of the set where the small-divisor
    condition can fail; it is a formula about the exceptional set, not a
    computed set.  Requires frak_a in (0, 1/(p-1)).
    """
    if p < 2 or int(p) != p:
        raise ConfigError(f"p must be an integer >= 2, got {p}")
    if not 0.0 < frak_a < 1.0 / (p - 1):
        raise PreconditionError(
            f"frak_a must lie in (0, 1/(p-1)) = (0, {1.0/(p-1):g}), "
            f"got {frak_a}")
    return (p - 1) * frak_a
