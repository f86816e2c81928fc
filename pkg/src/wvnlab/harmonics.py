"""Phase-indexed harmonic tables behind the boundedness recursion.

The central objects are two families of 1-periodic functions indexed by a
multiset of perturbation phases and a harmonic count: the source family ``f``
and the integrated family ``g`` obtained from it with the lambda operator
(periodic antiderivative normalization times a phase unwinding factor).

Entries are stored in phase-dressed form ``F = e^{2 i K varpi} f`` and
``G = e^{2 i K varpi} g``: this keeps every coefficient polynomial in the
Fourier data of the periodic Floquet factor (no division by |p|), makes the
recursion identities directly checkable, and preserves pointwise moduli, so
norm bounds can be tested on the dressed entries.  Accessors undress entries
on demand when a full Floquet bundle is attached.
"""

from __future__ import annotations

import itertools
import json as _json
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import ConfigError, SmallDivisorError
from .floquet import CellContext, FloquetData
from .fourier import FourierSeries

DIVISOR_FLOOR = 1e-6
#: |alpha - 2 pi m| below this is treated as an exact multiple (limit branch)
EXACT_EPS = 1e-12
#: relative size below which a Fourier coefficient cannot trigger a divisor error
COEFF_FLOOR_REL = 1e-13

#: weights of the harmonic shifts produced by the phase equation:
#: -1 at shift 0 and 1/2 at shifts +-1, zero otherwise
RECURSION_WEIGHTS = MappingProxyType({-1: 0.5, 0: -1.0, 1: 0.5})


def recursion_weight(a: int) -> float:
    return RECURSION_WEIGHTS.get(a, 0.0)


def wrap_angle(a: float) -> float:
    """Reduce an angle to [-pi, pi)."""
    return float((a + np.pi) % (2.0 * np.pi) - np.pi)


def angle_distance(a: float) -> float:
    """Distance of an angle from 0 mod 2 pi."""
    return abs(wrap_angle(a))


# --------------------------------------------------------------------------
# the periodic antiderivative normalization and the lambda operator
# --------------------------------------------------------------------------

def tilde_phi(series: FourierSeries, alpha: float, *,
              divisor_floor: float = DIVISOR_FLOOR,
              exact_eps: float = EXACT_EPS) -> FourierSeries:
    """The unique periodic solution of (i T e^{i alpha x})' = (1-e^{i alpha}) Phi e^{i alpha x}.

    Coefficientwise: c_n -> -c_n (1 - e^{i alpha}) / (2 pi n + alpha).  When
    alpha is an exact multiple 2 pi m the continuity limit is the single
    harmonic i c_{-m} e^{-2 pi i m x} (the constant i c_0 when m = 0).
    Between those regimes, a denominator smaller than the divisor floor at an
    index with a significant coefficient raises SmallDivisorError.
    """
    c = series.coeffs
    order = series.order
    if angle_distance(alpha) <= exact_eps:
        m = int(round(alpha / (2.0 * np.pi)))
        limit = FourierSeries.harmonic(-m, 1j * series.coefficient(-m))
        return limit.pad(order)
    n = np.arange(-order, order + 1)
    den = 2.0 * np.pi * n + alpha
    sig = np.abs(c) > COEFF_FLOOR_REL * max(float(np.max(np.abs(c))), 1e-300)
    bad = (np.abs(den) < divisor_floor) & sig
    if np.any(bad):
        idx = int(n[np.argmax(bad)])
        raise SmallDivisorError(
            f"divisor 2 pi ({idx}) + alpha = {den[np.argmax(bad)]:.3e} below "
            f"floor {divisor_floor:g} at alpha = {alpha:.12g}",
            alpha=alpha, index=idx)
    return FourierSeries(-c * (1.0 - np.exp(1j * alpha)) / den)


def lambda_op(series: FourierSeries, alpha: float, K: int, flo: FloquetData, *,
              order: Optional[int] = None,
              divisor_floor: float = DIVISOR_FLOOR) -> tuple[FourierSeries, float]:
    """Apply the order-K lambda operator: tilde_phi times e^{-2 i K varpi}.

    Returns the result truncated back to ``order`` (default: the input order)
    together with the discarded tail mass.
    """
    t = tilde_phi(series, alpha, divisor_floor=divisor_floor)
    if K == 0:
        return t, 0.0
    dress = flo.exp_varpi_series(-2 * K)
    out = t.product(dress)
    return out.truncate(series.order if order is None else order)


# --------------------------------------------------------------------------
# symmetric product
# --------------------------------------------------------------------------

def symmetric_product(p_fn: Callable, p_arity: int,
                      q_fn: Callable, q_arity: int) -> Callable:
    """Arity-respecting symmetrized product of phase-indexed families.

    ``p_fn`` maps a tuple of ``p_arity`` phases to a FourierSeries (same for
    ``q_fn``); the result maps ``p_arity + q_arity`` phases to the average of
    p * q over all assignments of the phases to the two factors.  The result
    is invariant under permutation of its arguments by construction.
    """
    if p_arity < 0 or q_arity < 0:
        raise ConfigError("arities must be nonnegative")
    total = p_arity + q_arity

    def product(phases: Sequence[float]) -> FourierSeries:
        phases = tuple(phases)
        if len(phases) != total:
            raise ConfigError(
                f"symmetric product of arities {p_arity}+{q_arity} needs "
                f"{total} phases, got {len(phases)}")
        acc = None
        count = 0
        for perm in itertools.permutations(range(total)):
            left = tuple(phases[i] for i in perm[:p_arity])
            right = tuple(phases[i] for i in perm[p_arity:])
            term = p_fn(left).product(q_fn(right))
            acc = term if acc is None else acc + term
            count += 1
        return acc * (1.0 / count)

    product.arity = total
    return product


def _multiset_splits(ms: tuple, j: int):
    """Distinct (sub, complement) splits of a sorted multiset with counts."""
    seen = {}
    idx = range(len(ms))
    for pos in itertools.combinations(idx, j):
        posset = set(pos)
        sub = tuple(ms[i] for i in pos)
        comp = tuple(ms[i] for i in idx if i not in posset)
        key = (sub, comp)
        seen[key] = seen.get(key, 0) + 1
    return [(sub, comp, cnt) for (sub, comp), cnt in seen.items()]


# --------------------------------------------------------------------------
# scalar h recursion
# --------------------------------------------------------------------------

def h_value(J: int, phases: Sequence[float], k: float, *,
            divisor_floor: float = DIVISOR_FLOOR,
            _memo: Optional[dict] = None) -> float:
    """Scalar majorant h_J of the recursion, built from resonant divisors.

    h_0 = 1 and h_J divides by |1 - e^{i(2k - sum(phases))}| the sum over
    contiguous partitions of the first J-1 phases (the last phase enters only
    through the divisor).  Raises SmallDivisorError when a divisor at any
    recursion level falls below the floor.
    """
    phases = tuple(float(p) for p in phases)
    if len(phases) != J:
        raise ConfigError(f"h_{J} needs {J} phases, got {len(phases)}")
    memo = {} if _memo is None else _memo

    def rec(tup: tuple) -> float:
        if not tup:
            return 1.0
        if tup in memo:
            return memo[tup]
        jj = len(tup)
        gap = 2.0 * k - sum(tup)
        div = abs(1.0 - np.exp(1j * gap))
        if angle_distance(gap) < divisor_floor:
            raise SmallDivisorError(
                f"h recursion divisor |1 - e^(i(2k - sum))| = {div:.3e} below "
                f"floor at level {jj} (phase sum {sum(tup):.12g})",
                alpha=gap, phase_sum=sum(tup), phases=tup, level=jj)
        total = 0.0
        for j in range(jj):
            total += rec(tup[:j]) * rec(tup[j:jj - 1])
        val = total / div
        memo[tup] = val
        return val

    return rec(phases)


# --------------------------------------------------------------------------
# table construction
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class HarmonicTable:
    """Dressed tables F, G on phase multisets, with scalar h on demand.

    Entries are keyed by (level J, harmonic K, sorted tuple of phase indices);
    phases are the distinct perturbation phases handed to compute_table.
    """

    context: Union[FloquetData, CellContext]
    phases: tuple
    p: int
    order: int
    divisor_floor: float
    F: dict
    G: dict
    tail_loss: float
    resonant_entries: tuple
    _h_memo: dict = field(default_factory=dict, repr=False, compare=False)

    # -- key handling -------------------------------------------------------
    def _index_of(self, phase: float) -> int:
        for i, ph in enumerate(self.phases):
            if abs(ph - phase) <= 1e-12:
                return i
        raise KeyError(f"phase {phase!r} not among table phases {self.phases}")

    def _key(self, J: int, K: int, phases: Sequence[float]):
        idx = tuple(sorted(self._index_of(p) for p in phases))
        if len(idx) != J:
            raise KeyError(f"expected {J} phases, got {len(idx)}")
        return (J, K, idx)

    @property
    def k_eff(self) -> float:
        return self.context.k_eff

    # -- dressed accessors ---------------------------------------------------
    def F_entry(self, J: int, K: int, phases: Sequence[float]) -> FourierSeries:
        return self.F[self._key(J, K, phases)]

    def G_entry(self, J: int, K: int, phases: Sequence[float]) -> FourierSeries:
        return self.G[self._key(J, K, phases)]

    # -- undressed accessors (need a full Floquet bundle) --------------------
    def f_entry(self, J: int, K: int, phases: Sequence[float]) -> FourierSeries:
        dressed = self.F_entry(J, K, phases)
        if K == 0:
            return dressed
        if not isinstance(self.context, FloquetData):
            raise ConfigError("undressing needs a FloquetData context")
        out = dressed.product(self.context.exp_varpi_series(-2 * K))
        return out.truncate(self.order)[0]

    def g_entry(self, J: int, K: int, phases: Sequence[float]) -> FourierSeries:
        dressed = self.G_entry(J, K, phases)
        if K == 0:
            return dressed
        if not isinstance(self.context, FloquetData):
            raise ConfigError("undressing needs a FloquetData context")
        out = dressed.product(self.context.exp_varpi_series(-2 * K))
        return out.truncate(self.order)[0]

    # -- scalars --------------------------------------------------------------
    def h(self, phases: Sequence[float]) -> float:
        return h_value(len(tuple(phases)), tuple(phases), self.k_eff,
                       divisor_floor=self.divisor_floor, _memo=self._h_memo)

    def h_perm_sum(self, phases: Sequence[float]) -> float:
        """Sum of h over all permutations of the phase tuple."""
        total = 0.0
        for perm in itertools.permutations(tuple(phases)):
            total += self.h(perm)
        return total

    def mean_criterion(self, phases: Sequence[float]) -> complex:
        """Zeroth Fourier coefficient of the dressed top entry F_{p-1,1}."""
        if len(tuple(phases)) != self.p - 1:
            raise ConfigError(
                f"mean criterion needs a phase tuple of length p-1 = {self.p-1}")
        return self.F_entry(self.p - 1, 1, phases).mean

    def multisets(self, J: int):
        """Sorted index multisets of size J present in the table."""
        return sorted({key[2] for key in self.F if key[0] == J})

    def phases_of(self, idx: tuple) -> tuple:
        return tuple(self.phases[i] for i in idx)

    # -- export ----------------------------------------------------------------
    def export(self) -> dict:
        def dump(d):
            return {
                f"{J},{K},{','.join(format(self.phases[i], '.17g') for i in idx)}":
                    {"re": [float(v) for v in ser.coeffs.real],
                     "im": [float(v) for v in ser.coeffs.imag]}
                for (J, K, idx), ser in sorted(d.items())
            }
        return {
            "representation": "dressed (F = e^{2iK varpi} f)",
            "order": self.order, "p": self.p,
            "k_eff": self.k_eff,
            "phases": [float(p) for p in self.phases],
            "tail_loss": self.tail_loss,
            "F": dump(self.F), "G": dump(self.G),
        }


def _g_coeffs_from_f(fser: FourierSeries, alpha: float, K: int, *,
                     divisor_floor: float, allow_resonant: bool,
                     phase_sum: float, phases: tuple):
    """Dressed G from dressed F: G_n = -2K F_n / (2 pi n + alpha).

    The (1 - e^{i alpha}) factors of the antiderivative normalization and the
    g prefactor cancel exactly, so only the linear denominators remain.  The
    only true singularity is a denominator below the floor at an index whose
    coefficient is significant; with ``allow_resonant`` that coefficient is
    dropped (diagnostic regularization) instead of raising.
    """
    c = fser.coeffs
    order = fser.order
    n = np.arange(-order, order + 1)
    den = 2.0 * np.pi * n + alpha
    sig = np.abs(c) > COEFF_FLOOR_REL * max(float(np.max(np.abs(c))), 1e-300)
    bad = (np.abs(den) < divisor_floor) & sig
    dropped = False
    if np.any(bad):
        if not allow_resonant:
            idx = int(n[np.argmax(bad)])
            raise SmallDivisorError(
                f"resonant divisor at K = {K}, phase sum = {phase_sum:.12g} "
                f"(2K k - sum = {alpha:.3e} at Fourier index {idx}); this "
                "energy is resonant", alpha=alpha, index=idx, K=K,
                phase_sum=phase_sum, phases=phases)
        dropped = True
    out = np.zeros_like(c)
    ok = np.abs(den) >= divisor_floor
    out[ok] = -2.0 * K * c[ok] / den[ok]
    return FourierSeries(out), dropped


def compute_table(context: Union[FloquetData, CellContext],
                  phases: Sequence[float], p: int, *,
                  order: int = 64,
                  divisor_floor: float = DIVISOR_FLOOR,
                  allow_resonant: bool = False,
                  g_max_level: Optional[int] = None,
                  max_p: int = 5) -> HarmonicTable:
    """Build the dressed tables F_{J,K}, G_{J,K} for J = 1..p-1.

    ``phases`` is the set of distinct perturbation phases; entries cover all
    multisets drawn from it.  Construction recurses level by level: level 1
    is the dressed amplitude profile, G follows from F by the normalized
    antiderivative, and higher F entries symmetrize the product of the
    three phase-shifted amplitude profiles with lower G entries.

    ``g_max_level`` limits how far the G family is computed: p-2 suffices to
    build every F entry and keeps the table constructible at a resonant
    energy, where only the never-consumed top-level G is singular (this is
    how the mean criterion is evaluated at the resonance itself).
    """
    if p < 2:
        raise ConfigError("table order p must be >= 2")
    if p > max_p:
        raise ConfigError(
            f"table order p = {p} exceeds the configured cap {max_p}; "
            "the entry count grows combinatorially (raise max_p to override)")
    if g_max_level is None:
        g_max_level = p - 1
    if g_max_level < p - 2:
        raise ConfigError("g_max_level below p-2 cannot close the recursion")
    ctx = context.cell_context(order) if isinstance(context, FloquetData) else context
    phases = tuple(float(v) for v in phases)
    if len(set(phases)) != len(phases):
        raise ConfigError("phases must be distinct")
    k = ctx.k_eff
    profiles = ctx.phase_profiles(order)   # a -> Phi0 e^{2 i a varpi}

    Ftab: dict = {}
    Gtab: dict = {}
    tail_loss = 0.0
    resonant: list = []

    def add_G(J, K, idx):
        nonlocal tail_loss
        psum = sum(phases[i] for i in idx)
        alpha = 2.0 * K * k - psum
        g, dropped = _g_coeffs_from_f(
            Ftab[(J, K, idx)], alpha, K, divisor_floor=divisor_floor,
            allow_resonant=allow_resonant, phase_sum=psum,
            phases=tuple(phases[i] for i in idx))
        Gtab[(J, K, idx)] = g
        if dropped:
            resonant.append((J, K, idx))

    n_phases = len(phases)
    for i in range(n_phases):
        Ftab[(1, 0, (i,))] = FourierSeries.zero(order)
        Ftab[(1, 1, (i,))] = profiles[+1]
        if g_max_level >= 1:
            Gtab[(1, 0, (i,))] = FourierSeries.zero(order)
            add_G(1, 1, (i,))

    for J in range(2, p):
        for idx in itertools.combinations_with_replacement(range(n_phases), J):
            for K in range(0, J + 1):
                acc = FourierSeries.zero(order)
                for a in (-1, 0, 1):
                    Kp = K + a
                    if Kp < 1 or Kp > J - 1:
                        continue        # G vanishes at harmonic 0 / out of range
                    w = RECURSION_WEIGHTS[a]
                    # (profile * w) symmetric-multiplied with G_{J-1, K+a}:
                    # the profile slot ignores its phase, so the average is
                    # over which element is dropped from the multiset.
                    inner = FourierSeries.zero(order)
                    seen = {}
                    for t in range(J):
                        rest = idx[:t] + idx[t + 1:]
                        seen[rest] = seen.get(rest, 0) + 1
                    for rest, cnt in seen.items():
                        inner = inner + (cnt / J) * Gtab[(J - 1, Kp, rest)]
                    prod = profiles[-a].product(inner)
                    trunc, lost = prod.truncate(order)
                    tail_loss = max(tail_loss, lost)
                    acc = acc + w * trunc
                Ftab[(J, K, idx)] = acc
            if J <= g_max_level:
                Gtab[(J, 0, idx)] = FourierSeries.zero(order)
                for K in range(1, J + 1):
                    add_G(J, K, idx)

    return HarmonicTable(context=context, phases=phases, p=p, order=order,
                         divisor_floor=divisor_floor, F=Ftab, G=Gtab,
                         tail_loss=tail_loss, resonant_entries=tuple(resonant))


def mean_criterion(table: HarmonicTable, phases: Sequence[float]) -> complex:
    """Mean of the dressed top-level entry; nonzero means the embedded
    eigenvalue construction is admissible at this quasimomentum."""
    return table.mean_criterion(phases)


# --------------------------------------------------------------------------
# recursion verification
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RecursionReport:
    I: int
    l: int
    residuals_f: dict       # K -> sup residual
    residuals_g: dict
    vacuous: bool

    @property
    def max_residual(self) -> float:
        vals = list(self.residuals_f.values()) + list(self.residuals_g.values())
        return max(vals) if vals else 0.0


def verify_recursion(table: HarmonicTable, I: int, l: int, *,
                     grid: int = 512) -> RecursionReport:
    """Check the convolution identities linking level I to the split levels.

    Identity (dressed form, valid for harmonics K with l < K <= I; endpoint
    terms vanish under the zero conventions, and for K <= l both sides
    degenerate so those harmonics are skipped as vacuous):

        F_{I,K} = 1/2 sum_j F_{j,l} (x) G_{I-j,K-l}
        G_{I,K} = 1/2 sum_j G_{j,l} (x) G_{I-j,K-l}
    """
    if not 0 < l < I:
        return RecursionReport(I=I, l=l, residuals_f={}, residuals_g={},
                               vacuous=True)
    xs = np.arange(grid) / grid
    res_f: dict = {}
    res_g: dict = {}

    def entry_or_zero(tab, J, K, idx):
        if J == 0 or K < 0 or K > J:
            return None
        if tab is table.G and K == 0:
            return None
        if tab is table.F and J == 1 and K == 0:
            return None   # stored but identically zero
        return tab.get((J, K, idx))

    for idx in table.multisets(I):
        for K in range(l + 1, I + 1):
            for which, res in (("f", res_f), ("g", res_g)):
                lhs_tab = table.F if which == "f" else table.G
                lhs = lhs_tab.get((I, K, idx))
                if lhs is None:
                    continue
                acc = FourierSeries.zero(table.order)
                for j in range(1, I):
                    left_tab = table.F if which == "f" else table.G
                    for sub, comp, cnt in _multiset_splits(idx, j):
                        a = entry_or_zero(left_tab, j, l, sub)
                        b = entry_or_zero(table.G, I - j, K - l, comp)
                        if a is None or b is None:
                            continue
                        term = a.product(b) * (cnt / math.comb(I, j))
                        acc = acc + term.truncate(table.order)[0]
                rhs = 0.5 * acc
                diff = lhs - rhs
                r = float(np.max(np.abs(diff.evaluate(xs))))
                key = (K, idx)
                res[key] = max(res.get(key, 0.0), r)

    # collapse over multisets: report per-K maxima
    def collapse(d):
        out: dict = {}
        for (K, _idx), v in d.items():
            out[K] = max(out.get(K, 0.0), v)
        return out

    return RecursionReport(I=I, l=l, residuals_f=collapse(res_f),
                           residuals_g=collapse(res_g), vacuous=False)
