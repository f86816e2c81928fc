"""Decaying oscillatory perturbations with generalized bounded variation.

A perturbation is a finite list of terms ``c_l e^{-i phi_l x} gamma_l(x)``
whose envelopes ``gamma_l`` have uniformly bounded variation and finite L^p
tails, plus an optional slow non-oscillatory component ``beta0``.  Term lists
are closed under conjugation so values are real.

The model potentials live at infinity; every envelope is multiplied by a
smooth cutoff vanishing on [0, x0/2] and equal to 1 on [x0, inf) so the
half-line equation has a globally defined potential.  Variation and L^p
norms are reported for the ideal tail on [x0, inf).
"""

from __future__ import annotations

import cmath
import json as _json
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from .errors import ConfigError, PreconditionError

#: conjugate-closure residue allowed in evaluated values
REALNESS_TOL = 1e-12


def smooth_step(t):
    """C^infinity step: 0 for t <= 0, 1 for t >= 1."""
    ta = np.asarray(t, dtype=float)
    scalar = ta.ndim == 0
    ta = np.atleast_1d(ta)
    a = np.zeros_like(ta)
    pos = ta > 0
    a[pos] = np.exp(-1.0 / ta[pos])
    b = np.zeros_like(ta)
    neg = ta < 1
    b[neg] = np.exp(-1.0 / (1.0 - ta[neg]))
    out = a / (a + b)
    return float(out[0]) if scalar else out


def _cutoff(x, x0: float):
    """0 on [0, x0/2], 1 on [x0, inf), smooth in between."""
    x = np.asarray(x, dtype=float)
    return smooth_step((2.0 * x - x0) / x0)


# --------------------------------------------------------------------------
# envelopes
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Envelope:
    """Base interface; use the concrete subclasses."""

    x0: float = 1.0

    kind = "custom"

    def raw_value(self, x):                      # value without the cutoff
        raise NotImplementedError

    def value(self, x):
        xa = np.asarray(x, dtype=float)
        scalar = xa.ndim == 0
        xa = np.atleast_1d(xa)
        out = self.raw_value(xa) * _cutoff(xa, self.x0)
        return complex(out[0]) if scalar else out

    __call__ = value

    @property
    def variation(self) -> float:
        """Total variation of the ideal envelope on [x0, inf)."""
        raise NotImplementedError

    def lp_norm(self, p: int) -> float:
        raise NotImplementedError

    def conjugate(self) -> "Envelope":
        return self

    @property
    def decay_exponent(self) -> Optional[float]:
        return None

    @property
    def is_zero(self) -> bool:
        return False

    def describe(self) -> dict:
        return {"kind": self.kind, "x0": self.x0}


@dataclass(frozen=True)
class PowerTail(Envelope):
    """x^{-gamma} on [x0, inf), optionally phase-modulated by e^{i xi(x)}.

    The modulation must be slow (xi' integrably decaying) for the variation
    to stay finite; variation with a modulation is computed by quadrature.
    """

    gamma: float = 1.0
    scale: float = 1.0
    xi: Optional[Callable] = None
    xi_prime: Optional[Callable] = None
    _var_cache: dict = field(default_factory=dict, repr=False, compare=False)

    kind = "power_tail"

    def raw_value(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x, dtype=complex)
        pos = x > 0
        out[pos] = self.scale * np.power(x[pos], -self.gamma)
        if self.xi is not None:
            out[pos] = out[pos] * np.exp(1j * np.asarray(self.xi(x[pos])))
        return out

    @property
    def variation(self) -> float:
        if "var" not in self._var_cache:
            if self.xi is None:
                var = abs(self.scale) * self.x0 ** (-self.gamma)
            elif self.xi_prime is not None:
                def dens(x):
                    return abs(self.scale) * abs(
                        complex(-self.gamma / x, self.xi_prime(x))) * x ** (-self.gamma)
                var, _ = quad(dens, self.x0, np.inf, limit=400)
            else:
                # grid estimate (lower bound) when xi' is unavailable
                xs = np.geomspace(self.x0, self.x0 * 1e6, 200001)
                var = float(np.sum(np.abs(np.diff(self.raw_value(xs)))))
            self._var_cache["var"] = float(var)
        return self._var_cache["var"]

    def lp_norm(self, p: int) -> float:
        pg = p * self.gamma
        if pg <= 1.0:
            return math.inf
        return abs(self.scale) * (self.x0 ** (1.0 - pg) / (pg - 1.0)) ** (1.0 / p)

    def conjugate(self) -> "PowerTail":
        if self.xi is None:
            return self
        xi, xip = self.xi, self.xi_prime
        return PowerTail(x0=self.x0, gamma=self.gamma, scale=self.scale,
                         xi=(lambda x: -np.asarray(xi(x))),
                         xi_prime=(None if xip is None else (lambda x: -xip(x))))

    @property
    def decay_exponent(self) -> float:
        return self.gamma

    def describe(self) -> dict:
        return {"kind": self.kind, "x0": self.x0, "gamma": self.gamma,
                "scale": self.scale, "modulated": self.xi is not None}


@dataclass(frozen=True)
class PowerSum(Envelope):
    """Real combination sum_i a_i x^{-e_i} on [x0, inf) (used for beta0)."""

    terms: tuple = ()            # ((coeff, exponent), ...)

    kind = "power_sum"

    def raw_value(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x, dtype=complex)
        pos = x > 0
        for a, e in self.terms:
            out[pos] += a * np.power(x[pos], -e)
        return out

    def derivative_value(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x, dtype=float)
        pos = x > 0
        for a, e in self.terms:
            out[pos] += -a * e * np.power(x[pos], -e - 1.0)
        return out  # cutoff ignored: used for tail checks only

    @property
    def variation(self) -> float:
        xs = np.geomspace(self.x0, self.x0 * 1e8, 100001)
        return float(np.sum(np.abs(np.diff(self.raw_value(xs).real))))

    def lp_norm(self, p: int) -> float:
        def dens(x):
            return abs(self.raw_value(np.array([x]))[0]) ** p
        val, _ = quad(dens, self.x0, np.inf, limit=400)
        return val ** (1.0 / p)

    @property
    def decay_exponent(self) -> Optional[float]:
        if not self.terms:
            return None
        return min(e for _, e in self.terms)

    @property
    def is_zero(self) -> bool:
        return all(a == 0.0 for a, _ in self.terms) or not self.terms

    def describe(self) -> dict:
        return {"kind": self.kind, "x0": self.x0,
                "terms": [[a, e] for a, e in self.terms]}


@dataclass(frozen=True)
class SampledEnvelope(Envelope):
    """Envelope given by bounded-variation samples on [x0, X]."""

    xs: np.ndarray = None
    values: np.ndarray = None

    kind = "sampled"

    def __post_init__(self):
        object.__setattr__(self, "xs", np.asarray(self.xs, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def raw_value(self, x):
        x = np.asarray(x, dtype=float)
        return np.interp(x, self.xs, self.values,
                         left=self.values[0], right=0.0).astype(complex)

    @property
    def variation(self) -> float:
        # grid increments: a lower-bound estimate, flagged in reports
        v = float(np.sum(np.abs(np.diff(self.values))))
        return v + abs(float(self.values[-1]))   # tail drop to 0

    def lp_norm(self, p: int) -> float:
        y = np.abs(self.values) ** p
        return float(np.trapezoid(y, self.xs) ** (1.0 / p))

    @property
    def estimate_only(self) -> bool:
        return True

    def describe(self) -> dict:
        return {"kind": self.kind, "x0": self.x0, "n_samples": int(self.xs.size)}


@dataclass(frozen=True)
class CustomEnvelope(Envelope):
    """C^1 envelope given by a callable plus declared bound metadata."""

    func: Optional[Callable] = None
    variation_bound: Optional[float] = None
    lp_value: Optional[float] = None
    decay: Optional[float] = None

    kind = "custom"

    def raw_value(self, x):
        return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=complex)

    @property
    def variation(self) -> float:
        if self.variation_bound is None:
            raise PreconditionError(
                "custom envelope lacks a variation bound; supply "
                "variation_bound metadata")
        return self.variation_bound

    def lp_norm(self, p: int) -> float:
        if self.lp_value is None:
            raise PreconditionError(
                "custom envelope lacks L^p metadata; supply lp_value")
        return self.lp_value

    @property
    def decay_exponent(self) -> Optional[float]:
        return self.decay

    def describe(self) -> dict:
        return {"kind": self.kind, "x0": self.x0}


ZERO_BETA0 = PowerSum(x0=1.0, terms=())


# --------------------------------------------------------------------------
# the perturbation
# --------------------------------------------------------------------------

class Term(NamedTuple):
    c: complex
    phi: float
    envelope: Envelope


@dataclass(frozen=True)
class GBVPerturbation:
    """Finite sum of oscillatory terms plus an optional slow component."""

    terms: tuple
    p: int
    frak_a: float
    beta0: Optional[Envelope] = None
    name: str = "custom"
    realness_residual: float = 0.0

    def __post_init__(self):
        if self.p < 2 or int(self.p) != self.p:
            raise ConfigError(f"p must be an integer >= 2, got {self.p}")
        if not 0.0 < self.frak_a < 1.0 / (self.p - 1):
            raise ConfigError(
                f"frak_a must lie in (0, 1/(p-1)) = (0, {1.0/(self.p-1):g}), "
                f"got {self.frak_a}")
        res = self._probe_realness()
        object.__setattr__(self, "realness_residual", res)
        if res > REALNESS_TOL:
            raise PreconditionError(
                f"term list is not conjugate-closed: max |Im V| = {res:.3e}")

    def _probe_realness(self) -> float:
        if not self.terms:
            return 0.0
        x0 = min(t.envelope.x0 for t in self.terms)
        xs = np.geomspace(max(x0 * 0.6, 1e-3), 300.0 * max(1.0, x0), 64)
        vals = self._complex_sum(xs)
        scale = max(1.0, float(np.max(np.abs(vals))))
        return float(np.max(np.abs(vals.imag)) / scale)

    def _complex_sum(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x, dtype=complex)
        for c, phi, env in self.terms:
            out += c * np.exp(-1j * phi * x) * env.value(x)
        if self.beta0 is not None:
            out += self.beta0.value(x)
        return out

    def evaluate(self, x):
        """Real value of the perturbation at x > 0 (scalar or array)."""
        xa = np.asarray(x, dtype=float)
        if np.any(xa <= 0.0):
            raise ValueError("perturbation is defined for x > 0")
        vals = self._complex_sum(np.atleast_1d(xa))
        scale = max(1.0, float(np.max(np.abs(vals))))
        if float(np.max(np.abs(vals.imag))) > REALNESS_TOL * scale:
            raise PreconditionError(
                "imaginary residue above tolerance; term list not "
                "conjugate-closed")
        out = vals.real
        return float(out[0]) if np.isscalar(x) or xa.ndim == 0 else out

    __call__ = evaluate

    @property
    def phases(self) -> tuple:
        vals = sorted({t.phi for t in self.terms})
        if self.beta0 is not None and not self.beta0.is_zero:
            vals = sorted(set(vals) | {0.0})
        return tuple(vals)

    @property
    def tau(self) -> float:
        """sup over terms of the envelope variation."""
        if not self.terms:
            return 0.0
        return max(t.envelope.variation for t in self.terms)

    @property
    def frak_m(self) -> float:
        """sup over terms of the envelope L^p norm."""
        if not self.terms:
            return 0.0
        return max(t.envelope.lp_norm(self.p) for t in self.terms)

    def amplitude_power_sum(self, frak_a: Optional[float] = None) -> float:
        a = self.frak_a if frak_a is None else frak_a
        return float(sum(abs(t.c) ** a for t in self.terms))


# --------------------------------------------------------------------------
# builders
# --------------------------------------------------------------------------

def build_wigner_von_neumann(x0: float = 1.0, frak_a: float = 0.5) -> GBVPerturbation:
    """The classical potential -8 sin(2x)/x, smoothly cut near the origin.

    Splitting the sine into exponentials gives amplitudes of modulus 4 at
    phases +-2 with a 1/x envelope; p = 2.
    """
    env = PowerTail(x0=x0, gamma=1.0)
    terms = (Term(4.0j, -2.0, env), Term(-4.0j, 2.0, env))
    return GBVPerturbation(terms=terms, p=2, frak_a=frak_a,
                           beta0=None, name="wigner_von_neumann")


def _check_decay_trend(samples_x, samples_y, label):
    """Reject values whose scaled magnitude grows along the tail grid."""
    n = samples_x.size
    head = float(np.max(samples_y[: n // 4])) if n >= 8 else float(np.max(samples_y))
    tail = float(np.max(samples_y[-n // 4:])) if n >= 8 else head
    if not np.isfinite(tail) or tail > 10.0 * max(head, 1e-300):
        raise PreconditionError(f"{label} decay condition violated on the "
                                f"test grid (head {head:.3g}, tail {tail:.3g})")


def check_beta0(beta0: Envelope, gamma: float, p: int,
                x_max: float = 1e6) -> dict:
    """Check beta0 = O(x^-gamma) and beta0' = O(x^-p gamma) on a log grid."""
    if beta0 is None or beta0.is_zero:
        return {"zero": True, "value_ok": True, "derivative_ok": True}
    xs = np.geomspace(beta0.x0, x_max, 241)
    vals = np.abs(beta0.raw_value(xs)) * xs ** gamma
    _check_decay_trend(xs, vals, "beta0 = O(x^-gamma)")
    if isinstance(beta0, PowerSum):
        dv = np.abs(beta0.derivative_value(xs))
    else:
        h = xs * 1e-6
        dv = np.abs((beta0.raw_value(xs + h) - beta0.raw_value(xs - h)) / (2 * h))
    dvals = dv * xs ** (p * gamma)
    _check_decay_trend(xs, dvals, "beta0' = O(x^-p gamma)")
    return {"zero": False, "value_ok": True, "derivative_ok": True}


def build_example_potential(amplitudes: Sequence[float],
                            alphas: Sequence[float],
                            gamma: float,
                            p: int,
                            *,
                            xi: Optional[Sequence] = None,
                            beta0: Optional[Envelope] = None,
                            x0: float = 1.0,
                            frak_a: Optional[float] = None) -> GBVPerturbation:
    """Assemble sum_k L_k x^-gamma cos(alpha_k x + xi_k(x)) + beta0(x).

    Each cosine splits into two conjugate exponential terms of amplitude
    L_k / 2 at phases -+ alpha_k with envelopes x^-gamma e^{+- i xi_k(x)}.
    ``xi`` is a sequence of (xi_k, xi_k') callable pairs (or None entries).

    Preconditions: gamma in (1/p, 1/(p-1)]; xi_k' = O(x^{-(p-1) gamma}) on a
    test grid; beta0 constraints (value and derivative decay).
    """
    if len(amplitudes) != len(alphas):
        raise ConfigError("amplitudes and alphas must have equal length")
    if not (1.0 / p < gamma <= 1.0 / (p - 1)):
        raise PreconditionError(
            f"gamma must lie in (1/p, 1/(p-1)] = ({1.0/p:g}, {1.0/(p-1):g}], "
            f"got {gamma}")
    if any(a <= 0 for a in amplitudes):
        raise PreconditionError("amplitudes must be positive")

    xi = list(xi) if xi is not None else [None] * len(alphas)
    if len(xi) != len(alphas):
        raise ConfigError("xi must match alphas in length")

    xs = np.geomspace(x0, 1e4 * x0, 161)
    terms = []
    for L, alpha, mod in zip(amplitudes, alphas, xi):
        if mod is None:
            env_plus = PowerTail(x0=x0, gamma=gamma)
            env_minus = env_plus
        else:
            xi_f, xi_fp = mod
            if xi_fp is not None:
                decay = np.abs([xi_fp(x) for x in xs]) * xs ** ((p - 1) * gamma)
                _check_decay_trend(xs, decay, "xi' = O(x^{-(p-1) gamma})")
            env_plus = PowerTail(x0=x0, gamma=gamma, xi=xi_f, xi_prime=xi_fp)
            env_minus = env_plus.conjugate()
        terms.append(Term(L / 2.0, -alpha, env_plus))
        terms.append(Term(L / 2.0, +alpha, env_minus))

    check_beta0(beta0, gamma, p)
    default_a = 0.5 / (p - 1)
    return GBVPerturbation(terms=tuple(terms), p=p,
                           frak_a=default_a if frak_a is None else frak_a,
                           beta0=beta0, name="example_potential")


def zero_perturbation(p: int = 2, frak_a: Optional[float] = None) -> GBVPerturbation:
    return GBVPerturbation(terms=(), p=p,
                           frak_a=(0.5 / (p - 1)) if frak_a is None else frak_a,
                           beta0=None, name="zero")


# --------------------------------------------------------------------------
# condition report
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionReport:
    tau: float
    frak_m: float
    amplitude_sum: float
    amplitude_power_sum: float
    frak_a: float
    p: int
    variation_finite: bool
    lp_finite: bool
    power_sum_finite: bool
    estimates: tuple
    beta0_check: dict

    @property
    def all_pass(self) -> bool:
        return (self.variation_finite and self.lp_finite
                and self.power_sum_finite
                and self.beta0_check.get("value_ok", True)
                and self.beta0_check.get("derivative_ok", True))

    def to_dict(self) -> dict:
        return {
            "tau": self.tau, "frak_m": self.frak_m,
            "amplitude_sum": self.amplitude_sum,
            "amplitude_power_sum": self.amplitude_power_sum,
            "frak_a": self.frak_a, "p": self.p,
            "variation_finite": self.variation_finite,
            "lp_finite": self.lp_finite,
            "power_sum_finite": self.power_sum_finite,
            "estimates": list(self.estimates),
            "beta0_check": self.beta0_check,
            "all_pass": self.all_pass,
        }


def condition_report(V: GBVPerturbation) -> ConditionReport:
    """Evaluate the admissibility conditions: uniform variation, L^p tails,
    and summability of |c_l|^frak_a, plus the beta0 constraints if present."""
    estimates = []
    for i, t in enumerate(V.terms):
        if getattr(t.envelope, "estimate_only", False):
            estimates.append(f"term {i}: variation from sample increments "
                             "(lower bound)")
    tau = V.tau
    fm = V.frak_m
    beta_chk = {"zero": True, "value_ok": True, "derivative_ok": True}
    if V.beta0 is not None and not V.beta0.is_zero:
        gamma_candidates = [t.envelope.decay_exponent for t in V.terms
                            if t.envelope.decay_exponent is not None]
        gamma = min(gamma_candidates) if gamma_candidates else 1.0 / V.p + 1e-6
        try:
            beta_chk = check_beta0(V.beta0, gamma, V.p)
        except PreconditionError as exc:
            beta_chk = {"zero": False, "value_ok": False,
                        "derivative_ok": False, "detail": str(exc)}
    return ConditionReport(
        tau=tau, frak_m=fm,
        amplitude_sum=float(sum(abs(t.c) for t in V.terms)),
        amplitude_power_sum=V.amplitude_power_sum(),
        frak_a=V.frak_a, p=V.p,
        variation_finite=bool(np.isfinite(tau)),
        lp_finite=bool(np.isfinite(fm)),
        power_sum_finite=bool(np.isfinite(V.amplitude_power_sum())),
        estimates=tuple(estimates), beta0_check=beta_chk)


# --------------------------------------------------------------------------
# spec-file loading
# --------------------------------------------------------------------------

def _envelope_from_spec(spec: dict) -> Envelope:
    spec = dict(spec)
    kind = spec.pop("kind", "power_tail")
    if kind == "power_tail":
        return PowerTail(x0=spec.get("x0", 1.0), gamma=spec.get("gamma", 1.0),
                         scale=spec.get("scale", 1.0))
    if kind == "power_sum":
        return PowerSum(x0=spec.get("x0", 1.0),
                        terms=tuple((float(a), float(e))
                                    for a, e in spec.get("terms", [])))
    raise ConfigError(f"unsupported envelope kind '{kind}' in spec file")


def perturbation_from_spec(spec: dict) -> GBVPerturbation:
    """Build a perturbation from a JSON-style mapping."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind == "wigner_von_neumann":
        return build_wigner_von_neumann(x0=spec.get("x0", 1.0),
                                        frak_a=spec.get("frak_a", 0.5))
    if kind == "example":
        beta0 = spec.get("beta0")
        return build_example_potential(
            spec["amplitudes"], spec["alphas"], spec["gamma"], spec["p"],
            x0=spec.get("x0", 1.0), frak_a=spec.get("frak_a"),
            beta0=_envelope_from_spec(beta0) if beta0 else None)
    if kind == "zero":
        return zero_perturbation(p=spec.get("p", 2), frak_a=spec.get("frak_a"))
    if kind == "terms":
        terms = tuple(
            Term(complex(t.get("re", 0.0), t.get("im", 0.0)), float(t["phase"]),
                 _envelope_from_spec(t.get("envelope", {})))
            for t in spec.get("terms", []))
        beta0 = spec.get("beta0")
        return GBVPerturbation(
            terms=terms, p=int(spec.get("p", 2)),
            frak_a=float(spec.get("frak_a", 0.5 / (int(spec.get("p", 2)) - 1))),
            beta0=_envelope_from_spec(beta0) if beta0 else None, name="terms")
    raise ConfigError(f"unknown perturbation kind '{kind}'")


def load_perturbation_file(path: str) -> GBVPerturbation:
    with open(path) as fh:
        return perturbation_from_spec(_json.load(fh))
