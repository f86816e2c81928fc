"""Lambda operator, symmetric product, and the recursion tables."""

import itertools
import math

import numpy as np
import pytest
from scipy.integrate import quad

import wvnlab as w
from wvnlab.floquet import CellContext
from wvnlab.fourier import FourierSeries

FREE = w.free_potential()
MATHIEU = w.mathieu_potential(2.0)
RNG = np.random.default_rng(7)


def random_series(order, rng, decay=1.3):
    n = np.arange(-order, order + 1)
    mag = np.exp(-decay * np.abs(n))
    c = (rng.standard_normal(2 * order + 1)
         + 1j * rng.standard_normal(2 * order + 1)) * mag
    return FourierSeries(c)


# ------------------------------------------------------------- tilde (anti-derivative normalization)

def quadrature_tilde_oracle(series, alpha, xs):
    """Independent construction from the defining antiderivative formula."""

    def Q(x):
        re = quad(lambda t: (series.evaluate(t) * np.exp(1j * alpha * t)).real,
                  0.0, x, limit=200)[0]
        im = quad(lambda t: (series.evaluate(t) * np.exp(1j * alpha * t)).imag,
                  0.0, x, limit=200)[0]
        return re + 1j * im

    q1 = Q(1.0)
    out = []
    for x in xs:
        qx = Q(x)
        out.append(-1j * qx * np.exp(-1j * alpha * x) * (1 - np.exp(1j * alpha))
                   + 1j * q1 * np.exp(-1j * alpha * x))
    return np.array(out)


def test_tilde_constant_at_pi():
    C = 1.7 - 0.4j
    t = w.tilde_phi(FourierSeries.constant(C, 4), math.pi)
    # quadrature oracle on the defining formula
    xs = np.array([0.0, 0.21, 0.5, 0.83])
    oracle = quadrature_tilde_oracle(FourierSeries.constant(C, 0), math.pi, xs)
    assert np.max(np.abs(t.evaluate(xs) - oracle)) < 1e-9
    assert np.max(np.abs(t.evaluate(xs) - (-2.0 * C / math.pi))) < 1e-12


def test_tilde_random_series_vs_quadrature():
    s = random_series(3, np.random.default_rng(5))
    alpha = 1.234
    t = w.tilde_phi(s, alpha)
    xs = np.array([0.1, 0.37, 0.72])
    oracle = quadrature_tilde_oracle(s, alpha, xs)
    assert np.max(np.abs(t.evaluate(xs) - oracle)) < 1e-8


def test_tilde_vanishing_numerator_as_alpha_to_zero():
    s = FourierSeries.harmonic(1)
    for eps in (1e-2, 1e-4, 1e-6):
        t = w.tilde_phi(s, eps)
        assert t.sup_norm() < eps


def test_tilde_limit_branch_constant():
    C = 0.9 + 0.3j
    t = w.tilde_phi(FourierSeries.constant(C, 2), 0.0)
    assert abs(t.coefficient(0) - 1j * C) < 1e-15
    assert t.sup_norm() - abs(C) < 1e-12
    # at alpha = 2 pi n the limit is the harmonic i c_{-n} e^{-2 pi i n x},
    # whose magnitude is the antiderivative value i Q_{2 pi n}(1)
    s = random_series(3, np.random.default_rng(11))
    t2 = w.tilde_phi(s, 2 * math.pi)
    assert abs(t2.coefficient(-1) - 1j * s.coefficient(-1)) < 1e-12
    assert abs(t2.coefficient(0)) < 1e-15


def test_tilde_continuity_linear_in_eps():
    s = random_series(2, np.random.default_rng(3))
    xs = np.linspace(0, 1, 33)
    target = 1j * s.coefficient(-1) * np.exp(-2j * np.pi * xs)
    errs = []
    for eps in (1e-2, 1e-3, 1e-4):
        t = w.tilde_phi(s, 2 * math.pi + eps)
        errs.append(np.max(np.abs(t.evaluate(xs) - target)))
    assert errs[1] < 0.15 * errs[0]
    assert errs[2] < 0.15 * errs[1]


def test_tilde_small_divisor_error_carries_index():
    s = FourierSeries.harmonic(-1)        # coefficient at n = -1
    with pytest.raises(w.SmallDivisorError) as err:
        w.tilde_phi(s, 2 * math.pi + 1e-9)
    assert err.value.index == -1
    assert err.value.alpha == pytest.approx(2 * math.pi + 1e-9)


# -------------------------------------------------------------- lambda_op

def test_lambda_free_constant():
    F = w.floquet_solution(FREE, 1.0)
    C = 2.0 - 1.0j
    for alpha in (0.7, 2.9):
        out, lost = w.lambda_op(FourierSeries.constant(C, 4), alpha, 1, F)
        expect = -C * (1 - np.exp(1j * alpha)) / alpha
        assert abs(out.coefficient(0) - expect) < 1e-8
        assert lost < 1e-10


def test_lambda_K0_is_tilde():
    s = random_series(4, np.random.default_rng(9))
    F = w.floquet_solution(MATHIEU, 2.0)
    out, _ = w.lambda_op(s, 1.1, 0, F)
    ref = w.tilde_phi(s, 1.1)
    xs = np.linspace(0, 1, 27)
    assert np.max(np.abs(out.evaluate(xs) - ref.evaluate(xs))) < 1e-12


def test_lambda_norm_bound_random_draws():
    F = w.floquet_solution(MATHIEU, 2.0)
    rng = np.random.default_rng(21)
    xs = np.arange(512) / 512
    for _ in range(200):
        s = random_series(int(rng.integers(1, 9)), rng)
        sup = np.max(np.abs(s.evaluate(xs)))
        alpha = float(rng.uniform(0.05, 2 * math.pi - 0.05))
        K = int(rng.integers(0, 4))
        out, _ = w.lambda_op(s, alpha, K, F)
        assert np.max(np.abs(out.evaluate(xs))) <= 2.0 * sup + 1e-9


def test_lambda_derivative_identity():
    F = w.floquet_solution(FREE, 1.0)
    s = random_series(4, np.random.default_rng(2))
    alpha = 1.618
    lam, _ = w.lambda_op(s, alpha, 0, F)
    xs = np.linspace(0.05, 0.95, 101)
    h = 1e-5

    def lhs(x):
        return 1j * lam.evaluate(x) * np.exp(1j * alpha * x)

    deriv = (lhs(xs + h) - lhs(xs - h)) / (2 * h)
    rhs = (1 - np.exp(1j * alpha)) * s.evaluate(xs) * np.exp(1j * alpha * xs)
    assert np.max(np.abs(deriv - rhs)) < 1e-6


def test_lambda_periodicity():
    F = w.floquet_solution(MATHIEU, 2.0)
    s = random_series(3, np.random.default_rng(13))
    out, _ = w.lambda_op(s, 0.9, 1, F)
    xs = np.array([0.2, 0.5, 0.8])
    assert np.max(np.abs(out.evaluate(xs + 1.0) - out.evaluate(xs))) < 1e-12


# ------------------------------------------------------- symmetric product

def test_symmetric_product_two_term_average():
    def p_fn(phases):
        return FourierSeries.constant(phases[0], 0)

    def q_fn(phases):
        return FourierSeries.constant(1.0, 0)

    prod = w.symmetric_product(p_fn, 1, q_fn, 1)
    out = prod((0.3, 0.9))
    assert abs(out.coefficient(0) - 0.6) < 1e-15


def test_symmetric_product_arity_zero_identity():
    rng = np.random.default_rng(17)
    series = random_series(2, rng)

    def p_fn(phases):
        return series * phases[0]

    def unit(phases):
        return FourierSeries.constant(1.0, 0)

    prod = w.symmetric_product(p_fn, 1, unit, 0)
    out = prod((0.7,))
    xs = np.linspace(0, 1, 9)
    assert np.max(np.abs(out.evaluate(xs) - 0.7 * series.evaluate(xs))) < 1e-12


def test_symmetric_product_is_symmetric():
    rng = np.random.default_rng(23)
    sa, sb = random_series(2, rng), random_series(2, rng)

    def p_fn(phases):
        return sa * np.exp(1j * phases[0])

    def q_fn(phases):
        return sb * (phases[0] ** 2)

    prod = w.symmetric_product(p_fn, 1, q_fn, 1)
    xs = np.linspace(0, 1, 9)
    a = prod((0.4, 1.7)).evaluate(xs)
    b = prod((1.7, 0.4)).evaluate(xs)
    assert np.max(np.abs(a - b)) < 1e-12


def test_symmetric_product_arity_mismatch():
    unit = lambda phases: FourierSeries.constant(1.0, 0)
    prod = w.symmetric_product(unit, 1, unit, 1)
    with pytest.raises(w.ConfigError):
        prod((0.1,))


# ------------------------------------------------------------------ weights

def test_recursion_weights():
    assert w.RECURSION_WEIGHTS[0] == -1.0
    assert w.RECURSION_WEIGHTS[1] == 0.5
    assert w.RECURSION_WEIGHTS[-1] == 0.5
    nonzero = [a for a in range(-5, 6) if w.recursion_weight(a) != 0.0]
    assert nonzero == [-1, 0, 1]


# ------------------------------------------------------------------- tables

def test_table_initial_entries():
    F = w.floquet_solution(MATHIEU, 2.0)
    table = w.compute_table(F, (2.0, -2.0), 3)
    xs = np.linspace(0, 1, 65)
    for ph in (2.0, -2.0):
        f10 = table.f_entry(1, 0, (ph,))
        f11 = table.f_entry(1, 1, (ph,))
        assert np.max(np.abs(f10.evaluate(xs))) < 1e-12
        assert np.max(np.abs(f11.evaluate(xs)
                             - F.phi0_series.evaluate(xs))) < 1e-7


def test_table_free_g11_closed_form():
    k = 1.3
    F = w.floquet_solution(FREE, k * k)
    table = w.compute_table(F, (0.7,), 2)
    g = table.g_entry(1, 1, (0.7,))
    # hand value: g_{1,1} = -1/(k (2k - phi)), constant
    expect = -1.0 / (k * (2 * k - 0.7))
    assert abs(g.coefficient(0) - expect) < 1e-8
    assert g.sup_norm() - abs(expect) < 1e-8


def test_table_free_large_k_sign_pattern():
    # away from resonances at large k the entries alternate sign with the
    # harmonic index and stay nonzero constants
    F = w.floquet_solution(FREE, 8.0 ** 2 * 1.0401)   # k ~ 8.16 unfolded
    table = w.compute_table(F, (1.0, -1.0), 5)
    xs = np.linspace(0, 1, 17)
    for (J, K, idx), ser in table.F.items():
        if K == 0 and J == 1:
            continue
        if K < 1 or K > J:
            continue
        vals = np.real(ser.evaluate(xs))
        sign = (-1.0) ** (K + 1)
        assert np.all(sign * vals > 0), (J, K, idx)


def test_h_values():
    k = 1.0
    assert w.h_value(0, (), k) == 1.0
    phi = 0.7
    expect = 1.0 / abs(1 - np.exp(1j * (2 * k - phi)))
    assert abs(w.h_value(1, (phi,), k) - expect) < 1e-12
    # J = 2 against a literal expansion of the recursion
    phases = (2.5, 0.7)
    div2 = abs(1 - np.exp(1j * (2 * k - 2.5 - 0.7)))
    h1 = 1.0 / abs(1 - np.exp(1j * (2 * k - 2.5)))
    direct = (1.0 * h1 + h1 * 1.0) / div2
    assert abs(w.h_value(2, phases, k) - direct) < 1e-12


def test_h_small_divisor_raises():
    with pytest.raises(w.SmallDivisorError):
        w.h_value(1, (2.0,), 1.0)            # 2k - phi = 0 exactly


def test_h_nonnegative_random():
    rng = np.random.default_rng(3)
    for _ in range(50):
        J = int(rng.integers(1, 5))
        phases = tuple(rng.uniform(0.2, 3.0, J))
        k = float(rng.uniform(0.3, 3.0))
        try:
            val = w.h_value(J, phases, k)
        except w.SmallDivisorError:
            continue
        assert val >= 0.0


# --------------------------------------------------- recursion verification

def test_recursion_identity_random_synthetic():
    rng = np.random.default_rng(31)
    p_series = random_series(4, rng)
    ctx = CellContext(k_eff=1.17, omega=2.34, p_series=p_series)
    table = w.compute_table(ctx, (0.55, -0.55), 3, order=40)
    rep = w.verify_recursion(table, 2, 1)
    assert not rep.vacuous
    assert rep.max_residual < 1e-9


def test_recursion_identity_free_I3():
    F = w.floquet_solution(FREE, 1.21)
    table = w.compute_table(F, (0.3, 0.51, 0.93), 5, order=16)
    for l in (1, 2):
        rep = w.verify_recursion(table, 3, l)
        assert rep.max_residual < 1e-9


def test_recursion_vacuous_below_I2():
    F = w.floquet_solution(FREE, 1.21)
    table = w.compute_table(F, (0.3,), 3, order=8)
    rep = w.verify_recursion(table, 1, 0)
    assert rep.vacuous


def test_g_h_bound_free_and_mathieu():
    xs = np.arange(512) / 512
    for V0, E in ((FREE, 1.21), (MATHIEU, 2.0)):
        F = w.floquet_solution(V0, E)
        table = w.compute_table(F, (2.0, -2.0), 4, order=64)
        phi0_sup = float(np.max(np.abs(F.phi0_samples)))
        for idx in [key for key in table.G if key[1] == 1]:
            J, K, ms = idx
            phases = table.phases_of(ms)
            bound_vals = (2.0 * (2.0 * phi0_sup) ** J / math.factorial(J)
                          * table.h_perm_sum(phases))
            gvals = np.abs(table.G[idx].evaluate(xs))
            assert np.all(gvals <= bound_vals + 1e-12), (J, K, ms)


# ------------------------------------------------------------ mean criterion

def test_mean_criterion_free():
    for k in (1.0, 1.4):
        F = w.floquet_solution(FREE, k * k)
        table = w.compute_table(F, (2 * k,), 2, g_max_level=0)
        mc = table.mean_criterion((2 * k,))
        assert abs(mc - 1.0 / (2 * k)) < 1e-8


def test_mean_criterion_mathieu_perturbative():
    # small background amplitude: the criterion stays near the free value
    k_target = 1.0
    amp = 0.05
    V0 = w.mathieu_potential(amp)
    bs = w.band_structure(V0, 0.0, 6.0, 0.05)
    from scipy.optimize import brentq
    band = bs.bands[0]
    E = brentq(lambda e: w.quasimomentum(V0, e, bs) - k_target,
               band.lo + 1e-6 * band.width, band.hi - 1e-6 * band.width)
    F = w.floquet_solution(V0, E)
    table = w.compute_table(F, (2.0,), 2, g_max_level=0)
    mc = table.mean_criterion((2.0,))
    assert abs(mc) > 1e-3
    assert abs(mc - 0.5) < 0.05


def test_table_resonant_energy_raises():
    F = w.floquet_solution(FREE, 1.0)     # 2k = 2 matches phase 2
    with pytest.raises(w.SmallDivisorError) as err:
        w.compute_table(F, (2.0, -2.0), 2)
    assert err.value.K == 1
    assert err.value.phase_sum is not None


def test_table_allow_resonant_regularizes():
    F = w.floquet_solution(FREE, 1.0)
    table = w.compute_table(F, (2.0, -2.0), 2, allow_resonant=True)
    assert table.resonant_entries
    g = table.G_entry(1, 1, (2.0,))
    assert np.all(np.isfinite(g.coeffs))


def test_table_order_cap():
    F = w.floquet_solution(FREE, 1.21)
    with pytest.raises(w.ConfigError):
        w.compute_table(F, (0.3,), 7)


def test_dressed_vs_undressed_consistency():
    F = w.floquet_solution(MATHIEU, 2.0)
    table = w.compute_table(F, (2.0, -2.0), 3)
    xs = np.linspace(0, 1, 65)
    for key in [(2, 1), (2, 2)]:
        J, K = key
        ms = (2.0, -2.0)
        dressed = table.F_entry(J, K, ms).evaluate(xs)
        undressed = table.f_entry(J, K, ms).evaluate(xs)
        varpi = F.varpi_series.evaluate(xs).real
        assert np.max(np.abs(dressed
                             - undressed * np.exp(2j * K * varpi))) < 1e-6


def test_permutation_symmetry_of_entries():
    F = w.floquet_solution(FREE, 1.21)
    table = w.compute_table(F, (0.3, 0.5, 0.9), 4, order=16)
    xs = np.linspace(0, 1, 17)
    base = table.F_entry(3, 2, (0.3, 0.5, 0.9)).evaluate(xs)
    for perm in itertools.permutations((0.3, 0.5, 0.9)):
        other = table.F_entry(3, 2, perm).evaluate(xs)
        assert np.max(np.abs(base - other)) < 1e-12
