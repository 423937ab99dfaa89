import json
import math

import numpy as np
import pytest

from sconv import converses as cv
from sconv.channels import erasure_channel, identity_channel, random_cptp, unitary_channel
from sconv.divergences import coherent_information, renyi
from sconv.harness import phi_input
from sconv.states import CqEnsemble, DensityMatrix, random_cq, random_density, random_pure, random_unitary


# --- classical exponent -------------------------------------------------------


def test_classical_e0_basic():
    e = random_cq(3, (2,), 1)
    ch = random_cptp(2, 2, 2, 5)
    assert cv.classical_e0(e, ch, 0.0) == pytest.approx(0.0, abs=1e-12)
    st = random_density((2,), None, 2)
    same = CqEnsemble([0.4, 0.6], (st, st))
    for s in (-0.5, -0.3, -0.1):
        assert cv.classical_e0(same, None, s) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        cv.classical_e0(e, None, -0.6)
    with pytest.raises(ValueError):
        cv.classical_e0(e, None, 0.1)


def test_classical_e0_slope_is_holevo_information():
    for s in range(20):
        e = random_cq(3, (2,), s)
        ch = random_cptp(2, 3, 2, 50 + s)
        assert cv.classical_e0_slope(e, ch) == pytest.approx(cv.holevo_information(e, ch), abs=1e-4)


def test_classical_e0_product_inputs():
    # a channel acts on every subsystem of a product input, so E0 adds
    e1 = random_cq(2, (2,), 3)
    ch = random_cptp(2, 2, 2, 4)
    st = [a.tensor(a) for a in e1.states]
    e2 = CqEnsemble(e1.probs, tuple(st))
    single = cv.classical_e0(e1, ch, -0.3)
    double = cv.classical_e0(e2, ch, -0.3)
    assert double < single <= 0.0


def test_classical_exponent_bound_examples():
    assert cv.classical_exponent_bound(5, 1.0, -1e-12, 0.0).bound == pytest.approx(0.0, abs=1e-10)
    r = cv.classical_exponent_bound(10, math.log(2), -0.25, 0.1)
    assert r.raw == pytest.approx(1 - math.exp(-2.7328679513998633))
    assert r.exponent == pytest.approx(0.25 * math.log(2) + 0.1)
    with pytest.raises(ValueError):
        cv.classical_exponent_bound(1, 1.0, 0.0, 0.0)


def test_witness_scan():
    e = random_cq(2, (2,), 7)
    info = cv.holevo_information(e)
    curve = lambda s: cv.classical_e0(e, None, s)
    s_star = cv.find_witness_s(info + 0.2, curve)
    assert s_star is not None and -0.5 <= s_star < 0
    assert -s_star * (info + 0.2) + curve(s_star) > 0
    assert cv.find_witness_s(0.5 * info, curve) is None
    # every coarse node is a fine node, so a finer grid never loses value
    coarse = max(-s * (info + 0.1) + curve(s) for s in cv.s_grid(32))
    fine = max(-s * (info + 0.1) + curve(s) for s in cv.s_grid(64))
    assert fine >= coarse
    assert set(cv.s_grid(32)) <= set(cv.s_grid(64))


def test_classical_wolfowitz():
    r = cv.classical_wolfowitz(10, 1.0, 0.6, 0.0)
    assert r.raw == pytest.approx(1 - math.exp(-10 * 0.4 / 2))
    prev = -math.inf
    for n in range(1, 101):
        b = cv.classical_wolfowitz(n, 1.0, 0.6, 0.3).raw
        assert b > prev
        prev = b
    with pytest.raises(ValueError):
        cv.classical_wolfowitz(10, 0.5, 0.6, 0.1)


def test_classical_wolfowitz_oneshot_arithmetic():
    info, delta, a1, rate = 0.3, 0.2, 0.05, 2.0
    gamma = math.exp(info + 2 * delta)
    r = cv.classical_wolfowitz_oneshot(rate, info, a1, gamma)
    assert r.raw == pytest.approx(1 - a1 / (2 * delta) ** 2 - gamma * math.exp(-rate))
    with pytest.raises(ValueError):
        cv.classical_wolfowitz_oneshot(rate, info, a1, math.exp(info - 0.01))


# --- quantum exponent ---------------------------------------------------------


def test_g_function_basic():
    rho = random_density((2, 3), None, 2)
    assert cv.g_function(rho, 0.0) == pytest.approx(0.0, abs=1e-12)
    prod = random_pure((2,), 1).tensor(random_pure((3,), 2))
    for s in (-0.5, -0.25):
        assert cv.g_function(prod, s) == pytest.approx(0.0, abs=1e-10)
    with pytest.raises(ValueError):
        cv.g_function(rho, -0.7)


def test_g_slope_is_coherent_information():
    for s in range(20):
        rho = random_density((2, 2), None, s)
        assert cv.g_slope(rho) == pytest.approx(coherent_information(rho), abs=1e-4)


def test_quantum_exponent_bound_examples():
    r = cv.quantum_fidelity_exponent_bound(1, 1.0, -0.3, 0.0)
    assert r.raw == pytest.approx(math.exp(-0.3))
    assert cv.quantum_fidelity_exponent_bound(3, 1.0, -1e-12, 0.0).bound == pytest.approx(1.0)


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("lam", [1.5, 2.0])
def test_generic_exponent_versus_erasure_closed_form(n, lam):
    p, d, rate = 0.25, 2, 0.8
    s = cv.s_from_order(lam)
    ch = erasure_channel(p, d)
    closed = cv.erasure_renyi_bound(n, rate, p, d, lam)
    # the closed form evaluates the divergence at sigma_B = rho_B
    out = cv.channel_output_state(phi_input(d, n), ch)
    rho_b = np.asarray(out.reduce(range(1, n + 1)).mat)
    d_at_rho_b = renyi(out, np.kron(np.eye(d**n), rho_b), lam)
    e0_at_rho_b = (1 - lam) / lam * d_at_rho_b
    at_rho_b = cv.quantum_fidelity_exponent_bound(n, rate, s, e0_at_rho_b)
    assert at_rho_b.raw == pytest.approx(closed.raw, rel=1e-10)
    # the optimized E0 can only tighten it
    e0 = cv.quantum_e0(phi_input(d, n), ch, s)
    generic = cv.quantum_fidelity_exponent_bound(n, rate, s, e0)
    assert generic.raw <= closed.raw + 1e-12
    assert e0 == pytest.approx(-n * math.log((1 - p) * d ** (-s) + p * d**s), abs=1e-10)


def test_quantum_wolfowitz():
    q = cv.erasure_capacity(0.25, 2)
    assert q == pytest.approx(0.5 * math.log(2))
    r = cv.quantum_wolfowitz(4, 1.0, q, 0.0)
    assert r.raw == pytest.approx(math.exp(-2 * (1 - q)))
    vals = [cv.quantum_wolfowitz(n, 1.0, q, 0.2).raw for n in range(1, 50)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        cv.quantum_wolfowitz(4, q, q, 0.0)
    one = cv.quantum_wolfowitz_oneshot(3.0, 0.2, 0.1, math.exp(0.5))
    assert one.raw == pytest.approx(0.1 / 0.3**2 + math.exp(0.5 - 3.0))


# --- erasure ------------------------------------------------------------------


def test_h_function():
    for p in (0.0, 0.3, 1.0):
        for d in (2, 3):
            assert cv.h_function(1.0, p, d) == pytest.approx(0.0, abs=1e-15)
    assert cv.erasure_kq_renyi(1, 0.5, 2, 2.0) == pytest.approx(math.log(1.25))
    assert cv.h_slope_at_one(0.25, 2) == pytest.approx(0.5 * math.log(2))


def test_erasure_renyi_validation():
    with pytest.raises(ValueError):
        cv.erasure_renyi_bound(1, 1.0, 0.2, 2, 1.0)
    with pytest.raises(ValueError):
        cv.erasure_renyi_bound(1, 1.0, 0.2, 2, 2.5)
    with pytest.raises(ValueError):
        cv.erasure_renyi_bound(1, 1.0, 1.2, 2, 2.0)


def test_binomial_tail():
    assert cv.binomial_tail(4, 0.5, 1) == pytest.approx(5 / 16)
    assert cv.binomial_tail(4, 0.5, -0.5) == 0.0
    assert cv.binomial_tail(4, 0.3, 10) == pytest.approx(1.0)


def test_hockey_threshold_floor():
    assert cv.erasure_tail_threshold(4, 3.0, 2) == 4 / 2 - math.floor(3.0 / (2 * math.log(2)))


@pytest.mark.parametrize("p", [0.1, 0.25, 0.5, 0.75, 1.0])
def test_chernoff_term_dominates_exact_tail(p):
    d = 2
    q = cv.erasure_capacity(p, d)
    for rate in (q + 0.05, 2 * q + 0.1, 1.0):
        for n in range(1, 21):
            r = cv.erasure_hockeystick_bound(n, rate, p, d)
            assert r.params["exact_tail"] <= r.params["chernoff"] + 1e-15


def test_exact_hockey_sum_below_bound():
    p, d = 0.25, 2
    rate = 2 * cv.erasure_capacity(p, d)
    for n in range(1, 30):
        r = cv.erasure_hockeystick_bound(n, rate, p, d)
        # the exact K value is bounded by the first term plus the exact tail
        assert r.params["kq_exact"] <= r.params["term1"] + r.params["exact_tail"] + 1e-12


def test_unfloored_deviation_undercuts_tail_below_half():
    # with p < 1/2 the deviation (2p-1)^+/2 + R/(4 log d) overstates the gap to the mean
    r = cv.erasure_hockeystick_bound(64, 2 * cv.erasure_capacity(0.25, 2), 0.25, 2)
    assert r.params["chernoff_naive"] < r.params["exact_tail"]


def test_hockey_bound_errors():
    with pytest.raises(ValueError):
        cv.erasure_hockeystick_bound(4, 0.1, 0.25, 2)
    with pytest.raises(ValueError):
        cv.erasure_hockeystick_bound(4, 1.0, 0.0, 2)


def test_bounds_decrease_for_rates_above_capacity():
    for p in (0.1, 0.25, 0.5):
        q = cv.erasure_capacity(p, 2)
        rate = q + 0.3
        raws = [cv.erasure_hockeystick_bound(n, rate, p, 2).raw for n in range(2, 65)]
        assert all(b < a for a, b in zip(raws, raws[1:]))
        ren = [cv.erasure_renyi_bound(n, rate, p, 2, 1.5).raw for n in range(2, 65)]
        assert all(b < a for a, b in zip(ren, ren[1:]))


def test_best_order_maximizes_exponent():
    lam = cv.best_erasure_order(0.7, 0.25, 2)
    ex = cv.erasure_renyi_bound(1, 0.7, 0.25, 2, lam).exponent
    for other in (1.1, 1.5, 1.9):
        assert ex >= cv.erasure_renyi_bound(1, 0.7, 0.25, 2, other).exponent


# --- reports ------------------------------------------------------------------


def test_bound_report_clamp_and_serialization():
    r = cv.classical_wolfowitz(1, 1.0, 0.9, 5.0)
    assert r.raw < 0 and r.bound == 0.0
    blob = json.loads(json.dumps(r.to_dict()))
    assert blob["raw"] == r.raw and blob["family"] == "classical_wolfowitz"
    row = cv.erasure_renyi_bound(3, 0.5, 0.25, 2, 2.0).csv_row()
    assert len(row) == len(cv.CSV_HEADER)
    assert row[3] == pytest.approx(-0.5)
    with pytest.raises(ValueError):
        cv.BoundReport("nonsense", 1, 1.0, 0.0, 0.5)


# --- additivity probe ---------------------------------------------------------


def test_additivity_probe_erasure():
    p, d, s = 0.25, 2, -0.25
    rep = cv.additivity_probe(erasure_channel(p, d), s, n_max=2, restarts=0, seed=3, maxiter=300)
    closed = -math.log((1 - p) * d ** (-s) + p * d**s)
    assert rep.e0_star[1] == pytest.approx(closed, abs=1e-4)
    assert rep.e0_star[2] == pytest.approx(2 * closed, abs=1e-4)
    assert abs(rep.gap) <= 1e-4
    assert "non-rigorous" in rep.label


def test_additivity_probe_reproducible_and_monotone_in_restarts():
    u = random_unitary(2, np.random.default_rng(1))
    ch = unitary_channel(u)
    a = cv.minimize_e0(ch, -0.3, 1, restarts=1, seed=4, maxiter=200)[0]
    b = cv.minimize_e0(ch, -0.3, 1, restarts=1, seed=4, maxiter=200)[0]
    more = cv.minimize_e0(ch, -0.3, 1, restarts=3, seed=4, maxiter=200)[0]
    assert a == b and math.isfinite(a)
    assert more <= a
    with pytest.raises(ValueError):
        cv.additivity_probe(identity_channel(2), -0.3, n_max=3)
