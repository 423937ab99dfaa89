"""Strong-converse bound evaluators.

Classical messages over a quantum channel get an exponent bound (lower
bound on the error probability) and a Wolfowitz-type bound; quantum
messages get the fidelity exponent, a Wolfowitz-type fidelity bound and
the two closed-form erasure-channel bounds.  Rates are in nats per
channel use.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.stats import binom

from .channels import KrausChannel, apply, apply_to_matrix
from .divergences import mutual_information
from .matcore import mat_power, partial_trace
from .states import (
    CqEnsemble,
    DensityMatrix,
    cq_state,
    derive_seed,
    pure_state,
    rng_for,
)

S_MIN = -0.5
CSV_HEADER = ("family", "n", "rate", "param_s", "param_gamma", "exponent", "raw", "bound")
FAMILIES = (
    "classical_exponent",
    "classical_wolfowitz",
    "quantum_exponent",
    "quantum_wolfowitz",
    "erasure_renyi",
    "erasure_hockeystick",
)


@dataclass
class BoundReport:
    """One evaluated converse bound.

    ``bound`` is ``raw`` clamped to [0, 1]; it is a lower bound on the
    error probability for the classical families and an upper bound on the
    fidelity for the quantum ones.
    """

    family: str
    n: int
    rate: float
    exponent: float
    raw: float
    params: dict = field(default_factory=dict)
    bound: float = field(init=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown bound family {self.family!r}")
        self.bound = clamp01(self.raw)

    def to_dict(self) -> dict:
        return asdict(self)

    def csv_row(self, rate_scale: float = 1.0) -> list:
        return [
            self.family,
            self.n,
            self.rate * rate_scale,
            self.params.get("s", ""),
            self.params.get("gamma", self.params.get("log_gamma", "")),
            self.exponent,
            self.raw,
            self.bound,
        ]


def clamp01(x: float) -> float:
    if math.isnan(x):
        return x
    return min(1.0, max(0.0, x))


def order_from_s(s: float) -> float:
    return 1.0 / (1.0 + s)


def s_from_order(lam: float) -> float:
    return 1.0 / lam - 1.0


def _check_s(s: float, allow_zero: bool = True) -> None:
    if not (S_MIN <= s < 0.0 or (allow_zero and s == 0.0)):
        raise ValueError(f"s must lie in [-1/2, 0), got {s}")


# --- classical information ----------------------------------------------------


def _e0_from_outputs(probs, outputs: Sequence[np.ndarray], s: float) -> float:
    avg = sum(p * mat_power(m, 1.0 / (1.0 + s)) for p, m in zip(probs, outputs) if p > 0)
    return -math.log(float(np.trace(mat_power(avg, 1.0 + s)).real))


def channel_outputs(e: CqEnsemble, ch: KrausChannel | None) -> CqEnsemble:
    if ch is None:
        return e
    return CqEnsemble(e.probs, tuple(apply(ch, s, 0) if len(s.layout) == 1 else _apply_all(ch, s) for s in e.states))


def _apply_all(ch: KrausChannel, rho: DensityMatrix) -> DensityMatrix:
    m, layout = rho.mat, rho.layout
    for t in range(len(layout)):
        m, layout = apply_to_matrix(ch, m, layout, t)
    return DensityMatrix(m, layout)


def classical_e0(e: CqEnsemble, ch: KrausChannel | None, s: float) -> float:
    """``E0(s) = -log Tr {sum_x P(x) N(rho_x)^(1/(1+s))}^(1+s)``.

    ``ch = None`` treats the ensemble states as channel outputs; a channel
    is applied to every subsystem of each input (product uses).
    """
    _check_s(s)
    out = channel_outputs(e, ch)
    return _e0_from_outputs(out.probs, [st.mat for st in out.states], s)


def classical_e0_slope(e: CqEnsemble, ch: KrausChannel | None = None, h: float = 1e-5) -> float:
    """Central difference of ``E0`` at ``s = 0``; should equal ``I(M;B)``."""
    out = channel_outputs(e, ch)
    mats = [st.mat for st in out.states]
    return (_e0_from_outputs(out.probs, mats, h) - _e0_from_outputs(out.probs, mats, -h)) / (2 * h)


def holevo_information(e: CqEnsemble, ch: KrausChannel | None = None) -> float:
    """``I(M;B)`` of the cq state at the channel output."""
    return mutual_information(cq_state(channel_outputs(e, ch)))


def classical_exponent_bound(n: int, rate: float, s: float, e0: float) -> BoundReport:
    """``eps >= 1 - exp(-n[-s R + E0(s)])`` for product (unentangled) inputs."""
    _check_s(s, allow_zero=False)
    exponent = -s * rate + e0
    return BoundReport("classical_exponent", n, rate, exponent, 1.0 - math.exp(-n * exponent),
                       {"s": s, "lambda": order_from_s(s), "e0": e0})


def s_grid(points: int = 64) -> np.ndarray:
    """Uniform grid on [-1/2, 0); doubling ``points`` keeps every old node."""
    return S_MIN + (-S_MIN) * np.arange(points) / points


def find_witness_s(rate: float, e0_curve: Callable[[float], float], grid: int = 64) -> float | None:
    """The grid ``s`` maximizing ``-s R + E0(s)`` when that maximum is positive."""
    best_s, best = None, 0.0
    for s in s_grid(grid):
        v = -s * rate + e0_curve(float(s))
        if v > best:
            best_s, best = float(s), v
    return best_s


def classical_wolfowitz(n: int, rate: float, c1: float, a1: float) -> BoundReport:
    """``eps >= 1 - 4 A1 / (n (R - C1)^2) - exp(-n (R - C1) / 2)``; needs ``R > C1``."""
    gap = rate - c1
    if gap <= 0:
        raise ValueError("n-fold Wolfowitz bound needs rate > C1; use classical_wolfowitz_oneshot")
    raw = 1.0 - 4.0 * a1 / (n * gap**2) - math.exp(-n * gap / 2.0)
    return BoundReport("classical_wolfowitz", n, rate, gap / 2.0, raw,
                       {"c1": c1, "a1": a1, "delta": gap / 2.0})


def classical_wolfowitz_oneshot(rate: float, info: float, a1: float, gamma: float) -> BoundReport:
    """``eps >= 1 - A1 / (log gamma - I)^2 - gamma exp(-R)`` for ``log gamma > I``."""
    lg = math.log(gamma)
    if lg <= info:
        raise ValueError("one-shot Wolfowitz bound needs log(gamma) > I(M;B)")
    raw = 1.0 - a1 / (lg - info) ** 2 - gamma * math.exp(-rate)
    return BoundReport("classical_wolfowitz", 1, rate, rate - lg, raw,
                       {"gamma": gamma, "info": info, "a1": a1})


# --- quantum information ------------------------------------------------------


def _g_core(m: np.ndarray, layout, s: float, na: int = 1) -> float:
    xi = partial_trace(mat_power(m, 1.0 / (1.0 + s)), layout, range(na, len(layout)))
    return -math.log(float(np.trace(mat_power(xi, 1.0 + s)).real))


def g_function(sigma_ab: DensityMatrix, s: float, na: int = 1) -> float:
    """``g(s) = -log Tr [Tr_A sigma_AB^(1/(1+s))]^(1+s)`` for ``s`` in [-1/2, 0]."""
    _check_s(s)
    return _g_core(sigma_ab.mat, sigma_ab.layout, s, na)


def g_slope(sigma_ab: DensityMatrix, na: int = 1, h: float = 1e-5) -> float:
    """Central difference of ``g`` at 0; should equal the coherent information."""
    m, lay = sigma_ab.mat, sigma_ab.layout
    return (_g_core(m, lay, h, na) - _g_core(m, lay, -h, na)) / (2 * h)


def channel_output_state(rho_aap: DensityMatrix, ch: KrausChannel) -> DensityMatrix:
    """Apply ``ch`` to every subsystem after the reference (subsystem 0)."""
    m, layout = rho_aap.mat, rho_aap.layout
    for t in range(1, len(layout)):
        m, layout = apply_to_matrix(ch, m, layout, t)
    return DensityMatrix(m, layout)


def quantum_e0(rho_aap: DensityMatrix, ch: KrausChannel, s: float) -> float:
    """Quantum ``E0(s)``: ``g(s)`` of the channel output ``N(rho_AA')``.

    Subsystem 0 is the reference A; one channel use acts on each remaining
    subsystem, so a layout ``(dA, d, d)`` means two uses.
    """
    return g_function(channel_output_state(rho_aap, ch), s)


def quantum_fidelity_exponent_bound(n: int, rate: float, s: float, e0: float) -> BoundReport:
    """``F <= exp(-[-s n R + E0])`` with ``e0`` evaluated for the n-use input.

    The reported exponent is per channel use, ``-s R + e0 / n``.
    """
    _check_s(s, allow_zero=False)
    exponent = -s * rate + e0 / n
    return BoundReport("quantum_exponent", n, rate, exponent, math.exp(-n * exponent),
                       {"s": s, "lambda": order_from_s(s), "e0": e0})


def quantum_wolfowitz(n: int, rate: float, q_reg: float, a_q: float) -> BoundReport:
    """``F <= 4 A_n / (n^2 (R - Q)^2) + exp(-n (R - Q) / 2)``; needs ``R > Q``."""
    gap = rate - q_reg
    if gap <= 0:
        raise ValueError("quantum Wolfowitz bound needs rate > q_reg")
    raw = 4.0 * a_q / (n**2 * gap**2) + math.exp(-n * gap / 2.0)
    return BoundReport("quantum_wolfowitz", n, rate, gap / 2.0, raw,
                       {"q_reg": q_reg, "a_q": a_q, "delta": gap / 2.0})


def quantum_wolfowitz_oneshot(rate: float, coh: float, a1: float, gamma: float) -> BoundReport:
    """``F <= A1 / (log gamma - I(A>B))^2 + gamma exp(-R)`` for ``log gamma > I(A>B)``."""
    lg = math.log(gamma)
    if lg <= coh:
        raise ValueError("one-shot bound needs log(gamma) > coherent information")
    raw = a1 / (lg - coh) ** 2 + gamma * math.exp(-rate)
    return BoundReport("quantum_wolfowitz", 1, rate, rate - lg, raw,
                       {"gamma": gamma, "coherent_info": coh, "a1": a1})


@dataclass
class AdditivityReport:
    """Best-effort minima of ``E0(s)`` over pure inputs; not a certificate of optimality."""

    s: float
    e0_star: dict
    gap: float | None
    restarts: int
    seed: int
    inputs: dict
    label: str = "estimate (non-rigorous local search)"


def _pure_from_params(x: np.ndarray, da: int, dp: int) -> DensityMatrix:
    half = x.size // 2
    v = x[:half] + 1j * x[half:]
    return pure_state(v, (da, dp))


def minimize_e0(ch: KrausChannel, s: float, n: int = 1, restarts: int = 4, seed: int = 0,
                maxiter: int = 2000) -> tuple[float, DensityMatrix]:
    """Local search for ``min E0(s)`` over pure inputs on ``A (x) A'^n`` with ``|A| = din^n``.

    The maximally entangled input is always one of the starting points;
    the other ``restarts`` starts are Haar-random.
    """
    _check_s(s)
    dp = ch.din**n
    da = dp

    def e0_of(rho: DensityMatrix) -> float:
        layout = (da,) + (ch.din,) * n
        return quantum_e0(DensityMatrix(rho.mat, layout), ch, s)

    def objective(x):
        return e0_of(_pure_from_params(x, da, dp))

    phi = np.eye(dp, dtype=complex).reshape(-1) / np.sqrt(dp)
    starts = [np.concatenate([phi.real, phi.imag])]
    for r in range(restarts):
        rng = rng_for(derive_seed(seed, r))
        starts.append(rng.standard_normal(2 * da * dp))
    best_val, best_x = math.inf, None
    for x0 in starts:
        res = minimize(objective, x0, method="Nelder-Mead",
                       options={"maxiter": maxiter, "xatol": 1e-9, "fatol": 1e-12, "adaptive": True})
        val = min(float(res.fun), objective(x0))
        x = res.x if res.fun <= objective(x0) else x0
        if val < best_val:
            best_val, best_x = val, x
    rho = _pure_from_params(best_x, da, dp)
    return best_val, DensityMatrix(rho.mat, (da,) + (ch.din,) * n)


def additivity_probe(ch: KrausChannel, s: float, n_max: int = 2, restarts: int = 4,
                     seed: int = 0, maxiter: int = 2000) -> AdditivityReport:
    """Compare ``min E0(s, N (x) N)`` with ``2 min E0(s, N)`` by local search."""
    if n_max not in (1, 2):
        raise ValueError("n_max must be 1 or 2")
    e0_star, inputs = {}, {}
    for n in range(1, n_max + 1):
        val, rho = minimize_e0(ch, s, n, restarts, derive_seed(seed, n), maxiter)
        e0_star[n] = val
        inputs[n] = rho
    gap = e0_star[2] - 2 * e0_star[1] if n_max == 2 else None
    return AdditivityReport(s, e0_star, gap, restarts, seed, inputs)


# --- erasure channel ----------------------------------------------------------


def erasure_capacity(p: float, d: int) -> float:
    """Single-letter quantum capacity ``(1 - 2p)^+ log d`` of the erasure channel."""
    return max(1.0 - 2.0 * p, 0.0) * math.log(d)


def h_function(x: float, p: float, d: int) -> float:
    """``log[p d^(1-x) + (1-p) d^(x-1)]``."""
    return math.log(p * d ** (1.0 - x) + (1.0 - p) * d ** (x - 1.0))


def h_slope_at_one(p: float, d: int) -> float:
    """``lim_{x -> 1} h(x) / (x - 1) = h'(1) = (1 - 2p) log d``."""
    return (1.0 - 2.0 * p) * math.log(d)


def erasure_kq_renyi(n: int, p: float, d: int, lam: float) -> float:
    """``n/(lam-1) log[p d^(1-lam) + (1-p) d^(lam-1)]``, the maximally entangled input value."""
    return n * h_function(lam, p, d) / (lam - 1.0)


def erasure_renyi_bound(n: int, rate: float, p: float, d: int, lam: float) -> BoundReport:
    """``F <= exp(-((lam-1)/lam) n [R - h(lam)/(lam-1)])`` for order ``lam`` in (1, 2]."""
    if not 1.0 < lam <= 2.0:
        raise ValueError(f"order must lie in (1, 2], got {lam}")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    hval = h_function(lam, p, d)
    exponent = ((lam - 1.0) / lam) * (rate - hval / (lam - 1.0))
    return BoundReport("erasure_renyi", n, rate, exponent, math.exp(-n * exponent), {
        "s": s_from_order(lam), "lambda": lam, "p": p, "d_A": d,
        "kq_bound": erasure_kq_renyi(n, p, d, lam), "h": hval,
        "h_slope": h_slope_at_one(p, d), "q": erasure_capacity(p, d),
    })


def binomial_tail(n: int, p: float, threshold: float) -> float:
    """``P[K <= threshold]`` for ``K ~ Binomial(n, p)``; empty when ``threshold < 0``."""
    if threshold < 0:
        return 0.0
    return float(binom.cdf(min(n, math.floor(threshold)), n, p))


def erasure_hockey_exact(n: int, p: float, d: int, log_gamma: float) -> float:
    """``sum_k C(n,k) (1-p)^(n-k) p^k (1 - gamma d^(2k-n))^+`` over ``k`` erasures.

    Value of ``Tr(rho_AB^n - gamma 1 (x) rho_B^n)^+`` for the maximally
    entangled input, block by block.
    """
    k = np.arange(n + 1)
    gap = 1.0 - np.exp(np.minimum(log_gamma + (2 * k - n) * math.log(d), 0.0))
    return float(np.sum(binom.pmf(k, n, p) * gap))


def erasure_tail_threshold(n: int, log_gamma: float, d: int) -> float:
    """``n/2 - floor(log gamma / (2 log d))``."""
    return n / 2.0 - math.floor(log_gamma / (2.0 * math.log(d)))


def erasure_hockeystick_bound(n: int, rate: float, p: float, d: int) -> BoundReport:
    """Two-term fidelity bound from the hockey-stick divergence with ``log gamma = n (R + Q)/2``.

    The second term is a multiplicative Chernoff bound on the binomial tail
    below the threshold, with deviation ``t = n[(2p-1)/2 + (R+Q)/(4 log d)] - 1``
    (the ``-1`` absorbs the floor).  The closed form with deviation
    ``n[(2p-1)^+/2 + R/(4 log d)]`` is kept in ``params["chernoff_naive"]``;
    for ``p < 1/2`` it is not an upper bound on the tail.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError("p must lie in (0, 1]; p = 0 has no Chernoff term, use binomial_tail")
    q = erasure_capacity(p, d)
    if rate <= q:
        raise ValueError("rate must exceed the capacity (1 - 2p)^+ log d")
    ld = math.log(d)
    log_gamma = n * (rate + q) / 2.0
    threshold = erasure_tail_threshold(n, log_gamma, d)
    term1 = math.exp(-n * (rate - q) / 2.0)
    dev_rate = (2.0 * p - 1.0) / 2.0 + (rate + q) / (4.0 * ld)
    t = n * dev_rate - 1.0
    chernoff = math.exp(-(t**2) / (2.0 * n * p)) if t > 0 else 1.0
    naive = math.exp(-(n / (2.0 * p)) * (max(2.0 * p - 1.0, 0.0) / 2.0 + rate / (4.0 * ld)) ** 2)
    rates = ((rate - q) / 2.0, dev_rate**2 / (2.0 * p))
    return BoundReport("erasure_hockeystick", n, rate, min(rates), term1 + chernoff, {
        "p": p, "d_A": d, "q": q, "log_gamma": log_gamma, "threshold": threshold,
        "exact_tail": binomial_tail(n, p, threshold), "chernoff": chernoff,
        "chernoff_naive": naive, "term1": term1,
        "kq_exact": erasure_hockey_exact(n, p, d, log_gamma),
        "rate_term1": rates[0], "rate_term2": rates[1],
    })


def best_erasure_order(rate: float, p: float, d: int, grid: int = 200) -> float:
    """Order in (1, 2] maximizing the per-use Renyi erasure exponent on a uniform grid."""
    lams = 1.0 + np.arange(1, grid + 1) / grid
    ex = [((l - 1.0) / l) * (rate - h_function(l, p, d) / (l - 1.0)) for l in lams]
    return float(lams[int(np.argmax(ex))])
