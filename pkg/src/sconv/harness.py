"""Seeded randomized checks of the divergence and converse inequalities.

Every check draws trial ``i`` from ``derive_seed(seed, i)`` and returns a
``CheckReport``.  A trial fails when its slack is below ``-tol``; trials
whose precondition does not hold are counted as skipped.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import converses as cv
from .channels import (
    KrausChannel,
    apply_to_matrix,
    discard_flag_channel,
    erasure_channel,
    random_cptp,
    unitary_channel,
)
from .derived import (
    info_second_moment_c,
    info_variance_c,
    k_c_classical,
    k_c_cq,
    k_q,
    log_ratio_moments,
    second_moment_cap,
    sibson_decomposition,
    variance_bound_c,
)
from .divergences import (
    DivergenceKind,
    Renyi,
    coherent_information,
    dc_scalar,
    dq_scalar,
    parse_kind,
    relative_entropy,
    renyi,
)
from .matcore import mat_log, mat_power, positive_projector, partial_trace
from .states import (
    CqEnsemble,
    DensityMatrix,
    derive_seed,
    pure_state,
    random_cq,
    random_density,
    random_probs,
    random_pure,
    random_unitary,
    rng_for,
)

DEFAULT_TOL = 1e-9
DERIVATIVE_TOL = 1e-4

MONOTONE_KINDS = (
    "renyi:0.3", "renyi:0.5", "renyi:1.5", "renyi:2",
    "quasi:0.3", "quasi:0.5", "quasi:1.5", "quasi:2",
    "hockey:1", "hockey:1.5", "hockey:3",
)
CODE_KINDS = ("renyi:2", "renyi:0.5", "quasi:1.5", "hockey:1.5")


@dataclass
class CheckReport:
    check_name: str
    trials: int
    failures: int
    skipped: int
    worst_margin: float | None
    seed: int
    tolerance: float
    params: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, default=_json_default)


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


class _Tally:
    def __init__(self, name: str, seed: int, tol: float, params: dict):
        self.name, self.seed, self.tol, self.params = name, seed, tol, params
        self.evaluated = self.failures = self.skipped = 0
        self.worst: float | None = None

    def add(self, slack: float, ok: bool = True) -> None:
        self.evaluated += 1
        if math.isnan(slack) or slack < -self.tol or not ok:
            self.failures += 1
        if not math.isnan(slack) and (self.worst is None or slack < self.worst):
            self.worst = slack

    def skip(self) -> None:
        self.skipped += 1

    def report(self) -> CheckReport:
        worst = self.worst
        if worst is not None and math.isinf(worst):
            worst = None if worst > 0 else -1e308
        return CheckReport(self.name, self.evaluated + self.skipped, self.failures, self.skipped,
                           worst, self.seed, self.tol, dict(self.params))


def _as_kind(kind) -> DivergenceKind:
    return parse_kind(kind) if isinstance(kind, str) else kind


def _label(kind) -> str:
    return _as_kind(kind).label()


def _gap(before: float, after: float) -> float:
    """``before - after`` with ``inf - inf = 0``."""
    if math.isinf(before) and math.isinf(after) and before == after:
        return 0.0
    return before - after


# --- divergence properties ----------------------------------------------------


def check_monotonicity(kind="renyi:2", trials: int = 500, seed: int = 0, tol: float = DEFAULT_TOL,
                       dims: Sequence[int] = (2, 3, 4)) -> CheckReport:
    """Data processing ``D(rho||sigma) >= D(E rho || E sigma)`` for random channels."""
    kind = _as_kind(kind)
    t = _Tally("monotonicity", seed, tol, {"kind": kind.label(), "dims": list(dims)})
    for i in range(trials):
        rng = rng_for(derive_seed(seed, i))
        din = int(rng.choice(dims))
        dout = int(rng.choice(dims))
        denv = int(rng.integers(1, 5))
        while dout * denv < din:
            denv += 1
        sub = rng.integers(0, 2**63, size=3)
        rho = random_density((din,), int(rng.integers(1, din + 1)), int(sub[0]))
        sigma = random_density((din,), None, int(sub[1]))
        ch = random_cptp(din, dout, denv, int(sub[2]))
        t.add(_gap(kind(rho, sigma), kind(ch(rho.mat), ch(sigma.mat))))
    return t.report()


def check_tensor_invariance(kind="renyi:2", trials: int = 200, seed: int = 0,
                            tol: float = DEFAULT_TOL) -> CheckReport:
    """``D(rho (x) kappa || sigma (x) kappa) = D(rho || sigma)``."""
    kind = _as_kind(kind)
    t = _Tally("tensor_invariance", seed, tol, {"kind": kind.label()})
    for i in range(trials):
        rng = rng_for(derive_seed(seed, i))
        d, dk = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        sub = rng.integers(0, 2**63, size=3)
        rho = random_density((d,), None, int(sub[0]))
        sigma = random_density((d,), None, int(sub[1]))
        kappa = random_density((dk,), None, int(sub[2]))
        t.add(-abs(kind(rho.tensor(kappa), sigma.tensor(kappa)) - kind(rho, sigma)))
    return t.report()


def check_binary_monotone(kind="renyi:2", trials: int = 200, seed: int = 0,
                          tol: float = DEFAULT_TOL, betas: Sequence[float] = (0.1, 0.3, 0.5, 0.7, 0.9)) -> CheckReport:
    """Grid check: ``d_c(1-a||b)`` nonincreasing for ``a <= 1-b``; ``d_q(a||b)`` nondecreasing for ``a >= b``.

    ``trials`` is the number of grid points per segment; the seed is unused.
    """
    kind = _as_kind(kind)
    t = _Tally("binary_monotone", seed, tol, {"kind": kind.label(), "betas": list(betas)})
    for beta in betas:
        a_c = np.linspace(0.0, 1.0 - beta, trials)
        vals = [dc_scalar(kind, a, beta) for a in a_c]
        for lo, hi in zip(vals, vals[1:]):
            t.add(_gap(lo, hi))
        a_q = np.linspace(beta, 1.0, trials)
        vals = [dq_scalar(kind, a, beta) for a in a_q]
        for lo, hi in zip(vals, vals[1:]):
            t.add(_gap(hi, lo))
    return t.report()


def check_basis_independence(kind="renyi:2", trials: int = 100, seed: int = 0,
                             tol: float = 1e-10) -> CheckReport:
    """Matrix evaluation on a randomly rotated pair ``{Pi0, Pi1}`` equals the scalar formula."""
    kind = _as_kind(kind)
    t = _Tally("basis_independence", seed, tol, {"kind": kind.label()})
    for i in range(trials):
        rng = rng_for(derive_seed(seed, i))
        u = random_unitary(2, rng)
        p0 = u @ np.diag([1.0, 0.0]) @ u.conj().T
        p1 = u @ np.diag([0.0, 1.0]) @ u.conj().T
        a, beta = float(rng.uniform(0.01, 0.99)), float(rng.uniform(0.01, 0.99))
        mc = kind((1 - a) * p0 + a * p1, beta * p0 + (1 - beta) * p1)
        mq = kind(a * p0 + (1 - a) * p1, beta * p0 + (1 / beta - beta) * p1)
        t.add(-max(abs(mc - dc_scalar(kind, a, beta)), abs(mq - dq_scalar(kind, a, beta))))
    return t.report()


def check_positivity_lemma(trials: int = 500, seed: int = 0, tol: float = DEFAULT_TOL,
                           dims: Sequence[int] = (2, 3)) -> CheckReport:
    """``Tr P rho (log rho - log sigma) >= 0`` with ``P`` the projector onto ``{rho - sigma > 0}``."""
    t = _Tally("positivity", seed, tol, {"dims": list(dims)})
    for i in range(trials):
        rng = rng_for(derive_seed(seed, i))
        d = int(rng.choice(dims))
        sub = rng.integers(0, 2**63, size=2)
        rho = random_density((d,), None, int(sub[0])).mat
        sigma = random_density((d,), None, int(sub[1])).mat
        p = positive_projector(rho - sigma)
        t.add(float(np.trace(p @ rho @ (mat_log(rho) - mat_log(sigma))).real))
    return t.report()


def check_chebyshev_lemma(trials: int = 300, seed: int = 0, tol: float = DEFAULT_TOL,
                          dims: Sequence[int] = (2, 3)) -> CheckReport:
    """``Tr P rho <= V / (log gamma - S)^2`` with ``P = {rho - gamma sigma >= 0}`` and ``gamma = e^(S+1)``.

    ``sigma`` is rank deficient in about a fifth of trials; pairs violating the support condition are skipped.
    """
    t = _Tally("chebyshev", seed, tol, {"dims": list(dims), "log_gamma": "S + 1"})
    for i in range(trials):
        rng = rng_for(derive_seed(seed, i))
        d = int(rng.choice(dims))
        sub = rng.integers(0, 2**63, size=2)
        rho = random_density((d,), int(rng.integers(1, d + 1)), int(sub[0])).mat
        sigma = random_density((d,), d - int(rng.random() < 0.2), int(sub[1])).mat
        s = relative_entropy(rho, sigma)
        if math.isinf(s):
            t.skip()
            continue
        log_gamma = s + 1.0
        _, second = log_ratio_moments(rho, sigma)
        p = positive_projector(rho - math.exp(log_gamma) * sigma)
        lhs = float(np.trace(p @ rho).real)
        t.add((second - s * s) / (log_gamma - s) ** 2 - lhs)
    return t.report()


def _haar_isometry(rows: int, cols: int, rng) -> np.ndarray:
    return random_unitary(rows, rng)[:, :cols]


def check_projector_lemma(d1: int = 2, d2: int = 2, dx: int | None = None, trials: int = 100,
                          seed: int = 0, tol: float = DEFAULT_TOL) -> CheckReport:
    """``|Y2| rho_XY1`` is a projector for maximally entangled ``psi_{X Y1 Y2}`` in random bases."""
    dx = d1 * d2 if dx is None else dx
    if dx < d1 * d2:
        raise ValueError("projector lemma needs |X| >= |Y1||Y2|")
    t = _Tally("projector", seed, tol, {"d1": d1, "d2": d2, "dx": dx})
    k = d1 * d2
    for i in range(trials):
        rng = rng_for(derive_seed(seed, i))
        bx = _haar_isometry(dx, k, rng)
        by = random_unitary(k, rng)
        psi = np.einsum("xk,yk->xy", bx, by).reshape(-1) / math.sqrt(k)
        rho = partial_trace(np.outer(psi, psi.conj()), (dx, d1, d2), (0, 1))
        q = d2 * rho
        defect = float(np.max(np.abs(q @ q - q)))
        rank_ok = abs(float(np.trace(q).real) - d2) <= 1e-9
        t.add(-defect, rank_ok)
    return t.report()


def check_afinite(trials: int = 200, seed: int = 0, tol: float = DEFAULT_TOL,
                  nsym: int = 2, dim: int = 2) -> CheckReport:
    """Classical-input information variance stays below ``g(|MB|) + g(|B|)``.

    ``params["second_moment_failures"]`` counts trials where even the raw
    second moment (without subtracting ``I^2``) exceeds the bound.
    """
    t = _Tally("afinite", seed, tol, {"nsym": nsym, "dim": dim})
    strong = 0
    for i in range(trials):
        e = random_cq(nsym, (dim,), derive_seed(seed, i))
        bound = variance_bound_c(e)
        strong += info_second_moment_c(e) > bound + tol
        t.add(bound - info_variance_c(e))
    t.params["second_moment_failures"] = int(strong)
    t.params["bound"] = second_moment_cap(nsym * dim) + second_moment_cap(dim)
    return t.report()


def _stochastic(rows: int, cols: int, rng) -> np.ndarray:
    return np.stack([random_probs(cols, rng) for _ in range(rows)])


def check_markov_k(trials: int = 300, seed: int = 0, tol: float = DEFAULT_TOL,
                   sizes: Sequence[int] = (2, 3), lam: float = 2.0) -> CheckReport:
    """``K_c(S; S_hat) <= K_c(X; Y)`` along random classical chains ``S - X - Y - S_hat``."""
    kind = Renyi(lam)
    t = _Tally("markov_k", seed, tol, {"sizes": list(sizes), "kind": kind.label()})
    for i in range(trials):
        rng = rng_for(derive_seed(seed, i))
        ns, nx, ny, nh = (int(rng.choice(sizes)) for _ in range(4))
        ps = random_probs(ns, rng)
        enc, ch, dec = _stochastic(ns, nx, rng), _stochastic(nx, ny, rng), _stochastic(ny, nh, rng)
        outer = k_c_classical(ps, enc @ ch @ dec, kind)
        inner = k_c_classical(ps @ enc, ch, kind)
        t.add(_gap(inner, outer))
    return t.report()


def check_sibson(trials: int = 200, seed: int = 0, tol: float = DEFAULT_TOL,
                 layout: Sequence[int] = (2, 3)) -> CheckReport:
    """Both sides of the quantum Sibson identity agree on random ``(rho_AB, sigma_B, lam)``."""
    layout = tuple(layout)
    t = _Tally("sibson", seed, tol, {"layout": list(layout)})
    da = layout[0]
    for i in range(trials):
        rng = rng_for(derive_seed(seed, i))
        lam = float(rng.uniform(0.05, 2.0))
        while abs(lam - 1.0) < 0.05:
            lam = float(rng.uniform(0.05, 2.0))
        sub = rng.integers(0, 2**63, size=2)
        d = int(np.prod(layout))
        rho = random_density(layout, int(rng.integers(1, d + 1)), int(sub[0]))
        sigma = random_density(layout[1:], None, int(sub[1]))
        lhs = renyi(rho, np.kron(np.eye(da), sigma.mat), lam)
        t.add(-abs(lhs - sibson_decomposition(rho, sigma, lam)))
    return t.report()


def check_kq_minimizer(trials: int = 100, seed: int = 0, tol: float = DEFAULT_TOL,
                       lam: float = 2.0) -> CheckReport:
    """The closed-form ``K_q`` never exceeds ``D(rho_AB || 1 (x) sigma)`` for random probes."""
    kind = Renyi(lam)
    t = _Tally("kq_minimizer", seed, tol, {"lam": lam})
    rho = random_density((2, 2), None, seed)
    kval = k_q(rho, kind).value
    for i in range(trials):
        sigma = random_density((2,), None, derive_seed(seed, i))
        t.add(kind(rho, np.kron(np.eye(2), sigma.mat)) - kval)
    return t.report()


def check_k_data_processing(trials: int = 200, seed: int = 0, tol: float = DEFAULT_TOL,
                            lam: float = 2.0) -> CheckReport:
    """``K_c(M;B) >= K_c(M;E(B))`` for random cq states and random channels on B."""
    kind = Renyi(lam)
    t = _Tally("k_data_processing", seed, tol, {"lam": lam})
    for i in range(trials):
        rng = rng_for(derive_seed(seed, i))
        nsym, din, dout = int(rng.integers(2, 4)), int(rng.integers(2, 4)), int(rng.integers(2, 4))
        sub = rng.integers(0, 2**63, size=2)
        e = random_cq(nsym, (din,), int(sub[0]))
        ch = random_cptp(din, dout, 2 * din, int(sub[1]))
        after = CqEnsemble(e.probs, tuple(DensityMatrix(ch(s.mat), (dout,)) for s in e.states))
        t.add(_gap(k_c_cq(e, kind).value, k_c_cq(after, kind).value))
    return t.report()


# --- exponent claims ----------------------------------------------------------


def check_e0_derivative(trials: int = 100, seed: int = 0, tol: float = DERIVATIVE_TOL,
                        h: float = 1e-5) -> CheckReport:
    """Central difference of ``E0`` at ``s = 0`` equals ``I(M;B)``."""
    t = _Tally("e0_derivative", seed, tol, {"h": h})
    for i in range(trials):
        rng = rng_for(derive_seed(seed, i))
        nsym, d = int(rng.integers(2, 5)), int(rng.integers(2, 4))
        e = random_cq(nsym, (d,), int(rng.integers(0, 2**63)), rank=int(rng.integers(1, d + 1)))
        t.add(-abs(cv.classical_e0_slope(e, None, h) - cv.holevo_information(e)))
    return t.report()


def _random_bipartite(rng) -> DensityMatrix:
    layout = (int(rng.integers(2, 4)), int(rng.integers(2, 4)))
    d = layout[0] * layout[1]
    return random_density(layout, int(rng.integers(1, d + 1)), int(rng.integers(0, 2**63)))


def check_g_derivative(trials: int = 100, seed: int = 0, tol: float = DERIVATIVE_TOL,
                       h: float = 1e-5) -> CheckReport:
    """Central difference of ``g`` at ``s = 0`` equals ``I(A>B)``."""
    t = _Tally("g_derivative", seed, tol, {"h": h})
    for i in range(trials):
        rho = _random_bipartite(rng_for(derive_seed(seed, i)))
        t.add(-abs(cv.g_slope(rho, 1, h) - coherent_information(rho)))
    return t.report()


def check_g_monotone(trials: int = 100, seed: int = 0, tol: float = DEFAULT_TOL,
                     points: int = 64, g0_tol: float = 1e-12) -> CheckReport:
    """``g(s) + (s+1) log|A|`` is nondecreasing on [-1/2, 0] and ``g(0) = 0``.

    The slack is the smallest step increment; a trial also fails when
    ``|g(0)| > g0_tol``.
    """
    grid = np.linspace(cv.S_MIN, 0.0, points)
    t = _Tally("g_monotone", seed, tol, {"points": points, "g0_tol": g0_tol})
    for i in range(trials):
        rho = _random_bipartite(rng_for(derive_seed(seed, i)))
        la = math.log(rho.layout[0])
        vals = [cv.g_function(rho, float(s)) + (s + 1.0) * la for s in grid]
        g0 = cv.g_function(rho, 0.0)
        t.add(min(b - a for a, b in zip(vals, vals[1:])), abs(g0) <= g0_tol)
    return t.report()


def check_e0_consistency(trials: int = 100, seed: int = 0, tol: float = DEFAULT_TOL) -> CheckReport:
    """``E0(s) = ((1-lam)/lam) K_q(N(rho), Renyi lam)`` with ``lam = 1/(1+s)``."""
    t = _Tally("e0_consistency", seed, tol, {})
    for i in range(trials):
        rng = rng_for(derive_seed(seed, i))
        din, dout = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        sub = rng.integers(0, 2**63, size=2)
        rho = random_pure((din, din), int(sub[0]))
        ch = random_cptp(din, dout, 2, int(sub[1]))
        s = float(rng.uniform(-0.5, -0.01))
        lam = cv.order_from_s(s)
        direct = cv.quantum_e0(rho, ch, s)
        via_k = (1 - lam) / lam * k_q(cv.channel_output_state(rho, ch), Renyi(lam)).value
        t.add(-abs(direct - via_k))
    return t.report()


# --- erasure channel ----------------------------------------------------------


def phi_input(d: int, n: int) -> DensityMatrix:
    """Maximally entangled state of a ``d^n`` reference with ``n`` channel inputs."""
    vec = np.eye(d**n, dtype=complex).reshape(-1) / math.sqrt(d**n)
    return pure_state(vec, (d**n,) + (d,) * n)


def erasure_direct_kq(n: int, p: float, d: int, lam: float) -> float:
    """``D_lam(rho_AB^n || 1 (x) rho_B^n)`` computed from the full output matrix."""
    out = cv.channel_output_state(phi_input(d, n), erasure_channel(p, d))
    rho_b = partial_trace(out.mat, out.layout, range(1, n + 1))
    return renyi(out, np.kron(np.eye(d**n), rho_b), lam)


def check_erasure_closed_form(trials: int = 0, seed: int = 0, tol: float = DEFAULT_TOL,
                              ns=(1, 2), ps=(0.1, 0.5, 0.9), ds=(2, 3), lams=(1.5, 2.0)) -> CheckReport:
    """Direct erasure ``K_q`` value at the maximally entangled input against the closed form.

    Deterministic grid; ``trials`` and ``seed`` are ignored.
    """
    t = _Tally("erasure_closed_form", seed, tol,
               {"ns": list(ns), "ps": list(ps), "ds": list(ds), "lams": list(lams)})
    for n in ns:
        for p in ps:
            for d in ds:
                for lam in lams:
                    t.add(-abs(erasure_direct_kq(n, p, d, lam) - cv.erasure_kq_renyi(n, p, d, lam)))
    return t.report()


# --- converse experiments -----------------------------------------------------


def pgm_success(probs, states: Sequence[np.ndarray]) -> float:
    """Average success probability of the pretty-good measurement."""
    avg = sum(p * s for p, s in zip(probs, states))
    inv_root = mat_power(avg, -0.5)
    return float(sum(
        p * np.trace(inv_root @ (p * s) @ inv_root @ s).real for p, s in zip(probs, states)
    ))


def _product(states: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for s in states:
        out = np.kron(out, s)
    return out


def tiny_code_experiment(ch: KrausChannel | None = None, n_values=(1, 2), msg_counts=(1, 2, 3, 4),
                         trials: int = 200, seed: int = 0, tol: float = DEFAULT_TOL,
                         kinds: Sequence = CODE_KINDS) -> CheckReport:
    """Random product-input codes with PGM decoding satisfy ``d_c(1-eps||e^(-nR)) <= K_c(M;B^n)``.

    A fresh random qubit channel is drawn per trial unless ``ch`` is given.
    Trials with ``eps > 1 - e^(-nR)`` are skipped.
    """
    kinds = [_as_kind(k) for k in kinds]
    t = _Tally("tiny_code", seed, tol, {"kinds": [k.label() for k in kinds],
                                         "n_values": list(n_values), "msg_counts": list(msg_counts)})
    for i in range(trials):
        rng = rng_for(derive_seed(seed, i))
        n = int(rng.choice(n_values))
        m = int(rng.choice(msg_counts))
        chan = ch if ch is not None else random_cptp(2, 2, 2, int(rng.integers(0, 2**63)))
        outputs = []
        for _ in range(m):
            letters = [random_pure((chan.din,), int(rng.integers(0, 2**63))).mat for _ in range(n)]
            outputs.append(_product([chan(x) for x in letters]))
        probs = np.full(m, 1.0 / m)
        eps = min(max(1.0 - pgm_success(probs, outputs), 0.0), 1.0)
        if eps < 1e-12:
            eps = 0.0  # rounding residue; keeps d_c finite when beta = 1
        beta = 1.0 / m
        if eps > 1.0 - beta + 1e-12:
            t.skip()
            continue
        layout = (chan.dout,) * n
        e = CqEnsemble(probs, tuple(DensityMatrix(o, layout) for o in outputs))
        slack = min(_gap(k_c_cq(e, k).value, dc_scalar(k, eps, beta)) for k in kinds)
        t.add(slack)
    return t.report()


def tiny_quantum_experiment(p: float = 0.3, d: int = 2, n_values=(1, 2), trials: int = 4,
                            seed: int = 0, tol: float = DEFAULT_TOL,
                            kinds: Sequence = CODE_KINDS) -> CheckReport:
    """Erasure codes with discard-flag decoding satisfy ``d_q(F||e^(-nR)) <= K_q(A;B^n)``.

    Trial 0 uses the identity encoder; later trials conjugate by a random
    encoding unitary (undone after decoding).  ``R = log d``.  Trials with
    ``F < e^(-nR)`` are skipped.
    """
    kinds = [_as_kind(k) for k in kinds]
    t = _Tally("tiny_quantum", seed, tol, {"p": p, "d": d, "n_values": list(n_values),
                                            "kinds": [k.label() for k in kinds]})
    ch, dec = erasure_channel(p, d), discard_flag_channel(d)
    for i in range(trials):
        rng = rng_for(derive_seed(seed, i))
        for n in n_values:
            dn = d**n
            u = np.eye(dn, dtype=complex) if i == 0 else random_unitary(dn, rng)
            phi = np.eye(dn, dtype=complex).reshape(-1) / math.sqrt(dn)
            m = np.outer(phi, phi.conj())
            m, _ = apply_to_matrix(unitary_channel(u), m, (dn, dn), 1)
            layout = (dn,) + (d,) * n
            for k in range(1, n + 1):
                m, layout = apply_to_matrix(ch, m, layout, k)
            sigma = DensityMatrix(m, layout)
            for k in range(1, n + 1):
                m, layout = apply_to_matrix(dec, m, layout, k)
            m, _ = apply_to_matrix(unitary_channel(u.conj().T), m, (dn, dn), 1)
            fid = float(np.real(phi.conj() @ m @ phi))
            fid = min(max(fid, 0.0), 1.0)
            beta = 1.0 / dn
            if fid < beta - 1e-12:
                t.skip()
                continue
            slack = min(_gap(k_q(sigma, kd, na=1).value, dq_scalar(kd, fid, beta)) for kd in kinds)
            t.add(slack)
    return t.report()


# --- registry -----------------------------------------------------------------


def _per_kind(fn, kinds):
    def run(trials: int, seed: int, tol: float | None = None) -> list[CheckReport]:
        return [fn(kind=k, trials=trials, seed=seed, **_tol(tol)) for k in kinds]
    return run


def _single(fn, **fixed):
    def run(trials: int, seed: int, tol: float | None = None) -> list[CheckReport]:
        return [fn(trials=trials, seed=seed, **fixed, **_tol(tol))]
    return run


def _tol(tol):
    return {} if tol is None else {"tol": tol}


def _projector_pairs(trials, seed, tol=None):
    return [check_projector_lemma(d1, d2, trials=trials, seed=seed, **_tol(tol)) for d1, d2 in ((2, 2), (3, 2))]


def _quantum_experiments(trials, seed, tol=None):
    # a handful of encoders is enough; each trial covers every n
    count = max(1, min(trials, 8))
    return [tiny_quantum_experiment(p, 2, trials=count, seed=seed, **_tol(tol)) for p in (0.0, 0.3, 0.6)]


REGISTRY: dict[str, Callable[..., list[CheckReport]]] = {
    "monotonicity": _per_kind(check_monotonicity, MONOTONE_KINDS),
    "tensor_invariance": _per_kind(check_tensor_invariance, MONOTONE_KINDS),
    "binary_monotone": _per_kind(check_binary_monotone, MONOTONE_KINDS),
    "basis_independence": _per_kind(check_basis_independence, MONOTONE_KINDS),
    "positivity": _single(check_positivity_lemma),
    "chebyshev": _single(check_chebyshev_lemma),
    "projector": _projector_pairs,
    "afinite": _single(check_afinite),
    "markov_k": _single(check_markov_k),
    "sibson": _single(check_sibson),
    "kq_minimizer": _single(check_kq_minimizer),
    "k_data_processing": _single(check_k_data_processing),
    "e0_derivative": _single(check_e0_derivative),
    "g_derivative": _single(check_g_derivative),
    "g_monotone": _single(check_g_monotone),
    "e0_consistency": _single(check_e0_consistency),
    "erasure_closed_form": _single(check_erasure_closed_form),
    "tiny_code": _single(tiny_code_experiment),
    "tiny_quantum": _quantum_experiments,
}


def run_check(name: str, trials: int, seed: int, tol: float | None = None,
              kind: str | None = None) -> list[CheckReport]:
    """Run one registered check (or ``all``); ``kind`` narrows per-kind checks."""
    if name == "all":
        return [r for key in REGISTRY for r in REGISTRY[key](trials, seed, tol)]
    if name not in REGISTRY:
        raise KeyError(name)
    if kind is not None:
        fns = {"monotonicity": check_monotonicity, "tensor_invariance": check_tensor_invariance,
               "binary_monotone": check_binary_monotone, "basis_independence": check_basis_independence}
        if name not in fns:
            raise ValueError(f"check {name!r} does not take a divergence kind")
        return [fns[name](kind=kind, trials=trials, seed=seed, **_tol(tol))]
    return REGISTRY[name](trials, seed, tol)
