"""The minimized quantities K_c and K_q, Sibson minimizers and information variances.

For a bipartite state on ``A (x) B`` (A = the first ``na`` subsystems):

* ``K_q(A;B) = inf_sigma D(rho_AB || 1_A (x) sigma_B)``
* ``K_c(A;B) = inf_sigma D(rho_AB || rho_A (x) sigma_B)``

Renyi and quasi kinds have closed-form minimizers.  For the hockey-stick
kind only the value at ``sigma_B = rho_B`` is returned (an upper bound on
the infimum), optionally improved by a local search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .divergences import (
    DivergenceError,
    DivergenceKind,
    HockeyStick,
    Quasi,
    Renyi,
    coherent_information,
    mutual_information,
    renyi,
)
from .matcore import as_array, mat_log, mat_power, partial_trace
from .states import CqEnsemble, DensityMatrix, cq_state


@dataclass(frozen=True, eq=False)
class KValue:
    value: float
    minimizer: DensityMatrix | None
    exact: bool


def _split(rho: DensityMatrix, na: int) -> tuple[int, int]:
    if len(rho.layout) < 2 or not 1 <= na < len(rho.layout):
        raise DivergenceError("expected a bipartite layout")
    da = int(np.prod(rho.layout[:na]))
    return da, rho.dim // da


def _b_layout(rho: DensityMatrix, na: int) -> tuple[int, ...]:
    return rho.layout[na:]


def _check_closed_form_order(lam: float) -> None:
    if not 0.0 < lam <= 2.0 or lam == 1.0:
        raise DivergenceError(f"closed-form minimizer needs order in (0, 2] without 1, got {lam}")


def _from_xi(xi: np.ndarray, lam: float, layout) -> tuple[float, DensityMatrix]:
    root = mat_power(xi, 1.0 / lam)
    tr = float(np.trace(root).real)
    return tr, DensityMatrix(root / tr, layout)


def _renyi_like(kind, tr: float) -> float:
    # tr = Tr Xi^(1/lam); the optimal value of Tr Xi sigma^(1-lam) is tr**lam
    lam = kind.lam
    if isinstance(kind, Quasi):
        return math.copysign(1.0, lam - 1.0) * tr**lam
    return (lam / (lam - 1.0)) * math.log(tr)


def sibson_sigma_star(rho_ab: DensityMatrix, lam: float, na: int = 1) -> DensityMatrix:
    """Normalized ``[Tr_A rho_AB^lam]^(1/lam)``."""
    _check_closed_form_order(lam)
    _split(rho_ab, na)
    n = len(rho_ab.layout)
    xi = partial_trace(mat_power(rho_ab.mat, lam), rho_ab.layout, range(na, n))
    return _from_xi(xi, lam, _b_layout(rho_ab, na))[1]


def sibson_decomposition(rho_ab: DensityMatrix, sigma_b, lam: float, na: int = 1) -> float:
    """Right-hand side of the quantum Sibson identity for ``D_lam(rho_AB || 1 (x) sigma_B)``."""
    _check_closed_form_order(lam)
    n = len(rho_ab.layout)
    xi = partial_trace(mat_power(rho_ab.mat, lam), rho_ab.layout, range(na, n))
    tr, star = _from_xi(xi, lam, _b_layout(rho_ab, na))
    if math.isinf(renyi(star, sigma_b, lam)):
        return math.inf
    # sigma*^lam = Xi / tr^lam; using Xi directly avoids raising small
    # eigenvalues to the power 1/lam and back
    q = float(np.trace(xi @ mat_power(as_array(sigma_b), 1.0 - lam)).real) / tr**lam
    return math.log(q) / (lam - 1.0) + (lam / (lam - 1.0)) * math.log(tr)


def k_q_at(rho_ab: DensityMatrix, sigma_b, kind: DivergenceKind, na: int = 1) -> float:
    da, _ = _split(rho_ab, na)
    return kind(rho_ab, np.kron(np.eye(da), as_array(sigma_b)))


def k_c_at(rho_ab: DensityMatrix, sigma_b, kind: DivergenceKind, na: int = 1) -> float:
    _split(rho_ab, na)
    rho_a = partial_trace(rho_ab.mat, rho_ab.layout, range(na))
    return kind(rho_ab, np.kron(rho_a, as_array(sigma_b)))


def k_q(
    rho_ab: DensityMatrix,
    kind: DivergenceKind,
    na: int = 1,
    refine: bool = False,
) -> KValue:
    """``K_q(A;B)``; exact for Renyi/quasi, an upper bound for hockey-stick."""
    _split(rho_ab, na)
    n = len(rho_ab.layout)
    if isinstance(kind, (Renyi, Quasi)):
        _check_closed_form_order(kind.lam)
        xi = partial_trace(mat_power(rho_ab.mat, kind.lam), rho_ab.layout, range(na, n))
        tr, star = _from_xi(xi, kind.lam, _b_layout(rho_ab, na))
        return KValue(_renyi_like(kind, tr), star, True)
    if isinstance(kind, HockeyStick):
        rho_b = rho_ab.reduce(range(na, n))
        return _hockey_upper(lambda s: k_q_at(rho_ab, s, kind, na), rho_b, refine)
    raise DivergenceError(f"unsupported kind {kind!r}")


def k_c_cq(e: CqEnsemble, kind: DivergenceKind, refine: bool = False) -> KValue:
    """``K_c(M;B)`` of the cq state built from ``e``."""
    if isinstance(kind, (Renyi, Quasi)):
        _check_closed_form_order(kind.lam)
        xi = sum(p * mat_power(s.mat, kind.lam) for p, s in zip(e.probs, e.states) if p > 0)
        tr, star = _from_xi(xi, kind.lam, e.layout)
        return KValue(_renyi_like(kind, tr), star, True)
    if isinstance(kind, HockeyStick):
        avg = e.average()

        def at(sigma):
            sigma = as_array(sigma)
            return float(
                sum(p * kind(s, sigma) for p, s in zip(e.probs, e.states) if p > 0)
            )

        return _hockey_upper(at, avg, refine)
    raise DivergenceError(f"unsupported kind {kind!r}")


def k_c_classical(px, channel, kind: DivergenceKind) -> float:
    """Classical Sibson closed form of ``K_c(X;Y)`` for ``P_X`` and a row-stochastic ``channel[x, y]``.

    Renyi: ``lam/(lam-1) log sum_y (sum_x P(x) W(y|x)^lam)^(1/lam)``.
    """
    if not isinstance(kind, (Renyi, Quasi)):
        raise DivergenceError("classical closed form exists for Renyi and quasi kinds only")
    _check_closed_form_order(kind.lam)
    px = np.asarray(px, dtype=float)
    w = np.asarray(channel, dtype=float)
    mask = px > 0
    xi = px[mask] @ np.where(w[mask] > 0, w[mask], 0.0) ** kind.lam
    return _renyi_like(kind, float(np.sum(xi ** (1.0 / kind.lam))))


def _bloch_points(count: int) -> np.ndarray:
    # Fibonacci sphere, deterministic
    i = np.arange(count) + 0.5
    phi = np.arccos(1 - 2 * i / count)
    theta = np.pi * (1 + 5**0.5) * i
    return np.stack([np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)], axis=1)


_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def _bloch_state(r: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(r)
    if norm > 1.0:
        r = r / norm
    return 0.5 * (np.eye(2) + sum(c * p for c, p in zip(r, _PAULI)))


def _hockey_upper(
    objective: Callable[[np.ndarray], float],
    rho_b: DensityMatrix,
    refine: bool,
    grid: int = 200,
) -> KValue:
    value = objective(rho_b.mat)
    best_sigma = rho_b.mat
    if refine:
        d = rho_b.dim
        if d == 2:
            radii = (0.25, 0.5, 0.75, 0.9, 1.0)
            candidates = [r * v for r in radii for v in _bloch_points(grid // len(radii))]
            for r in candidates:
                v = objective(_bloch_state(r))
                if v < value:
                    value, best_sigma = v, _bloch_state(r)
            start = np.array([np.real(np.trace(best_sigma @ p)) for p in _PAULI])
            res = minimize(lambda r: objective(_bloch_state(r)), start, method="Nelder-Mead",
                           options={"xatol": 1e-8, "fatol": 1e-12, "maxiter": 2000})
            if res.fun < value:
                value, best_sigma = float(res.fun), _bloch_state(res.x)
        else:
            def to_state(x):
                t = (x[: d * d] + 1j * x[d * d :]).reshape(d, d)
                m = t @ t.conj().T
                return m / np.trace(m).real

            w, v = np.linalg.eigh(rho_b.mat)
            t0 = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
            x0 = np.concatenate([t0.real.ravel(), t0.imag.ravel()])
            res = minimize(lambda x: objective(to_state(x)), x0, method="Nelder-Mead",
                           options={"xatol": 1e-8, "fatol": 1e-12, "maxiter": 4000})
            if res.fun < value:
                value, best_sigma = float(res.fun), to_state(res.x)
    return KValue(float(value), DensityMatrix(best_sigma, rho_b.layout), False)


# --- information variances ----------------------------------------------------


def log_ratio_moments(rho, sigma) -> tuple[float, float]:
    """First and second moments of ``log rho - log sigma`` in state ``rho`` (logs on supports)."""
    m = as_array(rho)
    delta = mat_log(m) - mat_log(as_array(sigma))
    first = float(np.real(np.trace(m @ delta)))
    second = float(np.real(np.trace(m @ delta @ delta)))
    return first, second


def info_second_moment_c(e: CqEnsemble) -> float:
    """``Tr rho_MB [log rho_MB - log(rho_M (x) rho_B)]^2``."""
    rho = cq_state(e)
    ref = np.kron(np.diag(e.probs), e.average().mat)
    return log_ratio_moments(rho.mat, ref)[1]


def info_variance_c(e: CqEnsemble) -> float:
    """Classical-input information variance; second moment minus ``I(M;B)^2``."""
    return info_second_moment_c(e) - mutual_information(cq_state(e)) ** 2


def info_second_moment_q(rho_ab: DensityMatrix, na: int = 1) -> float:
    da, _ = _split(rho_ab, na)
    rho_b = partial_trace(rho_ab.mat, rho_ab.layout, range(na, len(rho_ab.layout)))
    return log_ratio_moments(rho_ab.mat, np.kron(np.eye(da), rho_b))[1]


def info_variance_q(rho_ab: DensityMatrix, na: int = 1) -> float:
    """Quantum information variance against ``1_A (x) rho_B``, minus ``I(A>B)^2``."""
    return info_second_moment_q(rho_ab, na) - coherent_information(rho_ab, na) ** 2


def second_moment_cap(d: int) -> float:
    """Universal bound on ``Tr rho log^2 rho`` in dimension ``d``: 0, 0.563, then ``log^2 d``."""
    if d < 1:
        raise ValueError("dimension must be positive")
    if d == 1:
        return 0.0
    if d == 2:
        return 0.563
    return math.log(d) ** 2


def variance_bound_c(e: CqEnsemble) -> float:
    """``g(|MB|) + g(|B|)`` for the cq state of ``e``."""
    db = e.states[0].dim
    return second_moment_cap(len(e.states) * db) + second_moment_cap(db)
