"""Renyi, quasi and hockey-stick divergences plus entropic quantities.

All logarithms are natural.  Extended-real results use IEEE ``inf``.
The second argument of a divergence may be any PSD matrix; unit trace is
only required of the first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .matcore import TAU_NULL, as_array, eigh, positive_part

TAU_SUPPORT = 1e-10


class DivergenceError(ValueError):
    pass


@dataclass(frozen=True)
class Renyi:
    lam: float

    def __post_init__(self):
        _check_order(self.lam)

    def __call__(self, rho, sigma) -> float:
        return renyi(rho, sigma, self.lam)

    def label(self) -> str:
        return f"renyi:{self.lam:g}"


@dataclass(frozen=True)
class Quasi:
    lam: float

    def __post_init__(self):
        _check_order(self.lam)

    def __call__(self, rho, sigma) -> float:
        return quasi(rho, sigma, self.lam)

    def label(self) -> str:
        return f"quasi:{self.lam:g}"


@dataclass(frozen=True)
class HockeyStick:
    gamma: float

    def __post_init__(self):
        if not self.gamma >= 1.0:
            raise DivergenceError(f"hockey-stick needs gamma >= 1, got {self.gamma}")

    def __call__(self, rho, sigma) -> float:
        return hockey_stick(rho, sigma, self.gamma)

    def label(self) -> str:
        return f"hockey:{self.gamma:g}"


DivergenceKind = Union[Renyi, Quasi, HockeyStick]


def parse_kind(text: str) -> DivergenceKind:
    """Parse ``renyi:2``, ``quasi:0.5`` or ``hockey:1.5``."""
    name, _, arg = text.partition(":")
    name = name.strip().lower()
    try:
        value = float(arg)
    except ValueError:
        raise DivergenceError(f"cannot parse divergence kind {text!r}") from None
    if name == "renyi":
        return Renyi(value)
    if name == "quasi":
        return Quasi(value)
    if name in ("hockey", "hockeystick", "hockey_stick"):
        return HockeyStick(value)
    raise DivergenceError(f"unknown divergence kind {text!r}")


def _check_order(lam: float) -> None:
    if not (0.0 <= lam <= 2.0) or lam == 1.0:
        raise DivergenceError(f"order must lie in [0, 2] without 1, got {lam}")


def _spectral_pair(rho, sigma):
    er = eigh(as_array(rho))
    es = eigh(as_array(sigma))
    if er.w.size != es.w.size:
        raise DivergenceError("arguments have different dimensions")
    overlap = np.abs(er.v.conj().T @ es.v) ** 2
    return er.w, es.w, overlap


def _power_trace(rho, sigma, lam: float) -> float:
    """``Tr rho^lam sigma^(1-lam)`` on supports; ``inf`` on support violation for ``lam > 1``."""
    r, s, ov = _spectral_pair(rho, sigma)
    rs = r >= TAU_NULL
    ss = s >= TAU_NULL
    if lam > 1.0:
        leak = float(np.sum(r[rs] @ ov[np.ix_(rs, ~ss)]))
        if leak > TAU_SUPPORT:
            return math.inf
    rp = np.zeros_like(r)
    rp[rs] = r[rs] ** lam
    sp = np.zeros_like(s)
    sp[ss] = s[ss] ** (1.0 - lam)
    return float(rp @ ov @ sp)


def renyi(rho, sigma, lam: float) -> float:
    """Petz-Renyi divergence ``log(Tr rho^lam sigma^(1-lam)) / (lam - 1)``."""
    _check_order(lam)
    q = _power_trace(rho, sigma, lam)
    if math.isinf(q):
        return math.inf
    if q <= 0.0:
        return math.inf if lam < 1.0 else -math.inf
    return math.log(q) / (lam - 1.0)


def quasi(rho, sigma, lam: float) -> float:
    """``sign(lam - 1) Tr rho^lam sigma^(1-lam)``."""
    _check_order(lam)
    return math.copysign(1.0, lam - 1.0) * _power_trace(rho, sigma, lam)


def hockey_stick(rho, sigma, gamma: float) -> float:
    """``Tr (rho - gamma sigma)^+``."""
    if not gamma >= 1.0:
        raise DivergenceError(f"hockey-stick needs gamma >= 1, got {gamma}")
    return positive_part(as_array(rho) - gamma * as_array(sigma))[1]


def trace_norm(m) -> float:
    return float(np.sum(np.abs(eigh(as_array(m)).w)))


def divergence(kind: DivergenceKind, rho, sigma) -> float:
    return kind(rho, sigma)


def relative_entropy(rho, sigma) -> float:
    """``Tr rho (log rho - log sigma)``, ``inf`` when supp rho is not inside supp sigma."""
    r, s, ov = _spectral_pair(rho, sigma)
    rs = r >= TAU_NULL
    ss = s >= TAU_NULL
    if float(np.sum(r[rs] @ ov[np.ix_(rs, ~ss)])) > TAU_SUPPORT:
        return math.inf
    rl = np.zeros_like(r)
    rl[rs] = r[rs] * np.log(r[rs])
    sl = np.zeros_like(s)
    sl[ss] = np.log(s[ss])
    rw = np.where(rs, r, 0.0)
    return float(np.sum(rl) - rw @ ov @ sl)


def entropy(rho) -> float:
    w = eigh(as_array(rho)).w
    w = w[w >= TAU_NULL]
    return float(-np.sum(w * np.log(w)))


def _bipartite(rho, na: int):
    layout = tuple(getattr(rho, "layout", ()))
    if len(layout) < 2 or not 1 <= na < len(layout):
        raise DivergenceError("a bipartite quantity needs a layout with at least 2 subsystems")
    return rho.reduce(range(na)), rho.reduce(range(na, len(layout)))


def mutual_information(rho_ab, na: int = 1) -> float:
    """``H(A) + H(B) - H(AB)``; A is the first ``na`` subsystems."""
    ra, rb = _bipartite(rho_ab, na)
    return entropy(ra) + entropy(rb) - entropy(rho_ab)


def coherent_information(rho_ab, na: int = 1) -> float:
    """``H(B) - H(AB)``; A is the first ``na`` subsystems."""
    _, rb = _bipartite(rho_ab, na)
    return entropy(rb) - entropy(rho_ab)


# --- binary reductions -------------------------------------------------------


def classical_divergence(kind: DivergenceKind, p, q) -> float:
    """Divergence of commuting (diagonal) arguments from their eigenvalue vectors."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if isinstance(kind, HockeyStick):
        return float(np.sum(np.clip(p - kind.gamma * q, 0.0, None)))
    lam = kind.lam
    pos_p = p > 0
    pos_q = q > 0
    if lam > 1.0 and np.any(pos_p & ~pos_q):
        val = math.inf
    else:
        both = pos_p & pos_q
        val = float(np.sum(p[both] ** lam * q[both] ** (1.0 - lam)))
    if isinstance(kind, Quasi):
        return math.copysign(1.0, lam - 1.0) * val
    if math.isinf(val):
        return math.inf
    if val <= 0.0:
        return math.inf if lam < 1.0 else -math.inf
    return math.log(val) / (lam - 1.0)


def _prob(x: float, name: str, lo_open: bool = False) -> float:
    x = float(x)
    if not (0.0 <= x <= 1.0) or (lo_open and x == 0.0):
        raise DivergenceError(f"{name} out of range: {x}")
    return x


def dc_scalar(kind: DivergenceKind, eps: float, beta: float) -> float:
    """Binary classical reduction ``d_c(1 - eps || beta)``.

    Evaluates the divergence of ``diag(1-eps, eps)`` from ``diag(beta, 1-beta)``.
    """
    eps = _prob(eps, "eps")
    beta = _prob(beta, "beta")
    return classical_divergence(kind, [1.0 - eps, eps], [beta, 1.0 - beta])


def dq_scalar(kind: DivergenceKind, fid: float, beta: float) -> float:
    """Binary quantum reduction ``d_q(F || beta)``.

    Evaluates the divergence of ``diag(F, 1-F)`` from the non-normalized
    ``diag(beta, 1/beta - beta)``.
    """
    fid = _prob(fid, "F")
    beta = _prob(beta, "beta", lo_open=True)
    return classical_divergence(kind, [fid, 1.0 - fid], [beta, 1.0 / beta - beta])


def dc_lower(kind: DivergenceKind, eps: float, beta: float) -> float:
    """Elementary lower bound on ``d_c(1 - eps || beta)`` used by the converses.

    Renyi (order in (1, 2]): ``lam/(lam-1) log(1-eps) - log beta``.
    Hockey-stick: ``1 - eps - gamma beta``.
    """
    if isinstance(kind, HockeyStick):
        return 1.0 - eps - kind.gamma * beta
    if isinstance(kind, Renyi) and kind.lam > 1.0:
        lam = kind.lam
        return (lam / (lam - 1.0)) * _safe_log(1.0 - eps) - math.log(beta)
    raise DivergenceError("lower bound is defined for Renyi orders in (1, 2] and hockey-stick")


def dq_lower(kind: DivergenceKind, fid: float, beta: float) -> float:
    """Elementary lower bound on ``d_q(F || beta)``: Renyi ``lam/(lam-1) log F - log beta``, hockey ``F - gamma beta``."""
    if isinstance(kind, HockeyStick):
        return fid - kind.gamma * beta
    if isinstance(kind, Renyi) and kind.lam > 1.0:
        lam = kind.lam
        return (lam / (lam - 1.0)) * _safe_log(fid) - math.log(beta)
    raise DivergenceError("lower bound is defined for Renyi orders in (1, 2] and hockey-stick")


def _safe_log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf
