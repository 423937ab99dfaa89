"""CPTP maps in Kraus form, the erasure channel and random channels."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .matcore import DimensionError, as_array, dagger, kron_all
from .states import DensityMatrix, random_unitary, rng_for

TAU_CPTP = 1e-9
MAX_KRAUS = 4096


class ChannelError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Trace-preserving map ``rho -> sum_k K_k rho K_k^dag`` with ``K_k`` of shape (dout, din)."""

    din: int
    dout: int
    kraus: tuple[np.ndarray, ...]

    def __post_init__(self):
        ks = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        if not ks:
            raise ChannelError("a channel needs at least one Kraus operator")
        for k in ks:
            if k.shape != (self.dout, self.din):
                raise DimensionError(f"Kraus operator shape {k.shape} != ({self.dout}, {self.din})")
            k.setflags(write=False)
        total = sum(dagger(k) @ k for k in ks)
        defect = float(np.max(np.abs(total - np.eye(self.din))))
        if defect > TAU_CPTP:
            raise ChannelError(f"Kraus operators are not trace preserving (defect {defect:.3e})")
        object.__setattr__(self, "kraus", ks)

    def __call__(self, m: np.ndarray) -> np.ndarray:
        m = as_array(m)
        return sum(k @ m @ dagger(k) for k in self.kraus)

    def to_json(self) -> dict:
        return {
            "din": self.din,
            "dout": self.dout,
            "kraus": [{"re": k.real.tolist(), "im": k.imag.tolist()} for k in self.kraus],
        }

    @classmethod
    def from_json(cls, blob) -> "KrausChannel":
        if isinstance(blob, str):
            blob = json.loads(blob)
        try:
            ks = [np.asarray(k["re"], float) + 1j * np.asarray(k["im"], float) for k in blob["kraus"]]
            return cls(int(blob["din"]), int(blob["dout"]), tuple(ks))
        except (KeyError, TypeError) as exc:
            raise ChannelError(f"malformed channel JSON: {exc}") from exc


def apply_to_matrix(ch: KrausChannel, m, layout: Sequence[int], target: int) -> tuple[np.ndarray, tuple[int, ...]]:
    """Apply ``ch`` to subsystem ``target`` of any operator ``m`` (not only states)."""
    m = as_array(m)
    layout = tuple(int(d) for d in layout)
    if not 0 <= target < len(layout):
        raise DimensionError(f"target {target} out of range for layout {layout}")
    if layout[target] != ch.din:
        raise DimensionError(f"subsystem {target} has dim {layout[target]}, channel expects {ch.din}")
    if int(np.prod(layout)) != m.shape[0]:
        raise DimensionError(f"layout {layout} does not match dimension {m.shape[0]}")
    pre = int(np.prod(layout[:target]))
    post = int(np.prod(layout[target + 1 :]))
    t = m.reshape(pre, ch.din, post, pre, ch.din, post)
    out = np.zeros((pre, ch.dout, post, pre, ch.dout, post), dtype=complex)
    for k in ch.kraus:
        out += np.einsum("ai,xiyzjw,bj->xayzbw", k, t, k.conj(), optimize=True)
    new_layout = layout[:target] + (ch.dout,) + layout[target + 1 :]
    d = int(np.prod(new_layout))
    return out.reshape(d, d), new_layout


def apply(ch: KrausChannel, rho: DensityMatrix, target: int = 0) -> DensityMatrix:
    m, layout = apply_to_matrix(ch, rho.mat, rho.layout, target)
    return DensityMatrix(m, layout)


def apply_multi(ch: KrausChannel, rho: DensityMatrix, targets: Sequence[int]) -> DensityMatrix:
    """One copy of ``ch`` on each listed subsystem, applied sequentially."""
    m, layout = rho.mat, rho.layout
    for t in targets:
        m, layout = apply_to_matrix(ch, m, layout, t)
    return DensityMatrix(m, layout)


def compose(first: KrausChannel, second: KrausChannel) -> KrausChannel:
    """The channel ``second o first``."""
    if first.dout != second.din:
        raise DimensionError("channel dimensions do not chain")
    return KrausChannel(first.din, second.dout, tuple(b @ a for a in first.kraus for b in second.kraus))


def tensor(a: KrausChannel, b: KrausChannel) -> KrausChannel:
    if len(a.kraus) * len(b.kraus) > MAX_KRAUS:
        raise ChannelError("Kraus-count cap exceeded; apply the factors sequentially instead")
    return KrausChannel(
        a.din * b.din, a.dout * b.dout, tuple(np.kron(x, y) for x in a.kraus for y in b.kraus)
    )


def tensor_pow(ch: KrausChannel, n: int, cap: int = MAX_KRAUS) -> KrausChannel:
    """``ch`` tensored with itself ``n`` times, Kraus sets fully materialized."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if len(ch.kraus) ** n > cap:
        raise ChannelError(
            f"{len(ch.kraus)}**{n} Kraus operators exceed the cap {cap}; use apply_multi"
        )
    ks = tuple(kron_all(c) for c in itertools.product(ch.kraus, repeat=n))
    return KrausChannel(ch.din**n, ch.dout**n, ks)


def identity_channel(d: int) -> KrausChannel:
    return KrausChannel(d, d, (np.eye(d, dtype=complex),))


def unitary_channel(u) -> KrausChannel:
    u = np.asarray(u, dtype=complex)
    return KrausChannel(u.shape[1], u.shape[0], (u,))


def erasure_channel(p: float, d: int) -> KrausChannel:
    """Erasure with flag ``|e>`` = last basis vector of the ``d+1`` output space.

    Kraus set: ``sqrt(1-p)`` times the isometric embedding, and ``sqrt(p)|e><i|``
    for each input basis vector, so ``d + 1`` operators in total.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"erasure probability must lie in [0, 1], got {p}")
    if d < 2:
        raise ValueError("erasure channel needs d >= 2")
    embed = np.zeros((d + 1, d), dtype=complex)
    embed[:d, :d] = np.sqrt(1.0 - p) * np.eye(d)
    ks = [embed]
    for i in range(d):
        k = np.zeros((d + 1, d), dtype=complex)
        k[d, i] = np.sqrt(p)
        ks.append(k)
    return KrausChannel(d, d + 1, tuple(ks))


def weyl_operators(d: int) -> list[np.ndarray]:
    """The ``d**2`` clock-and-shift operators ``X^a Z^b`` (``a = b = 0`` first)."""
    omega = np.exp(2j * np.pi / d)
    x = np.roll(np.eye(d, dtype=complex), 1, axis=0)
    z = np.diag(omega ** np.arange(d))
    return [
        np.linalg.matrix_power(x, a) @ np.linalg.matrix_power(z, b)
        for a in range(d)
        for b in range(d)
    ]


def depolarizing_channel(q: float, d: int) -> KrausChannel:
    """``rho -> (1-q) rho + q 1/d``; valid for ``q`` in [0, d**2/(d**2-1)]."""
    if not 0.0 <= q <= d * d / (d * d - 1):
        raise ValueError(f"depolarizing parameter out of range: {q}")
    ops = weyl_operators(d)
    w0 = 1.0 - q + q / d**2
    ks = [np.sqrt(w0) * ops[0]] + [np.sqrt(q / d**2) * u for u in ops[1:]]
    return KrausChannel(d, d, tuple(ks))


def discard_flag_channel(d: int, fill: int = 0) -> KrausChannel:
    """Recovery map ``d+1 -> d``: keep the non-erased block, replace ``|e>`` by ``|fill>``."""
    keep = np.hstack([np.eye(d), np.zeros((d, 1))]).astype(complex)
    flag = np.zeros((d, d + 1), dtype=complex)
    flag[fill, d] = 1.0
    return KrausChannel(d + 1, d, (keep, flag))


def random_cptp(din: int, dout: int, denv: int, seed: int) -> KrausChannel:
    """Haar-random Stinespring isometry ``din -> dout (x) denv`` split along the environment."""
    if dout * denv < din:
        raise ValueError("random_cptp needs dout * denv >= din")
    rng = rng_for(seed)
    v = random_unitary(dout * denv, rng)[:, :din]
    v = v.reshape(dout, denv, din)
    return KrausChannel(din, dout, tuple(v[:, e, :].copy() for e in range(denv)))
