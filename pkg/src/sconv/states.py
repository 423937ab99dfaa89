"""Density matrices, cq ensembles and seeded random state generators."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .matcore import (
    DimensionError,
    as_array,
    eigh,
    hermiticity_defect,
    partial_trace,
    TAU_HERM,
)

TAU_PSD = 1e-9
TAU_TR = 1e-9

_MASK64 = (1 << 64) - 1


class StateError(ValueError):
    """Raised when a matrix cannot be accepted as a density matrix."""


def derive_seed(seed: int, index: int) -> int:
    """Child seed for trial ``index`` via the splitmix64 finalizer.

    Parallel trials that seed from ``derive_seed(master, i)`` never share
    a generator and reproduce independently of execution order.
    """
    z = (int(seed) + (int(index) + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(int(seed) & _MASK64)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated quantum state on a composite system.

    Construction symmetrizes the matrix, floors eigenvalues that are
    negative within ``TAU_PSD`` and renormalizes, so downstream matrix
    functions always see a PSD unit-trace operator.
    """

    mat: np.ndarray
    layout: tuple[int, ...]

    def __post_init__(self):
        m = as_array(self.mat)
        layout = tuple(int(d) for d in self.layout)
        if int(np.prod(layout)) != m.shape[0]:
            raise DimensionError(f"layout {layout} does not match dimension {m.shape[0]}")
        if hermiticity_defect(m) > TAU_HERM:
            raise StateError("density matrix must be Hermitian")
        m = (m + m.conj().T) / 2
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > TAU_TR:
            raise StateError(f"density matrix must have unit trace, got {tr!r}")
        e = eigh(m)
        if e.w[0] < -TAU_PSD:
            raise StateError(f"density matrix has negative eigenvalue {e.w[0]:.3e}")
        if e.w[0] < 0:
            m = (e.v * np.clip(e.w, 0.0, None)) @ e.v.conj().T
            m = (m + m.conj().T) / 2
            tr = float(np.trace(m).real)
        m = m / tr
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)
        object.__setattr__(self, "layout", layout)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def reduce(self, keep) -> "DensityMatrix":
        keep = sorted(set(keep))
        return DensityMatrix(
            partial_trace(self.mat, self.layout, keep), tuple(self.layout[k] for k in keep)
        )

    def eigenvalues(self) -> np.ndarray:
        return eigh(self.mat).w

    def purity(self) -> float:
        return float(np.real(np.vdot(self.mat, self.mat)))

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(np.kron(self.mat, other.mat), self.layout + other.layout)

    def to_json(self) -> dict:
        return {
            "layout": list(self.layout),
            "re": self.mat.real.tolist(),
            "im": self.mat.imag.tolist(),
        }

    @classmethod
    def from_json(cls, blob) -> "DensityMatrix":
        if isinstance(blob, str):
            blob = json.loads(blob)
        try:
            layout = blob["layout"]
            m = np.asarray(blob["re"], dtype=float) + 1j * np.asarray(blob["im"], dtype=float)
        except (KeyError, TypeError) as exc:
            raise StateError(f"malformed state JSON: {exc}") from exc
        return cls(m, tuple(layout))


@dataclass(frozen=True, eq=False)
class CqEnsemble:
    """Probabilities ``probs[x]`` paired with states ``states[x]`` on one layout."""

    probs: np.ndarray
    states: tuple[DensityMatrix, ...]

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float).reshape(-1)
        states = tuple(self.states)
        if len(states) != probs.size or probs.size == 0:
            raise StateError("ensemble needs one state per probability")
        if np.any(probs < -TAU_TR) or abs(probs.sum() - 1.0) > TAU_TR:
            raise StateError("ensemble probabilities must be nonnegative and sum to 1")
        if len({s.layout for s in states}) != 1:
            raise StateError("all ensemble states must share one layout")
        probs = np.clip(probs, 0.0, None)
        probs = probs / probs.sum()
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "states", states)

    @property
    def layout(self) -> tuple[int, ...]:
        return self.states[0].layout

    def average(self) -> DensityMatrix:
        return DensityMatrix(
            sum(p * s.mat for p, s in zip(self.probs, self.states)), self.layout
        )

    def to_json(self) -> dict:
        return {"probs": self.probs.tolist(), "states": [s.to_json() for s in self.states]}

    @classmethod
    def from_json(cls, blob) -> "CqEnsemble":
        if isinstance(blob, str):
            blob = json.loads(blob)
        try:
            return cls(blob["probs"], tuple(DensityMatrix.from_json(s) for s in blob["states"]))
        except (KeyError, TypeError) as exc:
            raise StateError(f"malformed ensemble JSON: {exc}") from exc


def maximally_mixed(layout: Sequence[int] | int) -> DensityMatrix:
    layout = (layout,) if isinstance(layout, (int, np.integer)) else tuple(layout)
    d = int(np.prod(layout))
    return DensityMatrix(np.eye(d) / d, layout)


def pure_state(vec, layout: Sequence[int] | None = None) -> DensityMatrix:
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    vec = vec / np.linalg.norm(vec)
    layout = (vec.size,) if layout is None else tuple(layout)
    return DensityMatrix(np.outer(vec, vec.conj()), layout)


def basis_state(index: int, dim: int) -> DensityMatrix:
    m = np.zeros((dim, dim), dtype=complex)
    m[index, index] = 1.0
    return DensityMatrix(m, (dim,))


def max_entangled(d: int) -> DensityMatrix:
    """The maximally entangled state on ``[d, d]``."""
    if d < 2:
        raise ValueError("max_entangled needs d >= 2")
    vec = np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)
    return pure_state(vec, (d, d))


def cq_state(e: CqEnsemble) -> DensityMatrix:
    """Block-diagonal ``sum_x p_x |x><x| (x) rho_x`` with layout ``[|X|, d]``."""
    nsym = len(e.states)
    d = e.states[0].dim
    m = np.zeros((nsym * d, nsym * d), dtype=complex)
    for x, (p, s) in enumerate(zip(e.probs, e.states)):
        m[x * d : (x + 1) * d, x * d : (x + 1) * d] = p * s.mat
    return DensityMatrix(m, (nsym, d))


def _haar_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_pure(layout: Sequence[int], seed: int) -> DensityMatrix:
    layout = tuple(layout)
    return pure_state(_haar_vector(rng_for(seed), int(np.prod(layout))), layout)


def random_density(layout: Sequence[int], rank: int | None, seed: int) -> DensityMatrix:
    """Induced-measure random state: trace a Haar pure state over a rank-dim ancilla."""
    layout = tuple(int(d) for d in layout)
    d = int(np.prod(layout))
    rank = d if rank is None else int(rank)
    if not 1 <= rank <= d:
        raise ValueError(f"rank must lie in [1, {d}], got {rank}")
    g = _haar_vector(rng_for(seed), d * rank).reshape(d, rank)
    return DensityMatrix(g @ g.conj().T, layout)


def random_probs(nsym: int, rng: np.random.Generator) -> np.ndarray:
    x = rng.standard_exponential(nsym)
    return x / x.sum()


def random_cq(nsym: int, layout: Sequence[int], seed: int, rank: int | None = None) -> CqEnsemble:
    """Dirichlet-uniform probabilities with independent induced-measure states."""
    probs = random_probs(nsym, rng_for(seed))
    states = tuple(
        random_density(layout, rank, derive_seed(seed, x)) for x in range(nsym)
    )
    return CqEnsemble(probs, states)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph
