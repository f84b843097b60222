"""Density operators, pure states and the generalized distance measures
used for smoothing (trace distance, fidelity, purified distance)."""

from dataclasses import dataclass

import numpy as np

from .linalg import (
    PSD_TOL,
    SystemLayout,
    hermitize,
    mat_pow_psd,
    partial_trace,
    tensor,
    trace_norm,
)

__all__ = [
    "DensityOperator",
    "PureState",
    "as_matrix",
    "gen_trace_distance",
    "gen_fidelity",
    "purified_distance",
    "in_eps_ball",
    "maximally_mixed",
    "random_state",
    "random_pure_state",
    "random_pure_tripartite",
    "max_entangled",
    "product_state",
]

TRACE_TOL = 1e-12


def _layout(layout, dim):
    if layout is None:
        return SystemLayout(("S",), (dim,))
    if not isinstance(layout, SystemLayout):
        layout = SystemLayout.from_dims(layout)
    if layout.dim != dim:
        raise ValueError(f"layout dimension {layout.dim} != matrix dimension {dim}")
    return layout


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """PSD operator with trace in (0, 1] over a labelled multipartite space.

    Sub-normalized operators are allowed. The matrix is Hermitized on
    construction and validated against the PSD and trace constraints.
    """

    matrix: np.ndarray
    layout: SystemLayout = None

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        m = hermitize(m)
        w = np.linalg.eigvalsh(m)
        if w[0] < -PSD_TOL:
            raise ValueError(f"density matrix is not PSD (min eigenvalue {w[0]:.3e})")
        tr = float(np.real(np.trace(m)))
        if tr > 1 + TRACE_TOL:
            raise ValueError(f"trace {tr!r} exceeds 1")
        if tr <= 0:
            raise ValueError("density operator must be nonzero")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "layout", _layout(self.layout, m.shape[0]))

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def dims(self):
        return self.layout.dims

    @property
    def trace(self):
        return float(np.real(np.trace(self.matrix)))

    def ptrace(self, keep):
        """Marginal on the subsystems in ``keep``."""
        if isinstance(keep, str):
            keep = [keep]
        m = partial_trace(self.matrix, self.layout, keep)
        return DensityOperator(m, self.layout.sub(keep))

    def purity(self):
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def __repr__(self):
        return f"DensityOperator(dims={self.dims}, labels={self.layout.labels}, trace={self.trace:.6g})"


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit-norm state vector over a labelled multipartite space."""

    vector: np.ndarray
    layout: SystemLayout = None

    def __post_init__(self):
        v = np.array(self.vector, dtype=complex).ravel()
        nrm = np.linalg.norm(v)
        if abs(nrm - 1) > 1e-12:
            raise ValueError(f"state vector norm {nrm!r} is not 1")
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)
        object.__setattr__(self, "layout", _layout(self.layout, v.size))

    @property
    def dims(self):
        return self.layout.dims

    def density(self):
        return DensityOperator(np.outer(self.vector, self.vector.conj()), self.layout)

    def ptrace(self, keep):
        return self.density().ptrace(keep)

    def permute(self, order):
        """Return the state with subsystems reordered to the labels in ``order``."""
        idx = [self.layout.index(k) for k in order]
        t = self.vector.reshape(self.dims).transpose(idx)
        lay = SystemLayout(tuple(order), tuple(self.dims[i] for i in idx))
        return PureState(t.ravel(), lay)

    def __repr__(self):
        return f"PureState(dims={self.dims}, labels={self.layout.labels})"


def as_matrix(rho):
    """Matrix of a DensityOperator or PureState; arrays pass through."""
    if isinstance(rho, PureState):
        return np.outer(rho.vector, rho.vector.conj())
    return np.asarray(getattr(rho, "matrix", rho), dtype=complex)


def _pair(rho, tau):
    a, b = as_matrix(rho), as_matrix(tau)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


def _tr(m):
    return float(np.real(np.trace(m)))


def gen_trace_distance(rho, tau):
    """Generalized trace distance ||rho - tau||_1 + |tr rho - tr tau|.

    Note there is no factor 1/2: orthogonal pure states are at distance 2.
    """
    a, b = _pair(rho, tau)
    return trace_norm(a - b) + abs(_tr(a) - _tr(b))


def gen_fidelity(rho, tau):
    """Generalized fidelity of two (sub-normalized) states.

    ``||sqrt(rho) sqrt(tau)||_1 + sqrt((1 - tr rho)(1 - tr tau))``; this is
    the square-root convention, so identical normalized states give 1.
    """
    a, b = _pair(rho, tau)
    ta, tb = _tr(a), _tr(b)
    if ta > 1 + TRACE_TOL or tb > 1 + TRACE_TOL:
        raise ValueError("generalized fidelity needs traces <= 1")
    overlap = trace_norm(mat_pow_psd(a, 0.5) @ mat_pow_psd(b, 0.5))
    return overlap + np.sqrt(max(0.0, 1 - ta) * max(0.0, 1 - tb))


def purified_distance(rho, tau):
    f = min(1.0, gen_fidelity(rho, tau))
    return float(np.sqrt(max(0.0, 1 - f * f)))


def in_eps_ball(candidate, center, eps):
    if not 0 <= eps <= 1:
        raise ValueError(f"eps must lie in [0, 1], got {eps}")
    return purified_distance(candidate, center) <= eps + 1e-12


def maximally_mixed(d, label="A"):
    if d < 1:
        raise ValueError("d must be positive")
    return DensityOperator(np.eye(d) / d, SystemLayout((label,), (d,)))


def max_entangled(d):
    """Vector of (1/sqrt d) sum_i |ii>."""
    return np.eye(d).ravel() / np.sqrt(d)


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_pure_state(d, seed=None):
    rng = _rng(seed)
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_state(d, rank=None, seed=None, layout=None):
    """Hilbert-Schmidt-induced random density matrix.

    Traces out a ``rank``-dimensional ancilla from a Haar-random pure state
    on C^d (x) C^rank; ``rank = d`` gives the Hilbert-Schmidt ensemble.
    """
    rank = d if rank is None else rank
    if not 1 <= rank <= d:
        raise ValueError(f"rank must be in [1, {d}], got {rank}")
    g = random_pure_state(d * rank, seed).reshape(d, rank)
    rho = g @ g.conj().T
    return DensityOperator(rho, layout)


def random_pure_tripartite(d_A, d_B, d_R, seed=None):
    v = random_pure_state(d_A * d_B * d_R, seed)
    return PureState(v, SystemLayout(("A", "B", "R"), (d_A, d_B, d_R)))


def product_state(*states):
    """Tensor product of DensityOperators, concatenating their layouts."""
    labels, dims = [], []
    for s in states:
        labels += list(s.layout.labels)
        dims += list(s.layout.dims)
    return DensityOperator(tensor(*[s.matrix for s in states]), SystemLayout(tuple(labels), tuple(dims)))
