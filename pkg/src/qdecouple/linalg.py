"""Dense complex-matrix helpers: Kronecker products, partial traces,
spectral powers and Schatten norms.

Subsystem ordering is fixed throughout the package: the first-listed
subsystem is the leftmost Kronecker factor (most significant index).
All logarithms elsewhere in the package are base 2.
"""

from dataclasses import dataclass
from functools import reduce

import numpy as np

__all__ = [
    "SystemLayout",
    "NotPSDError",
    "RANK_TOL",
    "tensor",
    "partial_trace",
    "permute_systems",
    "hermitize",
    "mat_pow_psd",
    "support_projector",
    "trace_norm",
    "two_norm",
    "op_norm",
    "swap_operator",
]

#: eigenvalues below ``RANK_TOL * max_eigenvalue`` count as outside the support
RANK_TOL = 1e-10
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-9


class NotPSDError(ValueError):
    """Raised when an operator expected to be PSD has a clearly negative eigenvalue."""


@dataclass(frozen=True)
class SystemLayout:
    """Ordered subsystem labels and their Hilbert-space dimensions."""

    labels: tuple
    dims: tuple

    def __post_init__(self):
        labels = tuple(self.labels)
        dims = tuple(int(d) for d in self.dims)
        if len(labels) != len(dims):
            raise ValueError("labels and dims must have equal length")
        if len(set(labels)) != len(labels):
            raise ValueError(f"subsystem labels must be unique, got {labels}")
        if any(d < 1 for d in dims):
            raise ValueError(f"dimensions must be positive, got {dims}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_dims(cls, dims, labels=None):
        if labels is None:
            labels = [chr(ord("A") + i) for i in range(len(dims))]
        return cls(tuple(labels), tuple(dims))

    @property
    def dim(self):
        return int(np.prod(self.dims, dtype=np.int64))

    def index(self, label):
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown subsystem label {label!r}") from None

    def sub(self, keep):
        """Layout restricted to ``keep``, in the original order."""
        idx = sorted(self.index(k) for k in keep)
        return SystemLayout(tuple(self.labels[i] for i in idx),
                            tuple(self.dims[i] for i in idx))


def _as_array(m):
    return np.asarray(getattr(m, "matrix", m), dtype=complex)


def tensor(*ops):
    """Kronecker product of the arguments, first argument leftmost."""
    if not ops:
        raise ValueError("tensor needs at least one operand")
    return reduce(np.kron, (_as_array(o) for o in ops))


def _resolve_keep(layout, keep):
    if isinstance(keep, (str, int)):
        keep = [keep]
    idx = []
    for k in keep:
        if isinstance(k, (int, np.integer)):
            if not 0 <= k < len(layout.dims):
                raise KeyError(f"subsystem index {k} out of range")
            idx.append(int(k))
        else:
            idx.append(layout.index(k))
    return sorted(set(idx))


def partial_trace(m, layout, keep):
    """Trace out every subsystem not listed in ``keep``.

    Parameters
    ----------
    m : (D, D) array_like
        Operator on the full space.
    layout : SystemLayout or sequence of int
        Subsystem structure of ``m``; a plain dimension list is accepted.
    keep : label, index, or iterable of them
        Subsystems to keep. The result keeps their original relative order.
    """
    if not isinstance(layout, SystemLayout):
        layout = SystemLayout.from_dims(layout)
    m = _as_array(m)
    if m.shape != (layout.dim, layout.dim):
        raise ValueError(f"matrix shape {m.shape} does not match layout dimension {layout.dim}")
    keep_idx = _resolve_keep(layout, keep)
    n = len(layout.dims)
    dims = layout.dims
    t = m.reshape(dims + dims)
    # einsum labels: row index i, column index n+i; traced systems share a label
    row = list(range(n))
    col = [i if i not in keep_idx else n + i for i in range(n)]
    out = [i for i in keep_idx] + [n + i for i in keep_idx]
    res = np.einsum(t, row + col, out)
    dk = int(np.prod([dims[i] for i in keep_idx], dtype=np.int64))
    return res.reshape(dk, dk)


def permute_systems(m, dims, perm):
    """Reorder the tensor factors of operator ``m``.

    ``perm[k]`` is the old position of the subsystem that ends up at
    position ``k``.
    """
    m = _as_array(m)
    dims = tuple(dims)
    n = len(dims)
    t = m.reshape(dims + dims)
    axes = list(perm) + [n + p for p in perm]
    d = m.shape[0]
    return t.transpose(axes).reshape(d, d)


def hermitize(m, tol=HERMITIAN_TOL):
    """Return (M + M^dagger)/2, refusing inputs that are not Hermitian up to ``tol``."""
    m = _as_array(m)
    resid = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    scale = max(1.0, np.max(np.abs(m)) if m.size else 1.0)
    if resid > tol * scale:
        raise ValueError(f"matrix is not Hermitian (residual {resid:.3e})")
    return (m + m.conj().T) / 2


def _eigh_psd(m):
    w, v = np.linalg.eigh(hermitize(m))
    if w.size and w[0] < -PSD_TOL * max(1.0, abs(w[-1])):
        raise NotPSDError(f"matrix has negative eigenvalue {w[0]:.3e}")
    return w, v


def mat_pow_psd(m, p):
    """Power of a PSD matrix taken on its support.

    Eigenvalues at or below ``RANK_TOL`` times the largest one are mapped
    to zero, also for negative ``p`` (Moore-Penrose convention).
    """
    w, v = _eigh_psd(m)
    wmax = w[-1] if w.size else 0.0
    if wmax <= 0:
        return np.zeros_like(v)
    mask = w > RANK_TOL * wmax
    wp = np.zeros_like(w)
    wp[mask] = w[mask] ** p
    return (v * wp) @ v.conj().T


def support_projector(m):
    w, v = _eigh_psd(m)
    if not w.size or w[-1] <= 0:
        return np.zeros_like(v)
    vs = v[:, w > RANK_TOL * w[-1]]
    return vs @ vs.conj().T


def trace_norm(m):
    return float(np.sum(np.linalg.svd(_as_array(m), compute_uv=False)))


def two_norm(m):
    return float(np.linalg.norm(_as_array(m), "fro"))


def op_norm(m):
    m = _as_array(m)
    if not m.size:
        return 0.0
    return float(np.linalg.norm(m, 2))


def swap_operator(d):
    """The flip F on C^d (x) C^d with F|ij> = |ji>."""
    if d < 1:
        raise ValueError("d must be positive")
    f = np.zeros((d * d, d * d), dtype=complex)
    i, j = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    f[(j * d + i).ravel(), (i * d + j).ravel()] = 1.0
    return f
