"""Unitary ensembles and their 2-fold twirls.

Covers Haar sampling, enumeration of the one- and two-qubit Clifford groups,
brickwork random circuits, the closed-form Haar twirl, and two-sided bounds
on the diamond-norm distance between an ensemble twirl and the Haar twirl.

Superoperators use column-stacking vectorization: vec(A X B) = (B^T (x) A) vec(X).
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from .linalg import op_norm, swap_operator, trace_norm

__all__ = [
    "UnitaryEnsemble",
    "DeltaEstimate",
    "haar_sample",
    "haar_twirl",
    "ensemble_twirl",
    "moment_superoperator",
    "choi_of_superoperator",
    "delta_bounds",
    "clifford_group",
    "random_circuit_ensemble",
    "haar_ensemble",
    "is_exact_2design",
    "ensemble_from_spec",
    "ensemble_to_spec",
]

MAX_SUPEROP_DIM = 4
CHUNK = 512


@dataclass(frozen=True, eq=False)
class UnitaryEnsemble:
    """Weighted finite set of unitaries {(p_i, U_i)}.

    ``unitaries`` has shape (N, d, d). ``spec`` records how the ensemble was
    generated, if it was.
    """

    probs: np.ndarray
    unitaries: np.ndarray
    spec: dict = None

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).ravel()
        u = np.asarray(self.unitaries, dtype=complex)
        if u.ndim == 2:
            u = u[None]
        if u.ndim != 3 or u.shape[1] != u.shape[2]:
            raise ValueError(f"unitaries must have shape (N, d, d), got {u.shape}")
        if p.shape[0] != u.shape[0]:
            raise ValueError("one probability per unitary required")
        if np.any(p < 0) or abs(p.sum() - 1) > 1e-10:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        eye = np.eye(u.shape[1])
        err = np.max(np.abs(np.einsum("nji,njk->nik", u.conj(), u) - eye))
        if err > 1e-10:
            raise ValueError(f"element is not unitary (max |U^dag U - I| = {err:.2e})")
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "unitaries", u)

    @property
    def dim(self):
        return self.unitaries.shape[1]

    def __len__(self):
        return self.unitaries.shape[0]

    def __iter__(self):
        return zip(self.probs, self.unitaries)

    @classmethod
    def uniform(cls, unitaries, spec=None):
        u = np.asarray(unitaries, dtype=complex)
        return cls(np.full(u.shape[0], 1.0 / u.shape[0]), u, spec)


@dataclass(frozen=True)
class DeltaEstimate:
    """Lower and upper bounds on the diamond distance to the Haar 2-fold twirl."""

    lower: float
    upper: float

    def __post_init__(self):
        if not 0 <= self.lower <= self.upper * (1 + 1e-12) + 1e-15:
            raise ValueError(f"invalid bounds ({self.lower}, {self.upper})")


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def haar_sample(d, seed=None):
    """Haar-random d x d unitary.

    QR decomposition of a complex Ginibre matrix, with the columns of Q
    rescaled by the phases of diag(R) so that the distribution is exactly Haar.
    """
    rng = _rng(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph


def haar_ensemble(d, samples, seed=None):
    rng = _rng(seed)
    u = np.stack([haar_sample(d, rng) for _ in range(samples)])
    return UnitaryEnsemble.uniform(u, {"kind": "haar_samples", "dim": d, "samples": samples,
                                       "seed": seed if isinstance(seed, int) else None})


def _twirl_coeffs(t, f, d):
    denom = d * (d * d - 1)
    return (d * t - f) / denom, (d * f - t) / denom


def haar_twirl(x):
    """Closed-form Haar 2-fold twirl of an operator on C^d (x) C^d.

    The image is a I + b F; a and b are fixed by matching tr(X) and tr(F X).
    """
    x = np.asarray(x, dtype=complex)
    d = int(round(np.sqrt(x.shape[0])))
    if d * d != x.shape[0] or x.shape != (d * d, d * d):
        raise ValueError(f"expected a d^2 x d^2 operator, got {x.shape}")
    t = np.trace(x)
    if d == 1:
        return np.array([[t]])
    f_op = swap_operator(d)
    f = np.trace(f_op @ x)
    a, b = _twirl_coeffs(t, f, d)
    return a * np.eye(d * d) + b * f_op


def _doubled(u):
    """U (x) U for a stack of unitaries."""
    n, d, _ = u.shape
    return np.einsum("nij,nkl->nikjl", u, u).reshape(n, d * d, d * d)


def ensemble_twirl(ensemble, x, adjoint=False):
    """sum_i p_i (U_i (x) U_i) X (U_i (x) U_i)^dagger.

    With ``adjoint`` the conjugation is reversed: (U (x) U)^dagger X (U (x) U).
    The sum runs in fixed chunks of ascending element index.
    """
    x = np.asarray(x, dtype=complex)
    d = ensemble.dim
    if x.shape != (d * d, d * d):
        raise ValueError(f"operator shape {x.shape} does not match ensemble dimension {d}")
    out = np.zeros_like(x)
    for start in range(0, len(ensemble), CHUNK):
        w = _doubled(ensemble.unitaries[start:start + CHUNK])
        p = ensemble.probs[start:start + CHUNK]
        if adjoint:
            w = w.conj().transpose(0, 2, 1)
        out += np.tensordot(p, w @ x @ w.conj().transpose(0, 2, 1), axes=1)
    return out


def _haar_superop(d):
    eye = np.eye(d * d)
    f_op = swap_operator(d)
    vi = eye.reshape(-1, order="F")
    vf = f_op.reshape(-1, order="F")
    denom = d * (d * d - 1)
    # rows: functionals X -> tr X and X -> tr(F X) in vec form
    row_t = vi
    row_f = f_op.T.reshape(-1, order="F")
    a_row = (d * row_t - row_f) / denom
    b_row = (d * row_f - row_t) / denom
    return np.outer(vi, a_row) + np.outer(vf, b_row)


def moment_superoperator(source, d=None):
    """Matrix of X -> twirl(X) acting on column-stacked vec(X).

    ``source`` is a UnitaryEnsemble or the string ``"haar"`` (then ``d`` is needed).
    """
    if isinstance(source, str):
        if source != "haar":
            raise ValueError(f"unknown source {source!r}")
        if d is None:
            raise ValueError("d is required for the Haar moment operator")
        if d > MAX_SUPEROP_DIM:
            raise MemoryError(f"moment superoperator for d={d} exceeds the d<={MAX_SUPEROP_DIM} guard")
        if d == 1:
            return np.ones((1, 1), dtype=complex)
        return _haar_superop(d).astype(complex)
    d = source.dim
    if d > MAX_SUPEROP_DIM:
        raise MemoryError(f"moment superoperator for d={d} exceeds the d<={MAX_SUPEROP_DIM} guard")
    big = d * d
    out = np.zeros((big * big, big * big), dtype=complex)
    for start in range(0, len(source), CHUNK):
        w = _doubled(source.unitaries[start:start + CHUNK])
        p = source.probs[start:start + CHUNK]
        # vec(W X W^dag) = (conj(W) (x) W) vec(X)
        blk = np.tensordot(p[:, None, None] * w.conj(), w, axes=(0, 0))  # [i, j, k, l]
        out += blk.transpose(0, 2, 1, 3).reshape(big * big, big * big)
    return out


def choi_of_superoperator(s, din):
    """Normalized Choi operator (Phi (x) id)(|Omega><Omega|) of a superoperator matrix.

    ``s`` acts on column-stacked vectors of din x din operators.
    """
    # S[(a,b),(c,e)] with vec index = row + din*col; Phi(|c><e|)[a,b] = S[a + din*b, c + din*e]
    t = s.reshape(din, din, din, din, order="F")  # t[a, b, c, e]
    j = np.einsum("abce->acbe", t).reshape(din * din, din * din)
    return j / din


def delta_bounds(ensemble):
    """Two-sided bounds on || twirl_ensemble - twirl_Haar ||_diamond.

    With J the normalized Choi operator of the difference map and D = d^2 its
    input dimension: ||J||_1 <= ||.||_diamond <= D ||J||_1.
    """
    d = ensemble.dim
    diff = moment_superoperator(ensemble) - moment_superoperator("haar", d)
    big = d * d
    tn = trace_norm(choi_of_superoperator(diff, big))
    return DeltaEstimate(lower=tn, upper=big * tn)


def is_exact_2design(ensemble, tol=1e-9):
    d = ensemble.dim
    diff = moment_superoperator(ensemble) - moment_superoperator("haar", d)
    return op_norm(diff) <= tol


# ------------------------------------------------------------------ Clifford

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.diag([1, 1j])
_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def _canonical(u):
    """Global-phase representative: first entry with |u| > 1e-8 made real positive."""
    flat = u.ravel()
    k = np.argmax(np.abs(flat) > 1e-8)
    v = u * (abs(flat[k]) / flat[k])
    return v


def _key(u):
    r = np.round(_canonical(u), 8) + (0.0 + 0.0j)
    return r.tobytes()


def _generators(n):
    if n == 1:
        return [_H, _S]
    eye = np.eye(2)
    swap = swap_operator(2)
    return [np.kron(_H, eye), np.kron(eye, _H), np.kron(_S, eye), np.kron(eye, _S),
            _CNOT, swap @ _CNOT @ swap]


def clifford_group(n):
    """Uniform ensemble over the n-qubit Clifford group modulo phases (n = 1, 2).

    Breadth-first closure of {H, S, CNOT} acting on each qubit / pair.
    """
    if n not in (1, 2):
        raise ValueError("clifford_group supports n = 1 or n = 2")
    gens = _generators(n)
    eye = np.eye(2 ** n, dtype=complex)
    seen = {_key(eye): eye}
    queue = deque([eye])
    while queue:
        u = queue.popleft()
        for g in gens:
            v = _canonical(g @ u)
            k = _key(v)
            if k not in seen:
                seen[k] = v
                queue.append(v)
    elems = np.stack(list(seen.values()))
    return UnitaryEnsemble.uniform(elems, {"kind": "clifford", "n_qubits": n})


# ------------------------------------------------------------ random circuits

def _embed_pair(gate, i, n):
    """Gate on neighbouring qubits (i, i+1) of an n-qubit register."""
    return np.kron(np.kron(np.eye(2 ** i), gate), np.eye(2 ** (n - i - 2)))


def _local_cnot_gate(rng):
    return np.kron(haar_sample(2, rng), haar_sample(2, rng)) @ _CNOT


def random_circuit_ensemble(n_qubits, depth, samples, seed=None, gate="haar"):
    """Brickwork random circuits on a line of qubits.

    Layer k applies independent two-qubit gates to pairs (0,1), (2,3), ...
    for even k and (1,2), (3,4), ... for odd k. ``gate="haar"`` draws
    Haar-random U(4) gates; ``gate="local_cnot"`` draws (u (x) v) CNOT with
    Haar single-qubit u, v, which converges to a 2-design only with depth,
    also for two qubits.
    """
    if n_qubits < 2:
        raise ValueError("random circuits need at least two qubits")
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if gate not in ("haar", "local_cnot"):
        raise ValueError(f"unknown gate model {gate!r}")
    rng = np.random.default_rng(seed)
    draw = (lambda: haar_sample(4, rng)) if gate == "haar" else (lambda: _local_cnot_gate(rng))
    dim = 2 ** n_qubits
    out = np.empty((samples, dim, dim), dtype=complex)
    for s in range(samples):
        u = np.eye(dim, dtype=complex)
        for layer in range(depth):
            for i in range(layer % 2, n_qubits - 1, 2):
                u = _embed_pair(draw(), i, n_qubits) @ u
        out[s] = u
    spec = {"kind": "random_circuit", "n_qubits": n_qubits, "depth": depth,
            "samples": samples, "seed": seed, "gate": gate}
    return UnitaryEnsemble.uniform(out, spec)


# ------------------------------------------------------------- spec handling

def ensemble_from_spec(spec):
    """Build an ensemble from a spec dict.

    ``{"kind": "clifford", "n_qubits": n}``,
    ``{"kind": "random_circuit", "n_qubits", "depth", "samples", "seed"[, "gate"]}``,
    ``{"kind": "haar_samples", "dim", "samples", "seed"}`` or
    ``{"kind": "explicit", "elements": [{"p": .., "re": [[..]], "im": [[..]]}, ...]}``.
    """
    kind = spec.get("kind")
    if kind == "clifford":
        return clifford_group(int(spec["n_qubits"]))
    if kind == "random_circuit":
        return random_circuit_ensemble(int(spec["n_qubits"]), int(spec["depth"]), int(spec["samples"]),
                                       spec.get("seed"), spec.get("gate", "haar"))
    if kind == "haar_samples":
        dim = int(spec.get("dim") or 2 ** int(spec["n_qubits"]))
        return haar_ensemble(dim, int(spec["samples"]), spec.get("seed"))
    if kind == "explicit":
        els = spec["elements"]
        p = [float(e["p"]) for e in els]
        u = [np.asarray(e["re"], dtype=float) + 1j * np.asarray(e.get("im", 0.0), dtype=float) for e in els]
        return UnitaryEnsemble(np.array(p), np.stack(u), {"kind": "explicit"})
    raise ValueError(f"unknown ensemble kind {kind!r}")


def ensemble_to_spec(ensemble):
    """Explicit spec listing every element; round-trips through ``ensemble_from_spec``."""
    return {
        "kind": "explicit",
        "elements": [{"p": float(p), "re": u.real.tolist(), "im": u.imag.tolist()} for p, u in ensemble],
    }
