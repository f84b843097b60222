"""Renyi divergences, conditional entropies and their smoothed versions.

Everything is in bits. The sandwiched Renyi divergence keeps the
``1/tr(rho)`` prefactor, so sub-normalized arguments are handled exactly as
normalized ones rescaled, except in the min-entropy (the alpha -> infinity
limit, where the prefactor drops out).

Min-entropies are computed from the semidefinite characterization

    2^(-H_min(A|B)) = min { tr X_B : 1_A (x) X_B >= rho_AB }

with the smoothing ball written as a fidelity constraint. Solver output is
never reported as is: the returned witness is repaired until it is exactly
feasible, so ``smooth_h_min`` is a certified lower bound on the supremum and
``smooth_h_max`` a certified upper bound on the infimum.
"""

import warnings
from dataclasses import dataclass, field

import cvxpy as cp
import numpy as np
from scipy.optimize import minimize

from .linalg import RANK_TOL, SystemLayout, hermitize, mat_pow_psd, partial_trace, support_projector
from .states import DensityOperator, as_matrix, purified_distance

__all__ = [
    "SmoothingResult",
    "SolverError",
    "renyi_divergence",
    "collision_divergence",
    "relative_entropy",
    "cond_entropy_rel",
    "cond_renyi_entropy",
    "h_min",
    "h_max",
    "smooth_h_min",
    "smooth_h_max",
    "h0_eps",
    "von_neumann",
    "mutual_information",
    "conditional_entropy",
    "purify",
]

LN2 = np.log(2.0)
# below this the fidelity constraint of the smoothing ball is not resolvable
# by an interior-point solver; smoothing then returns the unsmoothed state
MIN_RESOLVABLE_EPS = 1e-4
SOLVER_OPTS = dict(tol_gap_abs=1e-10, tol_gap_rel=1e-10, tol_feas=1e-10, max_iter=500)


class SolverError(RuntimeError):
    """The convex solver failed to return a usable point."""


@dataclass
class SmoothingResult:
    """Value of a smooth entropy together with the state that attains it.

    ``value`` is a certified bound: a lower bound on the supremum for the
    smooth min-entropy, an upper bound on the infimum for the smooth
    max-entropy. ``objective`` is the solver's (uncertified) optimum and
    ``residual`` the gap between the two.
    """

    value: float
    witness: DensityOperator
    witness_sigma: DensityOperator
    eps: float
    bound: str
    objective: float = float("nan")
    residual: float = 0.0
    iterations: int = 0
    info: dict = field(default_factory=dict)


def _log2(x):
    return np.log2(x) if x > 0 else -np.inf


def _bipartite(rho, dims):
    m = as_matrix(rho)
    if dims is None:
        lay = getattr(rho, "layout", None)
        if lay is None or len(lay.dims) != 2:
            raise ValueError("pass dims=(d_A, d_B) for a bipartite split")
        dims = lay.dims
    d_a, d_b = (int(d) for d in dims)
    if d_a * d_b != m.shape[0]:
        raise ValueError(f"dims {dims} do not match matrix dimension {m.shape[0]}")
    return m, d_a, d_b


def _trace(m):
    return float(np.real(np.trace(m)))


# ---------------------------------------------------------------- divergences

def _log2_sum_pow(w, alpha):
    """log2(sum_i w_i^alpha) for nonnegative w, computed without overflow."""
    w = w[w > 0]
    if not w.size:
        return -np.inf
    wmax = w.max()
    return alpha * np.log2(wmax) + np.log2(np.sum((w / wmax) ** alpha))


def _support_violated(rho, sigma):
    """True if supp(rho) is not contained in supp(sigma)."""
    proj = support_projector(sigma)
    leak = _trace(rho) - _trace(proj @ rho)
    return leak > 1e-9 * max(_trace(rho), 1e-300)


def _orthogonal(rho, sigma):
    return np.linalg.norm(support_projector(rho) @ support_projector(sigma)) < 1e-9


def renyi_divergence(rho, sigma, alpha):
    """Sandwiched Renyi divergence D_alpha(rho || sigma) in bits.

    ``(1/(alpha-1)) log2( tr[(s rho s)^alpha] / tr rho )`` with
    ``s = sigma^((1-alpha)/(2 alpha))`` taken on the support of sigma.
    Returns ``inf`` when the supports are orthogonal, or when alpha > 1 and
    supp(rho) is not inside supp(sigma).
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if alpha == 1:
        raise ValueError("alpha = 1 is excluded; use relative_entropy")
    r, s = as_matrix(rho), as_matrix(sigma)
    if r.shape != s.shape:
        raise ValueError(f"dimension mismatch: {r.shape} vs {s.shape}")
    tr_r = _trace(r)
    if tr_r <= 0:
        raise ValueError("rho must be nonzero")
    if _orthogonal(r, s) or (alpha > 1 and _support_violated(r, s)):
        return np.inf
    sp = mat_pow_psd(s, (1 - alpha) / (2 * alpha))
    w = np.clip(np.linalg.eigvalsh(hermitize(sp @ r @ sp, tol=1e-8)), 0, None)
    return float((_log2_sum_pow(w, alpha) - np.log2(tr_r)) / (alpha - 1))


def collision_divergence(rho, sigma):
    return renyi_divergence(rho, sigma, 2)


def _log2m_psd(m):
    """(log2 on support, support projector) via eigendecomposition."""
    w, v = np.linalg.eigh(hermitize(m))
    mask = w > RANK_TOL * max(w[-1], 0)
    lw = np.zeros_like(w)
    lw[mask] = np.log2(w[mask])
    return (v * lw) @ v.conj().T


def relative_entropy(rho, sigma):
    """Umegaki relative entropy tr[rho (log rho - log sigma)] / tr rho, in bits."""
    r, s = as_matrix(rho), as_matrix(sigma)
    if r.shape != s.shape:
        raise ValueError(f"dimension mismatch: {r.shape} vs {s.shape}")
    if _support_violated(r, s):
        return np.inf
    val = _trace(r @ (_log2m_psd(r) - _log2m_psd(s)))
    return val / _trace(r)


# ------------------------------------------------------ conditional entropies

def cond_entropy_rel(rho_ab, sigma_b, alpha, dims=None):
    """H_alpha(A|B) relative to a fixed sigma_B: -D_alpha(rho_AB || 1_A (x) sigma_B).

    ``alpha = 1`` gives the von Neumann version via ``relative_entropy``.
    """
    m, d_a, d_b = _bipartite(rho_ab, dims)
    s = as_matrix(sigma_b)
    if s.shape != (d_b, d_b):
        raise ValueError(f"sigma_B has shape {s.shape}, expected {(d_b, d_b)}")
    if abs(_trace(s) - 1) > 1e-9:
        raise ValueError("sigma_B must be normalized")
    big = np.kron(np.eye(d_a), s)
    if alpha == 1:
        return -relative_entropy(m, big)
    return -renyi_divergence(m, big, alpha)


def _sigma_from_params(x, d):
    g = (x[: d * d] + 1j * x[d * d:]).reshape(d, d)
    s = g @ g.conj().T
    return s / np.real(np.trace(s))


def _params_from_sigma(s):
    d = s.shape[0]
    g = mat_pow_psd(s, 0.5) + 1e-3 * np.eye(d)
    return np.concatenate([g.real.ravel(), g.imag.ravel()])


def _neg_entropy_and_grad(m, alpha, d_a, d_b):
    """-H_alpha(A|B)_{rho|sigma} and its gradient in the parameters of sigma = G G^dag / tr.

    Uses tr[(s rho s)^alpha] = tr[(r (1 (x) sigma^beta) r)^alpha] with r = sqrt(rho),
    beta = (1 - alpha)/alpha; the derivative of sigma -> sigma^beta goes through the
    divided differences of t -> t^beta in the eigenbasis of sigma.
    """
    beta = (1 - alpha) / alpha
    r = mat_pow_psd(m, 0.5)
    log_tr = np.log2(_trace(m))
    c = 1.0 / (1.0 - alpha)
    eye_a = np.eye(d_a)
    n = d_b * d_b

    def f(x):
        g = (x[:n] + 1j * x[n:]).reshape(d_b, d_b)
        s_un = g @ g.conj().T
        ts = _trace(s_un)
        sig = s_un / ts
        lam, w = np.linalg.eigh(sig)
        lam = np.clip(lam, 1e-300, None)
        lb = lam ** beta
        k = r @ np.kron(eye_a, (w * lb) @ w.conj().T) @ r
        kap, u = np.linalg.eigh((k + k.conj().T) / 2)
        top = kap[-1]
        if not top > 0 or not np.isfinite(top):
            return 1e6, np.zeros_like(x)
        pos = kap > 1e-14 * top
        # scaled by top^alpha so large alpha cannot overflow
        rel = kap[pos] / top
        q = np.sum(rel ** alpha)
        log_q = np.log2(q) + alpha * np.log2(top)
        mm = r @ ((u[:, pos] * (rel ** (alpha - 1) / top)) @ u[:, pos].conj().T) @ r
        mb = np.einsum("iaib->ab", mm.reshape(d_a, d_b, d_a, d_b))
        li, lj = lam[:, None], lam[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            gam = (lb[:, None] - lb[None, :]) / (li - lj)
        close = np.abs(li - lj) <= 1e-12 * np.maximum(li, lj)
        diag = beta * np.maximum(li, lj) ** (beta - 1)
        gam = np.where(close, diag, gam)
        dq = alpha * (w @ ((w.conj().T @ mb @ w) * gam) @ w.conj().T)
        ds = (dq - np.real(np.trace(dq @ sig)) * np.eye(d_b)) / ts
        dg = (ds + ds.conj().T) @ g
        scale = -c / (q * np.log(2))
        grad = scale * np.concatenate([dg.real.ravel(), dg.imag.ravel()])
        return -c * (log_q - log_tr), grad

    return f


def cond_renyi_entropy(rho_ab, alpha, dims=None, full_output=False, starts=None):
    """Conditional Renyi entropy sup_sigma H_alpha(A|B)_{rho|sigma}.

    The supremum over normalized sigma_B is found with L-BFGS and analytic
    gradients over the parameterization sigma = G G^dagger / tr(G G^dagger),
    started from rho_B and the maximally mixed state. For alpha >= 1/2 the
    problem is convex in sigma. The returned value is re-evaluated at the
    final sigma, so it is always attained (a lower bound on the supremum).
    ``alpha = 1`` is handled in closed form as H(AB) - H(B).

    With ``full_output`` returns ``(value, sigma_B, info)``.
    """
    m, d_a, d_b = _bipartite(rho_ab, dims)
    if alpha <= 0 or not np.isfinite(alpha):
        raise ValueError(f"alpha must be positive and finite, got {alpha}")
    if alpha == 1:
        rho_b = partial_trace(m, (d_a, d_b), [1]) / _trace(m)
        val = conditional_entropy(m, (d_a, d_b))
        return (val, rho_b, {"success": True, "nit": 0}) if full_output else val

    rho_b = partial_trace(m, (d_a, d_b), [1])
    rho_b = rho_b / _trace(rho_b)
    if starts is None:
        starts = [rho_b, np.eye(d_b) / d_b]
    fun = _neg_entropy_and_grad(m, alpha, d_a, d_b)
    best = None
    nit = 0
    for s0 in starts:
        res = minimize(fun, _params_from_sigma(as_matrix(s0)), jac=True, method="L-BFGS-B",
                       options=dict(ftol=1e-15, gtol=1e-12, maxiter=5000))
        nit += res.nit
        # ties go to the earlier start
        if best is None or res.fun < best.fun:
            best = res
    sigma = hermitize(_sigma_from_params(best.x, d_b))
    value = cond_entropy_rel(m, sigma, alpha, (d_a, d_b))
    if full_output:
        return value, sigma, {"success": bool(best.success), "nit": nit, "message": str(best.message)}
    return value


def _solve(prob):
    # OPTIMAL_INACCURATE is acceptable: every returned value is re-certified
    try:
        with warnings.catch_warnings():
            warnings.filterwarnings("ignore", message="Solution may be inaccurate")
            # raised by cvxpy itself for 1x1 Hermitian variables (d_B = 1)
            warnings.filterwarnings("ignore", message="Initializing a Constant with a nested list")
            prob.solve(solver=cp.CLARABEL, **SOLVER_OPTS)
    except cp.error.SolverError as exc:
        raise SolverError(str(exc)) from exc
    if prob.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        raise SolverError(f"solver status {prob.status}")
    return prob


def _certify_x(x, rho_w, d_a):
    """Shift X by a multiple of identity until 1_A (x) X >= rho_w holds exactly."""
    d_b = x.shape[0]
    gap = np.kron(np.eye(d_a), x) - rho_w
    lam = np.linalg.eigvalsh(hermitize(gap, tol=1e-6))[0]
    shift = max(0.0, -lam) * (1 + 1e-9) + 1e-15
    return x + shift * np.eye(d_b)


def _hmin_program(m, d_a, d_b, eps=None, normalized=False):
    """Solve the (smoothed) min-entropy SDP; returns (x, rho_w, objective, stats)."""
    n = d_a * d_b
    x = cp.Variable((d_b, d_b), hermitian=True)
    cons = []
    if eps is None:
        rho_var = m
        w = None
    else:
        # W = [[rho', Z], [Z^dag, rho]] >= 0 encodes ||sqrt(rho') sqrt(rho)||_1 >= Re tr Z
        w = cp.Variable((2 * n, 2 * n), hermitian=True)
        rho_var = w[:n, :n]
        cons += [w >> 0, w[n:, n:] == m]
        tr_w = cp.real(cp.trace(rho_var))
        fid = cp.real(cp.trace(w[:n, n:]))
        tr_c = _trace(m)
        if tr_c < 1 - 1e-12 and not normalized:
            fid = fid + np.sqrt(1 - tr_c) * cp.sqrt(1 - tr_w)
        cons += [fid >= np.sqrt(1 - eps ** 2)]
        cons += [tr_w == 1] if normalized else [tr_w <= 1]
    cons += [cp.kron(np.eye(d_a), x) - rho_var >> 0]
    prob = _solve(cp.Problem(cp.Minimize(cp.real(cp.trace(x))), cons))
    rho_w = m if w is None else hermitize(np.asarray(w.value)[:n, :n], tol=1e-6)
    stats = {"iterations": prob.solver_stats.num_iters or 0, "status": prob.status}
    return hermitize(np.asarray(x.value), tol=1e-6), rho_w, float(prob.value), stats


def _repair_witness(rho_w, center, eps, normalized):
    """Project a solver witness onto the PSD cone and back into the eps-ball."""
    w, v = np.linalg.eigh(rho_w)
    rho_w = (v * np.clip(w, 0, None)) @ v.conj().T
    tr = _trace(rho_w)
    if normalized or tr > 1:
        rho_w = rho_w / tr
    if purified_distance(rho_w, center) <= eps:
        return rho_w, 0.0
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = (lo + hi) / 2
        if purified_distance((1 - mid) * rho_w + mid * center, center) <= eps:
            hi = mid
        else:
            lo = mid
    return (1 - hi) * rho_w + hi * center, hi


def h_min(rho_ab, dims=None, full_output=False):
    """Conditional min-entropy H_min(A|B), certified from below.

    With ``full_output`` returns ``(value, sigma_B, objective)`` where
    ``sigma_B`` is the normalized optimal X_B and ``objective`` the raw solver
    value.
    """
    m, d_a, d_b = _bipartite(rho_ab, dims)
    x, _, obj, _ = _hmin_program(m, d_a, d_b)
    x = _certify_x(x, m, d_a)
    tr_x = _trace(x)
    value = -float(np.log2(tr_x))
    if full_output:
        return value, x / tr_x, -float(np.log2(obj))
    return value


def h_max(rho_ab, dims=None, full_output=False):
    """Conditional max-entropy, the alpha = 1/2 conditional Renyi entropy."""
    return cond_renyi_entropy(rho_ab, 0.5, dims, full_output=full_output)


def _witness(m, dims):
    return DensityOperator(m, SystemLayout(("A", "B"), tuple(dims)))


def _smooth_hmin_core(m, d_a, d_b, eps, normalized=False):
    if not 0 <= eps <= 1:
        raise ValueError(f"eps must lie in [0, 1], got {eps}")
    if eps < MIN_RESOLVABLE_EPS:
        x, _, obj, stats = _hmin_program(m, d_a, d_b)
        rho_w = m / _trace(m) if normalized else m
        x = _certify_x(x, rho_w, d_a)
        info = {"smoothing": "skipped: eps below solver resolution"}
    else:
        x, rho_w, obj, stats = _hmin_program(m, d_a, d_b, eps, normalized)
        rho_w, t_mix = _repair_witness(rho_w, m, eps, normalized)
        x = _certify_x(x, rho_w, d_a)
        info = {"mixing_weight": t_mix}
    its = stats["iterations"]
    info["solver_status"] = stats["status"]
    tr_x = _trace(x)
    value = -float(np.log2(tr_x))
    objective = -float(np.log2(obj)) if obj > 0 else np.inf
    return value, rho_w, x / tr_x, objective, its, info


def smooth_h_min(rho_ab, eps, dims=None):
    """Smooth min-entropy H_min^eps(A|B) over the purified-distance ball.

    The ball contains sub-normalized states. The returned ``value`` is
    exactly the min-entropy certificate of ``witness``, which lies inside the
    ball, hence a lower bound on the true supremum.
    """
    m, d_a, d_b = _bipartite(rho_ab, dims)
    value, rho_w, sigma, obj, its, info = _smooth_hmin_core(m, d_a, d_b, eps)
    return SmoothingResult(
        value=value,
        witness=_witness(rho_w, (d_a, d_b)),
        witness_sigma=DensityOperator(sigma, SystemLayout(("B",), (d_b,))),
        eps=eps,
        bound="lower",
        objective=obj,
        residual=abs(obj - value),
        iterations=its,
        info=info,
    )


def purify(m, tol=RANK_TOL):
    """Purification of ``m`` as a (dim, rank) matrix ``V`` with V V^dagger = m."""
    w, v = np.linalg.eigh(hermitize(as_matrix(m)))
    keep = w > tol * max(w[-1], 0)
    return v[:, keep] * np.sqrt(w[keep])


def _reduced(psi, dims, keep):
    """Marginal of a pure state given as a vector over ``dims``."""
    return partial_trace(np.outer(psi, psi.conj()), dims, keep)


def smooth_h_max(rho_ab, eps, dims=None):
    """Smooth max-entropy H_max^eps(A|B), certified from above.

    Uses the duality H_max(A|B) = -H_min(A|C) for a purification on ABC.
    The normalized smooth min-entropy of A|C is solved as an SDP, its
    witness is lifted back to a pure state on ABC with the B dimension
    unchanged (Uhlmann-optimal purification, truncated to rank d_B), pulled
    back into the ball if needed, and the reported value is minus the
    certified min-entropy of A|C for that pure state. Because the max-entropy
    is scale invariant, restricting to normalized witnesses loses nothing.
    """
    m, d_a, d_b = _bipartite(rho_ab, dims)
    if not 0 <= eps <= 1:
        raise ValueError(f"eps must lie in [0, 1], got {eps}")
    m = m / _trace(m)
    # |psi>_{ABC} as a matrix with rows AB and columns C
    v = purify(m)
    d_c = v.shape[1]
    dims3 = (d_a, d_b, d_c)
    psi = v.ravel()
    rho_ac = _reduced(psi, dims3, [0, 2])

    _, r_ac, _, obj, its, info = _smooth_hmin_core(rho_ac, d_a, d_c, eps, normalized=True)
    # purify r_ac into a d_b-dimensional system, keeping the largest weights
    w, vec = np.linalg.eigh(r_ac)
    order = np.argsort(w)[::-1][:d_b]
    w = np.clip(w[order], 0, None)
    w = w / w.sum()
    phi_acb = np.zeros((d_a * d_c, d_b), dtype=complex)
    phi_acb[:, : len(order)] = vec[:, order] * np.sqrt(w)
    psi_acb = psi.reshape(d_a, d_b, d_c).transpose(0, 2, 1).reshape(d_a * d_c, d_b)
    # Uhlmann: unitary on B maximizing the overlap with psi
    k = psi_acb.conj().T @ phi_acb
    u, _, vh = np.linalg.svd(k)
    phi_acb = phi_acb @ (vh.conj().T @ u.conj().T)
    phase = np.vdot(psi_acb.ravel(), phi_acb.ravel())
    if abs(phase) > 0:
        phi_acb = phi_acb * (abs(phase) / phase)
    phi = phi_acb.reshape(d_a, d_c, d_b).transpose(0, 2, 1).ravel()

    def mixed(t):
        vec_t = (1 - t) * phi + t * psi
        return vec_t / np.linalg.norm(vec_t)

    t_mix = 0.0
    if purified_distance(_reduced(phi, dims3, [0, 1]), m) > eps:
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = (lo + hi) / 2
            if purified_distance(_reduced(mixed(mid), dims3, [0, 1]), m) <= eps:
                hi = mid
            else:
                lo = mid
        t_mix = hi
    phi = mixed(t_mix)
    wit_ab = _reduced(phi, dims3, [0, 1])
    wit_ac = _reduced(phi, dims3, [0, 2])
    x, _, _, _ = _hmin_program(wit_ac, d_a, d_c)
    x = _certify_x(x, wit_ac, d_a)
    value = float(np.log2(_trace(x)))
    _, sigma_b, _ = h_max(wit_ab, (d_a, d_b), full_output=True)
    info.update({"mixing_weight": t_mix, "purification_dim": d_c,
                 "truncated_rank": int(np.sum(np.linalg.eigvalsh(r_ac) > RANK_TOL))})
    return SmoothingResult(
        value=value,
        witness=_witness(wit_ab, (d_a, d_b)),
        witness_sigma=DensityOperator(sigma_b, SystemLayout(("B",), (d_b,))),
        eps=eps,
        bound="upper",
        objective=-obj,
        residual=abs(value + obj),
        iterations=its,
        info=info,
    )


# ------------------------------------------------------------- other entropies

def h0_eps(rho_a, eps):
    """Smoothed Hartley entropy by eigenvalue truncation, in bits.

    Smallest eigenvalues are removed (without renormalizing) as long as the
    truncated operator stays within purified distance ``eps`` of the input.
    This only searches the eigenbasis of the input, so it is an upper bound
    on the infimum over the whole ball.
    """
    if not 0 <= eps <= 1:
        raise ValueError(f"eps must lie in [0, 1], got {eps}")
    m = as_matrix(rho_a)
    w = np.sort(np.clip(np.linalg.eigvalsh(hermitize(m)), 0, None))
    tr = w.sum()
    support = w > RANK_TOL * w[-1]
    w = w[support]
    removed = 0
    for k in range(1, len(w)):
        kept = w[k:]
        mass = kept.sum()
        # diagonal in the same basis: ||sqrt(rho') sqrt(rho)||_1 = sum of kept eigenvalues
        fid = mass + np.sqrt(max(0.0, 1 - mass) * max(0.0, 1 - tr))
        if np.sqrt(max(0.0, 1 - min(1.0, fid) ** 2)) <= eps + 1e-12:
            removed = k
        else:
            break
    return float(np.log2(len(w) - removed))


def von_neumann(rho):
    w = np.linalg.eigvalsh(hermitize(as_matrix(rho)))
    w = w[w > 1e-15]
    return float(-np.sum(w * np.log2(w)))


def mutual_information(rho_ab, dims=None):
    """I(A:B) = H(A) + H(B) - H(AB) in bits."""
    m, d_a, d_b = _bipartite(rho_ab, dims)
    h_a = von_neumann(partial_trace(m, (d_a, d_b), [0]))
    h_b = von_neumann(partial_trace(m, (d_a, d_b), [1]))
    return h_a + h_b - von_neumann(m)


def conditional_entropy(rho_ab, dims=None):
    """H(A|B) = H(AB) - H(B) in bits."""
    m, d_a, d_b = _bipartite(rho_ab, dims)
    return von_neumann(m) - von_neumann(partial_trace(m, (d_a, d_b), [1]))
