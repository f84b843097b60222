"""One-shot coherent state merging rates with approximate 2-designs.

For a pure state Psi_ABR the achievable entanglement gain and quantum
communication cost are

    e >= (H_min^lam(A|R) + H_0^lam(A)) / 2 + log(lam' / sqrt(1 + 3 d_A^2 delta / d_A1))
    q <= (-H_min^lam(A|R) + H_0^lam(A)) / 2 - log(lam' / sqrt(1 + 3 d_A^2 delta / d_A1))

where the smoothing parameter lam and lam' = lam + sqrt(4 sqrt(lam) - 4 lam)
are fixed by eps = 2 sqrt(5 lam') + 2 sqrt(lam).
"""

from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .entropies import h0_eps, mutual_information, smooth_h_min
from .linalg import SystemLayout
from .states import PureState

__all__ = [
    "RateReport",
    "eps_from_lambda",
    "lambda_prime",
    "lambda_from_eps",
    "eps_max",
    "merging_rates",
    "asymptotic_rates",
    "iid_trend",
    "tensor_power",
]

GRID_POINTS = 10_000
LOG_LAMBDA_MIN = -300.0


def lambda_prime(lam):
    lam = np.asarray(lam, dtype=float)
    return lam + np.sqrt(np.maximum(4 * np.sqrt(lam) - 4 * lam, 0.0))


def eps_from_lambda(lam):
    lam = np.asarray(lam, dtype=float)
    return 2 * np.sqrt(5 * lambda_prime(lam)) + 2 * np.sqrt(lam)


@lru_cache(maxsize=1)
def _monotone_branch():
    """Upper end of the increasing branch of lam -> eps(lam) on (0, 1].

    eps(lam) rises from 0 and turns over near lam = 0.83, so the map is only
    invertible below the turning point. The branch is located on a
    log-spaced grid and checked to be strictly increasing up to it.
    """
    grid = np.logspace(LOG_LAMBDA_MIN, 0.0, GRID_POINTS)
    e = eps_from_lambda(grid)
    inc = np.diff(e) > 0
    if inc.all():
        return 1.0
    k = int(np.argmin(inc))
    if not inc[:k].all() or k == 0:
        raise ArithmeticError("eps(lambda) is not monotone on the lower part of (0, 1]")
    # refine the turning point between the bracketing grid points
    lo, hi = np.log10(grid[k - 1]), np.log10(grid[min(k + 1, GRID_POINTS - 1)])
    for _ in range(200):
        a = lo + (hi - lo) / 3
        b = hi - (hi - lo) / 3
        if eps_from_lambda(10 ** a) < eps_from_lambda(10 ** b):
            lo = a
        else:
            hi = b
    return float(10 ** lo)


def eps_max():
    """Largest eps reachable on the invertible branch."""
    return float(eps_from_lambda(_monotone_branch()))


def lambda_from_eps(eps, tol=1e-10):
    """Invert eps = 2 sqrt(5 lam') + 2 sqrt(lam); returns ``(lam, lam')``."""
    lam_top = _monotone_branch()
    if not 0 < eps <= eps_from_lambda(lam_top):
        raise ValueError(f"eps = {eps} outside the invertible range (0, {eps_max():.6g}]")

    def f(log_lam):
        return float(eps_from_lambda(np.exp(log_lam))) - eps

    lo = LOG_LAMBDA_MIN * np.log(10)
    hi = np.log(lam_top)
    if f(hi) >= 0 and abs(f(hi)) <= tol:
        log_lam = hi
    else:
        log_lam = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    lam = float(np.exp(log_lam))
    resid = abs(float(eps_from_lambda(lam)) - eps)
    if resid > tol:
        raise ArithmeticError(f"lambda inversion residual {resid:.2e} exceeds {tol:.0e}")
    return lam, float(lambda_prime(lam))


@dataclass
class RateReport:
    e_lower: float
    q_upper: float
    lam: float
    lam_prime: float
    h_min_eps: float
    h0_eps: float
    delta: float
    d_A1: int
    eps: float
    log_term: float

    def to_dict(self):
        return asdict(self)


def _log_term(lam_p, d_a, d_a1, delta):
    return float(np.log2(lam_p) - 0.5 * np.log2(1 + 3 * d_a ** 2 / d_a1 * delta))


def _abr(psi):
    if not isinstance(psi, PureState):
        raise TypeError("expected a PureState on subsystems A, B, R")
    missing = {"A", "B", "R"} - set(psi.layout.labels)
    if missing or len(psi.dims) != 3:
        raise ValueError(f"state must have exactly subsystems A, B, R; got {psi.layout.labels}")
    return psi.permute(["A", "B", "R"])


def merging_rates(psi, eps, delta=0.0, d_A1=None):
    """Entanglement gain lower bound and communication cost upper bound.

    When ``d_A1`` is not given, it is set to ``max(1, 2^ceil(e))`` with
    ``e`` the delta = 0 entanglement gain, i.e. the number of ebits the
    protocol would produce.
    """
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    psi = _abr(psi)
    d_a = psi.dims[0]
    lam, lam_p = lambda_from_eps(eps)
    hmin = smooth_h_min(psi.ptrace(["A", "R"]), lam).value
    h0 = h0_eps(psi.ptrace(["A"]), lam)
    base = 0.5 * (hmin + h0)
    if d_A1 is None:
        e0 = base + float(np.log2(lam_p))
        d_A1 = max(1, int(2 ** int(np.ceil(e0)))) if e0 > 0 else 1
    if d_A1 < 1:
        raise ValueError("d_A1 must be a positive integer")
    corr = _log_term(lam_p, d_a, d_A1, delta)
    return RateReport(
        e_lower=base + corr,
        q_upper=0.5 * (h0 - hmin) - corr,
        lam=lam,
        lam_prime=lam_p,
        h_min_eps=hmin,
        h0_eps=h0,
        delta=float(delta),
        d_A1=int(d_A1),
        eps=float(eps),
        log_term=corr,
    )


def asymptotic_rates(psi):
    """(q_inf, e_inf) = (I(A:R)/2, I(A:B)/2); independent of delta."""
    psi = _abr(psi)
    q = 0.5 * mutual_information(psi.ptrace(["A", "R"]))
    e = 0.5 * mutual_information(psi.ptrace(["A", "B"]))
    return q, e


def tensor_power(psi, n):
    """Psi^(x)n with subsystems regrouped as A^n B^n R^n."""
    psi = _abr(psi)
    v = psi.vector
    for _ in range(n - 1):
        v = np.kron(v, psi.vector)
    dims = psi.dims * n
    # copy k, system s sits at position 3k + s; regroup by system
    perm = [3 * k + s for s in range(3) for k in range(n)]
    t = v.reshape(dims).transpose(perm)
    d = tuple(int(psi.dims[s] ** n) for s in range(3))
    return PureState(t.ravel(), SystemLayout(("A", "B", "R"), d))


def iid_trend(psi, eps, n_max=2, delta=0.0, d_A1=None):
    """Per-copy one-shot rates of Psi^(x)n for n = 1..n_max and their gap to the IID limits."""
    psi = _abr(psi)
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if psi.dims[0] ** n_max > 64:
        raise ValueError(f"d_A^n = {psi.dims[0] ** n_max} exceeds the limit of 64")
    q_inf, e_inf = asymptotic_rates(psi)
    rows = []
    for n in range(1, n_max + 1):
        rep = merging_rates(tensor_power(psi, n), eps, delta, None if d_A1 is None else d_A1 ** n)
        e_n, q_n = rep.e_lower / n, rep.q_upper / n
        rows.append({"n": n, "e_per_copy": e_n, "q_per_copy": q_n,
                     "e_gap": e_inf - e_n, "q_gap": q_n - q_inf, "report": rep})
    return rows
