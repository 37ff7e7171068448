"""Dense complex linear algebra and small convex kernels shared by the toolkit."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from .errors import InfeasibleError, InvalidInputError

OPNORM_MAX_ITER = 10_000
GRAM_RIDGE = 1e-12
LP_SLACK_TOL = 1e-8
MAX_LP_ROWS = 500
MAX_LP_WEIGHTS = 256
MAX_MATRIX_DIM = 128


def as_cmatrix(a) -> np.ndarray:
    """Coerce to a finite 2-D complex array or raise InvalidInputError."""
    m = np.asarray(a, dtype=complex)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise InvalidInputError(f"expected a matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidInputError("matrix has non-finite entries")
    return m


def opnorm(a, seed: int = 0) -> float:
    """Largest singular value by power iteration on A^H A.

    The Rayleigh quotient converges to sigma_max^2 even when the top two
    singular values are close, so a relative stall criterion is enough.
    """
    m = as_cmatrix(a)
    if m.size == 0 or not np.any(m):
        return 0.0
    if m.shape[0] > MAX_MATRIX_DIM or m.shape[1] > MAX_MATRIX_DIM:
        raise InvalidInputError("opnorm is limited to 128x128 matrices")
    gram = m.conj().T @ m
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(gram.shape[0]) + 1j * rng.standard_normal(gram.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    stalls = 0
    for _ in range(OPNORM_MAX_ITER):
        w = gram @ v
        new = float(np.real(np.vdot(v, w)))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            break
        v = w / nw
        if abs(new - lam) <= 1e-15 * max(new, 1e-300):
            stalls += 1
            if stalls >= 3:
                lam = new
                break
        else:
            stalls = 0
        lam = new
    return float(np.sqrt(max(lam, 0.0)))


def least_norm_solve(rows, rhs, *, tol: float = 1e-9) -> tuple[np.ndarray, float]:
    """Minimum Euclidean-norm x with rows @ x = rhs.

    Solves the ridge-regularised Gram system (A A^H + eps I) y = b and
    returns x = A^H y together with the max-abs residual. Raises
    InfeasibleError when the residual exceeds ``tol * max(1, |b|_inf)``.
    """
    a = np.asarray(rows, dtype=complex)
    b = np.asarray(rhs, dtype=complex).reshape(-1)
    if a.ndim != 2:
        raise InvalidInputError("constraint rows must form a matrix")
    if a.shape[0] != b.shape[0]:
        raise InvalidInputError("rows and rhs have different lengths")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise InvalidInputError("non-finite constraint data")
    n = a.shape[1]
    if a.shape[0] == 0:
        return np.zeros(n, dtype=complex), 0.0
    gram = a @ a.conj().T
    gram += GRAM_RIDGE * np.eye(gram.shape[0])
    y = np.linalg.solve(gram, b)
    x = a.conj().T @ y
    residual = float(np.max(np.abs(a @ x - b)))
    scale = max(1.0, float(np.max(np.abs(b))))
    if residual > tol * scale:
        raise InfeasibleError("linear constraints are inconsistent", residual=residual)
    return x, residual


def lp_feasible(a_ge, b_ge, *, tol: float = LP_SLACK_TOL) -> np.ndarray | None:
    """Probability weights w with ``a_ge @ w >= b_ge`` row-wise, or None.

    Maximises the smallest slack over the simplex, so a returned point is
    as deep inside the feasible set as the data allows. The answer is
    re-checked by substitution before it is handed back.
    """
    a = np.atleast_2d(np.asarray(a_ge, dtype=float))
    b = np.asarray(b_ge, dtype=float).reshape(-1)
    if a.shape[0] != b.shape[0]:
        raise InvalidInputError("inequality rows and bounds differ in length")
    n = a.shape[1]
    if n == 0:
        raise InvalidInputError("need at least one weight")
    if a.shape[0] > MAX_LP_ROWS or n > MAX_LP_WEIGHTS:
        raise InvalidInputError("LP exceeds 500 inequalities or 256 weights")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise InvalidInputError("non-finite LP data")
    if a.shape[0] == 0:
        return np.full(n, 1.0 / n)

    # variables (w_1..w_n, t); maximise t subject to b - a w + t <= 0
    c = np.zeros(n + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-a, np.ones((a.shape[0], 1))])
    a_eq = np.zeros((1, n + 1))
    a_eq[0, :n] = 1.0
    bounds = [(0.0, None)] * n + [(None, 1.0)]
    res = linprog(c, A_ub=a_ub, b_ub=-b, A_eq=a_eq, b_eq=[1.0],
                  bounds=bounds, method="highs")
    if res.status != 0:
        return None
    t = -res.fun
    if t < -tol:
        return None
    w = np.clip(res.x[:n], 0.0, None)
    w /= w.sum()
    if np.min(a @ w - b) < -tol:
        return None
    return w


def haar_unitary(n: int, seed=None) -> np.ndarray:
    """Haar-distributed n x n unitary from the QR of a complex Ginibre matrix."""
    if n < 1 or n > 64:
        raise InvalidInputError("haar_unitary supports 1 <= n <= 64")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
