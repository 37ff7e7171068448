"""Brackets for the Hilbert-space factorisation norm gamma_2 of a Bloch map.

Lower bounds come from dominated pairs (Kwapien-type ratio) and unitary
averaging; the upper bound is a discrete Pietsch certificate, a probability
vector over unit-ball scalar test functions, from which an explicit
factorisation f' = T g' is assembled and checked.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .blochcore import (DEFAULT_GRID, BlochFunc, ComposedMap, GridSpec, Kernel, Monomial,
                        bloch_seminorm, grid_max, hyperbolic_profile, monomial_bloch_norm,
                        poly_deriv_matrix, poly_to_blochfunc, random_ball_batch,
                        self_map_blaschke)
from .domination import contraction_witness
from .errors import CertificateUnavailableError, InvalidInputError, ReconstructionError
from .molecules import WeightedSeq
from .numkit import MAX_LP_ROWS, MAX_LP_WEIGHTS, haar_unitary, lp_feasible, opnorm

log = logging.getLogger(__name__)

TEST_GRID = GridSpec(n_r=8, n_theta=16, r_cert=0.95, mode="uniform")
# coarse adaptive grid used only to certify the projection samples
PROJ_GRID = GridSpec(n_r=64, n_theta=64)
BISECT_TOL = 1e-3
CERT_TOL = 1e-8
RECON_TOL = 1e-6
FIT_TOL = 1e-7
MAX_CUT_ROUNDS = 10
CUTS_PER_ROUND = 4


@dataclass
class GammaBracket:
    lower: float
    upper: float
    lower_source: str = ""
    upper_source: str = ""

    def to_dict(self):
        return {"lower": self.lower, "upper": self.upper,
                "provenance": {"lower": self.lower_source, "upper": self.upper_source}}


def _as_points(f):
    return np.array([b.zeta for _, b in f.terms if isinstance(b, Kernel)], dtype=complex)


def _argmax(mapping, grid):
    if isinstance(mapping, BlochFunc):
        br = bloch_seminorm(mapping, grid)
        return br.argmax, br
    _, arg = grid_max(mapping, grid)
    return arg, None


# ---------------------------------------------------------------------------
# lower bounds


def _random_disc(rng, k, rmax=0.95):
    return rmax * np.sqrt(rng.random(k)) * np.exp(2j * np.pi * rng.random(k))


def _random_dominated_pair(rng, anchor):
    """a on k points; b carries at least a's mass at each point plus extras."""
    k = int(rng.integers(1, 5))
    pts = _random_disc(rng, k)
    if rng.random() < 0.5:
        # stay close to the maximiser, where the ratio is largest
        pts[0] = anchor * (1 - 0.05 * rng.random()) + 0.02 * (rng.random() - 0.5)
        if abs(pts[0]) >= 0.999:
            pts[0] *= 0.99
    lam = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    grow = 1.0 + rng.exponential(0.3, k) * (rng.random(k) < 0.5)
    phase = np.exp(2j * np.pi * rng.random(k))
    b_pairs = list(zip(lam * grow * phase, pts))
    extra = int(rng.integers(0, 3))
    if extra:
        b_pairs += list(zip(rng.standard_normal(extra) + 1j * rng.standard_normal(extra),
                            _random_disc(rng, extra)))
    return WeightedSeq(zip(lam, pts)), WeightedSeq(b_pairs)


def kwapien_ratio(mapping, a: WeightedSeq, b: WeightedSeq) -> float | None:
    """sqrt(sum |lambda|^2 ||f'(z)||^2 / sum |mu|^2 / (1-|w|^2)^2), or None if degenerate."""
    den = float(np.sum(b.masses() / (1.0 - np.abs(b.points) ** 2) ** 2))
    if den <= 0.0:
        return None
    num = float(np.sum(a.masses() * np.linalg.norm(mapping.deriv(a.points), axis=-1) ** 2))
    return float(np.sqrt(num / den))


def kwapien_lb(mapping, budget: int = 1000, seed=0, grid: GridSpec = DEFAULT_GRID) -> float:
    """Largest ratio over pairs (a, b) accepted by the contraction test.

    Always includes the singleton pair at the maximiser of the hyperbolic
    profile, so the result is at least the grid lower bound of rho_B.
    """
    rng = np.random.default_rng(seed)
    arg, _ = _argmax(mapping, grid)
    best = float(hyperbolic_profile(mapping, np.array([arg]))[0])
    for _ in range(budget):
        a, b = _random_dominated_pair(rng, arg)
        w = contraction_witness(a, b)
        if w is None or not w.accepted:
            continue
        r = kwapien_ratio(mapping, a, b)
        if r is None:
            log.debug("skipped pair with zero denominator")
            continue
        best = max(best, r)
    return best


@dataclass
class UnitaryReport:
    max_ratio: float
    c: float
    n: int
    trials: int
    worst: dict = field(default_factory=dict)

    def to_dict(self):
        return {"max_ratio": self.max_ratio, "c": self.c, "n": self.n, "trials": self.trials,
                "worst": self.worst}


def unitary_criterion_check(f, c: float, n: int = 8, trials: int = 1000, seed=0) -> UnitaryReport:
    """Largest lhs / (c^2 sum |mu_j|^2 / (1-|w_j|^2)^2) over Haar unitaries.

    lhs = sum_i || sum_j mu_j a_ij f'(w_j) ||^2. A ratio above 1 refutes
    gamma_2(f) <= c.
    """
    if n < 1 or n > 16:
        raise InvalidInputError("unitary size must lie in 1..16")
    rng = np.random.default_rng(seed)
    best, worst = 0.0, {}
    for t in range(trials):
        u = haar_unitary(n, rng)
        mu = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        w = _random_disc(rng, n)
        v = mu[:, None] * f.deriv(w)
        lhs = float(np.linalg.norm(u @ v) ** 2)
        rhs = c ** 2 * float(np.sum(np.abs(mu) ** 2 / (1 - np.abs(w) ** 2) ** 2))
        if rhs > 0:
            ratio = lhs / rhs
        else:
            ratio = np.inf if lhs > 0 else 0.0
        if ratio > best:
            best, worst = ratio, {"trial": t, "lhs": lhs, "rhs": rhs}
    return UnitaryReport(float(best), c, n, trials, worst)


# ---------------------------------------------------------------------------
# Pietsch certificate


@dataclass
class PietschCertificate:
    """Simplex weights over unit-ball samples with the weighted map normalised.

    g = (sqrt(pi_s) k_s)_s has certified seminorm ``rho_g`` <= 1, and the
    defining inequality reads ||f'(z)||^2 <= c^2 sum_s pi_s |k_s'(z)|^2 / rho_g^2,
    i.e. the weighted family is rescaled to unit seminorm before comparing.
    """
    mapping: BlochFunc
    samples: list
    sample_rho: np.ndarray
    weights: np.ndarray
    rho_g: float
    c: float
    grid: GridSpec
    test_points: np.ndarray
    cuts: int = 0

    def sample_derivs(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=complex).reshape(-1)
        if not self.samples:
            return np.zeros((w.size, 0), dtype=complex)
        return np.stack([s.deriv(w)[:, 0] for s in self.samples], axis=1)

    def weighted_map(self) -> BlochFunc:
        return _weighted_map(self.samples, self.weights)

    def violation(self) -> float:
        """max over test points of ||f'||^2 - c^2 sum pi |k'|^2 / rho_g^2."""
        lhs = np.linalg.norm(self.mapping.deriv(self.test_points), axis=-1) ** 2
        if self.rho_g == 0.0:
            return float(np.max(lhs))
        mass = np.abs(self.sample_derivs(self.test_points)) ** 2 @ self.weights
        return float(np.max(lhs - (self.c / self.rho_g) ** 2 * mass))

    def verify(self) -> bool:
        return (self.violation() <= CERT_TOL
                and bool(np.all(self.sample_rho <= 1.0 + 1e-12))
                and self.rho_g <= 1.0 + 1e-9)

    def to_dict(self):
        keep = np.flatnonzero(self.weights > 0)
        return {"c": self.c, "rho_g_upper": self.rho_g, "grid": self.grid.to_dict(),
                "test_points": [[z.real, z.imag] for z in self.test_points],
                "samples": [self.samples[i].to_dict() for i in keep],
                "sample_rho_upper": [float(self.sample_rho[i]) for i in keep],
                "weights": [float(self.weights[i]) for i in keep],
                "cuts": self.cuts, "max_violation": self.violation()}


def _weighted_map(samples, weights) -> BlochFunc:
    """z -> (sqrt(pi_s) k_s(z)) over the active samples."""
    active = np.flatnonzero(weights > 0)
    dim = max(active.size, 1)
    terms = []
    for j, i in enumerate(active):
        e = np.zeros(dim, dtype=complex)
        e[j] = np.sqrt(weights[i])
        terms += [(p[0] * e, basis) for p, basis in samples[i].terms]
    return BlochFunc(dim, terms)


def _test_points(f: BlochFunc, grid: GridSpec, arg: complex) -> np.ndarray:
    pts = np.concatenate([grid.points(), _as_points(f), [arg]])
    return np.array(list(dict.fromkeys(np.round(pts, 15).tolist())), dtype=complex)


def _sample_family(f: BlochFunc, test_pts, n_samples: int, degree: int, rng):
    """Scalar test functions with certified seminorm <= 1, most structured first.

    Also returns two explicit weight vectors: coordinate projections weighted
    by their squared seminorms (g is then f up to a constant) and basis
    elements weighted by |x_t| rho(b_t) (the triangle-bound certificate).
    """
    fams: list = []
    coord_w: dict = {}
    basis_w: dict = {}
    m = f.merged()
    # projections <f, u>; the first d are the coordinates
    dirs = [np.eye(f.dim)[i] for i in range(f.dim)]
    if f.dim > 1:
        for _ in range(2 * f.dim * f.dim):
            u = rng.standard_normal(f.dim) + 1j * rng.standard_normal(f.dim)
            dirs.append(u / np.linalg.norm(u))
    for i, u in enumerate(dirs):
        g = m.apply(np.conj(u)[None, :]).merged()
        if not g.terms:
            continue
        rho = bloch_seminorm(g, PROJ_GRID, chain=False).upper
        if rho <= 0:
            continue
        if i < f.dim:
            coord_w[len(fams)] = rho ** 2
        fams.append(g.scale(1.0 / rho))
    for x, b in m.terms:
        if isinstance(b, Kernel):
            basis_w[len(fams)] = float(np.linalg.norm(x))
            fams.append(BlochFunc.kernel(b.zeta))
        else:
            rho_k = monomial_bloch_norm(b.k)
            basis_w[len(fams)] = float(np.linalg.norm(x)) * rho_k
            fams.append(BlochFunc.monomial(b.k).scale(1.0 / rho_k))
    for k in range(1, degree + 1):
        fams.append(BlochFunc.monomial(k).scale(1.0 / monomial_bloch_norm(k)))
    for z in test_pts:
        fams.append(BlochFunc.kernel(z))
    room = n_samples - len(fams)
    if room > 0:
        # triangle-normalised, so the certified bound is 1
        fams += [poly_to_blochfunc(c) for c in random_ball_batch(room, degree, rng)]
    fams = fams[:n_samples]

    def vec(d):
        w = np.zeros(len(fams))
        for i, v in d.items():
            if i < len(fams):
                w[i] = v
        return w / w.sum() if w.sum() > 0 else w

    return fams, np.ones(len(fams)), [vec(coord_w), vec(basis_w)]


def _fit_outer(fd, gd, scale):
    """T with fd ~ gd T^T, smallest norm among SVD truncations meeting FIT_TOL.

    Exact interpolation through nearly dependent sample columns would blow
    up ||T||; dropping tiny singular directions costs a residual far below
    the reconstruction tolerance.
    """
    d = fd.shape[1]
    if gd.shape[1] == 0 or not np.any(fd):
        return np.zeros((d, gd.shape[1]), dtype=complex), 0.0
    u, sv, vh = np.linalg.svd(scale * gd, full_matrices=False)
    proj = u.conj().T @ (scale * fd)
    denom = 1.0 + np.linalg.norm(fd, axis=1)
    best = None
    for rel in 10.0 ** -np.arange(2, 14):
        k = int(np.sum(sv > rel * sv[0]))
        sol = vh[:k].conj().T @ (proj[:k] / sv[:k, None])
        err = float(np.max(np.linalg.norm(fd - gd @ sol, axis=1) / denom))
        norm = float(np.linalg.norm(sol, 2))
        ok = err <= FIT_TOL
        key = (not ok, norm if ok else err)
        if best is None or key < best[0]:
            best = (key, sol, err)
    _, sol, err = best
    return sol.T, err


class _PietschLP:
    """Pointwise rows plus persistent exchange cuts for the operator-norm condition.

    Every candidate weight vector is scored by the norm of an explicitly
    fitted outer matrix, so a value handed back is always backed by a
    factorisation. Cheap scores bound rho(g) by one; ``exact_score``
    certifies it.
    """

    def __init__(self, fd, kd, scale, samples, sample_rho):
        self.fd, self.kd, self.scale = fd, kd, scale
        self.samples, self.sample_rho = samples, sample_rho
        self.f_s, self.k_s = scale * fd, scale * kd          # hyperbolic scaling
        self.p_rows = np.abs(self.k_s) ** 2
        self.p_rhs = np.linalg.norm(self.f_s, axis=1) ** 2
        self.a_f = np.conj(self.f_s) @ self.f_s.T
        self.cut_rows: list = []
        self.cut_rhs: list = []
        self.max_cuts = MAX_LP_ROWS - self.p_rows.shape[0]
        self.best = (np.inf, None, 1.0)

    def _outer_norm(self, pi) -> float:
        act = np.flatnonzero(pi > 0)
        t, err = _fit_outer(self.fd, self.kd[:, act] * np.sqrt(pi[act]), self.scale)
        if err > FIT_TOL:
            return np.inf
        have = self.p_rows @ pi
        need = np.where(self.p_rhs > 0, self.p_rhs / np.maximum(have, 1e-300), 0.0)
        return max(_wide_opnorm(t), float(np.sqrt(need.max())))

    def _keep(self, c, pi, rho_g):
        if c < self.best[0]:
            self.best = (c, pi, rho_g)

    def score(self, pi) -> float:
        c = self._outer_norm(pi)
        self._keep(c, pi, 1.0)
        return c

    def exact_score(self, pi) -> float:
        tn = self._outer_norm(pi)
        if not np.isfinite(tn):
            return tn
        simple = float(np.sqrt(pi @ self.sample_rho ** 2))
        rho_g = min(bloch_seminorm(_weighted_map(self.samples, pi), chain=False).upper, simple)
        self._keep(tn * rho_g, pi, rho_g)
        return tn * rho_g

    def _solve(self, c):
        rows = np.vstack([self.p_rows] + self.cut_rows) if self.cut_rows else self.p_rows
        rhs = np.concatenate([self.p_rhs, np.array(self.cut_rhs)]) / c ** 2
        scale = 1.0 / np.maximum(np.maximum(rows.max(axis=1), rhs), 1e-300)
        return lp_feasible(rows * scale[:, None], rhs * scale)

    def feasible(self, c, tol) -> bool:
        for _ in range(MAX_CUT_ROUNDS):
            pi = self._solve(c)
            if pi is None:
                return False
            if self.score(pi) <= c * (1 + tol):
                return True
            a_g = (np.conj(self.k_s) * pi) @ self.k_s.T
            vals, vecs = np.linalg.eigh(self.a_f - c ** 2 * a_g)
            for j in range(1, CUTS_PER_ROUND + 1):
                if vals[-j] <= 0:
                    break
                alpha = vecs[:, -j]
                self.cut_rows.append(np.abs(self.k_s.T @ alpha)[None, :] ** 2)
                self.cut_rhs.append(float(np.linalg.norm(self.f_s.T @ alpha) ** 2))
            if len(self.cut_rows) > self.max_cuts:
                drop = len(self.cut_rows) - self.max_cuts
                del self.cut_rows[:drop], self.cut_rhs[:drop]
        return False


def pietsch_ub(f: BlochFunc, n_samples: int = 192, degree: int = 8,
               grid: GridSpec = TEST_GRID, tol: float = BISECT_TOL,
               seed=0) -> tuple[float, PietschCertificate]:
    """Smallest c found (to relative ``tol``) with a discrete Pietsch certificate.

    The coordinate-projection and basis-element weightings are scored
    first. If neither reaches the certified rho_B upper bound, c is bisected
    between that bound and the best explicit value with LP feasibility plus
    exchange cuts, and the LP winner is rescored with a certified rho(g).
    The reported value is never below the certified rho_B upper bound.
    """
    if n_samples > MAX_LP_WEIGHTS:
        raise InvalidInputError("at most 256 samples")
    rng = np.random.default_rng(seed)
    br = bloch_seminorm(f)
    pts = _test_points(f, grid, br.argmax)
    samples, rho, explicit = _sample_family(f, pts, n_samples, degree, rng)
    if not f.merged().terms or br.upper == 0.0:
        w = np.full(len(samples), 1.0 / len(samples))
        return 0.0, PietschCertificate(f, samples, rho, w, 0.0, 0.0, grid, pts)

    scale = (1.0 - np.abs(pts) ** 2)[:, None]
    kd = np.stack([s.deriv(pts)[:, 0] for s in samples], axis=1)
    lp = _PietschLP(f.deriv(pts), kd, scale, samples, rho)
    for w in explicit:
        if w.sum() > 0:
            lp.exact_score(w)

    lo = br.upper
    if lp.best[0] > lo * (1 + tol):
        hi = max(min(lp.best[0], f.triangle_gamma_bound()), lo)
        explicit_best = lp.best
        lp.best = (np.inf, None, 1.0)
        if not lp.feasible(lo, tol):
            while hi / lo - 1.0 > tol:
                mid = 0.5 * (lo + hi)
                if lp.feasible(mid, tol):
                    hi = min(mid, lp.best[0])
                else:
                    lo = mid
        lp_pi = lp.best[1]
        lp.best = explicit_best
        if lp_pi is not None:
            lp.exact_score(lp_pi)
    c, pi, rho_g = lp.best
    if pi is None:
        raise CertificateUnavailableError(
            "no certificate found; raise the sample count or degree")
    c = max(c, br.upper)
    return c, PietschCertificate(f, samples, rho, pi, rho_g, c, grid, pts,
                                 cuts=len(lp.cut_rows))


@dataclass
class FactorizationWitness:
    matrix: np.ndarray
    weights: np.ndarray
    active: np.ndarray
    opnorm_t: float
    rho_g_upper: float
    residual: float

    @property
    def bound(self):
        return self.opnorm_t * self.rho_g_upper

    def to_dict(self):
        return {"T": [[[v.real, v.imag] for v in row] for row in self.matrix],
                "active_samples": self.active.tolist(),
                "opnorm_T": self.opnorm_t, "rho_g_upper": self.rho_g_upper,
                "residual": self.residual, "gamma2_upper": self.bound}


def _wide_opnorm(t):
    if t.size == 0:
        return 0.0
    if max(t.shape) <= 128:
        return opnorm(t)
    small = t @ t.conj().T if t.shape[0] <= t.shape[1] else t.conj().T @ t
    return float(np.sqrt(opnorm(small)))


def build_factorization(f: BlochFunc, cert: PietschCertificate) -> FactorizationWitness:
    """Fit T with f' = T g' on the test points, g = (sqrt(pi_s) k_s)_s."""
    active = np.flatnonzero(cert.weights > 0)
    pts = cert.test_points
    fd = f.deriv(pts)                                    # (T, d)
    gd = cert.sample_derivs(pts)[:, active] * np.sqrt(cert.weights[active])
    scale = (1.0 - np.abs(pts) ** 2)[:, None]
    t, _ = _fit_outer(fd, gd, scale)
    err = np.linalg.norm(fd - gd @ t.T, axis=1) / (1.0 + np.linalg.norm(fd, axis=1))
    residual = float(err.max()) if err.size else 0.0
    if residual > RECON_TOL:
        raise ReconstructionError(f"factorisation residual {residual:.3e} exceeds 1e-6",
                                  residual=residual)
    if active.size == 0 or not np.any(fd):
        rho_g = 0.0
    else:
        # both bounds are certified; sum pi_s rho_s^2 <= 1 on the simplex
        simple = float(np.sqrt(cert.weights[active] @ cert.sample_rho[active] ** 2))
        rho_g = min(bloch_seminorm(_weighted_map(cert.samples, cert.weights), chain=False).upper,
                    simple)
    return FactorizationWitness(t, cert.weights[active], active, _wide_opnorm(t), rho_g, residual)


def rank_one(g: BlochFunc, x) -> BlochFunc:
    """g(z) x, with the exact gamma_2 bracket rho_B(g) ||x|| attached as ``gamma2``."""
    f = g.outer(x)
    br = bloch_seminorm(g)
    nx = float(np.linalg.norm(np.atleast_1d(np.asarray(x, dtype=complex))))
    f.gamma2 = GammaBracket(br.lower * nx, br.upper * nx, "seminorm of g times |x|",
                            "seminorm of g times |x|")
    return f


def gamma2_bracket(f: BlochFunc, budget: int = 1000, seed=0, n_samples: int = 192,
                   degree: int = 8):
    """(GammaBracket, certificate, factorisation witness) for f."""
    lb = kwapien_lb(f, budget=budget, seed=seed)
    c, cert = pietsch_ub(f, n_samples=n_samples, degree=degree, seed=seed)
    wit = build_factorization(f, cert)
    return GammaBracket(lb, c, "dominated-pair ratio", "Pietsch certificate"), cert, wit


@dataclass
class CheckResult:
    name: str
    margin: float
    passed: bool

    def to_dict(self):
        return {"name": self.name, "margin": self.margin, "pass": self.passed}


def ideal_inequality_check(t, f: BlochFunc, a, seed=0, pietsch: float | None = None,
                           budget: int = 300, tol: float = 1e-6, slack: float = 0.02,
                           grid: GridSpec = DEFAULT_GRID) -> list[CheckResult]:
    """Composition and ideal inequalities for h = self_map_blaschke(a).

    (i) rho_B(f o h) <= rho_B(f): grid lower bound of the left side against
    the certified upper bound of the right.
    (ii) kwapien_lb(T f h) <= ||T|| pietsch_ub(f).
    """
    h = self_map_blaschke(a)
    t = np.atleast_2d(np.asarray(t, dtype=complex))
    left, _ = grid_max(ComposedMap(f, h), grid)
    right = bloch_seminorm(f, grid).upper
    m1 = right * (1 + tol) - left
    if pietsch is None:
        pietsch, _ = pietsch_ub(f, seed=seed)
    tf = f.apply(t)
    lb = kwapien_lb(ComposedMap(tf, h), budget=budget, seed=seed, grid=grid)
    m2 = opnorm(t) * pietsch * (1 + slack) - lb
    return [CheckResult("composition_contraction", float(m1), bool(m1 >= 0)),
            CheckResult("ideal_inequality", float(m2), bool(m2 >= 0))]


def _kernel_deriv(zeta, w):
    s = 1.0 - abs(zeta) ** 2
    return s / (1.0 - np.conj(zeta) * w) ** 2


def psum2_ub(f, n_points: int = 2000, n_samples: int = 2000, degree: int = 8, seed=0,
             grid: GridSpec = DEFAULT_GRID) -> float:
    """Empirical 2-summing ratio, biased upward by the sampled denominator.

    Families (lambda, z) are drawn from one stream and the unit-ball samples
    from another, so enlarging ``n_samples`` only adds denominator candidates
    and the estimate can only drop.
    """
    if n_points > 10_000 or n_samples > 10_000:
        raise InvalidInputError("psum2 budgets are capped at 1e4")
    fam_rng = np.random.default_rng([seed, 0])
    coeffs = random_ball_batch(n_samples, degree, np.random.default_rng([seed, 1]))
    arg, _ = _argmax(f, grid)
    families = [WeightedSeq([(1.0, arg)])]
    if isinstance(f, BlochFunc):
        families += [WeightedSeq([(1.0, z)]) for z in _as_points(f)]
    used = len(families)
    while used < n_points:
        k = int(min(fam_rng.integers(1, 7), n_points - used))
        pts = _random_disc(fam_rng, k)
        lam = fam_rng.standard_normal(k) + 1j * fam_rng.standard_normal(k)
        families.append(WeightedSeq(zip(lam, pts)))
        used += k
    best = 0.0
    for fam in families:
        mass = fam.masses()
        num = float(mass @ np.linalg.norm(f.deriv(fam.points), axis=-1) ** 2)
        if num == 0.0:
            continue
        den = 0.0
        if n_samples:
            gd = coeffs @ poly_deriv_matrix(fam.points, degree).T
            den = float(np.max(np.abs(gd) ** 2 @ mass))
        for z in fam.points:
            den = max(den, float(mass @ np.abs(_kernel_deriv(z, fam.points)) ** 2))
        if den <= 0.0:
            continue
        best = max(best, float(np.sqrt(num / den)))
    return best
