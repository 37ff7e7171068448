"""Bloch subordination between finite weighted sequences, decided three ways.

``a`` is dominated by ``b`` when sum |lambda_i|^2 |g'(z_i)|^2 <= sum |mu_j|^2 |g'(w_j)|^2
for every normalised Bloch function g. The pointwise mass comparison is the
reference predicate; the contraction-matrix and Lagrange-bump routes are
cross-checked against it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .blochcore import BlochFunc, poly_deriv_matrix, poly_to_blochfunc, random_ball_batch
from .errors import IllConditionedError, InconsistencyError, InfeasibleError, InvalidInputError
from .molecules import WeightedSeq
from .numkit import MAX_MATRIX_DIM, least_norm_solve, opnorm

MASS_TOL = 1e-12
COINCIDENCE_TOL = 1e-9
CONTRACTION_TOL = 1e-8
RESIDUAL_TOL = 1e-9
VIOLATION_MARGIN = 1e-10


def canonicalize(s: WeightedSeq) -> WeightedSeq:
    """Merge repeated points; merged weight is sqrt of the summed masses.

    Points keep first-occurrence order. A point that occurs once keeps its
    original (possibly complex) weight.
    """
    order, groups = [], {}
    for lam, z in s:
        if z not in groups:
            order.append(z)
            groups[z] = []
        groups[z].append(lam)
    pairs = []
    for z in order:
        lams = groups[z]
        if len(lams) == 1:
            pairs.append((lams[0], z))
        else:
            pairs.append((np.sqrt(sum(abs(l) ** 2 for l in lams)), z))
    return WeightedSeq(pairs)


class MassProfile(dict):
    """Point -> aggregated squared modulus."""

    @classmethod
    def of(cls, s: WeightedSeq) -> "MassProfile":
        prof = cls()
        for lam, z in s:
            prof[z] = prof.get(z, 0.0) + abs(lam) ** 2
        return prof

    def mass(self, z) -> float:
        return self.get(complex(z), 0.0)


def pointwise_mass_dominates(a: WeightedSeq, b: WeightedSeq) -> bool:
    ma, mb = MassProfile.of(a), MassProfile.of(b)
    return all(v <= mb.mass(p) + MASS_TOL for p, v in ma.items())


def _check_separated(points):
    pts = np.asarray(points, dtype=complex)
    if pts.size < 2:
        return
    d = np.abs(pts[:, None] - pts[None, :])
    d[np.diag_indices(pts.size)] = np.inf
    if np.min(d) < COINCIDENCE_TOL:
        raise IllConditionedError("support points closer than 1e-9; canonicalize first")


def quadratic_sides(a: WeightedSeq, b: WeightedSeq, g: BlochFunc) -> tuple[float, float]:
    """Both sides of the defining inequality for a scalar g."""
    def side(s):
        if len(s) == 0:
            return 0.0
        return float(np.sum(s.masses() * np.abs(g.deriv(s.points)[:, 0]) ** 2))
    return side(a), side(b)


@dataclass
class ViolationWitness:
    g: BlochFunc
    lhs: float
    rhs: float
    point: complex | None = None

    @property
    def margin(self):
        return self.lhs - self.rhs

    def verify(self, a: WeightedSeq, b: WeightedSeq) -> float:
        """Recompute the margin from g alone."""
        lhs, rhs = quadratic_sides(a, b, self.g)
        return lhs - rhs

    def to_dict(self):
        d = {"kind": "violation", "g": self.g.to_dict(), "lhs": self.lhs, "rhs": self.rhs,
             "margin": self.margin}
        if self.point is not None:
            d["point"] = [self.point.real, self.point.imag]
        return d


@dataclass
class ContractionWitness:
    matrix: np.ndarray
    opnorm: float
    residual: float
    accepted: bool = field(default=False)

    def to_dict(self):
        return {"kind": "contraction",
                "matrix": [[[v.real, v.imag] for v in row] for row in self.matrix],
                "opnorm": self.opnorm, "residual": self.residual, "accepted": self.accepted}


def _bump_antiderivative(p: complex, others) -> BlochFunc:
    """g with g(0) = 0 and g' = h, h(p) = 1, h vanishing at ``others``."""
    h = np.array([1.0 + 0j])  # ascending coefficients
    for q in others:
        h = np.convolve(h, np.array([-q, 1.0])) / (p - q)
    return poly_to_blochfunc(h / np.arange(1, h.size + 1))


def lagrange_violation(a: WeightedSeq, b: WeightedSeq) -> ViolationWitness | None:
    """Bump at the point of largest excess mass, or None if a is mass-dominated."""
    joint = list(dict.fromkeys(list(a.points.tolist()) + list(b.points.tolist())))
    _check_separated(joint)
    if pointwise_mass_dominates(a, b):
        return None
    ma, mb = MassProfile.of(a), MassProfile.of(b)
    p = max(ma, key=lambda z: ma[z] - mb.mass(z))
    g = _bump_antiderivative(p, [q for q in joint if q != p])
    lhs, rhs = quadratic_sides(a, b, g)
    return ViolationWitness(g, lhs, rhs, point=p)


def _is_violation(margin, rhs):
    return margin > VIOLATION_MARGIN + 1e-12 * abs(rhs)


def sampled_violation(a: WeightedSeq, b: WeightedSeq, n: int = 10_000, degree: int = 8,
                      seed=0) -> ViolationWitness | None:
    """Largest-margin violation among random ball polynomials and Lagrange bumps.

    One-sided: None does not prove domination.
    """
    if n > 100_000:
        raise InvalidInputError("sample count is capped at 1e5")
    rng = np.random.default_rng(seed)
    best, best_margin = None, -np.inf
    if n > 0 and len(a):
        coeffs = random_ball_batch(n, degree, rng)
        da = coeffs @ poly_deriv_matrix(a.points, degree).T
        lhs = np.abs(da) ** 2 @ a.masses()
        if len(b):
            rhs = np.abs(coeffs @ poly_deriv_matrix(b.points, degree).T) ** 2 @ b.masses()
        else:
            rhs = np.zeros(n)
        k = int(np.argmax(lhs - rhs))
        best_margin = lhs[k] - rhs[k]
        best = poly_to_blochfunc(coeffs[k])
    joint = list(dict.fromkeys(list(a.points.tolist()) + list(b.points.tolist())))
    if len(joint) and min((abs(p - q) for i, p in enumerate(joint) for q in joint[i + 1:]),
                          default=1.0) >= COINCIDENCE_TOL:
        for p in dict.fromkeys(a.points.tolist()):
            g = _bump_antiderivative(p, [q for q in joint if q != p])
            lhs_g, rhs_g = quadratic_sides(a, b, g)
            if lhs_g - rhs_g > best_margin:
                best, best_margin = g, lhs_g - rhs_g
    if best is None:
        return None
    # recompute from the function itself before reporting
    lhs, rhs = quadratic_sides(a, b, best)
    if not _is_violation(lhs - rhs, rhs):
        return None
    return ViolationWitness(best, lhs, rhs)


def contraction_witness(a: WeightedSeq, b: WeightedSeq) -> ContractionWitness | None:
    """Matrix A with lambda_i gamma_{z_i} = sum_j a_ij mu_j gamma_{w_j}, if one exists.

    Distinct atoms are linearly independent, so each row is a linear system
    over the union of support points. Columns with mu_j = 0 are free and are
    set to zero (least norm).
    """
    n, m = len(a), len(b)
    atoms = list(dict.fromkeys(list(a.points.tolist()) + list(b.points.tolist())))
    index = {p: k for k, p in enumerate(atoms)}
    mu_abs = np.abs(b.weights)
    live = np.flatnonzero(mu_abs > 0)
    # columns scaled to unit length so the ridge in the Gram solve is harmless
    cols = np.zeros((len(atoms), live.size), dtype=complex)
    for c, j in enumerate(live):
        cols[index[b.points[j]], c] = b.weights[j] / mu_abs[j]
    live_pts = {b.points[j] for j in live}
    mat = np.zeros((n, m), dtype=complex)
    for i, (lam, z) in enumerate(a):
        if lam == 0:
            continue
        if z not in live_pts:
            return None
        rhs = np.zeros(len(atoms), dtype=complex)
        rhs[index[z]] = lam
        try:
            y, _ = least_norm_solve(cols, rhs, tol=RESIDUAL_TOL)
        except InfeasibleError as exc:
            raise InconsistencyError(f"row {i}: atom system unsolvable, residual {exc.residual}") from exc
        mat[i, live] = y / mu_abs[live]
    residual = _coefficient_residual(a, b, mat, atoms, index)
    if residual > RESIDUAL_TOL:
        raise InconsistencyError(f"contraction residual {residual:.3e} exceeds 1e-9")
    norm = _matrix_norm(mat)
    return ContractionWitness(mat, norm, residual, accepted=norm <= 1.0 + CONTRACTION_TOL)


def _matrix_norm(mat):
    if max(mat.shape, default=0) <= MAX_MATRIX_DIM:
        return opnorm(mat) if mat.size else 0.0
    return float(np.linalg.norm(mat, 2))


def _coefficient_residual(a, b, mat, atoms=None, index=None) -> float:
    if atoms is None:
        atoms = list(dict.fromkeys(list(a.points.tolist()) + list(b.points.tolist())))
        index = {p: k for k, p in enumerate(atoms)}
    res = 0.0
    for i, (lam, z) in enumerate(a):
        coef = np.zeros(len(atoms), dtype=complex)
        coef[index[z]] += lam
        for j, (mu, w) in enumerate(b):
            coef[index[w]] -= mat[i, j] * mu
        res = max(res, float(np.max(np.abs(coef))) if coef.size else 0.0)
    return res


def verify_contraction(a: WeightedSeq, b: WeightedSeq, w: ContractionWitness) -> tuple[float, float]:
    """(residual, operator norm) recomputed from the matrix alone."""
    mat = np.asarray(w.matrix, dtype=complex).reshape(len(a), len(b))
    return _coefficient_residual(a, b, mat), float(np.linalg.norm(mat, 2)) if mat.size else 0.0


@dataclass
class Verdict:
    dominates: bool | None
    route: str
    witness: object
    routes: dict
    disagreement: bool

    def to_dict(self):
        label = {True: True, False: False, None: "unknown"}[self.dominates]
        return {"dominates": label, "route": self.route,
                "witness": None if self.witness is None else self.witness.to_dict(),
                "routes": self.routes, "disagreement": self.disagreement}


def decide(a: WeightedSeq, b: WeightedSeq, n: int = 10_000, degree: int = 8, seed=0) -> Verdict:
    """Run all routes on canonical forms and report whether they agree."""
    a, b = canonicalize(a), canonicalize(b)
    mass = pointwise_mass_dominates(a, b)
    cw = contraction_witness(a, b)
    lv = lagrange_violation(a, b)
    sv = sampled_violation(a, b, n=n, degree=degree, seed=seed)
    routes = {"mass": mass,
              "contraction": bool(cw is not None and cw.accepted),
              "lagrange": lv is None,
              "sampled": sv is None}
    if len(set(routes.values())) > 1:
        return Verdict(None, "mass", lv or sv or cw, routes, True)
    if mass:
        return Verdict(True, "mass", cw, routes, False)
    return Verdict(False, "lagrange", lv, routes, False)
