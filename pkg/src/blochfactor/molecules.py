"""Scalar Bloch molecules sum_i lambda_i gamma_{z_i} and their norm estimates."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .blochcore import (DEFAULT_GRID, BlochFunc, GridSpec, Kernel, bloch_seminorm,
                        check_disc_point, poly_deriv_matrix, poly_to_blochfunc,
                        random_ball_batch)
from .errors import BudgetExceededError, InvalidInputError


class WeightedSeq:
    """Finite list of (weight, disc point) pairs."""

    def __init__(self, pairs=()):
        lam, pts = [], []
        for lam_i, z_i in pairs:
            lam_i = complex(lam_i)
            if not np.isfinite(lam_i):
                raise InvalidInputError("non-finite weight")
            lam.append(lam_i)
            pts.append(check_disc_point(z_i))
        self.weights = np.array(lam, dtype=complex)
        self.points = np.array(pts, dtype=complex)

    @classmethod
    def from_arrays(cls, weights, points):
        return cls(zip(np.ravel(weights), np.ravel(points)))

    def __len__(self):
        return self.weights.size

    def __iter__(self):
        return iter(zip(self.weights.tolist(), self.points.tolist()))

    def scale(self, alpha) -> "WeightedSeq":
        return WeightedSeq.from_arrays(alpha * self.weights, self.points)

    def __add__(self, other):
        return WeightedSeq(list(self) + list(other))

    def masses(self) -> np.ndarray:
        return np.abs(self.weights) ** 2

    def to_dict(self):
        return {"pairs": [{"lambda": [l.real, l.imag], "z": [z.real, z.imag]} for l, z in self]}

    @classmethod
    def from_dict(cls, data):
        try:
            return cls((complex(*p["lambda"]), complex(*p["z"])) for p in data["pairs"])
        except (KeyError, TypeError) as exc:
            raise InvalidInputError(f"malformed molecule JSON: {exc}") from exc

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        return f"WeightedSeq({list(self)!r})"


# A molecule is the functional sum_i lambda_i gamma_{z_i}; same data.
Molecule = WeightedSeq


def pairing(m: WeightedSeq, f: BlochFunc) -> complex:
    """sum_i lambda_i f'(z_i) for scalar f."""
    if f.dim != 1:
        raise InvalidInputError("pairing needs a scalar-valued function")
    if len(m) == 0:
        return 0j
    return complex(np.sum(m.weights * f.deriv(m.points)[:, 0]))


def molecule_norm_ub_triangle(m: WeightedSeq) -> float:
    return float(np.sum(np.abs(m.weights) / (1.0 - np.abs(m.points) ** 2)))


def _kernel_candidates(m: WeightedSeq, grid: GridSpec):
    """Single kernels at each support point plus one phase-aligned sum."""
    cands = [BlochFunc.kernel(z) for z in np.unique(m.points)]
    nz = np.abs(m.weights) > 0
    if nz.sum() > 1:
        phases = np.conj(m.weights[nz]) / np.abs(m.weights[nz])
        g = BlochFunc(1, [([p], Kernel(z)) for p, z in zip(phases, m.points[nz])])
        g = g.merged()
        if g.terms:
            cands.append(g.scale(1.0 / bloch_seminorm(g, grid, chain=False).upper))
    return cands


def molecule_norm_lb(m: WeightedSeq, budget: int = 2000, degree: int = 8, seed=0,
                     grid: GridSpec = DEFAULT_GRID) -> float:
    """max |<m, g>| over unit-ball samples; never exceeds the free-space norm."""
    if budget > 100_000:
        raise InvalidInputError("sampler budget is capped at 1e5")
    if len(m) == 0 or not np.any(m.weights):
        return 0.0
    rng = np.random.default_rng(seed)
    best = 0.0
    if budget > 0:
        coeffs = random_ball_batch(budget, degree, rng)
        row = m.weights @ poly_deriv_matrix(m.points, degree)
        best = float(np.max(np.abs(coeffs @ row)))
    for g in _kernel_candidates(m, grid):
        # single kernels have seminorm exactly one
        best = max(best, abs(pairing(m, g)))
    return best


@dataclass
class MoleculeNormResult:
    lower: float
    upper: float
    value: float
    degree: int
    mesh: dict
    h_coeffs: np.ndarray

    def to_dict(self):
        return {"lower": self.lower, "upper": self.upper, "program_value": self.value,
                "degree": self.degree, "constraint_mesh": self.mesh}


OPT_GRID = GridSpec(n_r=48, n_theta=192, r_cert=0.999, mode="uniform")


def molecule_norm_opt(m: WeightedSeq, degree: int = 48, grid: GridSpec = OPT_GRID,
                      tol: float = 1e-4, cert_grid: GridSpec = DEFAULT_GRID) -> MoleculeNormResult:
    """Discretised dual program for the free-space norm.

    maximise Re sum_i lambda_i h(z_i) over polynomials h of degree < ``degree``
    subject to (1 - |w|^2) |h(w)| <= 1 on the grid nodes. The program value,
    capped by the triangle bound, is reported as ``upper``; ``lower`` is the
    same objective after dividing by the certified seminorm of the
    antiderivative of the optimal h. The reported program value is the
    primal objective; ``upper`` adds the solver's duality-gap allowance.
    """
    import cvxpy as cp

    if degree < 1 or degree > 64:
        raise InvalidInputError("degree must lie in 1..64")
    tri = molecule_norm_ub_triangle(m)
    mesh = grid.to_dict()
    if len(m) == 0 or not np.any(m.weights):
        return MoleculeNormResult(0.0, 0.0, 0.0, degree, mesh, np.zeros(degree, complex))

    # h(w) = sum_{k<degree} a_k w^k; split into real/imag parts
    pts = grid.points()
    scale = 1.0 - np.abs(pts) ** 2
    V = np.power.outer(pts, np.arange(degree)) * scale[:, None]
    obj_row = m.weights @ np.power.outer(m.points, np.arange(degree))
    ar = cp.Variable(degree)
    ai = cp.Variable(degree)
    re = V.real @ ar - V.imag @ ai
    im = V.real @ ai + V.imag @ ar
    objective = cp.Maximize(obj_row.real @ ar - obj_row.imag @ ai)
    cons = [cp.SOC(np.ones(len(pts)), cp.vstack([re, im]), axis=0)]
    prob = cp.Problem(objective, cons)
    try:
        prob.solve(solver=cp.CLARABEL, tol_gap_rel=tol, tol_gap_abs=tol * 1e-2, tol_feas=1e-9)
    except cp.error.SolverError as exc:
        raise BudgetExceededError(f"conic solver failed: {exc}") from exc
    if prob.status not in ("optimal", "optimal_inaccurate") or ar.value is None:
        raise BudgetExceededError(f"program ended with status {prob.status}",
                                  best={"upper": tri})
    a = ar.value + 1j * ai.value
    value = float(prob.value)
    # antiderivative g with g' = h, g(0) = 0
    g = poly_to_blochfunc(np.concatenate([a / np.arange(1, degree + 1)]))
    rho = bloch_seminorm(g, cert_grid, chain=False).upper
    lower = abs(pairing(m, g)) / rho if rho > 0 else 0.0
    # the solver stops once dual - primal <= tol_gap_abs + tol_gap_rel |primal|
    gap = tol * 1e-2 + tol * abs(value)
    upper = min(max(value + gap, lower), tri)
    return MoleculeNormResult(lower, upper, value, degree, mesh, a)
