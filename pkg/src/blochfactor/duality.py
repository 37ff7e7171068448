"""Vector-valued molecules, the w2 cross-norm bracket and the duality pairing.

A vector molecule sum_i lambda_i gamma_{z_i} (x) x_i is paired with a
C^d-valued Bloch map through the bilinear bracket
sum_i lambda_i sum_k f'_k(z_i) x_ik.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .blochcore import DEFAULT_GRID, BlochFunc, GridSpec, bloch_seminorm, check_disc_point
from .domination import pointwise_mass_dominates
from .errors import InconsistencyError, InvalidInputError
from .factor import CheckResult, pietsch_ub
from .molecules import WeightedSeq


class VecMolecule:
    def __init__(self, dim: int, terms=()):
        if dim < 1:
            raise InvalidInputError("dimension must be >= 1")
        self.dim = int(dim)
        lam, pts, xs = [], [], []
        for l, z, x in terms:
            x = np.atleast_1d(np.asarray(x, dtype=complex))
            if x.shape != (self.dim,):
                raise InvalidInputError("payload length does not match dim")
            l = complex(l)
            if not (np.isfinite(l) and np.all(np.isfinite(x))):
                raise InvalidInputError("non-finite molecule data")
            lam.append(l)
            pts.append(check_disc_point(z))
            xs.append(x)
        self.weights = np.array(lam, dtype=complex)
        self.points = np.array(pts, dtype=complex)
        self.payloads = np.array(xs, dtype=complex).reshape(len(xs), self.dim)

    def __len__(self):
        return self.weights.size

    def __iter__(self):
        return iter(zip(self.weights.tolist(), self.points.tolist(), list(self.payloads)))

    def scale(self, alpha) -> "VecMolecule":
        return VecMolecule(self.dim, [(alpha * l, z, x) for l, z, x in self])

    def __add__(self, other: "VecMolecule") -> "VecMolecule":
        if other.dim != self.dim:
            raise InvalidInputError("cannot concatenate molecules of different dims")
        return VecMolecule(self.dim, list(self) + list(other))

    def merged_payloads(self) -> dict:
        """Point -> sum of lambda_i x_i over the terms at that point."""
        acc: dict = {}
        for l, z, x in self:
            acc[z] = acc.get(z, 0) + l * x
        return acc

    def to_dict(self):
        return {"dim": self.dim,
                "terms": [{"lambda": [l.real, l.imag], "z": [z.real, z.imag],
                           "x": [[v.real, v.imag] for v in x]} for l, z, x in self]}

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(data["dim"], [(complex(*t["lambda"]), complex(*t["z"]),
                                      [complex(*v) for v in t["x"]]) for t in data["terms"]])
        except (KeyError, TypeError) as exc:
            raise InvalidInputError(f"malformed vector molecule JSON: {exc}") from exc

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        return f"VecMolecule(dim={self.dim}, terms={len(self)})"


def vec_pairing(f: BlochFunc, gamma: VecMolecule) -> complex:
    """sum_i lambda_i <f'(z_i), x_i> with the bilinear bracket."""
    if f.dim != gamma.dim:
        raise InvalidInputError(f"map has dim {f.dim}, molecule has dim {gamma.dim}")
    if len(gamma) == 0:
        return 0j
    d = f.deriv(gamma.points)
    return complex(np.sum(gamma.weights * np.sum(d * gamma.payloads, axis=1)))


def _representation_cost(xs, lam_seq: WeightedSeq, dom: WeightedSeq) -> float:
    """(sum ||x_i||^2)^(1/2) (sum |mu_j|^2 / (1-|w_j|^2)^2)^(1/2)."""
    a = float(np.sqrt(np.sum(np.linalg.norm(xs, axis=1) ** 2))) if len(xs) else 0.0
    b = float(np.sqrt(np.sum(dom.masses() / (1 - np.abs(dom.points) ** 2) ** 2))) if len(dom) else 0.0
    return a * b


def w2_ub(gamma: VecMolecule, budget: int = 64, seed=0) -> float:
    """Minimum cost over a finite family of representations of gamma.

    Family: the given representation dominated by itself; the regrouped
    representation (payloads merged per point) with weights rescaled by
    Cauchy-Schwarz, which gives sum_p ||y_p|| / (1-|p|^2); and ``budget``
    random mass-shift variants that keep pointwise mass domination.
    """
    if len(gamma) == 0:
        return 0.0
    costs = []
    seq = WeightedSeq(zip(gamma.weights, gamma.points))
    costs.append(_representation_cost(gamma.payloads, seq, seq))

    merged = {p: y for p, y in gamma.merged_payloads().items() if np.any(y)}
    if not merged:
        return 0.0
    pts = np.array(list(merged), dtype=complex)
    ys = np.array(list(merged.values()))
    ny = np.linalg.norm(ys, axis=1)
    a = 1.0 / (1.0 - np.abs(pts) ** 2)
    # optimal |lambda_p|^2 proportional to ||y_p|| / a_p
    t = np.sqrt(ny / a)
    opt = WeightedSeq(zip(t, pts))
    xs = ys / t[:, None]
    costs.append(_representation_cost(xs, opt, opt))

    rng = np.random.default_rng(seed)
    for _ in range(budget):
        # dominating sequence: at least the needed mass at each point, plus extra mass
        extra = 1.0 + rng.exponential(0.5, pts.size) * (rng.random(pts.size) < 0.5)
        dom = WeightedSeq(zip(t * np.sqrt(extra), pts))
        if pointwise_mass_dominates(opt, dom):
            costs.append(_representation_cost(xs, opt, dom))
    return float(min(costs))


@dataclass
class Candidate:
    mapping: BlochFunc
    pietsch: float


_SCALAR_KERNEL_CACHE: dict = {}


def _kernel_pietsch(p: complex) -> float:
    if p not in _SCALAR_KERNEL_CACHE:
        _SCALAR_KERNEL_CACHE[p] = pietsch_ub(BlochFunc.kernel(p))[0]
    return _SCALAR_KERNEL_CACHE[p]


def default_candidates(gamma: VecMolecule) -> list[Candidate]:
    """Rank-one kernel maps f_p (x) conj(y_p)/||y_p|| at the molecule's support.

    The map is V o f_p with V an isometry C -> C^d, so its certificate is the
    scalar one pushed forward by V and the Pietsch value carries over.
    """
    out = []
    for p, y in gamma.merged_payloads().items():
        ny = float(np.linalg.norm(y))
        if ny == 0.0:
            continue
        f = BlochFunc.kernel(p, np.conj(y) / ny)
        out.append(Candidate(f, _kernel_pietsch(p)))
    return out


def w2_lb(gamma: VecMolecule, candidates: list[Candidate] | None = None) -> float:
    """max |vec_pairing(f, gamma)| / pietsch(f) over the candidates."""
    if len(gamma) == 0:
        return 0.0
    if candidates is None:
        candidates = default_candidates(gamma)
    best = 0.0
    for cand in candidates:
        val = abs(vec_pairing(cand.mapping, gamma))
        if cand.pietsch <= 0.0:
            if val > 0.0:
                raise InconsistencyError("candidate with zero gamma_2 bound pairs nontrivially")
            continue
        best = max(best, val / cand.pietsch)
    return best


def crossnorm_checks(gamma: VecMolecule, g: BlochFunc, xstar,
                     grid: GridSpec = DEFAULT_GRID) -> list[CheckResult]:
    """|(g (x) x*)(gamma)| <= rho_B(g) ||x*|| w2(gamma), and the single-term bound."""
    xstar = np.atleast_1d(np.asarray(xstar, dtype=complex))
    if g.dim != 1 or xstar.shape != (gamma.dim,):
        raise InvalidInputError("need a scalar g and x* of the molecule's dimension")
    lhs = abs(vec_pairing(g.outer(xstar), gamma))
    rho = bloch_seminorm(g, grid).upper if g.terms else 0.0
    w2 = w2_ub(gamma)
    rhs = rho * float(np.linalg.norm(xstar)) * w2
    m2 = rhs * (1 + 1e-9) - lhs
    checks = [CheckResult("crossnorm_dual_bound", float(m2), bool(m2 >= 0))]
    for l, z, x in gamma:
        single = VecMolecule(gamma.dim, [(l, z, x)])
        bound = abs(l) * float(np.linalg.norm(x)) / (1 - abs(z) ** 2)
        m1 = bound * (1 + 1e-9) - w2_ub(single)
        checks.append(CheckResult("crossnorm_atom_bound", float(m1), bool(m1 >= 0)))
    return checks
