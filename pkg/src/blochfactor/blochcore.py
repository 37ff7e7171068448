"""Vanishing-at-origin Bloch functions on the unit disc.

A :class:`BlochFunc` is a finite sum of vector payloads times basis
functions, each basis function being either a monomial ``w**k`` (k >= 1)
or an extremal disc kernel ``(1 - |zeta|^2) w / (1 - conj(zeta) w)``.
Everything downstream only ever needs derivatives, which are exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidInputError

DISC_MARGIN = 1e-9


def check_disc_point(z) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise InvalidInputError(f"non-finite disc point {z!r}")
    if abs(z) > 1.0 - DISC_MARGIN:
        raise InvalidInputError(f"point {z!r} is not strictly inside the disc")
    return z


@dataclass(frozen=True)
class Monomial:
    k: int

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise InvalidInputError("monomial degree must be an integer >= 1")


@dataclass(frozen=True)
class Kernel:
    zeta: complex

    def __post_init__(self):
        object.__setattr__(self, "zeta", check_disc_point(self.zeta))


def monomial_bloch_norm(k: int) -> float:
    """Exact seminorm of w**k: max over r of (1 - r^2) k r^(k-1)."""
    if k == 1:
        return 1.0
    r2 = (k - 1) / (k + 1)
    return k * (2.0 / (k + 1)) * r2 ** ((k - 1) / 2)


class BlochFunc:
    """Finite combination ``sum_t payload_t * basis_t`` with values in C^d."""

    def __init__(self, dim: int, terms=()):
        if dim < 1:
            raise InvalidInputError("target dimension must be >= 1")
        self.dim = int(dim)
        clean = []
        for payload, basis in terms:
            x = np.asarray(payload, dtype=complex).reshape(-1)
            if x.shape[0] != self.dim:
                raise InvalidInputError("payload length does not match dim")
            if not np.all(np.isfinite(x)):
                raise InvalidInputError("non-finite payload")
            if not isinstance(basis, (Monomial, Kernel)):
                raise InvalidInputError(f"unknown basis element {basis!r}")
            clean.append((x, basis))
        self.terms = tuple(clean)
        self._compile()

    def _compile(self):
        mono = [(x, b.k) for x, b in self.terms if isinstance(b, Monomial)]
        kern = [(x, b.zeta) for x, b in self.terms if isinstance(b, Kernel)]
        d = self.dim
        self._mk = np.array([k for _, k in mono], dtype=float)
        self._mx = np.array([x for x, _ in mono]).reshape(len(mono), d)
        self._kz = np.array([z for _, z in kern], dtype=complex)
        self._kx = np.array([x for x, _ in kern]).reshape(len(kern), d)
        self._ks = 1.0 - np.abs(self._kz) ** 2

    # construction helpers ------------------------------------------------

    @classmethod
    def monomial(cls, k: int, payload=(1.0,)):
        x = np.atleast_1d(np.asarray(payload, dtype=complex))
        return cls(x.shape[0], [(x, Monomial(k))])

    @classmethod
    def kernel(cls, zeta, payload=(1.0,)):
        x = np.atleast_1d(np.asarray(payload, dtype=complex))
        return cls(x.shape[0], [(x, Kernel(zeta))])

    @classmethod
    def zero(cls, dim: int = 1):
        return cls(dim, [])

    def __add__(self, other: "BlochFunc") -> "BlochFunc":
        if other.dim != self.dim:
            raise InvalidInputError("cannot add maps with different target dims")
        return BlochFunc(self.dim, self.terms + other.terms)

    def scale(self, alpha) -> "BlochFunc":
        return BlochFunc(self.dim, [(alpha * x, b) for x, b in self.terms])

    def outer(self, x) -> "BlochFunc":
        """Scalar function times a vector: z -> g(z) x."""
        if self.dim != 1:
            raise InvalidInputError("outer product needs a scalar function")
        x = np.atleast_1d(np.asarray(x, dtype=complex))
        return BlochFunc(x.shape[0], [(p[0] * x, b) for p, b in self.terms])

    def apply(self, t) -> "BlochFunc":
        """Post-compose with a linear map T (matrix of shape e x d)."""
        t = np.atleast_2d(np.asarray(t, dtype=complex))
        if t.shape[1] != self.dim:
            raise InvalidInputError("matrix columns must equal target dim")
        return BlochFunc(t.shape[0], [(t @ x, b) for x, b in self.terms])

    def component(self, i: int) -> "BlochFunc":
        return BlochFunc(1, [(x[i:i + 1], b) for x, b in self.terms])

    def merged(self) -> "BlochFunc":
        """Collapse repeated basis elements by adding their payloads."""
        acc: dict = {}
        for x, b in self.terms:
            acc[b] = acc.get(b, 0) + x
        return BlochFunc(self.dim, [(x, b) for b, x in acc.items() if np.any(x)])

    # evaluation ----------------------------------------------------------

    def basis_derivs(self, w, order: int = 1):
        """(monomial part, kernel part) of the order-th derivative of each basis."""
        w = np.asarray(w, dtype=complex)
        mk = self._mk
        if mk.size:
            coef = np.ones_like(mk)
            for j in range(order):
                coef = coef * (mk - j)
            expo = mk - order
            mono = np.where(coef != 0, coef * np.power.outer(w, np.maximum(expo, 0)), 0.0)
        else:
            mono = np.zeros(w.shape + (0,), dtype=complex)
        if self._kz.size:
            u = 1.0 / (1.0 - np.multiply.outer(w, self._kz.conj()))
            if order == 0:
                kern = self._ks * np.multiply.outer(w, np.ones_like(self._kz)) * u
            else:
                kern = math.factorial(order) * self._ks * self._kz.conj() ** (order - 1) * u ** (order + 1)
        else:
            kern = np.zeros(w.shape + (0,), dtype=complex)
        return mono, kern

    def _combine(self, mono, kern):
        return mono @ self._mx + kern @ self._kx

    def value(self, w):
        return self._combine(*self.basis_derivs(w, 0))

    def deriv(self, w, order: int = 1):
        """Exact derivative of the given order; shape ``w.shape + (dim,)``."""
        return self._combine(*self.basis_derivs(w, order))

    def payload_norms(self):
        return (np.linalg.norm(self._mx, axis=1) if self._mx.size else np.zeros(0),
                np.linalg.norm(self._kx, axis=1) if self._kx.size else np.zeros(0))

    def sup_deriv_closed_disc(self) -> float:
        """Upper bound for sup of ||f'|| over the closed disc."""
        mn, kn = self.payload_norms()
        total = float(np.sum(mn * self._mk))
        if kn.size:
            a = np.abs(self._kz)
            total += float(np.sum(kn * (1 + a) / (1 - a)))
        return total

    def triangle_gamma_bound(self) -> float:
        """sum_t ||x_t|| rho(basis_t), after merging repeated basis elements."""
        m = self.merged()
        total = 0.0
        for x, b in m.terms:
            rho = monomial_bloch_norm(b.k) if isinstance(b, Monomial) else 1.0
            total += float(np.linalg.norm(x)) * rho
        return total

    # serialisation -------------------------------------------------------

    def to_dict(self) -> dict:
        out = []
        for x, b in self.terms:
            if isinstance(b, Monomial):
                basis = {"type": "monomial", "k": int(b.k)}
            else:
                basis = {"type": "kernel", "zeta": [b.zeta.real, b.zeta.imag]}
            out.append({"payload": [[float(v.real), float(v.imag)] for v in x],
                        "basis": basis})
        return {"dim": self.dim, "terms": out}

    @classmethod
    def from_dict(cls, data: dict) -> "BlochFunc":
        try:
            dim = int(data["dim"])
            terms = []
            for t in data["terms"]:
                x = [complex(re, im) for re, im in t["payload"]]
                bd = t["basis"]
                if bd["type"] == "monomial":
                    basis = Monomial(int(bd["k"]))
                elif bd["type"] == "kernel":
                    basis = Kernel(complex(*bd["zeta"]))
                else:
                    raise InvalidInputError(f"unknown basis type {bd['type']!r}")
                terms.append((x, basis))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidInputError):
                raise
            raise InvalidInputError(f"malformed BlochFunc JSON: {exc}") from exc
        return cls(dim, terms)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "BlochFunc":
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        return f"BlochFunc(dim={self.dim}, terms={len(self.terms)})"


# ---------------------------------------------------------------------------
# self-maps and compositions


@dataclass(frozen=True)
class BlaschkeSelfMap:
    """h(w) = w (a - w) / (1 - conj(a) w); maps the disc into itself, h(0) = 0."""

    a: complex

    def __post_init__(self):
        object.__setattr__(self, "a", check_disc_point(self.a))

    def value(self, w):
        w = np.asarray(w, dtype=complex)
        return w * (self.a - w) / (1.0 - np.conj(self.a) * w)

    def deriv(self, w):
        w = np.asarray(w, dtype=complex)
        ac = np.conj(self.a)
        return (self.a - 2.0 * w + ac * w * w) / (1.0 - ac * w) ** 2


def self_map_blaschke(a) -> BlaschkeSelfMap:
    return BlaschkeSelfMap(a)


@dataclass
class ComposedMap:
    """w -> f(h(w)); only derivatives are needed: f'(h(w)) h'(w)."""

    f: BlochFunc
    h: BlaschkeSelfMap

    @property
    def dim(self):
        return self.f.dim

    def value(self, w):
        return self.f.value(self.h.value(w))

    def deriv(self, w):
        w = np.asarray(w, dtype=complex)
        return self.f.deriv(self.h.value(w)) * self.h.deriv(w)[..., None]


# ---------------------------------------------------------------------------
# seminorm certification


@dataclass(frozen=True)
class GridSpec:
    n_r: int = 256
    n_theta: int = 256
    r_cert: float = 0.999
    mode: str = "adaptive"
    rel_tol: float = 1e-4
    max_depth: int = 14

    def __post_init__(self):
        if self.n_r < 8 or self.n_theta < 8:
            raise InvalidInputError("grid resolutions must be >= 8")
        if not (0.0 < self.r_cert <= 0.999):
            raise InvalidInputError("r_cert must lie in (0, 0.999]")
        if self.mode not in ("adaptive", "uniform"):
            raise InvalidInputError("mode must be 'adaptive' or 'uniform'")

    def radii(self) -> np.ndarray:
        t = np.arange(self.n_r + 1) / self.n_r
        return self.r_cert * (1.0 - (1.0 - t) ** 2)

    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_theta) / self.n_theta

    def points(self) -> np.ndarray:
        """Flattened grid nodes, origin counted once."""
        r = self.radii()[1:]
        pts = np.multiply.outer(r, np.exp(1j * self.angles())).ravel()
        return np.concatenate([[0j], pts])

    def mesh(self) -> float:
        r = self.radii()
        dr = np.diff(r)
        dth = 2.0 * np.pi / self.n_theta
        return float(np.max(np.sqrt((dr / 2) ** 2 + (r[1:] * dth / 2) ** 2)))

    def to_dict(self):
        return {"n_r": self.n_r, "n_theta": self.n_theta, "r_cert": self.r_cert,
                "mode": self.mode, "rel_tol": self.rel_tol, "max_depth": self.max_depth}


DEFAULT_GRID = GridSpec()


@dataclass
class SeminormBracket:
    lower: float
    upper: float
    argmax: complex
    mesh: float
    tail: float
    cells_refined: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def width(self):
        return self.upper - self.lower

    def to_dict(self):
        return {"lower": self.lower, "certified_upper": self.upper,
                "argmax": [self.argmax.real, self.argmax.imag],
                "mesh": self.mesh, "tail": self.tail,
                "cells_refined": self.cells_refined}


def hyperbolic_profile(mapping, w) -> np.ndarray:
    """(1 - |w|^2) ||f'(w)|| for any object with a ``deriv`` method."""
    w = np.asarray(w, dtype=complex)
    return (1.0 - np.abs(w) ** 2) * np.linalg.norm(mapping.deriv(w), axis=-1)


def grid_max(mapping, grid: GridSpec = DEFAULT_GRID) -> tuple[float, complex]:
    """Uncertified grid maximum of the hyperbolic derivative profile."""
    pts = grid.points()
    vals = hyperbolic_profile(mapping, pts)
    i = int(np.argmax(vals))
    return float(vals[i]), complex(pts[i])


def _psi_and_grad(f: BlochFunc, w):
    """psi = (1-|w|^2)^2 ||f'||^2 and |grad psi| at points w."""
    F = f.deriv(w, 1)
    F1 = f.deriv(w, 2)
    s = 1.0 - np.abs(w) ** 2
    v = np.sum(np.abs(F) ** 2, axis=-1)
    q = np.sum(F * np.conj(F1), axis=-1)
    psi = s * s * v
    dpsi = -2.0 * s * w * v + s * s * q
    return psi, 2.0 * np.abs(dpsi), np.sqrt(v), np.linalg.norm(F1, axis=-1)


def _term_bounds(f: BlochFunc, r_hi, w_mid, rad):
    """Per-cell sup bounds of ||f'||, ||f''||, ||f'''|| by the triangle inequality."""
    mn, kn = f.payload_norms()
    b1 = np.zeros_like(r_hi)
    b2 = np.zeros_like(r_hi)
    b3 = np.zeros_like(r_hi)
    if mn.size:
        k = f._mk
        rp = r_hi[:, None]
        b1 = b1 + (mn * k * rp ** np.maximum(k - 1, 0)).sum(axis=1)
        c2 = k * (k - 1)
        b2 = b2 + (mn * c2 * np.where(c2 > 0, rp ** np.maximum(k - 2, 0), 0)).sum(axis=1)
        c3 = c2 * (k - 2)
        b3 = b3 + (mn * c3 * np.where(c3 > 0, rp ** np.maximum(k - 3, 0), 0)).sum(axis=1)
    if kn.size:
        z = f._kz
        a = np.abs(z)
        m1 = 1.0 - np.multiply.outer(r_hi, a)
        m2 = np.abs(1.0 - np.multiply.outer(w_mid, z.conj())) - np.multiply.outer(rad, a)
        m = np.maximum(m1, m2)
        s = f._ks
        b1 = b1 + (kn * s / m ** 2).sum(axis=1)
        b2 = b2 + (kn * 2 * s * a / m ** 3).sum(axis=1)
        b3 = b3 + (kn * 6 * s * a ** 2 / m ** 4).sum(axis=1)
    return b1, b2, b3


def _cell_bounds(f: BlochFunc, r_lo, r_hi, t_lo, t_hi, corner_data):
    """Upper bound for (1-|w|^2)||f'(w)|| over each polar cell.

    corner_data: tuple of (psi, gradnorm, |F|, |F'|) arrays of shape (4, ncell).
    Uses psi(w) <= psi(c) + |grad psi(c)| d + H d^2 / 2 around the nearest
    corner c, with H a bound on the real Hessian of psi over the cell hull.
    """
    psi, grad, nF, nF1 = corner_data
    dth = t_hi - t_lo
    dr = r_hi - r_lo
    delta = np.sqrt((dr / 2) ** 2 + (r_hi * dth / 2) ** 2)
    w_mid = 0.5 * (r_lo + r_hi) * np.exp(0.5j * (t_lo + t_hi))
    tb1, tb2, tb3 = _term_bounds(f, r_hi, w_mid, delta)
    b1 = np.minimum(tb1, nF.max(axis=0) + tb2 * delta)
    b2 = np.minimum(tb2, nF1.max(axis=0) + tb3 * delta)
    b3 = tb3
    R = r_hi
    rmin = np.where(dth < np.pi, r_lo * np.cos(dth / 2), 0.0)
    smax = 1.0 - rmin ** 2
    h_bar = 2 * R * R * b1 * b1 + 4 * smax * R * b1 * b2 + smax * smax * b1 * b3
    h_mix = 2 * R * R * b1 * b1 + 2 * smax * b1 * b1 + 4 * smax * R * b1 * b2 + smax * smax * b2 * b2
    hess = 2.0 * (h_bar + h_mix)
    ub_psi = (psi + grad * delta).max(axis=0) + 0.5 * hess * delta ** 2
    return np.sqrt(np.maximum(ub_psi, 0.0)), delta


def _corner_eval(f, r_lo, r_hi, t_lo, t_hi):
    rs = np.stack([r_lo, r_hi, r_lo, r_hi])
    ts = np.stack([t_lo, t_lo, t_hi, t_hi])
    w = rs * np.exp(1j * ts)
    return _psi_and_grad(f, w), w


MIN_CHAIN_SIZE = 8


def _grid_chain(grid: GridSpec) -> list[GridSpec]:
    """``grid`` followed by its successive halvings while both counts stay even."""
    chain = [grid]
    g = grid
    while g.n_r % 2 == 0 and g.n_theta % 2 == 0 and min(g.n_r, g.n_theta) >= 2 * MIN_CHAIN_SIZE:
        g = replace(g, n_r=g.n_r // 2, n_theta=g.n_theta // 2)
        chain.append(g)
    return chain


def bloch_seminorm(f: BlochFunc, grid: GridSpec = DEFAULT_GRID, *,
                   chain: bool = True) -> SeminormBracket:
    """Bracket ``lower <= rho_B(f) <= upper``.

    ``lower`` is the maximum of (1-|w|^2)||f'(w)|| over all evaluated nodes.
    ``upper`` combines cell-local second-order bounds on the disc of radius
    r_cert (cells are split while their bound exceeds lower*(1+rel_tol)) with
    the annulus bound (1 - r_cert^2) sup ||f'||; the two regions are
    disjoint so the maximum of the two is taken.

    Each bound is valid on its own, so the brackets from the chain of halved
    grids are intersected. Doubling both counts only adds grids to the chain,
    which makes lower non-decreasing and upper non-increasing under refinement.
    ``chain=False`` evaluates ``grid`` alone: still a valid bracket, cheaper,
    but without the refinement guarantee.
    """
    if not chain:
        return _bracket_single(f, grid)
    best = None
    refined = 0
    for g in _grid_chain(grid):
        b = _bracket_single(f, g)
        refined += b.cells_refined
        if best is None:
            best = b
            continue
        if b.lower > best.lower:
            best.lower, best.argmax = b.lower, b.argmax
        best.upper = min(best.upper, b.upper)
    best.upper = max(best.upper, best.lower)
    best.cells_refined = refined
    return best


def _bracket_single(f: BlochFunc, grid: GridSpec) -> SeminormBracket:
    r = grid.radii()
    th = np.concatenate([grid.angles(), [2 * np.pi]])
    nr, nt = grid.n_r, grid.n_theta
    tail = (1.0 - grid.r_cert ** 2) * f.sup_deriv_closed_disc()
    if not f.terms:
        return SeminormBracket(0.0, 0.0, 0j, grid.mesh(), 0.0)

    # node values on the (n_r+1) x (n_theta+1) lattice, last column wraps
    W = np.multiply.outer(r, np.exp(1j * th))
    psi, grad, nF, nF1 = _psi_and_grad(f, W)
    phi = np.sqrt(np.maximum(psi, 0.0))
    i, j = np.unravel_index(int(np.argmax(phi[:, :nt])), (nr + 1, nt))
    lower = float(phi[i, j])
    arg = complex(W[i, j])

    def corners(a):
        return np.stack([a[:-1, :-1].ravel(), a[1:, :-1].ravel(),
                         a[:-1, 1:].ravel(), a[1:, 1:].ravel()])

    r_lo = np.repeat(r[:-1], nt)
    r_hi = np.repeat(r[1:], nt)
    t_lo = np.tile(th[:-1], nr)
    t_hi = np.tile(th[1:], nr)
    ub, _ = _cell_bounds(f, r_lo, r_hi, t_lo, t_hi,
                         (corners(psi), corners(grad), corners(nF), corners(nF1)))

    refined = 0
    if grid.mode == "adaptive":
        depth = 0
        while depth < grid.max_depth:
            thresh = lower * (1.0 + grid.rel_tol)
            bad = ub > thresh
            if not np.any(bad):
                break
            if bad.sum() > 200_000:
                break
            keep = ~bad
            rl, rh, tl, thh = r_lo[bad], r_hi[bad], t_lo[bad], t_hi[bad]
            rm, tm = 0.5 * (rl + rh), 0.5 * (tl + thh)
            nrl = np.concatenate([rl, rm, rl, rm])
            nrh = np.concatenate([rm, rh, rm, rh])
            ntl = np.concatenate([tl, tl, tm, tm])
            nth = np.concatenate([tm, tm, thh, thh])
            data, w = _corner_eval(f, nrl, nrh, ntl, nth)
            cphi = np.sqrt(np.maximum(data[0], 0.0))
            k = int(np.argmax(cphi))
            if cphi.flat[k] > lower:
                lower = float(cphi.flat[k])
                arg = complex(w.flat[k])
            nub, _ = _cell_bounds(f, nrl, nrh, ntl, nth, data)
            # a child can never need a larger bound than its parent
            nub = np.minimum(nub, np.tile(ub[bad], 4))
            refined += int(bad.sum())
            r_lo = np.concatenate([r_lo[keep], nrl])
            r_hi = np.concatenate([r_hi[keep], nrh])
            t_lo = np.concatenate([t_lo[keep], ntl])
            t_hi = np.concatenate([t_hi[keep], nth])
            ub = np.concatenate([ub[keep], nub])
            depth += 1

    upper = max(float(ub.max()), tail, lower)
    return SeminormBracket(lower, upper, arg, grid.mesh(), tail, refined)


# ---------------------------------------------------------------------------
# samplers


def random_ball_function(degree: int, dim: int = 1, seed=None,
                         grid: GridSpec = DEFAULT_GRID) -> BlochFunc:
    """Random monomial combination divided by its certified seminorm bound."""
    if degree < 1 or degree > 64:
        raise InvalidInputError("degree must lie in 1..64")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    coeffs = rng.standard_normal((degree, dim)) + 1j * rng.standard_normal((degree, dim))
    f = BlochFunc(dim, [(coeffs[k - 1], Monomial(k)) for k in range(1, degree + 1)])
    bound = bloch_seminorm(f, grid, chain=False).upper
    return f.scale(1.0 / bound)


_MONO_NORMS: dict = {}


def monomial_norms(degree: int) -> np.ndarray:
    if degree not in _MONO_NORMS:
        _MONO_NORMS[degree] = np.array([monomial_bloch_norm(k) for k in range(1, degree + 1)])
    return _MONO_NORMS[degree]


def random_ball_batch(n: int, degree: int, rng) -> np.ndarray:
    """Coefficients (n, degree) of scalar polynomials sum_k c_k w^k in the unit ball.

    Normalised by the triangle bound sum |c_k| rho(w^k), which is exact for
    single monomials and always certifies rho_B <= 1.
    """
    # separate streams keep the first rows identical when n grows
    rng_c, rng_d = rng.spawn(2)
    c = rng_c.standard_normal((n, 2 * degree)).view(complex)
    # random effective degree so low-order shapes are well represented
    cut = 1 + np.floor(rng_d.random(n) * degree).astype(int)
    c[np.arange(degree)[None, :] >= cut[:, None]] = 0.0
    norm = np.abs(c) @ monomial_norms(degree)
    return c / norm[:, None]


def poly_deriv_matrix(w, degree: int) -> np.ndarray:
    """Rows k w^(k-1), k = 1..degree, for each point in w."""
    w = np.asarray(w, dtype=complex).reshape(-1)
    k = np.arange(1, degree + 1)
    return k * np.power.outer(w, k - 1)


def poly_to_blochfunc(coeffs) -> BlochFunc:
    c = np.asarray(coeffs, dtype=complex).reshape(-1)
    return BlochFunc(1, [([c[k]], Monomial(k + 1)) for k in range(c.size) if c[k] != 0])
