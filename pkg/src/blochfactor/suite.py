"""Desk-scale property suite: one deterministic check per acceptance criterion.

Each ``criterion_*`` returns a CriterionResult whose ``metrics`` hold only
seed-determined numbers; wall-clock time is kept apart so that reports stay
byte-stable.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .blochcore import BlochFunc, bloch_seminorm, monomial_bloch_norm
from .domination import decide, verify_contraction
from .duality import VecMolecule, vec_pairing, w2_lb, w2_ub
from .factor import (build_factorization, ideal_inequality_check, kwapien_lb, pietsch_ub,
                     psum2_ub, rank_one, unitary_criterion_check)
from .molecules import WeightedSeq, molecule_norm_opt


@dataclass
class CriterionResult:
    id: int
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self):
        return {"id": self.id, "name": self.name, "pass": self.passed, "metrics": self.metrics}


def _unit(rng, d):
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def _disc(rng, rmax=0.8):
    return complex(rmax * np.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random()))


def suite_mappings(seed=0, count: int = 20) -> list[tuple[str, BlochFunc]]:
    """Rank-one kernels, vector monomials and two-term sums with d <= 4."""
    rng = np.random.default_rng([seed, 101])
    out = []
    for i in range(count):
        d = int(rng.integers(1, 5))
        kind = i % 3
        if kind == 0:
            z = _disc(rng)
            out.append((f"kernel_d{d}", BlochFunc.kernel(z, _unit(rng, d) * (0.5 + rng.random()))))
        elif kind == 1:
            k = int(rng.integers(1, 5))
            out.append((f"monomial{k}_d{d}", BlochFunc.monomial(k, _unit(rng, d) * (0.5 + rng.random()))))
        else:
            f = BlochFunc.kernel(_disc(rng), _unit(rng, d))
            if rng.random() < 0.5:
                g = BlochFunc.kernel(_disc(rng), _unit(rng, d) * rng.random())
            else:
                g = BlochFunc.monomial(int(rng.integers(1, 4)), _unit(rng, d) * rng.random())
            out.append((f"sum2_d{d}", f + g))
    return out


class Suite:
    """Runs the criteria with shared caches (Pietsch values are reused)."""

    def __init__(self, seed=0):
        self.seed = seed
        self.mappings = suite_mappings(seed)
        self._pietsch: dict = {}
        self._dom_cache = None

    def pietsch(self, i):
        if i not in self._pietsch:
            self._pietsch[i] = pietsch_ub(self.mappings[i][1], seed=self.seed)
        return self._pietsch[i]

    # -- 1
    def criterion_1(self):
        zs = [0j, 0.3j, 0.7 + 0j, -0.5 + 0.2j]
        rows, ok = [], True
        for z in zs:
            br = bloch_seminorm(BlochFunc.kernel(z))
            good = (br.lower <= 1.0 <= br.upper and br.width <= 2e-3
                    and abs(br.argmax - z) <= 2 * br.mesh)
            ok &= good
            rows.append({"z": [z.real, z.imag], "lower": br.lower, "upper": br.upper,
                         "argmax_offset": abs(br.argmax - z), "pass": good})
        return CriterionResult(1, "kernel extremality", ok, {"kernels": rows})

    # -- 2
    def criterion_2(self):
        zs = [0j, 0.5 + 0j, 0.8j, -0.6 + 0.5j]
        rows, ok = [], True
        for z in zs:
            exact = 1.0 / (1.0 - abs(z) ** 2)
            r = molecule_norm_opt(WeightedSeq([(1.0, z)]))
            good = r.lower <= exact * (1 + 1e-12) and exact <= r.upper * (1 + 1e-12) \
                and (r.upper - r.lower) / exact <= 0.02
            ok &= good
            rows.append({"z": [z.real, z.imag], "exact": exact, "lower": r.lower,
                         "upper": r.upper, "pass": bool(good)})
        return CriterionResult(2, "atom norm", bool(ok), {"atoms": rows})

    # -- 3 and 4 share instances
    def _domination_instances(self, count=200):
        rng = np.random.default_rng([self.seed, 303])
        out = []
        for i in range(count):
            npool = int(rng.integers(2, 7))
            pool = 0.85 * np.sqrt(rng.random(npool)) * np.exp(2j * np.pi * rng.random(npool))

            def seq(k):
                idx = rng.choice(npool, size=k, replace=False)
                lam = rng.standard_normal(k) + 1j * rng.standard_normal(k)
                return WeightedSeq(zip(lam, pool[idx]))

            a = seq(int(rng.integers(1, npool + 1)))
            mode = i % 4
            if mode == 0:
                b = seq(int(rng.integers(1, npool + 1)))
            elif mode == 1:
                b = a.scale(1.0 + rng.random()) + seq(int(rng.integers(1, npool + 1)))
            elif mode == 2:
                b = WeightedSeq(a)
            else:
                # shave one point's mass just below what domination needs
                w = a.weights.copy()
                w[0] *= 0.999
                b = WeightedSeq.from_arrays(w, a.points)
            out.append((a, b))
        return out

    def _domination_runs(self):
        if self._dom_cache is None:
            runs = []
            for i, (a, b) in enumerate(self._domination_instances()):
                runs.append((a, b, decide(a, b, n=10_000, degree=8, seed=[self.seed, i])))
            self._dom_cache = runs
        return self._dom_cache

    def criterion_3(self):
        runs = self._domination_runs()
        findings = [i for i, (_, _, v) in enumerate(runs) if v.disagreement]
        dominated = sum(1 for *_, v in runs if v.dominates is True)
        return CriterionResult(3, "domination three-way agreement", not findings,
                               {"instances": len(runs), "dominated": dominated,
                                "disagreements": findings})

    def criterion_4(self):
        from .domination import canonicalize, contraction_witness, lagrange_violation, sampled_violation
        n_cw = n_vw = 0
        bad = []
        for i, (a, b, _) in enumerate(self._domination_runs()):
            a, b = canonicalize(a), canonicalize(b)
            cw = contraction_witness(a, b)
            if cw is not None:
                n_cw += 1
                res, norm = verify_contraction(a, b, cw)
                if res > 1e-9 or abs(norm - cw.opnorm) > 1e-8:
                    bad.append({"instance": i, "kind": "contraction", "residual": res})
            for w in (lagrange_violation(a, b),
                      sampled_violation(a, b, n=10_000, seed=[self.seed, i])):
                if w is None:
                    continue
                n_vw += 1
                if w.verify(a, b) < 1e-10:
                    bad.append({"instance": i, "kind": "violation", "margin": w.verify(a, b)})
        return CriterionResult(4, "witness soundness", not bad,
                               {"contraction_witnesses": n_cw, "violation_witnesses": n_vw,
                                "failures": bad})

    # -- 5
    def criterion_5(self):
        rows, ok = [], True
        for i, (name, f) in enumerate(self.mappings):
            br = bloch_seminorm(f)
            lb = kwapien_lb(f, budget=1000, seed=self.seed)
            c, cert = self.pietsch(i)
            wit = build_factorization(f, cert)
            good = (br.lower - 1e-9 <= lb <= c * (1 + 1e-9)
                    and wit.residual <= 1e-6
                    and wit.bound <= c * 1.02
                    and wit.bound >= lb - 1e-6
                    and cert.verify())
            ok &= good
            rows.append({"name": name, "rho_lower": br.lower, "kwapien_lb": lb,
                         "pietsch_ub": c, "opnormT_rho_g": wit.bound,
                         "residual": wit.residual, "pass": bool(good)})
        return CriterionResult(5, "gamma2 sandwich", bool(ok), {"mappings": rows})

    # -- 6
    def criterion_6(self):
        rng = np.random.default_rng([self.seed, 606])
        rows, ok = [], True
        for i in range(10):
            d = int(rng.integers(1, 5))
            x = _unit(rng, d) * (0.5 + 2 * rng.random())
            if i % 2 == 0:
                g = BlochFunc.kernel(_disc(rng))
            else:
                k = int(rng.integers(1, 5))
                g = BlochFunc.monomial(k, [1.0 / monomial_bloch_norm(k)])
            f = rank_one(g, x)
            c, _ = pietsch_ub(f, seed=self.seed)
            ref = 0.5 * (f.gamma2.lower + f.gamma2.upper)
            good = abs(c - ref) <= 0.02 * ref
            ok &= good
            rows.append({"pietsch_ub": c, "rho_times_norm": ref, "pass": bool(good)})
        return CriterionResult(6, "rank-one equality", bool(ok), {"mappings": rows})

    # -- 7
    def criterion_7(self):
        rows, ok = [], True
        for i, (name, f) in enumerate(self.mappings):
            c, _ = self.pietsch(i)
            r16 = unitary_criterion_check(f, c, n=16, trials=1000, seed=[self.seed, i])
            r1 = unitary_criterion_check(f, c, n=1, trials=200, seed=[self.seed, i])
            worst = max(r16.max_ratio, r1.max_ratio)
            good = worst <= 1 + 1e-6
            ok &= good
            rows.append({"name": name, "c": c, "max_ratio": worst, "pass": bool(good)})
        return CriterionResult(7, "unitary criterion", bool(ok), {"mappings": rows})

    # -- 8
    def criterion_8(self):
        rng = np.random.default_rng([self.seed, 808])
        rows, ok = [], True
        for j in range(20):
            i = j % len(self.mappings)
            name, f = self.mappings[i]
            a = _disc(rng, 0.9)
            e = int(rng.integers(1, 5))
            t = rng.standard_normal((e, f.dim)) + 1j * rng.standard_normal((e, f.dim))
            checks = ideal_inequality_check(t, f, a, seed=self.seed, pietsch=self.pietsch(i)[0])
            good = all(ch.passed for ch in checks)
            ok &= good
            rows.append({"name": name, "a": [a.real, a.imag],
                         "margins": {ch.name: ch.margin for ch in checks}, "pass": good})
        return CriterionResult(8, "ideal and composition", bool(ok), {"pairs": rows})

    # -- 9
    def criterion_9(self):
        rows, ok = [], True
        for i, (name, f) in enumerate(self.mappings):
            c, _ = self.pietsch(i)
            est = psum2_ub(f, seed=self.seed)
            good = c <= est * 1.05
            ok &= good
            rows.append({"name": name, "pietsch_ub": c, "psum2_estimate": est,
                         "pass": bool(good)})
        return CriterionResult(9, "2-summing direction", bool(ok), {"mappings": rows})

    # -- 10
    def _random_vec_molecule(self, rng, pool, d=None, terms=None):
        d = d or int(rng.integers(1, 5))
        terms = terms or int(rng.integers(1, 7))
        idx = rng.choice(len(pool), size=terms, replace=True)
        return VecMolecule(d, [(complex(rng.standard_normal(), rng.standard_normal()), pool[k],
                                rng.standard_normal(d) + 1j * rng.standard_normal(d))
                               for k in idx])

    def criterion_10(self):
        rng = np.random.default_rng([self.seed, 1010])
        pool = [complex(z) for z in 0.85 * np.sqrt(rng.random(16)) * np.exp(2j * np.pi * rng.random(16))]
        sandwich_bad = 0
        for _ in range(1000):
            g = self._random_vec_molecule(rng, pool)
            if w2_lb(g) > w2_ub(g) + 1e-9:
                sandwich_bad += 1
        by_dim: dict = {}
        for i, (_, f) in enumerate(self.mappings):
            by_dim.setdefault(f.dim, []).append(i)
        pairing_bad, worst = 0, 0.0
        for k in range(1000):
            dims = sorted(by_dim)
            d = dims[k % len(dims)]
            i = by_dim[d][(k // len(dims)) % len(by_dim[d])]
            f = self.mappings[i][1]
            g = self._random_vec_molecule(rng, pool, d=d)
            lhs = abs(vec_pairing(f, g))
            rhs = self.pietsch(i)[0] * w2_ub(g)
            worst = max(worst, lhs / rhs if rhs > 0 else (np.inf if lhs > 0 else 0.0))
            if lhs > rhs * 1.02:
                pairing_bad += 1
        tight = 0.0
        for _ in range(20):
            g = self._random_vec_molecule(rng, pool, terms=1)
            lo, hi = w2_lb(g), w2_ub(g)
            if lo > 0:
                tight = max(tight, hi / lo)
        ok = sandwich_bad == 0 and pairing_bad == 0 and tight <= 1.05
        return CriterionResult(10, "duality", bool(ok),
                               {"sandwich_failures": sandwich_bad, "pairing_failures": pairing_bad,
                                "worst_pairing_ratio": worst, "single_term_max_ratio": tight})

    def run(self, only=None) -> list[CriterionResult]:
        out = []
        for k in range(1, 11):
            if only and k not in only:
                continue
            t0 = time.perf_counter()
            res = getattr(self, f"criterion_{k}")()
            res.seconds = time.perf_counter() - t0
            out.append(res)
        return out


def run_suite(seed=0, only=None) -> list[CriterionResult]:
    return Suite(seed).run(only)
