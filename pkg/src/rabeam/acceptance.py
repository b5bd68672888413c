"""Acceptance criteria as runnable checks, shared by ``selftest`` and the tests.

Every check returns a :class:`CriterionResult`. ``quick=True`` shrinks the
instance counts for a fast smoke pass; the stated sizes are the default.
"""
from __future__ import annotations

import math
import tempfile
import time
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path
from typing import Callable
from xml.etree import ElementTree

import numpy as np
from scipy.linalg import eigh

from . import bench
from .cone import CompiledProgram, ConeProgram, lq_epigraph
from .linalg import ExtRational, gram_factor, induced_norm, vec_norm
from .rab import RabProblem, StopReason, StoppingRule, solve_sequential
from .scenario import (Density, ScatteredSource, Scenario, ULAConfig, build_covariances,
                       sample_covariance, sinr)
from .socp import SolverConfig, Status, solve
from .worst_case import (UncertaintySpec, adversarial_sample, frobenius_ball_min_residual,
                         max_residual_value, min_residual_value, residual, worst_case_delta)

ORDERS = [ExtRational.of(v) for v in (1, "3/2", 2, 4, "inf")]
ETAS = (0.0, 0.3, 3.0)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


# ---------------------------------------------------------------------------
# 1-3: worst-case residual oracle


def random_ls_instance(rng):
    M, N = int(rng.integers(1, 5)), int(rng.integers(1, 6))
    A = _crandn(rng, M, N)
    x = _crandn(rng, N) * 10 ** rng.uniform(-1, 1)
    b = _crandn(rng, M) * 10 ** rng.uniform(-1, 1)
    return A, x, b


def probe_gain(D, p, q, probes: int, rng) -> float:
    """max ||D v||_p / ||v||_q over random complex v: a lower bound on ||D||_{p,q}."""
    V = _crandn(rng, probes, D.shape[1])
    num = np.linalg.norm(V @ D.T, ord=float(p), axis=1)
    den = np.linalg.norm(V, ord=float(q), axis=1)
    return float(np.max(num / den))


@lru_cache(maxsize=4)
def _oracle_sweep(instances: int, samples: int, probes: int, seed: int = 1):
    rng = np.random.default_rng(seed)
    worst = {"attain": 0.0, "undercut": 0.0, "member": 0.0, "exceed": 0.0}
    cases = 0
    for _ in range(instances):
        A, x, b = random_ls_instance(rng)
        for p in ORDERS:
            for q in ORDERS:
                for eta in ETAS:
                    spec = UncertaintySpec(p, q, eta)
                    lo = min_residual_value(A, x, b, spec)
                    hi = max_residual_value(A, x, b, spec)
                    pert = worst_case_delta(A, x, b, spec)
                    worst["attain"] = max(worst["attain"],
                                          abs(residual(A, x, b, pert.delta, p) - lo))
                    norm, _ = induced_norm(pert.delta, p, q)
                    gain = probe_gain(pert.delta, p, q, probes, rng)
                    worst["member"] = max(worst["member"], norm - eta, gain - eta)
                    smin, smax = adversarial_sample(A, x, b, spec, samples, rng)
                    worst["undercut"] = max(worst["undercut"], lo - smin)
                    worst["exceed"] = max(worst["exceed"], smax - hi)
                    cases += 1
    return cases, worst


def criterion_1(quick: bool = False) -> CriterionResult:
    n = 20 if quick else 200
    cases, worst = _oracle_sweep(n, 1000, 10_000)
    ok = worst["attain"] <= 1e-10 and worst["undercut"] <= 1e-8 and worst["member"] <= 1e-10
    detail = (f"{cases} cases; max |res(D^)-min| = {worst['attain']:.2e}, "
              f"max undercut = {worst['undercut']:.2e}, max ||D^||-eta = {worst['member']:.2e}")
    return CriterionResult(1, "min-residual oracle equivalence", ok, detail)


def criterion_2(quick: bool = False) -> CriterionResult:
    n = 20 if quick else 200
    cases, worst = _oracle_sweep(n, 1000, 10_000)
    ok = worst["exceed"] <= 1e-8
    return CriterionResult(2, "max-residual bracketing", ok,
                           f"{cases} cases; max sample - max value = {worst['exceed']:.2e}")


def criterion_3(quick: bool = False) -> CriterionResult:
    rng = np.random.default_rng(3)
    bad = 0
    n = 100
    for _ in range(n):
        A, x, b = random_ls_instance(rng)
        eta = float(rng.uniform(0, 3))
        if min_residual_value(A, x, b, UncertaintySpec(2, 2, eta)) != \
                frobenius_ball_min_residual(A, x, b, eta):
            bad += 1
    return CriterionResult(3, "l2,2 ball equals Frobenius closed form", bad == 0,
                           f"{n - bad}/{n} identical")


# ---------------------------------------------------------------------------
# 4: SOC tower


def tower_min(w, q) -> float:
    """min s subject to the l_q epigraph, with w pinned by equalities."""
    prog = ConeProgram()
    zs = [prog.complex_var() for _ in w]
    for z, val in zip(zs, w):
        prog.add_eq(z.re - float(val.real))
        prog.add_eq(z.im - float(val.imag))
    s = prog.var("s")
    lq_epigraph(prog, zs, s, q)
    prog.maximize(-s)
    sol = solve(prog.freeze())
    if sol.status is not Status.OPTIMAL:
        return math.nan
    return sol[s]


def criterion_4(quick: bool = False) -> CriterionResult:
    rng = np.random.default_rng(4)
    qs = [ExtRational.of(v) for v in (1, "3/2", 2, "7/3", 4, "inf")]
    n = 5 if quick else 50
    worst = 0.0
    for q in qs:
        for _ in range(n):
            w = _crandn(rng, 10)
            ref = vec_norm(w, q)
            got = tower_min(w, q)
            worst = max(worst, abs(got - ref) / ref if math.isfinite(got) else math.inf)
    return CriterionResult(4, "SOC tower exactness", worst <= 1e-6,
                           f"{len(qs) * n} solves; max relative error {worst:.2e}")


# ---------------------------------------------------------------------------
# 5-7: sequential algorithm


def random_protocol_scenario(rng) -> Scenario:
    """Perturbed version of the reference setup: angles, spreads, powers vary."""
    snr = float(rng.uniform(-5, 40))
    center = float(rng.uniform(15, 45))
    true = ScatteredSource(Density.GAUSSIAN, center, float(rng.uniform(2, 6)), 10 ** (snr / 10))
    presumed = ScatteredSource(Density.GAUSSIAN, center + float(rng.uniform(-5, 5)),
                               float(rng.uniform(2, 8)), true.power)
    inter = ScatteredSource(Density.UNIFORM, float(rng.uniform(-40, 5)),
                            float(rng.uniform(4, 15)), 10 ** (float(rng.uniform(5, 20)) / 10))
    return Scenario(ULAConfig(10, 0.5), true, presumed, (inter,), 1.0, 50,
                    int(rng.integers(2**31)))


def criterion_5(quick: bool = False) -> CriterionResult:
    rng = np.random.default_rng(5)
    n = 10 if quick else 100
    bad = []
    longest = 0
    for i in range(n):
        sc = random_protocol_scenario(rng)
        cov = build_covariances(sc)
        R_hat = sample_covariance(cov.R, sc.snapshots, rng)
        Q = gram_factor(cov.R_s_presumed)
        for q in ORDERS:
            prob = bench.make_problem(bench.ExperimentConfig(), R_hat, Q, 2, q)
            _, _, trace = solve_sequential(prob, StoppingRule(1e-6, 300))
            longest = max(longest, len(trace.records) - 1)
            if not trace.monotone or trace.stop_reason is not StopReason.ALPHA:
                bad.append((i, str(q), trace.stop_reason.value))
    total = n * len(ORDERS)
    detail = f"{total - len(bad)}/{total} monotone and alpha-terminated; longest {longest} steps"
    if bad:
        detail += f"; failures {bad[:5]}"
    return CriterionResult(5, "monotone ascent at p=2", not bad, detail)


def random_problem(rng, N: int, spec: UncertaintySpec) -> RabProblem:
    T = int(rng.integers(N, 3 * N))
    X = _crandn(rng, N, T)
    R_hat = X @ X.conj().T / T
    M = int(rng.integers(1, N + 1))
    Q = _crandn(rng, M, N)
    return RabProblem(R_hat, Q, 0.01 * np.linalg.norm(R_hat), spec)


def criterion_6(quick: bool = False) -> CriterionResult:
    rng = np.random.default_rng(6)
    n = 10 if quick else 50
    worst = 0.0
    for _ in range(n):
        prob = random_problem(rng, int(rng.integers(3, 11)), UncertaintySpec(2, 2, 0.0))
        lam = eigh(prob.Q.conj().T @ prob.Q, prob.loaded, eigvals_only=True)[-1]
        _, t, _ = solve_sequential(prob)
        worst = max(worst, abs(t - math.sqrt(lam)) / math.sqrt(lam))
    return CriterionResult(6, "eta = 0 matches pencil eigenvalue", worst <= 1e-5,
                           f"{n} instances; max relative error {worst:.2e}")


def grid_optimum(prob: RabProblem, points: int = 1_000_000) -> float:
    """Brute-force max of the objective over the constraint boundary for N = 2.

    Directions ``(cos a, sin a e^{j phi})`` with the first entry real
    cover every beam up to a common phase; the objective is positively
    homogeneous, so each direction is scaled onto the boundary.
    """
    side = int(round(math.sqrt(points)))
    a = np.linspace(0, np.pi / 2, side)
    phi = np.linspace(0, 2 * np.pi, side, endpoint=False)
    A, PHI = np.meshgrid(a, phi, indexing="ij")
    W = np.stack([np.cos(A).ravel() + 0j, (np.sin(A) * np.exp(1j * PHI)).ravel()], axis=1)
    quad = np.real(np.einsum("kn,nm,km->k", W.conj(), prob.loaded, W))
    W = W / np.sqrt(quad)[:, None]
    spec = prob.objective
    QW = W @ prob.Q.T
    num = np.linalg.norm(QW, axis=1)  # p = 2
    mod = np.abs(W)
    if spec.q.is_inf:
        pen = mod.max(axis=1)
    elif spec.q == 1:
        pen = mod.sum(axis=1)
    else:
        qf = float(spec.q)
        pen = np.sum(mod ** qf, axis=1) ** (1 / qf)
    return float(np.max(num - spec.eta * pen))


def criterion_7(quick: bool = False) -> CriterionResult:
    rng = np.random.default_rng(7)
    n = 4 if quick else 20
    worst = 0.0
    for i in range(n):
        q = ("1", "2", "inf")[i % 3]
        base = random_problem(rng, 2, UncertaintySpec(2, q, 0.0))
        eta = float(rng.uniform(0.05, 0.5)) * np.linalg.norm(base.Q, 2)
        prob = RabProblem(base.R_hat, base.Q, base.gamma, UncertaintySpec(2, q, eta))
        _, t, _ = solve_sequential(prob)
        worst = max(worst, abs(t - grid_optimum(prob)))
    return CriterionResult(7, "N = 2 brute-force grid agreement", worst <= 1e-3,
                           f"{n} instances; max |t* - grid| = {worst:.2e}")


# ---------------------------------------------------------------------------
# 8: solver contract


def _soc_pair(rng, d: int):
    """Complementary (s, z) on a cone of dimension d (one of three patterns)."""
    kind = rng.integers(3)
    if kind == 0:  # both on the boundary, opposite rays
        u = rng.standard_normal(d - 1)
        u /= np.linalg.norm(u)
        a, b = rng.uniform(0.5, 2, 2)
        return np.r_[a, a * u], np.r_[b, -b * u]
    inner = rng.standard_normal(d - 1)
    inner *= rng.uniform(0, 0.9) / max(np.linalg.norm(inner), 1e-12)
    interior = rng.uniform(0.5, 2) * np.r_[1.0, inner]
    if kind == 1:
        return interior, np.zeros(d)
    return np.zeros(d), interior


def planted_socp(rng, n: int = 8, l: int = 4, soc_dims=(3, 4), meq: int = 2):
    """SOCP with a known primal-dual solution built from complementary pairs.

    Returns ``(compiled, x_star, optimal_min_objective)``.
    """
    s_parts, z_parts = [], []
    for _ in range(l):
        if rng.random() < 0.5:
            s_parts.append([rng.uniform(0.5, 2)])
            z_parts.append([0.0])
        else:
            s_parts.append([0.0])
            z_parts.append([rng.uniform(0.5, 2)])
    for d in soc_dims:
        s, z = _soc_pair(rng, d)
        s_parts.append(s)
        z_parts.append(z)
    s = np.concatenate(s_parts)
    z = np.concatenate(z_parts)
    m = s.size
    G = rng.standard_normal((m, n))
    A = rng.standard_normal((meq, n))
    x = rng.standard_normal(n)
    y = rng.standard_normal(meq)
    h = G @ x + s
    b = A @ x
    c = -G.T @ z - A.T @ y
    cp = CompiledProgram(c=c, G=G, h=h, A=A, b=b, l=l, soc_dims=list(soc_dims), obj_const=0.0)
    return cp, x, float(c @ x)


def _lp(n, c, G, h, l, soc_dims=(), A=None, b=None):
    A = np.zeros((0, n)) if A is None else np.atleast_2d(np.asarray(A, float))
    b = np.zeros(0) if b is None else np.asarray(b, float)
    return CompiledProgram(c=np.asarray(c, float), G=np.atleast_2d(np.asarray(G, float)),
                           h=np.asarray(h, float), A=A, b=b, l=l, soc_dims=list(soc_dims),
                           obj_const=0.0)


def infeasible_instances():
    """Five programs with known infeasibility status (minimize form)."""
    return [
        # x >= 1 and x <= -1
        ("box clash", Status.PRIMAL_INFEASIBLE, _lp(1, [1.0], [[-1.0], [1.0]], [-1.0, -1.0], 2)),
        # ||(x1, x2)|| <= 1 with x1 >= 2
        ("ball vs halfspace", Status.PRIMAL_INFEASIBLE,
         _lp(2, [0.0, 1.0], [[-1.0, 0.0], [0.0, 0.0], [-1.0, 0.0], [0.0, -1.0]],
             [-2.0, 1.0, 0.0, 0.0], 1, (3,))),
        # x1 + x2 = 3 with ||(x1, x2)|| <= 1
        ("affine plane misses ball", Status.PRIMAL_INFEASIBLE,
         _lp(2, [1.0, 0.0], [[0.0, 0.0], [-1.0, 0.0], [0.0, -1.0]], [1.0, 0.0, 0.0], 0, (3,),
             A=[[1.0, 1.0]], b=[3.0])),
        # minimize -x1 over ||x2|| <= x1: unbounded
        ("unbounded cone ray", Status.DUAL_INFEASIBLE,
         _lp(2, [-1.0, 0.0], [[-1.0, 0.0], [0.0, -1.0]], [0.0, 0.0], 0, (2,))),
        # minimize x1 - x2 with x2 - x1 >= 0 and x1 free: unbounded below along (0, 1)
        ("unbounded halfspace", Status.DUAL_INFEASIBLE,
         _lp(2, [1.0, -1.0], [[1.0, -1.0]], [0.0], 1)),
    ]


def criterion_8(quick: bool = False) -> CriterionResult:
    rng = np.random.default_rng(8)
    n = 5 if quick else 20
    worst = 0.0
    for k in range(n):
        cp, _, opt = planted_socp(rng, n=int(rng.integers(4, 12)), l=int(rng.integers(0, 6)),
                                  soc_dims=tuple(int(d) for d in rng.integers(2, 6, size=2)),
                                  meq=int(rng.integers(0, 3)))
        sol = solve(cp)
        err = abs(float(cp.c @ sol.x) - opt) / (1 + abs(opt)) \
            if sol.status is Status.OPTIMAL else math.inf
        worst = max(worst, err)
    flagged = [name for name, want, cp in infeasible_instances() if solve(cp).status is want]
    ok = worst <= 1e-6 and len(flagged) == 5
    return CriterionResult(8, "solver contract", ok,
                           f"{n} planted: max rel objective error {worst:.2e}; "
                           f"{len(flagged)}/5 infeasible instances flagged")


# ---------------------------------------------------------------------------
# 9: reference protocol


def criterion_9(quick: bool = False, threads: int = 1, out_dir=None) -> CriterionResult:
    cfg = bench.ExperimentConfig(runs=3 if quick else 100)
    tmp = None
    if out_dir is None:
        tmp = tempfile.TemporaryDirectory()
        out_dir = tmp.name
    out = Path(out_dir)
    try:
        rows = bench.run_experiment(cfg, threads=threads)
        bench.emit_csv(rows, out / "protocol.csv")
        bench.emit_svg_lines(rows, out / "protocol.svg")
        bench.emit_svg_lines(rows, out / "protocol_cpu.svg", metric="cpu_ms")
        for name in ("protocol.svg", "protocol_cpu.svg"):
            ElementTree.parse(out / name)
        failed = [r for r in rows if r.status.startswith("error")]
        over = [r for r in rows if not r.sinr_db <= r.opt_bound_db + 1e-6]
        means = bench.aggregate(rows)
        bounds = {r.snr_db: r.opt_bound_db for r in rows}
        gaps = {}
        finite = True
        for key, pts in means.items():
            for snr, m in pts:
                finite &= math.isfinite(m)
                gaps[(key, snr)] = bounds[snr] - m
        finite &= all(len(pts) == len(cfg.snr_list_db) for pts in means.values())
        worst_key, worst_gap = max(gaps.items(), key=lambda kv: kv[1])
        ok = not failed and not over and finite and worst_gap <= 20.0
        # qualitative note: which q leads in mean SINR and in CPU time at each SNR
        cpu = bench.aggregate(rows, "cpu_ms")
        lead = []
        for snr in cfg.snr_list_db:
            best = max(means, key=lambda k: dict(means[k]).get(snr, -math.inf))
            cheapest = min(cpu, key=lambda k: dict(cpu[k]).get(snr, math.inf))
            lead.append(f"{snr:g}dB:sinr q={best[1]},cpu q={cheapest[1]}")
        (key, snr) = worst_key
        detail = (f"{len(rows)} rows, {len(failed)} failed, {len(over)} above bound; "
                  f"largest mean gap to bound {worst_gap:.2f} dB (q={key[1]}, {snr:g} dB); "
                  f"leaders {'; '.join(lead)}")
        return CriterionResult(9, "reference protocol smoke run", ok, detail)
    finally:
        if tmp is not None:
            tmp.cleanup()


# ---------------------------------------------------------------------------
# 10: SINR invariance


def criterion_10(quick: bool = False) -> CriterionResult:
    rng = np.random.default_rng(10)
    cov = build_covariances(replace(random_protocol_scenario(rng), snapshots=1))
    worst = 0.0
    for _ in range(100):
        w = _crandn(rng, 10)
        r = 10 ** rng.uniform(-3, 3)
        th = rng.uniform(0, 2 * np.pi)
        a = sinr(w, cov.R_s, cov.R_ipn)
        b = sinr(r * np.exp(1j * th) * w, cov.R_s, cov.R_ipn)
        worst = max(worst, abs(a - b) / a)
    return CriterionResult(10, "SINR phase/scale invariance", worst <= 1e-12,
                           f"100 draws; max relative change {worst:.2e}")


# ---------------------------------------------------------------------------


def model_exact_bounds(quick: bool = False) -> CriterionResult:
    """worst-case SINR <= actual SINR <= optimal when the model is exact."""
    cfg = bench.ExperimentConfig(runs=1, model_exact=True, exact_covariance=True,
                                 snr_list_db=(0.0, 20.0) if quick else (0.0, 10.0, 20.0, 30.0))
    rows = bench.run_experiment(cfg)
    bad = [r for r in rows if not (r.worst_case_sinr_db <= r.sinr_db + 1e-6
                                   and r.sinr_db <= r.opt_bound_db + 1e-6)]
    return CriterionResult(0, "model-exact bound discipline", not bad,
                           f"{len(rows) - len(bad)}/{len(rows)} rows within bounds")


CRITERIA: dict[int, Callable[..., CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
}


def run(number: int, quick: bool = False, **kw) -> CriterionResult:
    start = time.perf_counter()
    res = CRITERIA[number](quick=quick, **kw)
    res.seconds = time.perf_counter() - start
    return res


def run_all(quick: bool = False, threads: int = 1, echo=print) -> list[CriterionResult]:
    results = []
    for k in CRITERIA:
        res = run(k, quick, **({"threads": threads} if k == 9 else {}))
        echo(res.line())
        results.append(res)
    start = time.perf_counter()
    extra = model_exact_bounds(quick)
    extra.seconds = time.perf_counter() - start
    echo(extra.line())
    results.append(extra)
    return results
