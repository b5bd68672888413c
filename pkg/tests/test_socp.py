import numpy as np
import pytest
import scipy.sparse as sp

from rabeam.acceptance import infeasible_instances, planted_socp
from rabeam.cone import CompiledProgram, ConeProgram, real_inner
from rabeam.socp import SolverConfig, SolverError, Status, solve, verify

from conftest import crandn


def test_trivial_lp():
    p = ConeProgram()
    x = p.var("x")
    p.add_nonneg(x)
    p.add_nonneg(1 - x)
    p.maximize(x)
    sol = solve(p)
    assert sol.status is Status.OPTIMAL
    assert sol.objective == pytest.approx(1, abs=1e-8)


def test_trivial_soc():
    # max x + y over ||(x, y)|| <= 1
    p = ConeProgram()
    x, y = p.var(), p.var()
    p.add_soc(1.0, [x, y])
    p.maximize(x + y)
    sol = solve(p)
    assert sol.objective == pytest.approx(np.sqrt(2), abs=1e-7)
    assert sol[x] == pytest.approx(1 / np.sqrt(2), abs=1e-6)


@pytest.mark.parametrize("seed", range(8))
def test_planted_kkt(seed):
    rng = np.random.default_rng(seed)
    cp, x_star, opt = planted_socp(rng, n=8, l=4, soc_dims=(3, 5, 3), meq=2)
    sol = solve(cp)
    assert sol.status is Status.OPTIMAL
    assert -sol.objective == pytest.approx(opt, abs=1e-6 * (1 + abs(opt)))


@pytest.mark.parametrize("name, expected, cp", infeasible_instances(),
                         ids=[i[0] for i in infeasible_instances()])
def test_infeasibility_detected(name, expected, cp):
    assert solve(cp).status is expected


def _clarabel_min(cp: CompiledProgram):
    clarabel = pytest.importorskip("clarabel")
    n = cp.c.size
    P = sp.csc_matrix((n, n))
    Amat = sp.csc_matrix(np.vstack([cp.A, cp.G]))
    bvec = np.concatenate([cp.b, cp.h])
    cones = []
    if cp.A.shape[0]:
        cones.append(clarabel.ZeroConeT(cp.A.shape[0]))
    if cp.l:
        cones.append(clarabel.NonnegativeConeT(cp.l))
    cones += [clarabel.SecondOrderConeT(d) for d in cp.soc_dims]
    settings = clarabel.DefaultSettings()
    settings.verbose = False
    res = clarabel.DefaultSolver(P, cp.c, Amat, bvec, cones, settings).solve()
    return str(res.status), res.obj_val


def _random_feasible(rng, n=6, l=3, dims=(3, 4)):
    # bounded by a ball of radius 5, with halfspaces and cones strictly feasible at x0
    x0 = rng.standard_normal(n) * 0.1
    G_l = rng.standard_normal((l, n))
    h_l = G_l @ x0 + rng.uniform(0.1, 1, l)
    blocks_G, blocks_h = [G_l], [h_l]
    blocks_G.append(np.vstack([np.zeros(n), -np.eye(n)]))
    blocks_h.append(np.r_[5.0, np.zeros(n)])
    for d in dims:
        M = rng.standard_normal((d - 1, n))
        blocks_G.append(np.vstack([rng.standard_normal(n) * 0.1, -M]))
        blocks_h.append(np.r_[3.0, np.zeros(d - 1)])
    G = np.vstack(blocks_G)
    h = np.concatenate(blocks_h)
    return CompiledProgram(c=rng.standard_normal(n), G=G, h=h, A=np.zeros((0, n)),
                           b=np.zeros(0), l=l, soc_dims=[n + 1] + list(dims), obj_const=0.0)


@pytest.mark.parametrize("seed", range(5))
def test_cross_check_with_reference_solver(seed):
    rng = np.random.default_rng(100 + seed)
    cp = _random_feasible(rng)
    status, ref = _clarabel_min(cp)
    assert status == "Solved"
    sol = solve(cp)
    assert sol.status is Status.OPTIMAL
    assert -sol.objective == pytest.approx(ref, abs=1e-6 * (1 + abs(ref)))


def test_deterministic():
    cp, _, _ = planted_socp(np.random.default_rng(3))
    a, b = solve(cp), solve(cp)
    assert a.iterations == b.iterations
    assert np.array_equal(a.x, b.x)


def test_verify_flags_only_the_perturbed_soc():
    p = ConeProgram()
    w = [p.complex_var() for _ in range(3)]
    t = p.var()
    for z in w:
        p.add_soc(t, [z.re, z.im])
    p.add_soc(1.0, [z.re for z in w] + [z.im for z in w])
    p.maximize(w[0].re + w[1].im - t)
    sol = solve(p)
    rep = verify(p, sol)
    assert rep.max_primal_violation <= 1e-8
    assert rep.dual_residual <= 1e-6 and abs(rep.gap) <= 1e-6
    # push the modulus of w[1] outside its cone by 1e-3
    x = sol.x.copy()
    val = sol.x[t.index]
    mod = np.hypot(x[w[1].re.index], x[w[1].im.index])
    scale = (val + 1e-3) / mod if mod > 0 else 0
    if mod > 0:
        x[w[1].re.index] *= scale
        x[w[1].im.index] *= scale
    else:
        x[w[1].re.index] = val + 1e-3
    sol.x = x
    rep = verify(p, sol)
    assert 1 in rep.violated_soc
    assert rep.soc_violation == pytest.approx(1e-3, rel=1e-6)


def test_verify_shape_mismatch():
    p = _one_var()
    sol = solve(p)
    sol.x = np.zeros(5)
    with pytest.raises(SolverError):
        verify(p, sol)


def _one_var():
    p = ConeProgram()
    x = p.var()
    p.add_nonneg(x)
    p.add_nonneg(2 - x)
    p.maximize(x)
    return p


@pytest.mark.parametrize("seed", range(5))
def test_weak_duality_on_feasible_iterates(seed):
    rng = np.random.default_rng(seed)
    cp, _, _ = planted_socp(rng)
    sol = solve(cp)
    for it in sol.history:
        if it.pres <= 1e-9 and it.dres <= 1e-9:
            assert it.pcost >= it.dcost - 1e-7 * (1 + abs(it.pcost))
    assert sol.history[-1].pcost == pytest.approx(sol.history[-1].dcost, abs=1e-6)


@pytest.mark.parametrize("factor", [1e-3, 1e3])
def test_scale_robustness(factor):
    cp, _, opt = planted_socp(np.random.default_rng(11))
    scaled = CompiledProgram(c=cp.c * factor, G=cp.G, h=cp.h, A=cp.A, b=cp.b, l=cp.l,
                             soc_dims=cp.soc_dims, obj_const=0.0)
    sol = solve(scaled)
    assert sol.status is Status.OPTIMAL
    assert -sol.objective == pytest.approx(opt * factor, rel=1e-6, abs=1e-9 * factor)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(tolerance=0)
    with pytest.raises(ValueError):
        SolverConfig(max_iterations=0)
    with pytest.raises(ValueError):
        SolverConfig(tolerance=1e-6, reduced_tolerance=1e-8)


def test_iteration_cap_reports_status():
    cp, _, _ = planted_socp(np.random.default_rng(2))
    sol = solve(cp, SolverConfig(max_iterations=2))
    assert sol.status in (Status.MAX_ITERATIONS, Status.ALMOST_OPTIMAL)
    assert sol.iterations <= 2


def test_bad_data_rejected():
    cp, _, _ = planted_socp(np.random.default_rng(2))
    cp.h[0] = np.nan
    with pytest.raises(SolverError):
        solve(cp)


def test_complex_quadratic_program():
    # max Re(a^H w) s.t. ||w|| <= 1 has optimum ||a||
    rng = np.random.default_rng(5)
    a = crandn(rng, 5)
    p = ConeProgram()
    w = [p.complex_var() for _ in range(5)]
    p.add_soc(1.0, [z.re for z in w] + [z.im for z in w])
    p.maximize(real_inner(a, w))
    assert solve(p).objective == pytest.approx(np.linalg.norm(a), abs=1e-7)
