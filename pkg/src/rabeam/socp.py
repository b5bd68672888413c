"""Dense primal-dual interior-point solver for :class:`~rabeam.cone.ConeProgram`.

Homogeneous self-dual embedding, Nesterov-Todd scaling, Mehrotra
predictor-corrector. The problems this package generates have tens to a
few hundred variables, so everything is dense ``numpy``; SOC blocks of
equal dimension are processed together to keep interpreter overhead low.

Standard form (after :meth:`ConeProgram.compile`)::

    minimize  c.x   s.t.  A x = b,  G x + s = h,  s in K
    maximize -b.y - h.z  s.t.  A'y + G'z + c = 0,  z in K
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, lu_factor, lu_solve

from .cone import CompiledProgram, ConeProgram

# relative KKT residual above which the augmented factorization is tried
AUGMENTED_SWITCH = 1e-10
# up to this many cone rows W and W^{-1} are formed densely; the blockwise form costs
# many small numpy calls, which dominate at these sizes
DENSE_SCALING_MAX = 600


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    PRIMAL_INFEASIBLE = "primal_infeasible"
    DUAL_INFEASIBLE = "dual_infeasible"
    MAX_ITERATIONS = "max_iterations"
    NUMERICAL_FAILURE = "numerical_failure"
    # progress stopped short of ``tolerance``; best iterate meets ``reduced_tolerance``
    ALMOST_OPTIMAL = "almost_optimal"


class SolverError(ValueError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-8
    max_iterations: int = 100
    reg_floor: float = 1e-12
    reduced_tolerance: float = 1e-6
    stall_iterations: int = 5  # stop after this many steps without a better iterate

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.reduced_tolerance < self.tolerance:
            raise ValueError("reduced_tolerance must be >= tolerance")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class IterStats:
    pcost: float
    dcost: float
    pres: float
    dres: float
    gap: float


@dataclass
class Solution:
    status: Status
    x: np.ndarray
    objective: float
    iterations: int
    primal_residual: float
    dual_residual: float
    gap_residual: float
    # multipliers, laid out like the program: nonneg, then SOC blocks, then equalities
    z: np.ndarray = field(repr=False, default=None)
    y: np.ndarray = field(repr=False, default=None)
    history: list[IterStats] = field(repr=False, default_factory=list)

    def __getitem__(self, var) -> float:
        return float(self.x[var.index])

    def value(self, expr) -> float:
        from .cone import aff
        return aff(expr).value(self.x)


# ---------------------------------------------------------------------------
# cone arithmetic


class _Cones:
    """Nonnegative orthant of size l followed by SOC blocks sorted by dimension.

    Equal-dimension blocks are contiguous, so each group is a reshape view.
    """

    def __init__(self, l: int, dims: list[int]):
        if list(dims) != sorted(dims):
            raise ValueError("SOC dimensions must be sorted")
        self.l = l
        self.m = l + sum(dims)
        self.degree = l + len(dims)
        self.groups = []  # (start, stop, count, dim)
        off = l
        for d, run in itertools.groupby(dims):
            k = len(list(run))
            self.groups.append((off, off + k * d, k, d))
            off += k * d
        self.e = np.zeros(self.m)
        self.e[:l] = 1.0
        for E in self.blocks(self.e):
            E[:, 0] = 1.0

    def blocks(self, u: np.ndarray):
        for a, b, k, d in self.groups:
            yield u[a:b].reshape((k, d) + u.shape[1:])

    def min_eig(self, u: np.ndarray) -> float:
        vals = [u[:self.l].min()] if self.l else []
        for U in self.blocks(u):
            vals.append(np.min(U[:, 0] - np.linalg.norm(U[:, 1:], axis=1)))
        return float(min(vals))

    def jprod(self, u, v):
        out = np.empty(self.m)
        out[:self.l] = u[:self.l] * v[:self.l]
        for U, V, O in zip(self.blocks(u), self.blocks(v), self.blocks(out)):
            O[:, 0] = np.sum(U * V, axis=1)
            O[:, 1:] = U[:, :1] * V[:, 1:] + V[:, :1] * U[:, 1:]
        return out

    def jdiv(self, lam, d):
        """x with lam o x = d."""
        out = np.empty(self.m)
        out[:self.l] = d[:self.l] / lam[:self.l]
        for L, D, O in zip(self.blocks(lam), self.blocks(d), self.blocks(out)):
            l0, l1 = L[:, 0], L[:, 1:]
            det = l0 * l0 - np.sum(l1 * l1, axis=1)
            x0 = (l0 * D[:, 0] - np.sum(l1 * D[:, 1:], axis=1)) / det
            O[:, 0] = x0
            O[:, 1:] = (D[:, 1:] - l1 * x0[:, None]) / l0[:, None]
        return out

    def max_step(self, u, du) -> float:
        """Largest alpha with u + alpha du in K (u interior)."""
        best = math.inf
        if self.l:
            dl = du[:self.l]
            neg = dl < 0
            if np.any(neg):
                best = float(np.min(-u[:self.l][neg] / dl[neg]))
        for U, D in zip(self.blocks(u), self.blocks(du)):
            a = D[:, 0] ** 2 - np.sum(D[:, 1:] ** 2, axis=1)
            b = U[:, 0] * D[:, 0] - np.sum(U[:, 1:] * D[:, 1:], axis=1)
            c = np.maximum(U[:, 0] ** 2 - np.sum(U[:, 1:] ** 2, axis=1), 0.0)
            disc = b * b - a * c
            ok = disc >= 0
            den = -b + np.sqrt(np.where(ok, disc, 0.0))
            hit = ok & (den > 0)
            if np.any(hit):
                best = min(best, float(np.min(c[hit] / den[hit])))
        return best


class _Scaling:
    """Nesterov-Todd scaling W (symmetric) with W z = W^{-1} s = lam."""

    def __init__(self, cones: _Cones, s: np.ndarray, z: np.ndarray):
        self.cones = cones
        l = cones.l
        self.d = np.sqrt(s[:l] / z[:l])
        self.parts = []
        for S, Z in zip(cones.blocks(s), cones.blocks(z)):
            sJs = S[:, 0] ** 2 - np.sum(S[:, 1:] ** 2, axis=1)
            zJz = Z[:, 0] ** 2 - np.sum(Z[:, 1:] ** 2, axis=1)
            if np.any(sJs <= 0) or np.any(zJz <= 0):
                raise FloatingPointError("iterate left the cone interior")
            sn = S / np.sqrt(sJs)[:, None]
            zn = Z / np.sqrt(zJz)[:, None]
            gam = np.sqrt(0.5 * (1.0 + np.sum(sn * zn, axis=1)))
            wb = sn.copy()
            wb[:, 0] += zn[:, 0]
            wb[:, 1:] -= zn[:, 1:]
            wb /= (2.0 * gam)[:, None]
            eta = (sJs / zJz) ** 0.25
            self.parts.append((wb[:, 0], wb[:, 1:], 1.0 / (1.0 + wb[:, 0]), eta))
        self.dense = None
        if cones.m <= DENSE_SCALING_MAX:
            eye = np.eye(cones.m)
            self.dense = (self._apply(eye, False), self._apply(eye, True))
        self.lam = self.apply(z)

    def _apply(self, u, inverse: bool):
        vec = u.ndim == 1
        U = u[:, None] if vec else u
        out = np.empty_like(U)
        l = self.cones.l
        out[:l] = U[:l] / self.d[:, None] if inverse else U[:l] * self.d[:, None]
        sign = -1.0 if inverse else 1.0
        for B, O, (w0, w1, inv1w0, eta) in zip(self.cones.blocks(U), self.cones.blocks(out),
                                                self.parts):
            u0, u1 = B[:, 0, :], B[:, 1:, :]
            wu = np.einsum("kd,kdr->kr", w1, u1)
            scale = (1.0 / eta if inverse else eta)[:, None]
            O[:, 0, :] = scale * (w0[:, None] * u0 + sign * wu)
            coef = wu * inv1w0[:, None] + sign * u0
            O[:, 1:, :] = scale[:, :, None] * (u1 + w1[:, :, None] * coef[:, None, :])
        return out[:, 0] if vec else out

    def apply(self, u):
        return self.dense[0] @ u if self.dense is not None else self._apply(u, False)

    def inv(self, u):
        return self.dense[1] @ u if self.dense is not None else self._apply(u, True)


class _KKT:
    """Solves [0 A' G'; A 0 0; G 0 -W^2] (dx, dy, dz) = (bx, by, bz)."""

    def __init__(self, G, A, W: _Scaling, reg_floor: float, refine: int = 3):
        self.G, self.A, self.W = G, A, W
        self.refine = refine
        n = G.shape[1]
        self._lu = None
        self.Gs = W.inv(G)
        # H = Gs' Gs + reg I is factored as R'R from a QR of [Gs; sqrt(reg) I],
        # which avoids squaring the condition number of Gs
        reg = reg_floor * max(1.0, float(np.sum(self.Gs * self.Gs)) / max(n, 1))
        for _ in range(6):
            try:
                R = np.linalg.qr(np.vstack([self.Gs, np.sqrt(reg) * np.eye(n)]), mode="r")
                if not np.all(np.isfinite(R)) or np.min(np.abs(np.diag(R))) == 0:
                    raise LinAlgError("singular factor")
                self.Lh = (R, False)
                self.reg = reg
                if A.shape[0]:
                    self.HiAt = cho_solve(self.Lh, A.T, check_finite=False)
                    S = A @ self.HiAt
                    sreg = reg_floor * max(1.0, float(np.trace(S)) / A.shape[0])
                    self.Ls = cho_factor(S + sreg * np.eye(A.shape[0]), check_finite=False)
                break
            except LinAlgError:
                reg *= 1e4
        else:
            raise FloatingPointError("KKT factorization failed")

    def _solve_once(self, bx, by, bz):
        W, A = self.W, self.A
        Wbz = W.inv(bz)
        r = bx + self.Gs.T @ Wbz
        if A.shape[0]:
            dy = cho_solve(self.Ls, A @ cho_solve(self.Lh, r, check_finite=False) - by,
                           check_finite=False)
            dx = cho_solve(self.Lh, r - A.T @ dy, check_finite=False)
        else:
            dy = np.zeros(0)
            dx = cho_solve(self.Lh, r, check_finite=False)
        dz = W.inv(self.Gs @ dx - Wbz)
        return dx, dy, dz

    def _solve_augmented(self, bx, by, bz):
        """Same system through the quasidefinite form in ``u = W dz``.

        Its condition number grows like that of W^{-1} G instead of its
        square, which matters once the scaling is extreme near convergence.
        """
        n, p = self.G.shape[1], self.A.shape[0]
        if self._lu is None:
            m = self.Gs.shape[0]
            K = np.zeros((n + p + m, n + p + m))
            K[:n, :n] = self.reg * np.eye(n)
            K[:n, n:n + p] = self.A.T
            K[:n, n + p:] = self.Gs.T
            K[n:n + p, :n] = self.A
            K[n:n + p, n:n + p] = -self.reg * np.eye(p)
            K[n + p:, :n] = self.Gs
            K[n + p:, n + p:] = -np.eye(m)
            self._lu = lu_factor(K, check_finite=False)
        sol = lu_solve(self._lu, np.concatenate([bx, by, self.W.inv(bz)]), check_finite=False)
        return sol[:n], sol[n:n + p], self.W.inv(sol[n + p:])

    def _refined(self, once, bx, by, bz):
        G, A, W = self.G, self.A, self.W
        dx, dy, dz = once(bx, by, bz)
        for k in range(self.refine + 1):
            ex = bx - A.T @ dy - G.T @ dz
            ey = by - A @ dx
            ez = bz - G @ dx + W.apply(W.apply(dz))
            err = max(np.abs(ex).max(initial=0), np.abs(ey).max(initial=0),
                      np.abs(ez).max(initial=0))
            size = max(np.abs(bx).max(initial=0), np.abs(by).max(initial=0),
                       np.abs(bz).max(initial=0))
            if err <= 1e-15 * (1.0 + size) or k == self.refine:
                break
            cx, cy, cz = once(ex, ey, ez)
            dx, dy, dz = dx + cx, dy + cy, dz + cz
        return (dx, dy, dz), err / (1.0 + size)

    def solve(self, bx, by, bz):
        d, err = self._refined(self._solve_once, bx, by, bz)
        if err > AUGMENTED_SWITCH:
            d2, err2 = self._refined(self._solve_augmented, bx, by, bz)
            if err2 < err:
                d = d2
        return d


class _Identity:
    """Scaling stand-in with W = I, used for the starting point."""

    def __init__(self, cones):
        self.cones = cones

    def apply(self, u):
        return u

    inv = apply


# ---------------------------------------------------------------------------


def _check_data(cp: CompiledProgram):
    for name in ("c", "G", "h", "A", "b"):
        arr = getattr(cp, name)
        if not np.all(np.isfinite(arr)):
            raise SolverError(f"non-finite entries in {name}")
    if cp.c.size == 0:
        raise SolverError("program has no variables")


def _norm(v) -> float:
    return float(np.linalg.norm(v)) if v.size else 0.0


def solve(prog: ConeProgram | CompiledProgram, cfg: SolverConfig | None = None) -> Solution:
    """Solve a cone program; ``Solution.objective`` is in the maximization sense."""
    cfg = cfg or SolverConfig()
    cp = prog.compile() if isinstance(prog, ConeProgram) else prog
    _check_data(cp)
    cp, perm = _group_blocks(cp)
    # breakdowns near the cone boundary surface as non-finite values and are handled below
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        sol = _solve(cp, cfg)
    if perm is not None and sol.z is not None and sol.z.size:
        z = np.empty_like(sol.z)
        z[perm] = sol.z
        sol.z = z
    return sol


def _group_blocks(cp: CompiledProgram):
    """Reorder SOC rows so equal-dimension blocks are adjacent (stable)."""
    dims = list(cp.soc_dims)
    order = sorted(range(len(dims)), key=lambda i: dims[i])
    if order == list(range(len(dims))):
        return cp, None
    starts = cp.l + np.concatenate([[0], np.cumsum(dims)[:-1]]).astype(int)
    perm = np.concatenate([np.arange(cp.l)] + [starts[i] + np.arange(dims[i]) for i in order])
    return replace(cp, G=cp.G[perm], h=cp.h[perm], soc_dims=[dims[i] for i in order]), perm


def _solve(cp: CompiledProgram, cfg: SolverConfig) -> Solution:
    c, G, h, A, b = cp.c, cp.G, cp.h, cp.A, cp.b
    n, m, p = c.size, h.size, b.size
    cones = _Cones(cp.l, cp.soc_dims)
    tol = cfg.tolerance
    nb, nh, nc = _norm(b), _norm(h), _norm(c)

    def result(status, x, y, z, s, tau, it, pres, dres, gap, hist):
        xs = x / tau if status in (Status.OPTIMAL, Status.ALMOST_OPTIMAL, Status.MAX_ITERATIONS,
                                   Status.NUMERICAL_FAILURE) else x
        obj = -float(c @ xs) + cp.obj_const
        zz = z / tau if status != Status.PRIMAL_INFEASIBLE else z
        yy = y / tau if status != Status.PRIMAL_INFEASIBLE else y
        return Solution(status, xs, obj, it, pres, dres, gap, zz, -yy, hist)

    if m == 0:
        # only equalities: bounded iff c lies in the row space of A
        x, *_ = np.linalg.lstsq(A, b, rcond=None) if p else (np.zeros(n),)
        y, *_ = np.linalg.lstsq(A.T, -c, rcond=None) if p else (np.zeros(0),)
        dres = _norm(A.T @ y + c) / (1 + nc)
        status = Status.OPTIMAL if dres <= tol else Status.DUAL_INFEASIBLE
        pres = _norm(A @ x - b) / (1 + nb) if p else 0.0
        if pres > tol:
            status = Status.PRIMAL_INFEASIBLE
        return result(status, x, y, np.zeros(0), np.zeros(0), 1.0, 0, pres, dres, 0.0, [])

    try:
        kkt0 = _KKT(G, A, _Identity(cones), cfg.reg_floor)
    except FloatingPointError:
        x = np.zeros(n)
        return result(Status.NUMERICAL_FAILURE, x, np.zeros(p), np.zeros(m), np.zeros(m),
                      1.0, 0, math.inf, math.inf, math.inf, [])
    x, y, zt = kkt0.solve(np.zeros(n), b, h)
    s = -zt
    _, _, z = kkt0.solve(-c, np.zeros(p), np.zeros(m))
    for v in (s, z):
        shift = -cones.min_eig(v)
        if shift >= 0:
            v += (1.0 + shift) * cones.e
    tau = kappa = 1.0

    hist: list[IterStats] = []
    pres = dres = gap_res = math.inf
    best = None

    def fallback(status):
        """Best iterate seen, labelled by how close it came."""
        if best is None:
            return result(status, x, y, z, s, tau, it, pres, dres, gap_res, hist)
        bx, by, bz, bs, btau, _, bp, bd, bg = best
        if max(bp, bd, bg) <= cfg.reduced_tolerance:
            status = Status.ALMOST_OPTIMAL
        return result(status, bx, by, bz, bs, btau, it, bp, bd, bg, hist)

    for it in range(cfg.max_iterations + 1):
        rx = A.T @ y + G.T @ z + c * tau
        ry = A @ x - b * tau
        rz = s + G @ x - h * tau
        rt = kappa + c @ x + b @ y + h @ z

        pcost = float(c @ x) / tau
        dcost = -float(b @ y + h @ z) / tau
        # each residual is relative to the largest term it balances
        Gx, Aty, Gtz = G @ x, A.T @ y, G.T @ z
        pres = max(_norm(ry) / (tau + max(nb * tau, _norm(A @ x))),
                   _norm(rz) / (tau + max(nh * tau, _norm(Gx), _norm(s))))
        dres = _norm(rx) / (tau + max(nc * tau, _norm(Gtz), _norm(Aty)))
        gap = float(s @ z) / tau ** 2
        gap_res = max(gap, abs(pcost - dcost)) / (1.0 + min(abs(pcost), abs(dcost)))
        hist.append(IterStats(pcost, dcost, pres, dres, gap))
        if pres <= tol and dres <= tol and gap_res <= tol:
            return result(Status.OPTIMAL, x, y, z, s, tau, it, pres, dres, gap_res, hist)
        merit = max(pres, dres, gap_res)
        if math.isfinite(merit) and (best is None or merit < max(best[6:])):
            best = (x.copy(), y.copy(), z.copy(), s.copy(), tau, it, pres, dres, gap_res)
        elif (best is not None and it - best[5] >= cfg.stall_iterations
              and max(best[6:]) <= cfg.reduced_tolerance):
            return fallback(Status.NUMERICAL_FAILURE)

        hzby = float(h @ z + b @ y)
        if hzby < 0 and _norm(A.T @ y + G.T @ z) / -hzby <= tol:
            return result(Status.PRIMAL_INFEASIBLE, x, y, z, s, tau, it, pres, dres,
                          gap_res, hist)
        cx = float(c @ x)
        if cx < 0 and max(_norm(A @ x), _norm(G @ x + s)) / -cx <= tol:
            return result(Status.DUAL_INFEASIBLE, x, y, z, s, tau, it, pres, dres,
                          gap_res, hist)
        if it == cfg.max_iterations:
            break

        try:
            W = _Scaling(cones, s, z)
            lam = W.lam
            kkt = _KKT(G, A, W, cfg.reg_floor)
            x1, y1, z1 = kkt.solve(-c, b, h)
            den = float(c @ x1 + b @ y1 + h @ z1) - kappa / tau

            def direction(sigma, d_s, d_k):
                bz = -(1 - sigma) * rz - W.apply(cones.jdiv(lam, d_s))
                x2, y2, z2 = kkt.solve(-(1 - sigma) * rx, -(1 - sigma) * ry, bz)
                rhs = -(1 - sigma) * rt - d_k / tau
                dtau = (rhs - float(c @ x2 + b @ y2 + h @ z2)) / den
                dx, dy, dz = x2 + dtau * x1, y2 + dtau * y1, z2 + dtau * z1
                ds = W.apply(cones.jdiv(lam, d_s) - W.apply(dz))
                dkap = (d_k - kappa * dtau) / tau
                return dx, dy, dz, ds, dtau, dkap

            def step(ds, dz, dtau, dkap):
                a = min(cones.max_step(s, ds), cones.max_step(z, dz))
                if dtau < 0:
                    a = min(a, -tau / dtau)
                if dkap < 0:
                    a = min(a, -kappa / dkap)
                return a

            aff = direction(0.0, -cones.jprod(lam, lam), -kappa * tau)
            a_aff = min(1.0, step(aff[3], aff[2], aff[4], aff[5]))
            sigma = (1.0 - a_aff) ** 3
            mu = (float(s @ z) + tau * kappa) / (cones.degree + 1)
            d_s = (-cones.jprod(lam, lam) - cones.jprod(W.inv(aff[3]), W.apply(aff[2]))
                   + sigma * mu * cones.e)
            d_k = -kappa * tau - aff[4] * aff[5] + sigma * mu
            dx, dy, dz, ds, dtau, dkap = direction(sigma, d_s, d_k)
            alpha = min(1.0, 0.99 * step(ds, dz, dtau, dkap))
            if not np.isfinite(alpha) or alpha < 1e-12:
                raise FloatingPointError("step length collapsed")
        except (FloatingPointError, LinAlgError, ZeroDivisionError):
            return fallback(Status.NUMERICAL_FAILURE)

        x = x + alpha * dx
        y = y + alpha * dy
        z = z + alpha * dz
        s = s + alpha * ds
        tau += alpha * dtau
        kappa += alpha * dkap
        if not (np.all(np.isfinite(x)) and np.isfinite(tau)):
            return fallback(Status.NUMERICAL_FAILURE)

    return fallback(Status.MAX_ITERATIONS)


# ---------------------------------------------------------------------------


@dataclass
class ResidualReport:
    objective: float
    eq_violation: float
    nonneg_violation: float
    soc_violation: float
    violated_eq: list[int]
    violated_nonneg: list[int]
    violated_soc: list[int]
    dual_residual: float | None = None
    dual_cone_violation: float | None = None
    gap: float | None = None

    @property
    def max_primal_violation(self) -> float:
        return max(self.eq_violation, self.nonneg_violation, self.soc_violation)


def verify(prog: ConeProgram, sol: Solution, tol: float = 1e-8) -> ResidualReport:
    """Recompute feasibility, objective and (if duals are present) the
    optimality gap straight from the program's constraint list."""
    x = np.asarray(sol.x, dtype=float)
    if x.shape != (prog.n,):
        raise SolverError(f"solution has {x.shape} values, program has {prog.n} variables")
    eq = [abs(e.value(x)) for e in prog.equalities]
    nn = [max(0.0, -e.value(x)) for e in prog.nonnegs]
    soc = []
    for t, u in prog.socs:
        soc.append(max(0.0, math.hypot(*[e.value(x) for e in u]) - t.value(x)))
    rep = ResidualReport(
        objective=prog.objective.value(x),
        eq_violation=max(eq, default=0.0),
        nonneg_violation=max(nn, default=0.0),
        soc_violation=max(soc, default=0.0),
        violated_eq=[i for i, v in enumerate(eq) if v > tol],
        violated_nonneg=[i for i, v in enumerate(nn) if v > tol],
        violated_soc=[i for i, v in enumerate(soc) if v > tol],
    )
    if sol.z is None or sol.y is None:
        return rep

    # Lagrangian: obj + sum mu e(x) + sum zeta.(t,u)(x) + sum nu a(x);
    # stationarity  grad obj + sum mu grad e + ... = 0, dual bound = constants.
    grad = np.zeros(prog.n)
    for i, a in prog.objective.coefs.items():
        grad[i] += a
    bound = prog.objective.const
    k = 0
    cone_viol = 0.0
    for e in prog.nonnegs:
        mu = sol.z[k]
        cone_viol = max(cone_viol, -mu)
        for i, a in e.coefs.items():
            grad[i] += mu * a
        bound += mu * e.const
        k += 1
    for t, u in prog.socs:
        zeta = sol.z[k:k + 1 + len(u)]
        cone_viol = max(cone_viol, float(np.linalg.norm(zeta[1:]) - zeta[0]))
        for coef, e in zip(zeta, [t] + list(u)):
            for i, a in e.coefs.items():
                grad[i] += coef * a
            bound += coef * e.const
        k += 1 + len(u)
    for nu, e in zip(sol.y, prog.equalities):
        for i, a in e.coefs.items():
            grad[i] += nu * a
        bound += nu * e.const
    rep.dual_residual = float(np.linalg.norm(grad))
    rep.dual_cone_violation = max(cone_viol, 0.0)
    rep.gap = float(bound - rep.objective)
    return rep
