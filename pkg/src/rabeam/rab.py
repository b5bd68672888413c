"""Worst-case SINR beamforming by sequential SOCP restriction.

The robust problem is

    maximize  ||Q w||_p - eta ||w||_q
    subject to  w^H (R_hat + gamma I) w <= 1        (quadratic)
           or   ||P w||_p1 + eta1 ||w||_q1 <= 1     (robust norm)

Around a reference point ``w_k`` the convex term ``||Q w||_p`` is bounded
below (Hölder) by ``Re(w_k^H Q^H Q w) / ||Q w_k||_p*`` with
``1/p + 1/p* = 1``. Maximizing with that linear minorant is an SOCP whose
feasible set lies inside the original one; iterating it gives the ascent
method implemented in :func:`solve_sequential`.
"""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Union

import numpy as np
from scipy.linalg import eigh

from .cone import CompiledProgram, ComplexVarRef, ConeProgram, VarId, aff, lq_epigraph, \
    quad_constraint, real_inner, complex_combination
from .linalg import ExtRational, as_hermitian, cholesky_psd, vec_norm
from .socp import Solution, SolverConfig, Status, solve
from .worst_case import UncertaintySpec

ASCENT_SLACK = 1e-9
# restriction answers are projected and re-scored exactly, so reduced accuracy is fine
USABLE = (Status.OPTIMAL, Status.ALMOST_OPTIMAL)


class RabError(ValueError):
    pass


class RestrictionInfeasible(RabError):
    """The restriction around a feasible iterate came back infeasible."""


@dataclass(frozen=True)
class QuadraticConstraint:
    pass


@dataclass(frozen=True)
class RobustNormConstraint:
    P: np.ndarray
    spec: UncertaintySpec


Constraint = Union[QuadraticConstraint, RobustNormConstraint]


@dataclass(eq=False)
class RabProblem:
    R_hat: np.ndarray
    Q: np.ndarray
    gamma: float
    objective: UncertaintySpec
    constraint: Constraint = field(default_factory=QuadraticConstraint)

    def __post_init__(self):
        self.R_hat = as_hermitian(self.R_hat)
        self.Q = np.atleast_2d(np.asarray(self.Q, dtype=complex))
        N = self.R_hat.shape[0]
        if self.Q.shape[1] != N:
            raise RabError(f"Q has {self.Q.shape[1]} columns, expected {N}")
        if not np.any(self.Q):
            raise RabError("Q is zero: no signal subspace")
        if not self.gamma > 0:
            raise RabError("gamma must be positive")
        if isinstance(self.constraint, RobustNormConstraint):
            if self.constraint.P.shape[1] != N:
                raise RabError("P has the wrong number of columns")

    @property
    def n(self) -> int:
        return self.R_hat.shape[0]

    @cached_property
    def loaded(self) -> np.ndarray:
        return self.R_hat + self.gamma * np.eye(self.n)

    @cached_property
    def chol(self) -> np.ndarray:
        return cholesky_psd(self.loaded)

    @property
    def dual_p(self) -> ExtRational:
        return self.objective.p.conjugate()

    def constraint_value(self, w) -> float:
        """Left-hand side of the constraint (``<= 1`` means feasible)."""
        w = np.asarray(w, dtype=complex)
        if isinstance(self.constraint, RobustNormConstraint):
            c = self.constraint
            return vec_norm(c.P @ w, c.spec.p) + c.spec.eta * vec_norm(w, c.spec.q)
        return float(np.real(np.vdot(w, self.loaded @ w)))

    def worst_case_denominator(self, w) -> float:
        """Worst-case interference-plus-noise power the constraint guards."""
        if isinstance(self.constraint, RobustNormConstraint):
            return self.constraint_value(w) ** 2
        return self.constraint_value(w)

    def project(self, w) -> np.ndarray:
        """Scale ``w`` down onto the feasible set if it is outside."""
        w = np.asarray(w, dtype=complex)
        c = self.constraint_value(w)
        if c <= 1.0:
            return w
        return w / (c if isinstance(self.constraint, RobustNormConstraint) else np.sqrt(c))

    @cached_property
    def _base(self) -> "_BaseRestriction":
        return _BaseRestriction(self)


def objective(problem: RabProblem, w) -> float:
    """``||Q w||_p - eta ||w||_q`` (not clamped)."""
    w = np.asarray(w, dtype=complex)
    spec = problem.objective
    return vec_norm(problem.Q @ w, spec.p) - spec.eta * vec_norm(w, spec.q)


def worst_case_sinr(problem: RabProblem, w) -> float:
    """Worst-case signal power ``max(objective, 0)^2`` under the normalization."""
    return max(objective(problem, w), 0.0) ** 2


def restriction_value(problem: RabProblem, w_ref, w) -> float:
    """Largest t with (w, t) feasible in the restriction built at ``w_ref``."""
    Q = problem.Q
    g = Q.conj().T @ (Q @ w_ref)
    lin = float(np.real(np.vdot(g, w))) / vec_norm(Q @ w_ref, problem.dual_p)
    return lin - problem.objective.eta * vec_norm(w, problem.objective.q)


def initial_point(problem: RabProblem) -> np.ndarray:
    """Principal generalized eigenvector of (Q^H Q, R_hat + gamma I), made active."""
    N = problem.n
    QhQ = as_hermitian(problem.Q.conj().T @ problem.Q, rtol=1e-10)
    _, V = eigh(QhQ, problem.loaded, subset_by_index=[N - 1, N - 1])
    v = V[:, 0]
    v = v / np.sqrt(np.real(np.vdot(v, problem.loaded @ v)))
    v = problem.project(v)
    if vec_norm(problem.Q @ v, problem.dual_p) == 0:
        raise RabError("initial point has Q w = 0")
    return v


class _BaseRestriction:
    """The part of the restriction SOCP that does not depend on ``w_ref``."""

    def __init__(self, problem: RabProblem):
        prog = ConeProgram()
        self.w = [prog.complex_var(f"w{n}") for n in range(problem.n)]
        self.t = prog.var("t")
        spec = problem.objective
        self.s = None
        if spec.eta > 0:
            self.s = prog.var("s")
            lq_epigraph(prog, self.w, self.s, spec.q)
        con = problem.constraint
        if isinstance(con, RobustNormConstraint):
            r = prog.var("r")
            lq_epigraph(prog, complex_combination(con.P, self.w), r, con.spec.p)
            bound = aff(r)
            if con.spec.eta > 0:
                s1 = prog.var("s1")
                lq_epigraph(prog, self.w, s1, con.spec.q)
                bound = bound + s1 * con.spec.eta
            prog.add_nonneg(1.0 - bound)
        else:
            quad_constraint(prog, self.w, problem.chol)
        prog.maximize(self.t)
        self.program = prog
        self.compiled = prog.compile()
        self.eta = spec.eta

    def row(self, problem: RabProblem, w_ref):
        """Linearized objective row ``Re(g^H w)/||Q w_ref||_p* - t - eta s >= 0``."""
        Q = problem.Q
        g = Q.conj().T @ (Q @ w_ref)
        scale = vec_norm(Q @ w_ref, problem.dual_p)
        if scale == 0:
            raise RabError("reference point has Q w = 0")
        e = real_inner(g / scale, self.w) - self.t
        if self.s is not None:
            e = e - self.s * self.eta
        return e


@dataclass
class Restriction:
    program: ConeProgram
    compiled: CompiledProgram
    w: list[ComplexVarRef]
    t: VarId

    def beam(self, sol: Solution) -> np.ndarray:
        return np.array([sol[z.re] + 1j * sol[z.im] for z in self.w])


def build_restriction(problem: RabProblem, w_ref) -> Restriction:
    base = problem._base
    row = base.row(problem, np.asarray(w_ref, dtype=complex))
    prog = base.program.copy()
    prog.add_nonneg(row)
    prog.freeze()
    bc = base.compiled
    grow = np.zeros(prog.n)
    for i, a in row.coefs.items():
        grow[i] = -a
    # nonneg rows come first in the compiled layout; append after the base ones
    G = np.vstack([bc.G[:bc.l], grow, bc.G[bc.l:]])
    h = np.concatenate([bc.h[:bc.l], [row.const], bc.h[bc.l:]])
    compiled = CompiledProgram(c=bc.c, G=G, h=h, A=bc.A, b=bc.b, l=bc.l + 1,
                               soc_dims=bc.soc_dims, obj_const=bc.obj_const)
    return Restriction(prog, compiled, base.w, base.t)


# ---------------------------------------------------------------------------


class StopReason(str, enum.Enum):
    ALPHA = "alpha"
    MAX_ITER = "max_iter"
    NON_ASCENT = "non_ascent"
    SOLVER_FAILURE = "solver_failure"


@dataclass(frozen=True)
class StoppingRule:
    alpha: float = 1e-6
    max_iter: int = 300

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class IterateRecord:
    k: int
    t: float
    solver_iterations: int
    wall_ms: float
    ratio: float  # ||Q w_k||_2 / ||Q w_k||_p*
    objective: float


@dataclass
class IterateTrace:
    records: list[IterateRecord] = field(default_factory=list)
    stop_reason: StopReason | None = None
    solver_status: Status | None = None

    @property
    def t(self) -> list[float]:
        return [r.t for r in self.records]

    @property
    def monotone(self) -> bool:
        t = self.t
        return all(b >= a - ASCENT_SLACK for a, b in zip(t, t[1:]))

    @property
    def solver_iterations(self) -> int:
        return sum(r.solver_iterations for r in self.records)


class SequentialResult(NamedTuple):
    w: np.ndarray
    t: float
    trace: IterateTrace


def _ratio(problem: RabProblem, w) -> float:
    Qw = problem.Q @ w
    return vec_norm(Qw, 2) / vec_norm(Qw, problem.dual_p)


def solve_sequential(problem: RabProblem, rule: StoppingRule | None = None,
                     cfg: SolverConfig | None = None, w0=None) -> SequentialResult:
    """Iterate restriction SOCPs until ``t_k - t_{k-1} <= alpha``.

    Each accepted t is the restriction objective evaluated exactly at the
    accepted (projected) point; if the solver's point scores below the
    reference point, the reference point is kept. With p = 2 this makes
    the t sequence nondecreasing by construction; with p != 2 a decrease
    is recorded and stops the loop with ``StopReason.NON_ASCENT``. The
    returned beam is the best iterate by true objective.
    """
    rule = rule or StoppingRule()
    cfg = cfg or SolverConfig()
    w = initial_point(problem) if w0 is None else problem.project(np.asarray(w0, complex))
    t = restriction_value(problem, w, w)
    trace = IterateTrace()
    obj = objective(problem, w)
    trace.records.append(IterateRecord(0, t, 0, 0.0, _ratio(problem, w), obj))
    best_w, best_obj = w, obj

    for k in range(1, rule.max_iter + 1):
        start = time.perf_counter()
        res = build_restriction(problem, w)
        sol = solve(res.compiled, cfg)
        wall = 1e3 * (time.perf_counter() - start)
        trace.solver_status = sol.status
        if sol.status is Status.PRIMAL_INFEASIBLE:
            raise RestrictionInfeasible(f"restriction {k} reported infeasible")
        if sol.status not in USABLE:
            trace.stop_reason = StopReason.SOLVER_FAILURE
            break
        w_new = problem.project(res.beam(sol))
        t_new = restriction_value(problem, w, w_new)
        t_ref = restriction_value(problem, w, w)
        if t_ref > t_new:
            w_new, t_new = w, t_ref
        obj = objective(problem, w_new)
        trace.records.append(IterateRecord(k, t_new, sol.iterations, wall,
                                           _ratio(problem, w_new), obj))
        if t_new < t - ASCENT_SLACK:
            # recorded so the trace shows the drop; the returned t stays the last ascent
            trace.stop_reason = StopReason.NON_ASCENT
            break
        if obj > best_obj:
            best_w, best_obj = w_new, obj
        converged = t_new - t <= rule.alpha
        w, t = w_new, t_new
        if converged:
            trace.stop_reason = StopReason.ALPHA
            break
    else:
        trace.stop_reason = StopReason.MAX_ITER
    return SequentialResult(best_w, t, trace)
