"""Primal-dual interior-point solver for convex QPs with linear constraints.

Problems are stated in maximisation form::

    maximise    0.5 x'Qx + c'x + offset
    subject to  a_i'x <= b_i   (sense "<=")
                a_i'x  = b_i   (sense "=")
                0 <= x <= u

with ``Q`` symmetric negative semidefinite. Duals follow the maximisation
convention: ``grad f(x) = A' y + r`` where ``y >= 0`` on ``<=`` rows, ``y`` is
free on ``=`` rows and ``r`` are the reduced costs (``r <= 0`` for variables at
their lower bound, ``r >= 0`` at their upper bound).

Internally the problem is negated to a minimisation and solved with a
Mehrotra predictor-corrector method on the reduced, quasi-definite KKT
system, which is factorised with SuperLU.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

logger = logging.getLogger(__name__)

LE = "<="
EQ = "="


class Status(str, enum.Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    UNBOUNDED = "UNBOUNDED"
    NOT_CONVERGED = "NOT_CONVERGED"


@dataclass
class ConvexQP:
    """A concave maximisation problem with linear constraints.

    ``Q`` may be ``None`` for a linear program. ``upper`` defaults to +inf for
    every variable. Rows with sense ``<=`` and an infinite right-hand side are
    kept but never bind.
    """

    c: np.ndarray
    A: sp.spmatrix
    senses: np.ndarray
    rhs: np.ndarray
    Q: sp.spmatrix | None = None
    upper: np.ndarray | None = None
    offset: float = 0.0
    row_labels: list[str] | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        n = self.c.size
        self.A = sp.csr_matrix(self.A, dtype=float)
        if self.A.shape[1] != n:
            raise ValueError(f"A has {self.A.shape[1]} columns, expected {n}")
        m = self.A.shape[0]
        self.senses = np.asarray(self.senses, dtype=object)
        self.rhs = np.asarray(self.rhs, dtype=float)
        if self.senses.shape != (m,) or self.rhs.shape != (m,):
            raise ValueError("senses and rhs must have one entry per row")
        bad = [s for s in set(self.senses.tolist()) if s not in (LE, EQ)]
        if bad:
            raise ValueError(f"unsupported row senses: {bad}")
        if np.any(np.isinf(self.rhs[self.senses == EQ])):
            raise ValueError("equality rows need a finite right-hand side")
        if self.Q is None:
            self.Q = sp.csr_matrix((n, n))
        else:
            self.Q = sp.csr_matrix(self.Q, dtype=float)
        if self.Q.shape != (n, n):
            raise ValueError(f"Q must be {n}x{n}")
        if abs(self.Q - self.Q.T).max() > 1e-12 * (1.0 + abs(self.Q).max()) if self.Q.nnz else False:
            raise ValueError("Q must be symmetric")
        if np.any(self.Q.diagonal() > 0):
            raise ValueError("Q must be negative semidefinite (positive diagonal found)")
        if self.upper is None:
            self.upper = np.full(n, np.inf)
        else:
            self.upper = np.asarray(self.upper, dtype=float)
            if self.upper.shape != (n,):
                raise ValueError("upper must have one entry per variable")
            if np.any(self.upper < 0):
                raise ValueError("upper bounds must be nonnegative")
        if self.row_labels is not None and len(self.row_labels) != m:
            raise ValueError("row_labels must have one entry per row")

    @property
    def n(self) -> int:
        return self.c.size

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def objective(self, x: np.ndarray) -> float:
        return float(0.5 * x @ (self.Q @ x) + self.c @ x + self.offset)


@dataclass
class SolveOptions:
    tolerance: float = 1e-8
    max_iterations: int = 200
    scaling: bool = True
    ruiz_iterations: int = 15


@dataclass
class SolveResult:
    status: Status
    x: np.ndarray
    duals: np.ndarray
    reduced_costs: np.ndarray
    objective: float
    dual_objective: float
    primal_residual: float
    dual_residual: float
    complementarity: float
    iterations: int
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


@dataclass
class KKTReport:
    """Residuals recomputed from a candidate primal-dual point."""

    primal_residual: float
    dual_residual: float
    complementarity: float
    duality_gap: float
    flagged_rows: list[int] = field(default_factory=list)
    flagged_variables: list[int] = field(default_factory=list)

    def max_residual(self) -> float:
        return max(self.primal_residual, self.dual_residual, self.complementarity)

    def passes(self, tolerance: float) -> bool:
        return self.max_residual() <= tolerance


def _inf_norm(v: np.ndarray) -> float:
    return float(np.max(np.abs(v))) if v.size else 0.0


def verify_kkt(qp: ConvexQP, result: SolveResult, flag_tolerance: float = 1e-8) -> KKTReport:
    """Recompute feasibility, stationarity and complementarity from scratch.

    All three residuals are relative, in the same units the solver reports.
    Rows whose slack and dual are both material (``slack * dual`` above
    ``flag_tolerance`` relative to the objective) are listed in
    ``flagged_rows``; likewise for bound complementarity in
    ``flagged_variables``.
    """
    x = np.asarray(result.x, dtype=float)
    y = np.asarray(result.duals, dtype=float)
    r = np.asarray(result.reduced_costs, dtype=float)
    A = qp.A.tocsr()
    Ax = A @ x
    le = qp.senses == LE
    eq = ~le
    finite = np.isfinite(qp.rhs)
    ub = np.isfinite(qp.upper)

    b_scale = 1.0 + max(_inf_norm(qp.rhs[finite]), _inf_norm(qp.upper[ub]))
    viol = np.zeros(qp.m)
    viol[eq] = np.abs(Ax[eq] - qp.rhs[eq])
    sel = le & finite
    viol[sel] = np.maximum(Ax[sel] - qp.rhs[sel], 0.0)
    bound_viol = np.maximum(-x, 0.0)
    bound_viol[ub] = np.maximum(bound_viol[ub], x[ub] - qp.upper[ub])
    primal = max(_inf_norm(viol), _inf_norm(bound_viol)) / b_scale

    grad = qp.Q @ x + qp.c
    stat = grad - A.T @ y - r
    # sign conditions: y >= 0 on <= rows, y = 0 on rows that can never bind,
    # r <= 0 on variables without an upper bound
    sign = np.concatenate([
        np.maximum(-y[le], 0.0),
        np.abs(y[le & ~finite]),
        np.maximum(r[~ub], 0.0),
    ])
    dual = max(_inf_norm(stat), _inf_norm(sign)) / (1.0 + _inf_norm(qp.c))

    obj = qp.objective(x)
    obj_scale = 1.0 + abs(obj)
    slack = np.where(sel, qp.rhs - Ax, 0.0)
    row_comp = np.abs(np.where(sel, y * slack, 0.0))
    lower_dual = np.maximum(-r, 0.0)
    upper_dual = np.maximum(r, 0.0)
    var_comp = np.abs(lower_dual * x)
    var_comp[ub] += np.abs(upper_dual[ub] * (qp.upper[ub] - x[ub]))
    comp = (row_comp.sum() + var_comp.sum()) / obj_scale

    dual_obj = (
        float(qp.rhs[finite] @ y[finite])
        + float(qp.upper[ub] @ upper_dual[ub])
        - 0.5 * float(x @ (qp.Q @ x))
        + qp.offset
    )
    gap = abs(dual_obj - obj) / obj_scale
    flagged_rows = np.flatnonzero(row_comp / obj_scale > flag_tolerance).tolist()
    flagged_vars = np.flatnonzero(var_comp / obj_scale > flag_tolerance).tolist()
    return KKTReport(primal, dual, comp, gap, flagged_rows, flagged_vars)


class _Problem:
    """Minimisation data after presolve: min 0.5x'Px + c'x, Ax=b, Gx<=h, 0<=x<=u."""

    def __init__(self, qp: ConvexQP):
        n = qp.n
        le = qp.senses == LE
        finite = np.isfinite(qp.rhs)
        A_all = qp.A.tocsc().copy()
        A_all.eliminate_zeros()
        keep = qp.upper > 0
        active = ~le | finite
        # pinned variables leave rounding-level residue in right-hand sides
        feas_tol = 1e-9 * (1.0 + (np.abs(qp.rhs[finite]).max() if np.any(finite) else 0.0))
        # a row "a x_j <= 0" with a > 0 pins x_j at its lower bound; such
        # columns are removed (repeatedly, since removals create new singletons)
        while True:
            A = A_all[:, np.flatnonzero(keep)].tocsr()
            row_nnz = np.diff(A.indptr)
            single = np.flatnonzero(active & le & (row_nnz == 1) & (qp.rhs <= feas_tol))
            if single.size == 0:
                break
            sub = A[single].tocoo()
            pinned = sub.data > 0
            if not np.any(pinned):
                break
            cols = np.flatnonzero(keep)[sub.col[pinned]]
            if np.any(qp.rhs[single[sub.row[pinned]]] < -feas_tol):
                break
            keep[cols] = False
        self.keep_cols = np.flatnonzero(keep)
        self.P = (-qp.Q).tocsc()[self.keep_cols][:, self.keep_cols].tocsc()
        self.c = -qp.c[self.keep_cols]
        self.u = qp.upper[self.keep_cols]
        self.trivially_infeasible = False
        empty = row_nnz == 0
        if (np.any(empty & ~le & (np.abs(qp.rhs) > feas_tol))
                or np.any(empty & le & finite & (qp.rhs < -feas_tol))):
            self.trivially_infeasible = True
        self.eq_rows = np.flatnonzero(~le & ~empty)
        self.le_rows = np.flatnonzero(le & finite & ~empty)
        self.A = A[self.eq_rows].tocsr()
        self.b = qp.rhs[self.eq_rows].copy()
        self.G = A[self.le_rows].tocsr()
        self.h = qp.rhs[self.le_rows].copy()
        self.n_full = n
        self.m_full = qp.m


def _ruiz(P, A, G, iterations):
    n = P.shape[0]
    d = np.ones(n)
    ea = np.ones(A.shape[0])
    eg = np.ones(G.shape[0])
    Ps, As, Gs = P.copy(), A.copy(), G.copy()

    def col_max(M):
        if M.shape[0] == 0 or M.nnz == 0:
            return np.zeros(M.shape[1])
        return np.asarray(abs(M).max(axis=0).todense()).ravel()

    def row_max(M):
        if M.shape[0] == 0:
            return np.zeros(0)
        if M.nnz == 0:
            return np.zeros(M.shape[0])
        return np.asarray(abs(M).max(axis=1).todense()).ravel()

    for _ in range(iterations):
        cn = np.maximum.reduce([col_max(Ps), col_max(As), col_max(Gs)])
        cn[cn < 1e-8] = 1.0
        ra = row_max(As)
        ra[ra < 1e-8] = 1.0
        rg = row_max(Gs)
        rg[rg < 1e-8] = 1.0
        dc = 1.0 / np.sqrt(cn)
        da = 1.0 / np.sqrt(ra)
        dg = 1.0 / np.sqrt(rg)
        Dc = sp.diags(dc)
        Ps = (Dc @ Ps @ Dc).tocsc()
        As = (sp.diags(da) @ As @ Dc).tocsr()
        Gs = (sp.diags(dg) @ Gs @ Dc).tocsr()
        d *= dc
        ea *= da
        eg *= dg
    return d, ea, eg


class _KKTSystem:
    """Reduced KKT matrix with a fixed sparsity pattern and updatable diagonal."""

    def __init__(self, P, A, G):
        n, me, mi = P.shape[0], A.shape[0], G.shape[0]
        self.n, self.me, self.mi = n, me, mi
        N = n + me + mi
        Pl = sp.csc_matrix(P)
        K = sp.bmat(
            [[Pl, A.T, G.T], [A, None, None], [G, None, None]],
            format="csc",
            dtype=float,
        )
        if K.shape != (N, N):
            K = sp.csc_matrix(K, shape=(N, N))
        marker = sp.identity(N, format="csc") * 1.0
        # fix diagonal positions in the pattern with explicit entries
        pattern = (abs(K) + marker).tocsc()
        pattern.sort_indices()
        K = K.tocsc()
        K.sort_indices()
        self.indices = pattern.indices
        self.indptr = pattern.indptr
        base = np.zeros(pattern.nnz)
        # scatter K's values into the pattern
        Kc = sp.csc_matrix((K.data, K.indices, K.indptr), shape=(N, N))
        Kc.sum_duplicates()
        for j in range(N):
            start, end = pattern.indptr[j], pattern.indptr[j + 1]
            rows = pattern.indices[start:end]
            ks, ke = Kc.indptr[j], Kc.indptr[j + 1]
            if ke > ks:
                loc = np.searchsorted(rows, Kc.indices[ks:ke])
                base[start + loc] = Kc.data[ks:ke]
        self.base = base
        diag_pos = np.empty(N, dtype=np.int64)
        for j in range(N):
            start, end = pattern.indptr[j], pattern.indptr[j + 1]
            diag_pos[j] = start + np.searchsorted(pattern.indices[start:end], j)
        self.diag_pos = diag_pos
        self.N = N

    def matrix(self, diag: np.ndarray) -> sp.csc_matrix:
        data = self.base.copy()
        data[self.diag_pos] += diag
        return sp.csc_matrix((data, self.indices, self.indptr), shape=(self.N, self.N))


def solve(qp: ConvexQP, options: SolveOptions | None = None, **kwargs) -> SolveResult:
    """Solve ``qp`` to primal-dual optimality.

    Keyword arguments override fields of ``options``.
    """
    opts = options or SolveOptions()
    if kwargs:
        opts = SolveOptions(**{**opts.__dict__, **kwargs})
    prob = _Problem(qp)
    n_full = qp.n
    if prob.trivially_infeasible:
        return _empty_result(qp, Status.INFEASIBLE, "constant row violated")

    P, A, G = prob.P, prob.A, prob.G
    c, b, h, u = prob.c, prob.b, prob.h, prob.u
    n = c.size
    if opts.scaling and n > 0:
        d, ea, eg = _ruiz(P, A, G, opts.ruiz_iterations)
    else:
        d, ea, eg = np.ones(n), np.ones(A.shape[0]), np.ones(G.shape[0])
    D = sp.diags(d)
    Ps = (D @ P @ D).tocsc()
    As = (sp.diags(ea) @ A @ D).tocsr()
    Gs = (sp.diags(eg) @ G @ D).tocsr()
    cs_raw = d * c
    bs = ea * b
    hs = eg * h
    us = u / d
    p_norm = np.abs(Ps).max() if Ps.nnz else 0.0
    cost_scale = 1.0 / max(_inf_norm(cs_raw), p_norm, 1e-8) if opts.scaling else 1.0
    cost_scale = float(np.clip(cost_scale, 1e-10, 1e10))
    Ps = Ps * cost_scale
    cs = cs_raw * cost_scale

    ub_idx = np.flatnonzero(np.isfinite(us))
    me, mi, nu = As.shape[0], Gs.shape[0], ub_idx.size

    kkt = _KKTSystem(Ps, As, Gs)
    AsT = As.T.tocsr()
    GsT = Gs.T.tocsr()

    # unscaled reporting helpers
    def unscale(x, y, z, zx, v):
        xo = d * x
        yo = ea * y / cost_scale
        zo = eg * z / cost_scale
        zxo = zx / d / cost_scale
        vo = np.zeros(n)
        vo[ub_idx] = v / d[ub_idx] / cost_scale
        return xo, yo, zo, zxo, vo

    b_norm = 1.0 + max(_inf_norm(b), _inf_norm(h), _inf_norm(u[np.isfinite(u)]))
    c_norm = 1.0 + _inf_norm(c)

    def measures(x, s, y, z, zx, t, v):
        xo, yo, zo, zxo, vo = unscale(x, y, z, zx, v)
        rp = max(
            _inf_norm(A @ xo - b),
            _inf_norm(np.maximum(G @ xo - h, 0.0)),
            _inf_norm(np.maximum(xo[ub_idx] - u[ub_idx], 0.0)) if nu else 0.0,
            _inf_norm(np.maximum(-xo, 0.0)),
        ) / b_norm
        rd = _inf_norm(P @ xo + c + A.T @ yo + G.T @ zo - zxo + vo) / c_norm
        pobj = 0.5 * xo @ (P @ xo) + c @ xo
        dobj = -0.5 * xo @ (P @ xo) - b @ yo - h @ zo - u[ub_idx] @ vo[ub_idx]
        slack_g = h - G @ xo
        comp = (
            float(np.abs(zo * slack_g).sum())
            + float(np.abs(zxo * xo).sum())
            + (float(np.abs(vo[ub_idx] * (u[ub_idx] - xo[ub_idx])).sum()) if nu else 0.0)
        ) / (1.0 + abs(pobj))
        gap = abs(pobj - dobj) / (1.0 + abs(pobj))
        return rp, rd, max(comp, gap), pobj, dobj

    # starting point
    x = np.ones(n)
    if nu:
        x[ub_idx] = np.minimum(1.0, 0.5 * us[ub_idx])
    t = us[ub_idx] - x[ub_idx]
    s = np.maximum(hs - Gs @ x, 1.0)
    y = np.zeros(me)
    z = np.ones(mi)
    zx = np.ones(n)
    v = np.ones(nu)

    n_comp = n + mi + nu
    reg_p, reg_d = 1e-9, 1e-9
    status = Status.NOT_CONVERGED
    message = ""
    it = 0
    best = None
    for it in range(1, opts.max_iterations + 1):
        rp_u, rd_u, cg_u, pobj, dobj = measures(x, s, y, z, zx, t, v)
        score = max(rp_u, rd_u, cg_u)
        logger.debug("iter %3d  rp %.2e  rd %.2e  gap %.2e  obj %.10e", it, rp_u, rd_u, cg_u, pobj)
        if best is None or score < best[0]:
            best = (score, x.copy(), s.copy(), y.copy(), z.copy(), zx.copy(), t.copy(), v.copy())
        if rp_u <= opts.tolerance and rd_u <= opts.tolerance and cg_u <= opts.tolerance:
            status = Status.OPTIMAL
            break
        cert = _certificate(Ps, As, Gs, cs, bs, hs, us, ub_idx, x, y, z, zx, v)
        if cert is not None:
            status = cert
            message = "infeasibility certificate" if cert is Status.INFEASIBLE else "unbounded ray"
            break

        mu = (s @ z + x @ zx + t @ v) / max(n_comp, 1)
        r_d = Ps @ x + cs + AsT @ y + GsT @ z - zx
        if nu:
            r_d[ub_idx] += v
        r_p = As @ x - bs
        r_g = Gs @ x + s - hs
        r_u = x[ub_idx] + t - us[ub_idx]

        hdiag = zx / x
        if nu:
            hdiag[ub_idx] += v / t
        w = s / z
        diag = np.concatenate([hdiag + reg_p, -reg_d * np.ones(me), -w])
        K = kkt.matrix(diag)
        try:
            lu = spla.splu(K, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                           options={"SymmetricMode": True})
        except RuntimeError:
            diag = np.concatenate([hdiag + 1e-6, -1e-6 * np.ones(me), -w - 1e-6])
            K = kkt.matrix(diag)
            try:
                lu = spla.splu(K, permc_spec="MMD_AT_PLUS_A")
            except RuntimeError:
                message = "singular KKT system"
                break
        Ktrue = kkt.matrix(np.concatenate([hdiag, np.zeros(me), -w]))

        def newton(r_xz, r_sz, r_tv):
            rhs1 = -r_d - r_xz / x
            if nu:
                rhs1[ub_idx] += (r_tv - v * r_u) / t
            rhs = np.concatenate([rhs1, -r_p, -r_g + r_sz / z])
            sol = lu.solve(rhs)
            for _ in range(3):
                res = rhs - Ktrue @ sol
                if _inf_norm(res) <= 1e-14 * (1.0 + _inf_norm(rhs)):
                    break
                sol = sol + lu.solve(res)
            dx = sol[:n]
            dy = sol[n:n + me]
            dz = sol[n + me:]
            ds = -(r_sz + s * dz) / z
            dzx = -(r_xz + zx * dx) / x
            if nu:
                dt = -r_u - dx[ub_idx]
                dv = -(r_tv + v * dt) / t
            else:
                dt = np.zeros(0)
                dv = np.zeros(0)
            return dx, ds, dy, dz, dzx, dt, dv

        # predictor
        aff = newton(x * zx, s * z, t * v)
        dx, ds, dy, dz, dzx, dt, dv = aff
        alpha_aff = min(_max_step(x, dx), _max_step(s, ds), _max_step(t, dt),
                        _max_step(zx, dzx), _max_step(z, dz), _max_step(v, dv))
        mu_aff = ((s + alpha_aff * ds) @ (z + alpha_aff * dz)
                  + (x + alpha_aff * dx) @ (zx + alpha_aff * dzx)
                  + (t + alpha_aff * dt) @ (v + alpha_aff * dv)) / max(n_comp, 1)
        sigma = (mu_aff / mu) ** 3 if mu > 0 else 0.0
        sigma = min(max(sigma, 0.0), 1.0)
        # corrector
        dx, ds, dy, dz, dzx, dt, dv = newton(
            x * zx + aff[0] * aff[4] - sigma * mu,
            s * z + aff[1] * aff[3] - sigma * mu,
            t * v + aff[5] * aff[6] - sigma * mu,
        )
        alpha = min(_max_step(x, dx), _max_step(s, ds), _max_step(t, dt),
                    _max_step(zx, dzx), _max_step(z, dz), _max_step(v, dv))
        eta = max(0.95, 1.0 - 10.0 * mu) if mu < 1 else 0.95
        eta = min(eta, 0.9995)
        step = min(1.0, eta * alpha)
        x = x + step * dx
        s = s + step * ds
        y = y + step * dy
        z = z + step * dz
        zx = zx + step * dzx
        t = t + step * dt
        v = v + step * dv
        floor = 1e-300
        x = np.maximum(x, floor)
        s = np.maximum(s, floor)
        z = np.maximum(z, floor)
        zx = np.maximum(zx, floor)
        if nu:
            t = np.maximum(t, floor)
            v = np.maximum(v, floor)
    else:
        it = opts.max_iterations

    if status is Status.NOT_CONVERGED and best is not None:
        _, x, s, y, z, zx, t, v = best
    rp_u, rd_u, cg_u, pobj, dobj = measures(x, s, y, z, zx, t, v)
    xo, yo, zo, zxo, vo = unscale(x, y, z, zx, v)

    x_full = np.zeros(n_full)
    x_full[prob.keep_cols] = xo
    duals = np.zeros(qp.m)
    duals[prob.eq_rows] = yo
    duals[prob.le_rows] = zo
    # reduced costs of the maximisation form: grad f - A' y
    grad = qp.Q @ x_full + qp.c
    rc = grad - qp.A.T @ duals
    rc_kept = vo - zxo
    rc[prob.keep_cols] = rc_kept
    return SolveResult(
        status=status,
        x=x_full,
        duals=duals,
        reduced_costs=rc,
        objective=-pobj + qp.offset if status is not Status.INFEASIBLE else float("nan"),
        dual_objective=-dobj + qp.offset,
        primal_residual=rp_u,
        dual_residual=rd_u,
        complementarity=cg_u,
        iterations=it,
        message=message,
    )


def _max_step(val: np.ndarray, delta: np.ndarray) -> float:
    neg = delta < 0
    if not np.any(neg):
        return 1.0
    return float(min(1.0, np.min(-val[neg] / delta[neg])))


def _certificate(P, A, G, c, b, h, u, ub_idx, x, y, z, zx, v):
    """Detect diverging iterates that certify infeasibility or unboundedness."""
    dual_norm = max(_inf_norm(y), _inf_norm(z), _inf_norm(zx), _inf_norm(v))
    if dual_norm > 1e8:
        ny, nz, nzx = y / dual_norm, z / dual_norm, zx / dual_norm
        nv = v / dual_norm
        ray = A.T @ ny + G.T @ nz - nzx
        if ub_idx.size:
            ray[ub_idx] += nv
        bound = b @ ny + h @ nz + (u[ub_idx] @ nv if ub_idx.size else 0.0)
        if _inf_norm(ray) < 1e-6 and bound < -1e-6:
            return Status.INFEASIBLE
    x_norm = _inf_norm(x)
    if x_norm > 1e8:
        dx = x / x_norm
        if (_inf_norm(P @ dx) < 1e-6 and c @ dx < -1e-6
                and _inf_norm(A @ dx) < 1e-6
                and (G.shape[0] == 0 or np.max(G @ dx) < 1e-6)):
            return Status.UNBOUNDED
    return None


def _empty_result(qp: ConvexQP, status: Status, message: str) -> SolveResult:
    nan = float("nan")
    return SolveResult(status, np.zeros(qp.n), np.zeros(qp.m), np.zeros(qp.n),
                       nan, nan, nan, nan, nan, 0, message)


def dump_qp(qp: ConvexQP, path: str | Path) -> None:
    """Write ``qp`` as plain text for cross-checking with external solvers.

    Layout: a ``MAXIMIZE n m`` header, an ``OFFSET`` line, then one record per
    line: ``C j value``, ``Q i j value`` (upper triangle, i <= j),
    ``A i j value``, ``ROW i sense rhs`` and ``UB j value`` for finite upper
    bounds. Indices are zero-based; floats use ``repr`` so they round-trip.
    """
    lines = [f"MAXIMIZE {qp.n} {qp.m}", f"OFFSET {qp.offset!r}"]
    for j, val in enumerate(qp.c):
        if val != 0.0:
            lines.append(f"C {j} {float(val)!r}")
    Qu = sp.triu(qp.Q).tocoo()
    for i, j, val in zip(Qu.row, Qu.col, Qu.data):
        lines.append(f"Q {i} {j} {float(val)!r}")
    Ac = qp.A.tocoo()
    for i, j, val in zip(Ac.row, Ac.col, Ac.data):
        lines.append(f"A {i} {j} {float(val)!r}")
    for i, (sense, rhs) in enumerate(zip(qp.senses, qp.rhs)):
        lines.append(f"ROW {i} {sense} {float(rhs)!r}")
    for j, val in enumerate(qp.upper):
        if np.isfinite(val):
            lines.append(f"UB {j} {float(val)!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_qp(path: str | Path) -> ConvexQP:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    head = text[0].split()
    if head[0] != "MAXIMIZE":
        raise ValueError("not a ConvexQP dump")
    n, m = int(head[1]), int(head[2])
    offset = 0.0
    c = np.zeros(n)
    qi, qj, qv, ai, aj, av = [], [], [], [], [], []
    senses = np.array([LE] * m, dtype=object)
    rhs = np.zeros(m)
    upper = np.full(n, np.inf)
    for line in text[1:]:
        parts = line.split()
        if not parts:
            continue
        kind = parts[0]
        if kind == "OFFSET":
            offset = float(parts[1])
        elif kind == "C":
            c[int(parts[1])] = float(parts[2])
        elif kind == "Q":
            i, j, val = int(parts[1]), int(parts[2]), float(parts[3])
            qi.append(i); qj.append(j); qv.append(val)
            if i != j:
                qi.append(j); qj.append(i); qv.append(val)
        elif kind == "A":
            ai.append(int(parts[1])); aj.append(int(parts[2])); av.append(float(parts[3]))
        elif kind == "ROW":
            senses[int(parts[1])] = parts[2]
            rhs[int(parts[1])] = float(parts[3])
        elif kind == "UB":
            upper[int(parts[1])] = float(parts[2])
        else:
            raise ValueError(f"unknown record {kind!r}")
    Q = sp.csr_matrix((qv, (qi, qj)), shape=(n, n))
    A = sp.csr_matrix((av, (ai, aj)), shape=(m, n))
    return ConvexQP(c=c, A=A, senses=senses, rhs=rhs, Q=Q, upper=upper, offset=offset)
