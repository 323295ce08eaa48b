"""Primal-dual interior-point core for small dense max-slack SDP feasibility.

Solves, over a real symmetric PSD variable X, a free slack scalar t and
per-row slacks s:

    maximize   t
    subject to <A_i, X> + d_i t + s_i = b_i
               s_i >= 0 and d_i = 1 on inequality rows
               s_i  = 0 and d_i = 0 on equality rows
               X PSD

Rows are pre-scaled by the caller and split into diagonal rows (A_i diagonal,
stored as vectors, stacked first) and dense symmetric rows. The dual slack
matrix S = sum_i y_i A_i is kept positive definite by construction, so an
infeasibility certificate is simply a dual point with b'y / d'y below zero.

Everything in this module is written against the numpy subset that numba
compiles; :mod:`irsbeam.kernels` instantiates the same source twice, once
jitted and once plain, selected at runtime.

Status codes: 0 feasible-looking iterate found, 1 dual certificate of
infeasibility, 2 undecided at iteration cap, 3 numerical breakdown.
"""
import numpy as np

_TAU = 0.99          # step fraction toward the cone boundary
_SIGMA_MIN = 1e-6
_SIGMA_MAX = 0.9


def _chol_ok(A):
    """True when A admits a Cholesky factorization (is numerically PD)."""
    try:
        np.linalg.cholesky(A)
        return True
    except Exception:
        return False


def _pd_step_len(M, D, probes):
    """Largest alpha in [0, 1] keeping M + alpha D positive definite.

    M must be PD. The PD set along the ray is an interval containing 0, so
    bisection on Cholesky probes is exact up to grid resolution; every
    returned alpha was itself certified by a successful factorization. When
    the boundary sits below the bisection grid (direction norm far larger
    than the distance to the cone boundary) the search falls back to
    geometric shrinking so such steps still make progress.
    """
    if _chol_ok(M + D):
        return 1.0
    lo = 0.0
    hi = 1.0
    for _ in range(probes):
        mid = 0.5 * (lo + hi)
        if _chol_ok(M + mid * D):
            lo = mid
        else:
            hi = mid
    if lo > 0.0:
        return lo
    alpha = hi
    for _ in range(40):
        alpha *= 0.25
        if alpha < 1e-14:
            return 0.0
        if _chol_ok(M + alpha * D):
            return alpha
    return 0.0


def _pos_step_len(v, dv, active):
    """Largest alpha in [0, 1] keeping active entries of v + alpha dv >= 0."""
    alpha = 1.0
    for i in range(v.shape[0]):
        if active[i] and dv[i] < 0.0:
            cand = -v[i] / dv[i]
            if cand < alpha:
                alpha = cand
    return alpha


def _tstar(y, Ad, Aden, nr):
    """Adjoint map: S = sum_i y_i A_i."""
    nd = Ad.shape[0]
    kd = Aden.shape[0]
    S = np.zeros((nr, nr))
    diag = Ad.T @ y[:nd]
    for i in range(nr):
        S[i, i] = diag[i]
    for j in range(kd):
        S += y[nd + j] * Aden[j]
    return S


def _row_vals(Ad, Aden, Z):
    """<A_i, Z> for every row; Z need not be symmetric (uses Tr[A Z])."""
    nd = Ad.shape[0]
    kd = Aden.shape[0]
    out = np.empty(nd + kd)
    nr = Z.shape[0]
    dz = np.empty(nr)
    for i in range(nr):
        dz[i] = Z[i, i]
    out[:nd] = Ad @ dz
    for j in range(kd):
        out[nd + j] = np.sum(Aden[j] * Z.T)
    return out


def _sym(M):
    return 0.5 * (M + M.T)


def _solve_maxslack(Ad, Aden, b, iseq, tol, decide_tol, max_iter):
    """Run the interior-point iteration; see module docstring for the model.

    Returns ``(code, X, t, y, bound, iters, margin, eqres)`` where ``margin``
    is the smallest inequality slack of the returned X (ignoring t) and
    ``eqres`` the largest equality residual.
    """
    nd = Ad.shape[0]
    kd = Aden.shape[0]
    m = nd + kd
    nr = Ad.shape[1]

    d = np.empty(m)
    for i in range(m):
        d[i] = 0.0 if iseq[i] else 1.0
    p = d.sum()
    ineq = np.empty(m, dtype=np.bool_)
    for i in range(m):
        ineq[i] = not iseq[i]

    X = np.eye(nr)
    v = _row_vals(Ad, Aden, X)
    t = 1e30
    for i in range(m):
        if ineq[i] and b[i] - v[i] < t:
            t = b[i] - v[i]
    t -= 1.0
    s = np.zeros(m)
    for i in range(m):
        if ineq[i]:
            s[i] = b[i] - v[i] - t

    # dual start: unit weight everywhere, shrink dense-row weights until the
    # dual slack matrix is PD (the caller guarantees a PD-seed diagonal row)
    y = np.ones(m)
    ok = False
    for _ in range(60):
        S = _tstar(y, Ad, Aden, nr)
        if _chol_ok(S):
            ok = True
            break
        for j in range(kd):
            y[nd + j] *= 0.2
        for i in range(nd):
            if Ad[i].min() < 0.0:
                y[i] *= 0.2
    if not ok:
        return 3, X, t, y, np.inf, 0, -np.inf, np.inf

    mu0 = (np.sum(X * S) + float(s @ (y * d))) / (nr + p)
    best_bound = np.inf
    best_margin = -np.inf
    best_eqres = np.inf
    Xbest = X.copy()
    tbest = t
    stalls = 0
    it = 0

    for it in range(1, max_iter + 1):
        S = _tstar(y, Ad, Aden, nr)
        if not _chol_ok(S):
            return 3, Xbest, tbest, y, best_bound, it, best_margin, best_eqres
        Sinv = np.linalg.inv(S)
        Sinv = _sym(Sinv)

        v = _row_vals(Ad, Aden, X)
        margin = np.inf
        eqres = 0.0
        for i in range(m):
            if ineq[i]:
                if b[i] - v[i] < margin:
                    margin = b[i] - v[i]
            else:
                if abs(b[i] - v[i]) > eqres:
                    eqres = abs(b[i] - v[i])
        score = margin - 10.0 * eqres
        if score > best_margin - 10.0 * best_eqres:
            best_margin = margin
            best_eqres = eqres
            Xbest = X.copy()
            tbest = t
        if margin >= 4.0 * tol and eqres <= 0.25 * tol:
            return 0, X, t, y, best_bound, it, margin, eqres

        dty = float(d @ y)
        if dty > 1e-14:
            bnd = float(b @ y) / dty
            if bnd < best_bound:
                best_bound = bnd
            if bnd < -decide_tol:
                return 1, Xbest, tbest, y, bnd, it, best_margin, best_eqres

        rp = b - v - d * t - s
        rt = 1.0 - dty
        mu = (np.sum(X * S) + float(s @ (y * d))) / (nr + p)
        rpinf = float(np.max(np.abs(rp)))
        if mu <= 1e-2 * tol * max(1.0, mu0) and rpinf <= 0.5 * tol and abs(rt) <= 1e-7:
            if margin >= -tol and eqres <= tol:
                return 0, X, t, y, best_bound, it, margin, eqres
            if best_bound < -decide_tol:
                return 1, Xbest, tbest, y, best_bound, it, best_margin, best_eqres
            return 2, Xbest, tbest, y, best_bound, it, best_margin, best_eqres

        # Schur complement of the reduced KKT system
        W = X * Sinv
        G = np.zeros((m, m))
        G[:nd, :nd] = Ad @ W @ Ad.T
        for j in range(kd):
            U = X @ Aden[j] @ Sinv
            du = np.empty(nr)
            for i in range(nr):
                du[i] = U[i, i]
            cross = Ad @ du
            for i in range(nd):
                G[i, nd + j] = cross[i]
                G[nd + j, i] = cross[i]
            for i in range(kd):
                G[nd + i, nd + j] = np.sum(Aden[i] * U)
        G = _sym(G)
        for i in range(m):
            if ineq[i]:
                G[i, i] += s[i] / y[i]
            G[i, i] += 1e-13 * (1.0 + abs(G[i, i]))

        sv = _row_vals(Ad, Aden, Sinv)
        xs_prod = X @ S

        # predictor (affine direction, sigma = 0)
        q = np.empty(m)
        for i in range(m):
            q[i] = -v[i] - rp[i]
            if ineq[i]:
                q[i] += -s[i]  # kappa = (0 - s y)/y = -s
        rhs = np.empty((m, 2))
        rhs[:, 0] = q
        rhs[:, 1] = d
        sol = np.linalg.solve(G, rhs)
        gq = sol[:, 0]
        gd = sol[:, 1]
        denom = float(d @ gd)
        if abs(denom) < 1e-300:
            return 3, Xbest, tbest, y, best_bound, it, best_margin, best_eqres
        dt_a = (rt - float(d @ gq)) / denom
        dy_a = gq + gd * dt_a
        dS_a = _tstar(dy_a, Ad, Aden, nr)
        dX_a = _sym(-X - X @ dS_a @ Sinv)
        ds_a = np.zeros(m)
        for i in range(m):
            if ineq[i]:
                ds_a[i] = -s[i] - (s[i] / y[i]) * dy_a[i]

        ap = min(_pd_step_len(X, dX_a, 4), _pos_step_len(s, ds_a, ineq))
        ad = min(_pd_step_len(S, dS_a, 4), _pos_step_len(y, dy_a, ineq))
        ap = min(1.0, _TAU * ap)
        ad = min(1.0, _TAU * ad)
        mu_aff = (np.sum((X + ap * dX_a) * (S + ad * dS_a))
                  + float((s + ap * ds_a) @ ((y + ad * dy_a) * d))) / (nr + p)
        ratio = max(mu_aff, 0.0) / mu
        sigma = min(max(ratio * ratio * ratio, _SIGMA_MIN), _SIGMA_MAX)

        # corrector (combined direction with second-order terms); the cross
        # term stays raw, only the final direction gets symmetrized
        Ecorr = dX_a @ dS_a
        EcS = Ecorr @ Sinv
        ev = _row_vals(Ad, Aden, EcS)
        for i in range(m):
            q[i] = sigma * mu * sv[i] - v[i] - ev[i] - rp[i]
            if ineq[i]:
                q[i] += (sigma * mu - ds_a[i] * dy_a[i]) / y[i] - s[i]
        rhs[:, 0] = q
        sol = np.linalg.solve(G, rhs)
        gq = sol[:, 0]
        gd = sol[:, 1]
        denom = float(d @ gd)
        if abs(denom) < 1e-300:
            return 3, Xbest, tbest, y, best_bound, it, best_margin, best_eqres
        dt = (rt - float(d @ gq)) / denom
        dy = gq + gd * dt
        dS = _tstar(dy, Ad, Aden, nr)
        dX = _sym(sigma * mu * Sinv - X - EcS - X @ dS @ Sinv)
        ds = np.zeros(m)
        for i in range(m):
            if ineq[i]:
                ds[i] = (sigma * mu - s[i] * y[i] - ds_a[i] * dy_a[i]) / y[i] \
                        - (s[i] / y[i]) * dy[i]

        ap = min(_pd_step_len(X, dX, 7), _pos_step_len(s, ds, ineq))
        ad = min(_pd_step_len(S, dS, 7), _pos_step_len(y, dy, ineq))
        ap = min(1.0, _TAU * ap)
        ad = min(1.0, _TAU * ad)
        if ap < 1e-12 and ad < 1e-12:
            stalls += 1
            if stalls >= 5:
                break
        else:
            stalls = 0

        X = _sym(X + ap * dX)
        t += ap * dt
        for i in range(m):
            if ineq[i]:
                s[i] = max(s[i] + ap * ds[i], 1e-300)
        y = y + ad * dy

    if best_margin >= -tol and best_eqres <= tol:
        return 0, Xbest, tbest, y, best_bound, it, best_margin, best_eqres
    if best_bound < -decide_tol:
        return 1, Xbest, tbest, y, best_bound, it, best_margin, best_eqres
    return 2, Xbest, tbest, y, best_bound, it, best_margin, best_eqres
