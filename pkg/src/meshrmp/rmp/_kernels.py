"""Compiled acceleration field and trapezoidal integrator.

Mirrors ``policies.py`` operation by operation: the two task-frame policies
are pulled back separately through the face Jacobian and combined in the
configuration frame.
"""

import numba as nb
import numpy as np

from ..mesh._kernels import query_closest

PINV_TOL = 1e-10
EDGE_TOL = 1e-12

CONVERGED = 0
ITERATION_LIMIT = 1
LEFT_DOMAIN = 2
NON_FINITE = 3


@nb.njit(cache=True, nogil=True)
def pinv_sym3(A, out):
    w, Q = np.linalg.eigh(A)
    for i in range(3):
        for j in range(3):
            s = 0.0
            for k in range(3):
                if w[k] > PINV_TOL:
                    s += Q[i, k] * Q[j, k] / w[k]
            out[i, j] = s


@nb.njit(cache=True, nogil=True, inline="always")
def _soft_scale(z0, z1, z2, gamma):
    nz = np.sqrt(z0 * z0 + z1 * z1 + z2 * z2)
    gz = gamma * nz
    # log(1 + exp(x)) without overflow
    if gz > 30.0:
        sp = gz + np.log1p(np.exp(-gz))
    else:
        sp = np.log1p(np.exp(gz))
    denom = nz + gamma * sp
    if denom == 0.0:
        return 0.0
    return 1.0 / denom


@nb.njit(cache=True, nogil=True)
def _pull(J, Ad, f, M, q, tmp):
    # M = J^T diag(Ad) J, q = M^+ J^T diag(Ad) f
    for i in range(3):
        for j in range(3):
            s = 0.0
            for k in range(3):
                s += J[k, i] * Ad[k] * J[k, j]
            M[i, j] = s
    for i in range(3):
        for j in range(i + 1, 3):
            s = 0.5 * (M[i, j] + M[j, i])
            M[i, j] = s
            M[j, i] = s
    r0 = r1 = r2 = 0.0
    for k in range(3):
        c = Ad[k] * f[k]
        r0 += J[k, 0] * c
        r1 += J[k, 1] * c
        r2 += J[k, 2] * c
    pinv_sym3(M, tmp)
    for i in range(3):
        q[i] = tmp[i, 0] * r0 + tmp[i, 1] * r1 + tmp[i, 2] * r2


@nb.njit(cache=True, nogil=True)
def field(node_lo, node_hi, left, right, start, count, order, V3, F, adj,
          V2, Jm, normals, bopp, params, x, vel, hint, out_a, out_A):
    """Acceleration at configuration state ``(x, vel)``.

    ``params`` holds ``[goal_u, goal_v, h_des, a_follow, b_follow, g_follow,
    a_perp, b_perp, g_perp]``. Writes the acceleration to ``out_a`` and the
    combined metric to ``out_A``; returns ``(face, u, v, h, lateral)`` where
    ``lateral`` is how far the point sits beyond the mesh boundary.
    """
    f, b1, b2, b3, d, _ = query_closest(node_lo, node_hi, left, right, start, count, order,
                                        V3, F, adj, x[0], x[1], x[2], hint)
    i, j, k = F[f, 0], F[f, 1], F[f, 2]
    c0 = b1 * V3[i, 0] + b2 * V3[j, 0] + b3 * V3[k, 0]
    c1 = b1 * V3[i, 1] + b2 * V3[j, 1] + b3 * V3[k, 1]
    c2 = b1 * V3[i, 2] + b2 * V3[j, 2] + b3 * V3[k, 2]
    d0, d1, d2 = x[0] - c0, x[1] - c1, x[2] - c2
    n0, n1, n2 = normals[f, 0], normals[f, 1], normals[f, 2]
    side = d0 * n0 + d1 * n1 + d2 * n2
    h = d if side >= 0.0 else -d
    u = b1 * V2[i, 0] + b2 * V2[j, 0] + b3 * V2[k, 0]
    v = b1 * V2[i, 1] + b2 * V2[j, 1] + b3 * V2[k, 1]
    lateral = 0.0
    if ((b1 <= EDGE_TOL and bopp[f, 0]) or (b2 <= EDGE_TOL and bopp[f, 1])
            or (b3 <= EDGE_TOL and bopp[f, 2])):
        l0, l1, l2 = d0 - side * n0, d1 - side * n1, d2 - side * n2
        lateral = np.sqrt(l0 * l0 + l1 * l1 + l2 * l2)

    J = Jm[f]
    pd = np.empty(3)
    for r in range(3):
        pd[r] = J[r, 0] * vel[0] + J[r, 1] * vel[1] + J[r, 2] * vel[2]

    # surface following: target (u_des, v_des, h)
    e0, e1 = params[0] - u, params[1] - v
    s = _soft_scale(e0, e1, 0.0, params[5])
    ff = np.empty(3)
    ff[0] = params[3] * s * e0 - params[4] * pd[0]
    ff[1] = params[3] * s * e1 - params[4] * pd[1]
    ff[2] = -params[4] * pd[2]
    # surface attractor: target (u, v, h_des)
    e2 = params[2] - h
    s = _soft_scale(0.0, 0.0, e2, params[8])
    fp = np.empty(3)
    fp[0] = -params[7] * pd[0]
    fp[1] = -params[7] * pd[1]
    fp[2] = params[6] * s * e2 - params[7] * pd[2]

    Af = np.array([1.0, 1.0, 0.0])
    Ap = np.array([0.0, 0.0, 1.0])
    M1 = np.empty((3, 3))
    M2 = np.empty((3, 3))
    q1 = np.empty(3)
    q2 = np.empty(3)
    tmp = np.empty((3, 3))
    _pull(J, Af, ff, M1, q1, tmp)
    _pull(J, Ap, fp, M2, q2, tmp)
    for r in range(3):
        for c in range(3):
            out_A[r, c] = M1[r, c] + M2[r, c]
    r0 = r1 = r2 = 0.0
    for c in range(3):
        r0 += M1[0, c] * q1[c] + M2[0, c] * q2[c]
        r1 += M1[1, c] * q1[c] + M2[1, c] * q2[c]
        r2 += M1[2, c] * q1[c] + M2[2, c] * q2[c]
    pinv_sym3(out_A, tmp)
    for r in range(3):
        out_a[r] = tmp[r, 0] * r0 + tmp[r, 1] * r1 + tmp[r, 2] * r2
    return f, u, v, h, lateral


@nb.njit(cache=True, nogil=True)
def integrate(node_lo, node_hi, left, right, start, count, order, V3, F, adj,
              V2, Jm, normals, bopp, params, x0, v0, goal3d, dt, max_steps,
              pos_tol, rest_speed, outside_margin, T, X, Vv, Acc, UVH, FACE):
    """Heun (trapezoidal predictor-corrector) integration of the field.

    Output arrays need ``max_steps + 1`` rows. Returns ``(n_samples, status)``.
    """
    A = np.empty((3, 3))
    a = np.empty(3)
    ap = np.empty(3)
    xp = np.empty(3)
    vp = np.empty(3)
    x = x0.copy()
    v = v0.copy()
    f, u, w, h, lat = field(node_lo, node_hi, left, right, start, count, order, V3, F, adj,
                            V2, Jm, normals, bopp, params, x, v, -1, a, A)
    T[0] = 0.0
    for c in range(3):
        X[0, c] = x[c]
        Vv[0, c] = v[c]
        Acc[0, c] = a[c]
    UVH[0, 0], UVH[0, 1], UVH[0, 2] = u, w, h
    FACE[0] = f
    if _at_goal(x, v, goal3d, pos_tol, rest_speed):
        return 1, CONVERGED
    for step in range(1, max_steps + 1):
        for c in range(3):
            xp[c] = x[c] + v[c] * dt
            vp[c] = v[c] + a[c] * dt
        fp_, _, _, _, _ = field(node_lo, node_hi, left, right, start, count, order, V3, F, adj,
                                V2, Jm, normals, bopp, params, xp, vp, f, ap, A)
        for c in range(3):
            vn = v[c] + 0.5 * (a[c] + ap[c]) * dt
            x[c] = x[c] + 0.5 * (v[c] + vn) * dt
            v[c] = vn
        finite = True
        for c in range(3):
            if not (np.isfinite(x[c]) and np.isfinite(v[c])):
                finite = False
        if not finite:
            T[step] = step * dt
            for c in range(3):
                X[step, c] = x[c]
                Vv[step, c] = v[c]
            return step + 1, NON_FINITE
        f, u, w, h, lat = field(node_lo, node_hi, left, right, start, count, order, V3, F, adj,
                                V2, Jm, normals, bopp, params, x, v, fp_, a, A)
        T[step] = step * dt
        for c in range(3):
            X[step, c] = x[c]
            Vv[step, c] = v[c]
            Acc[step, c] = a[c]
        UVH[step, 0], UVH[step, 1], UVH[step, 2] = u, w, h
        FACE[step] = f
        if lat > outside_margin:
            return step + 1, LEFT_DOMAIN
        if _at_goal(x, v, goal3d, pos_tol, rest_speed):
            return step + 1, CONVERGED
    return max_steps + 1, ITERATION_LIMIT


@nb.njit(cache=True, nogil=True, inline="always")
def _at_goal(x, v, g, pos_tol, rest_speed):
    dx = np.sqrt((x[0] - g[0]) ** 2 + (x[1] - g[1]) ** 2 + (x[2] - g[2]) ** 2)
    sp = np.sqrt(v[0] ** 2 + v[1] ** 2 + v[2] ** 2)
    return dx <= pos_tol and sp <= rest_speed
