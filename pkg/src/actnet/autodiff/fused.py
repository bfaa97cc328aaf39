"""Fused Taylor-jet kernel for the sinusoidal basis expansion.

Computes the jet of ``sin(omega[j] * x[..., i] + phase[j])`` laid out as
``(..., N, d)`` in one pass, and its adjoint by running the sine/cosine
Taylor recurrence backwards. Falls back to generic jet arithmetic when numba
is not importable; both routes agree to rounding.
"""

from __future__ import annotations

import numpy as np

from . import jet as J
from . import tape as T

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    njit = None


def _generic(x, omega, phase):
    n = np.shape(T.value_of(omega))[0]
    return J.sin(J.expand_dims(x, -2) * T.reshape(omega, (n, 1)) + T.reshape(phase, (n, 1)))


if njit is not None:

    # With a(t) = a0 + a1 t + ... and S = sin a0, C = cos a0 the Taylor
    # coefficients of sin(a(t)) are
    #   s1 = a1 C
    #   s2 = a2 C - a1^2/2 S
    #   s3 = a3 C - a1 a2 S - a1^3/6 C
    #   s4 = a4 C - (a1 a3 + a2^2/2) S - a1^2 a2/2 C + a1^4/24 S
    # The backward kernel differentiates these polynomials directly.

    @njit(cache=True)
    def _forward(x0, xh, omega, phase, s0, sh, C):
        K = sh.shape[0]
        D = xh.shape[1]
        P, d = x0.shape
        N = omega.shape[0]
        for p in range(P):
            for j in range(N):
                w = omega[j]
                ph = phase[j]
                for i in range(d):
                    a0 = w * x0[p, i] + ph
                    s0[p, j, i] = np.sin(a0)
                    C[p, j, i] = np.cos(a0)
                for dd in range(D):
                    if K == 1:
                        for i in range(d):
                            sh[0, dd, p, j, i] = w * xh[0, dd, p, i] * C[p, j, i]
                    elif K == 2:
                        for i in range(d):
                            S_ = s0[p, j, i]
                            C_ = C[p, j, i]
                            a1 = w * xh[0, dd, p, i]
                            a2 = w * xh[1, dd, p, i]
                            sh[0, dd, p, j, i] = a1 * C_
                            sh[1, dd, p, j, i] = a2 * C_ - 0.5 * a1 * a1 * S_
                    elif K >= 3:
                        for i in range(d):
                            S_ = s0[p, j, i]
                            C_ = C[p, j, i]
                            a1 = w * xh[0, dd, p, i]
                            a2 = w * xh[1, dd, p, i]
                            a3 = w * xh[2, dd, p, i]
                            sh[0, dd, p, j, i] = a1 * C_
                            sh[1, dd, p, j, i] = a2 * C_ - 0.5 * a1 * a1 * S_
                            sh[2, dd, p, j, i] = (a3 - a1 * a1 * a1 / 6.0) * C_ - a1 * a2 * S_
                            if K == 4:
                                a4 = w * xh[3, dd, p, i]
                                sh[3, dd, p, j, i] = ((a4 - 0.5 * a1 * a1 * a2) * C_
                                                      - (a1 * a3 + 0.5 * a2 * a2 - a1 ** 4 / 24.0) * S_)

    @njit(cache=True)
    def _backward(x0, xh, omega, S, C, gs0, has_g0, gsh, has_gh, gx0, gxh, gw, gp):
        K = xh.shape[0]
        D = xh.shape[1]
        P, d = x0.shape
        N = omega.shape[0]
        gS = np.empty(d)
        gC = np.empty(d)
        for p in range(P):
            for j in range(N):
                w = omega[j]
                gw_acc = 0.0
                for i in range(d):
                    gS[i] = gs0[p, j, i] if has_g0 else 0.0
                    gC[i] = 0.0
                for dd in range(D if K > 0 else 0):
                    for i in range(d):
                        S_ = S[p, j, i]
                        C_ = C[p, j, i]
                        a1 = w * xh[0, dd, p, i]
                        g1 = gsh[0][dd, p, j, i] if has_gh[0] else 0.0
                        ga1 = g1 * C_
                        gc = g1 * a1
                        gs = 0.0
                        ga2 = 0.0
                        ga3 = 0.0
                        ga4 = 0.0
                        if K >= 2 and has_gh[1]:
                            a2 = w * xh[1, dd, p, i]
                            g2 = gsh[1][dd, p, j, i]
                            ga1 -= g2 * a1 * S_
                            ga2 += g2 * C_
                            gs -= g2 * 0.5 * a1 * a1
                            gc += g2 * a2
                        if K >= 3 and has_gh[2]:
                            a2 = w * xh[1, dd, p, i]
                            a3 = w * xh[2, dd, p, i]
                            g3 = gsh[2][dd, p, j, i]
                            ga1 -= g3 * (a2 * S_ + 0.5 * a1 * a1 * C_)
                            ga2 -= g3 * a1 * S_
                            ga3 += g3 * C_
                            gs -= g3 * a1 * a2
                            gc += g3 * (a3 - a1 * a1 * a1 / 6.0)
                        if K >= 4 and has_gh[3]:
                            a2 = w * xh[1, dd, p, i]
                            a3 = w * xh[2, dd, p, i]
                            a4 = w * xh[3, dd, p, i]
                            g4 = gsh[3][dd, p, j, i]
                            ga1 += g4 * (a1 * a1 * a1 / 6.0 * S_ - a3 * S_ - a1 * a2 * C_)
                            ga2 -= g4 * (a2 * S_ + 0.5 * a1 * a1 * C_)
                            ga3 -= g4 * a1 * S_
                            ga4 += g4 * C_
                            gs += g4 * (a1 ** 4 / 24.0 - a1 * a3 - 0.5 * a2 * a2)
                            gc += g4 * (a4 - 0.5 * a1 * a1 * a2)
                        gS[i] += gs
                        gC[i] += gc
                        gxh[0, dd, p, i] += w * ga1
                        acc = xh[0, dd, p, i] * ga1
                        if K >= 2:
                            gxh[1, dd, p, i] += w * ga2
                            acc += xh[1, dd, p, i] * ga2
                        if K >= 3:
                            gxh[2, dd, p, i] += w * ga3
                            acc += xh[2, dd, p, i] * ga3
                        if K >= 4:
                            gxh[3, dd, p, i] += w * ga4
                            acc += xh[3, dd, p, i] * ga4
                        gw_acc += acc
                gp_acc = 0.0
                for i in range(d):
                    ga0 = C[p, j, i] * gS[i] - S[p, j, i] * gC[i]
                    gx0[p, i] += w * ga0
                    gw_acc += x0[p, i] * ga0
                    gp_acc += ga0
                gw[j] += gw_acc
                gp[j] += gp_acc


def sin_basis_expansion(x, omega, phase):
    """``sin(omega[j] * x[..., i] + phase[j])`` with layout ``(..., N, d)``.

    ``x`` may be an array, a tape variable or a jet; ``omega``/``phase`` may be
    arrays or tape variables.
    """
    if njit is None:
        return _generic(x, omega, phase)
    taylor = x.taylor if isinstance(x, J.Jet) else [x]
    K = len(taylor) - 1
    x0v = np.ascontiguousarray(T.value_of(taylor[0]), dtype=np.float64)
    lead = x0v.shape[:-1]
    d = x0v.shape[-1]
    P = int(np.prod(lead))
    w = np.ascontiguousarray(T.value_of(omega), dtype=np.float64)
    ph = np.ascontiguousarray(T.value_of(phase), dtype=np.float64)
    N = w.shape[0]

    shared = K > 0 and np.ndim(T.value_of(taylor[1])) == x0v.ndim + 1
    if K > 0:
        hv = [np.broadcast_to(T.value_of(c), (np.shape(T.value_of(taylor[1]))[0],) + x0v.shape) if shared
              else np.broadcast_to(T.value_of(c), x0v.shape)[None] for c in taylor[1:]]
        D = hv[0].shape[0]
        xh = np.ascontiguousarray(np.stack(hv).reshape(K, D, P, d))
    else:
        D = 1
        xh = np.zeros((0, 1, P, d))
    x0f = x0v.reshape(P, d)
    s0 = np.empty((P, N, d))
    sh = np.empty((K, D, P, N, d))
    C = np.empty((P, N, d))
    _forward(x0f, xh, w, ph, s0, sh, C)

    hi_shape = ((D,) if shared else ()) + lead + (N, d)
    values = [s0.reshape(lead + (N, d))] + [sh[k].reshape(hi_shape) for k in range(K)]

    inputs = list(taylor) + [omega, phase]
    parents = [v for v in inputs if isinstance(v, T.Var)]
    if not parents:
        return J.Jet(values) if isinstance(x, J.Jet) else values[0]
    tape = T._tape_of(*parents)

    def vjp_multi(slots):
        g0 = slots[0]
        has_g0 = g0 is not None
        g0 = np.ascontiguousarray(g0, dtype=np.float64).reshape(P, N, d) if has_g0 else np.zeros((1, 1, 1))
        has_gh = np.zeros(4, dtype=np.bool_)
        gh = []
        for k in range(K):
            g = slots[k + 1]
            if g is None:
                gh.append(np.zeros((1, 1, 1, 1)))
            else:
                has_gh[k] = True
                gh.append(np.ascontiguousarray(g, dtype=np.float64).reshape(D, P, N, d))
        while len(gh) < 4:
            gh.append(np.zeros((1, 1, 1, 1)))
        gx0 = np.zeros((P, d))
        gxh = np.zeros((K, D, P, d))
        gw = np.zeros(N)
        gp = np.zeros(N)
        _backward(x0f, xh, w, s0, C, g0, has_g0, tuple(gh), has_gh, gx0, gxh, gw, gp)
        by_input = [gx0.reshape(x0v.shape)]
        for k in range(K):
            gk = gxh[k].reshape((D,) + x0v.shape) if shared else gxh[k].reshape(x0v.shape)
            by_input.append(T._unbroadcast(gk, np.shape(T.value_of(taylor[k + 1]))))
        by_input += [gw, gp]
        return [g for v, g in zip(inputs, by_input) if isinstance(v, T.Var)]

    outs = tape.push_multi(values, parents, vjp_multi)
    return J.Jet(outs) if isinstance(x, J.Jet) else outs[0]
