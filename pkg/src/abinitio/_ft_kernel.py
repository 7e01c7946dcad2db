"""Compiled event loop for front tracking.

Fronts live in a doubly linked list stored in two arrays:

``F[i] = (x0, t0, speed, rho, u, p)``
    position ``x0`` at reference time ``t0``, constant speed and the
    primitive state on the right of the front;
``I[i] = (phase, kind, family, prev, next, alive)``.

The state left of a front is the right state of its predecessor, or the
left boundary state held in ``G``. Events (pairwise collisions and boundary
exits) sit in a binary heap keyed by ``(time, position)``, so ties resolve
left to right. Stale events are discarded lazily on pop.

Kernels never grow arrays. When space runs out they return ``FULL`` without
touching the configuration and the Python driver compacts or enlarges the
workspace and calls again.
"""
from __future__ import annotations

import heapq
import math

import numpy as np
from numba import njit

from .riemann import OK, energy_density, shock_mass_flux, sound, star_density, star_state

# float columns
X0, T0, SPD, RHO, VEL, PRS = 0, 1, 2, 3, 4, 5
# int columns
PH, KIND, FAM, PREV, NEXT, ALIVE = 0, 1, 2, 3, 4, 5
# float globals
G_LRHO, G_LU, G_LP, G_TNOW, G_XA, G_XB, G_TL, G_TR = 0, 1, 2, 3, 4, 5, 6, 7
# int globals
GI_HEAD, GI_TAIL, GI_NUSED, GI_LPH, GI_NCOLL, GI_NEXIT, GI_PROG = 0, 1, 2, 3, 4, 5, 6

SHOCK, CONTACT, FAN = 0, 1, 2

# kernel status codes (Riemann codes 1..3 are passed through)
DONE = 0
FULL = 10
SCRATCH = 11
CASCADE = 12

POS_TOL = 1e-13


@njit(cache=True)
def _norm_jump(r1, u1, P1, a1, r2, u2, P2, a2):
    """State-norm distance: max of relative jumps in rho, p + pi and u (scaled by sound speed)."""
    d = abs(r1 - r2) / max(r1, r2)
    d = max(d, abs(P1 - P2) / max(P1, P2))
    return max(d, abs(u1 - u2) / max(a1, a2))


@njit(cache=True)
def riemann_fronts(rl, ul, pl, phl, rr, ur, pr, phr, eos, delta, minstr, sf, si):
    """Discretize the Riemann solution into fronts.

    Fronts are written left to right into the scratch arrays ``sf[k] =
    (speed, rho, u, p)`` and ``si[k] = (phase, kind, family)``, each holding
    the state on its right.

    Returns
    -------
    (count, status)
    """
    gl, pil, bl = eos[phl, 0], eos[phl, 1], eos[phl, 2]
    gr, pir, br = eos[phr, 0], eos[phr, 1], eos[phr, 2]
    ps, us, st, _ = star_state(rl, ul, pl, gl, pil, bl, rr, ur, pr, gr, pir, br)
    if st != OK:
        return 0, st
    cap = sf.shape[0]
    n = 0
    rsl = star_density(ps, rl, pl, gl, pil, bl)
    rsr = star_density(ps, rr, pr, gr, pir, br)
    al = sound(rl, pl, gl, pil, bl)
    asl = sound(rsl, ps, gl, pil, bl)
    ar = sound(rr, pr, gr, pir, br)
    asr = sound(rsr, ps, gr, pir, br)

    # 1-wave
    s1 = _norm_jump(rl, ul, pl + pil, al, rsl, us, ps + pil, asl)
    if s1 > minstr:
        if ps > pl:
            if n >= cap:
                return 0, SCRATCH
            sf[n, 0] = ul - shock_mass_flux(ps, rl, pl, gl, pil, bl) / rl
            sf[n, 1] = rsl
            sf[n, 2] = us
            sf[n, 3] = ps
            si[n, 0] = phl
            si[n, 1] = SHOCK
            si[n, 2] = 1
            n += 1
        else:
            m = max(1, int(math.ceil(s1 / delta[phl])))
            if n + m > cap:
                return 0, SCRATCH
            PL = pl + pil
            wl = 1.0 / rl - bl
            cl = math.sqrt(gl * PL * wl)
            r_prev, u_prev, a_prev = rl, ul, al
            for j in range(1, m + 1):
                if j == m:
                    rj, uj, pj = rsl, us, ps
                else:
                    uj = ul + j * (us - ul) / m
                    cj = cl - 0.5 * (gl - 1.0) * (uj - ul)
                    Pj = PL * (cj / cl) ** (2.0 * gl / (gl - 1.0))
                    rj = 1.0 / (wl * (PL / Pj) ** (1.0 / gl) + bl)
                    pj = Pj - pil
                sf[n, 0] = u_prev - a_prev
                sf[n, 1] = rj
                sf[n, 2] = uj
                sf[n, 3] = pj
                si[n, 0] = phl
                si[n, 1] = FAN
                si[n, 2] = 1
                n += 1
                r_prev, u_prev, a_prev = rj, uj, sound(rj, pj, gl, pil, bl)

    # contact
    if phl != phr or abs(rsl - rsr) > minstr * max(rsl, rsr):
        if n >= cap:
            return 0, SCRATCH
        sf[n, 0] = us
        sf[n, 1] = rsr
        sf[n, 2] = us
        sf[n, 3] = ps
        si[n, 0] = phr
        si[n, 1] = CONTACT
        si[n, 2] = 2
        n += 1

    # 3-wave
    s3 = _norm_jump(rsr, us, ps + pir, asr, rr, ur, pr + pir, ar)
    if s3 > minstr:
        if ps > pr:
            if n >= cap:
                return 0, SCRATCH
            sf[n, 0] = ur + shock_mass_flux(ps, rr, pr, gr, pir, br) / rr
            sf[n, 1] = rr
            sf[n, 2] = ur
            sf[n, 3] = pr
            si[n, 0] = phr
            si[n, 1] = SHOCK
            si[n, 2] = 3
            n += 1
        else:
            m = max(1, int(math.ceil(s3 / delta[phr])))
            if n + m > cap:
                return 0, SCRATCH
            PR = pr + pir
            wr = 1.0 / rr - br
            cr = math.sqrt(gr * PR * wr)
            r_prev, u_prev, a_prev = rsr, us, asr
            for j in range(1, m + 1):
                if j == m:
                    rj, uj, pj = rr, ur, pr
                else:
                    uj = us + j * (ur - us) / m
                    cj = cr - 0.5 * (gr - 1.0) * (ur - uj)
                    Pj = PR * (cj / cr) ** (2.0 * gr / (gr - 1.0))
                    rj = 1.0 / (wr * (PR / Pj) ** (1.0 / gr) + br)
                    pj = Pj - pir
                sf[n, 0] = u_prev + a_prev
                sf[n, 1] = rj
                sf[n, 2] = uj
                sf[n, 3] = pj
                si[n, 0] = phr
                si[n, 1] = FAN
                si[n, 2] = 3
                n += 1
                r_prev, u_prev, a_prev = rj, uj, sound(rj, pj, gr, pir, br)

    # the outermost right state is reproduced exactly; weak dropped waves
    # leave their jump to the last emitted front
    if n > 0:
        sf[n - 1, 1] = rr
        sf[n - 1, 2] = ur
        sf[n - 1, 3] = pr
        si[n - 1, 0] = phr
    return n, OK


@njit(cache=True)
def _pos(F, i, t):
    return F[i, X0] + F[i, SPD] * (t - F[i, T0])


@njit(cache=True)
def _left_state(F, I, G, GI, i):
    j = I[i, PREV]
    if j < 0:
        return G[G_LRHO], G[G_LU], G[G_LP], GI[GI_LPH]
    return F[j, RHO], F[j, VEL], F[j, PRS], I[j, PH]


@njit(cache=True)
def _link_new(F, I, GI, sf, si, n, x, t, before, after):
    """Append ``n`` scratch fronts at ``(x, t)`` between ``before`` and ``after``."""
    first = -1
    last = before
    for k in range(n):
        i = GI[GI_NUSED]
        GI[GI_NUSED] = i + 1
        F[i, X0] = x
        F[i, T0] = t
        F[i, SPD] = sf[k, 0]
        F[i, RHO] = sf[k, 1]
        F[i, VEL] = sf[k, 2]
        F[i, PRS] = sf[k, 3]
        I[i, PH] = si[k, 0]
        I[i, KIND] = si[k, 1]
        I[i, FAM] = si[k, 2]
        I[i, ALIVE] = 1
        I[i, PREV] = last
        if last >= 0:
            I[last, NEXT] = i
        else:
            GI[GI_HEAD] = i
        if first < 0:
            first = i
        last = i
    if n == 0:
        if before >= 0:
            I[before, NEXT] = after
        else:
            GI[GI_HEAD] = after
        if after >= 0:
            I[after, PREV] = before
        else:
            GI[GI_TAIL] = before
        return -1, -1
    I[last, NEXT] = after
    if after >= 0:
        I[after, PREV] = last
    else:
        GI[GI_TAIL] = last
    return first, last


@njit(cache=True)
def init_kernel(F, I, G, GI, eos, delta, minstr, edges, seg_rho, seg_u, seg_p, seg_ph, t0, sf, si):
    """Emit fronts for the Riemann problems at ``edges`` between consecutive segments.

    Resumes from ``GI[GI_PROG]`` so a ``FULL`` return can be retried after
    the workspace is enlarged.
    """
    cap = F.shape[0]
    for j in range(GI[GI_PROG], edges.shape[0]):
        rl, ul, pl, phl = seg_rho[j], seg_u[j], seg_p[j], seg_ph[j]
        rr, ur, pr, phr = seg_rho[j + 1], seg_u[j + 1], seg_p[j + 1], seg_ph[j + 1]
        if rl == rr and ul == ur and pl == pr and phl == phr:
            GI[GI_PROG] = j + 1
            continue
        n, st = riemann_fronts(rl, ul, pl, phl, rr, ur, pr, phr, eos, delta, minstr, sf, si)
        if st != OK:
            GI[GI_PROG] = j
            return st
        if GI[GI_NUSED] + n > cap:
            GI[GI_PROG] = j
            return FULL
        # the segment right of the new fronts may already carry a jump when
        # every wave was too weak to keep; that jump is dropped here
        _link_new(F, I, GI, sf, si, n, edges[j], t0, GI[GI_TAIL], -1)
        GI[GI_PROG] = j + 1
    return DONE


@njit(cache=True)
def _push_pair(heap, F, I, i, j, tnow):
    if i < 0 or j < 0:
        return
    rel = F[i, SPD] - F[j, SPD]
    if rel <= 0.0:
        return
    gap = _pos(F, j, tnow) - _pos(F, i, tnow)
    t = tnow + max(gap, 0.0) / rel
    x = 0.5 * (_pos(F, i, t) + _pos(F, j, t))
    heapq.heappush(heap, (t, x, i, j))


@njit(cache=True)
def _push_exit(heap, F, G, i, tnow):
    s = F[i, SPD]
    if s > 0.0:
        t = F[i, T0] + (G[G_XB] - F[i, X0]) / s
        heapq.heappush(heap, (max(t, tnow), G[G_XB], i, -2))
    elif s < 0.0:
        t = F[i, T0] + (G[G_XA] - F[i, X0]) / s
        heapq.heappush(heap, (max(t, tnow), G[G_XA], i, -1))


@njit(cache=True)
def _flux_into(bflux, ph, sgn, dt, rho, u, p, eos):
    g, pi, b = eos[ph, 0], eos[ph, 1], eos[ph, 2]
    E = energy_density(rho, u, p, g, pi, b)
    bflux[ph, 0] += sgn * dt * rho * u
    bflux[ph, 1] += sgn * dt * (rho * u * u + p)
    bflux[ph, 2] += sgn * dt * u * (E + p)


@njit(cache=True)
def _right_state(F, I, G, GI):
    j = GI[GI_TAIL]
    if j < 0:
        return G[G_LRHO], G[G_LU], G[G_LP], GI[GI_LPH]
    return F[j, RHO], F[j, VEL], F[j, PRS], I[j, PH]


@njit(cache=True)
def _account_boundaries(F, I, G, GI, eos, bflux, t):
    if t > G[G_TL]:
        _flux_into(bflux, GI[GI_LPH], 1.0, t - G[G_TL], G[G_LRHO], G[G_LU], G[G_LP], eos)
        G[G_TL] = t
    if t > G[G_TR]:
        r, u, p, ph = _right_state(F, I, G, GI)
        _flux_into(bflux, ph, -1.0, t - G[G_TR], r, u, p, eos)
        G[G_TR] = t


@njit(cache=True)
def evolve_kernel(F, I, G, GI, eos, delta, bflux, minstr, max_coll, t_out, sf, si):
    """Process all events up to ``t_out``.

    Returns ``DONE``, ``FULL``, ``SCRATCH``, ``CASCADE`` or a Riemann
    failure code. On ``DONE`` the boundary flux integrals are advanced to
    ``t_out`` and ``G[G_TNOW] = t_out``.
    """
    cap = F.shape[0]
    tnow = G[G_TNOW]
    xtol = POS_TOL * max(1.0, G[G_XB] - G[G_XA])
    heap = [(0.0, 0.0, 0, 0)]
    heap.pop()
    i = GI[GI_HEAD]
    while i >= 0:
        _push_exit(heap, F, G, i, tnow)
        _push_pair(heap, F, I, i, I[i, NEXT], tnow)
        i = I[i, NEXT]
    while len(heap) > 0:
        ev = heap[0]
        t = ev[0]
        if t > t_out:
            break
        a = ev[2]
        b = ev[3]
        if I[a, ALIVE] == 0 or (b >= 0 and (I[b, ALIVE] == 0 or I[a, NEXT] != b)):
            heapq.heappop(heap)
            continue
        t = max(t, tnow)
        if b < 0:
            # boundary exit: the front and everything beyond it leave the domain
            heapq.heappop(heap)
            _account_boundaries(F, I, G, GI, eos, bflux, t)
            if b == -2:
                new_tail = I[a, PREV]
                j = a
                while j >= 0:
                    I[j, ALIVE] = 0
                    j = I[j, NEXT]
                if new_tail >= 0:
                    I[new_tail, NEXT] = -1
                else:
                    GI[GI_HEAD] = -1
                GI[GI_TAIL] = new_tail
            else:
                new_head = I[a, NEXT]
                G[G_LRHO] = F[a, RHO]
                G[G_LU] = F[a, VEL]
                G[G_LP] = F[a, PRS]
                GI[GI_LPH] = I[a, PH]
                j = a
                while j >= 0:
                    I[j, ALIVE] = 0
                    j = I[j, PREV]
                if new_head >= 0:
                    I[new_head, PREV] = -1
                else:
                    GI[GI_TAIL] = -1
                GI[GI_HEAD] = new_head
            GI[GI_NEXIT] += 1
            tnow = t
            G[G_TNOW] = tnow
            continue

        # collision: gather every front meeting at this point
        x = ev[1]
        lo = a
        hi = b
        while I[lo, PREV] >= 0 and abs(_pos(F, I[lo, PREV], t) - x) <= xtol:
            lo = I[lo, PREV]
        while I[hi, NEXT] >= 0 and abs(_pos(F, I[hi, NEXT], t) - x) <= xtol:
            hi = I[hi, NEXT]
        rl, ul, pl, phl = _left_state(F, I, G, GI, lo)
        rr, ur, pr, phr = F[hi, RHO], F[hi, VEL], F[hi, PRS], I[hi, PH]
        n, st = riemann_fronts(rl, ul, pl, phl, rr, ur, pr, phr, eos, delta, minstr, sf, si)
        if st != OK:
            G[G_TNOW] = tnow
            return st
        if GI[GI_NUSED] + n > cap:
            G[G_TNOW] = tnow
            return FULL
        heapq.heappop(heap)
        if GI[GI_NCOLL] >= max_coll:
            G[G_TNOW] = tnow
            return CASCADE
        GI[GI_NCOLL] += 1
        before = I[lo, PREV]
        after = I[hi, NEXT]
        j = lo
        while True:
            I[j, ALIVE] = 0
            if j == hi:
                break
            j = I[j, NEXT]
        tnow = t
        first, last = _link_new(F, I, GI, sf, si, n, x, t, before, after)
        if n == 0:
            _push_pair(heap, F, I, before, after, tnow)
        else:
            _push_pair(heap, F, I, before, first, tnow)
            _push_pair(heap, F, I, last, after, tnow)
            j = first
            while True:
                _push_exit(heap, F, G, j, tnow)
                if j == last:
                    break
                j = I[j, NEXT]
    G[G_TNOW] = t_out
    _account_boundaries(F, I, G, GI, eos, bflux, t_out)
    return DONE


@njit(cache=True)
def count_live(I, GI):
    n = 0
    i = GI[GI_HEAD]
    while i >= 0:
        n += 1
        i = I[i, NEXT]
    return n


@njit(cache=True)
def collect(F, I, GI, t, out_f, out_i):
    """Copy live fronts in order into ``out_f = (x, speed, rho, u, p)`` and ``out_i = (phase, kind, family)``."""
    k = 0
    i = GI[GI_HEAD]
    while i >= 0:
        out_f[k, 0] = _pos(F, i, t)
        out_f[k, 1] = F[i, SPD]
        out_f[k, 2] = F[i, RHO]
        out_f[k, 3] = F[i, VEL]
        out_f[k, 4] = F[i, PRS]
        out_i[k, 0] = I[i, PH]
        out_i[k, 1] = I[i, KIND]
        out_i[k, 2] = I[i, FAM]
        k += 1
        i = I[i, NEXT]
    return k


@njit(cache=True)
def compact(F, I, GI, t, F2, I2):
    """Copy live fronts in order into fresh arrays, re-referenced to time ``t``."""
    k = 0
    i = GI[GI_HEAD]
    while i >= 0:
        F2[k, X0] = _pos(F, i, t)
        F2[k, T0] = t
        for c in range(2, 6):
            F2[k, c] = F[i, c]
        I2[k, PH] = I[i, PH]
        I2[k, KIND] = I[i, KIND]
        I2[k, FAM] = I[i, FAM]
        I2[k, PREV] = k - 1
        I2[k, NEXT] = k + 1
        I2[k, ALIVE] = 1
        k += 1
        i = I[i, NEXT]
    if k > 0:
        I2[k - 1, NEXT] = -1
        GI[GI_HEAD] = 0
        GI[GI_TAIL] = k - 1
    else:
        GI[GI_HEAD] = -1
        GI[GI_TAIL] = -1
    GI[GI_NUSED] = k
    return k
