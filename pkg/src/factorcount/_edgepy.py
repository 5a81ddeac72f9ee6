"""Pure-Python kernel for the spectral-edge solver.

Same contract as the compiled kernel in _edgecore: evaluate the map

    z(v) = -1/v + gamma * sum_j w_j Phi_j / (1 + Phi_j v)

and locate its unique stationary point on (B, 0), B = -1/max_j Phi_j.
Summations use math.fsum so that atom order cannot move the result.

solve_edge returns (status, v_star, edge, iterations, residual) with
status 0 = converged, 1 = no sign-change bracket, 2 = iteration cap.
"""

import math

# Bracket and stopping constants, shared with the compiled kernel.
LEFT_DELTA_REL = 1e-12   # first left offset from B, relative to |B|
STOP_REL = 1e-10         # accept v when |z'(v)| <= STOP_REL / v^2
WIDTH_REL = 1e-14        # or when bracket width <= WIDTH_REL * |B|
MAX_ITER = 200
MAX_BRACKET_TRIES = 120


def z_value(v, gamma, w, phi):
    s = math.fsum(wj * pj / (1.0 + pj * v) for wj, pj in zip(w, phi))
    return -1.0 / v + gamma * s


def z_prime(v, gamma, w, phi):
    s = math.fsum(
        wj * pj * pj / ((1.0 + pj * v) * (1.0 + pj * v))
        for wj, pj in zip(w, phi)
    )
    return 1.0 / (v * v) - gamma * s


def solve_edge(gamma, w, phi, phi_max):
    w = [float(x) for x in w]
    phi = [float(x) for x in phi]
    B = -1.0 / phi_max
    abs_b = -B
    iterations = 0

    # Left endpoint: z' -> -inf as v -> B+, so start a hair inside and
    # widen geometrically only if rounding or tiny top-atom weight left
    # the derivative nonnegative there.
    delta = LEFT_DELTA_REL * abs_b
    a = B + delta
    fa = z_prime(a, gamma, w, phi)
    tries = 0
    while not (math.isfinite(fa) and fa < 0.0):
        delta *= 2.0
        a = B + delta
        if a >= 0.0 or tries >= MAX_BRACKET_TRIES:
            return (1, 0.0, 0.0, iterations, 0.0)
        fa = z_prime(a, gamma, w, phi)
        tries += 1
        iterations += 1

    # Right endpoint: z' -> +inf as v -> 0-, so shrink toward zero until
    # the derivative is positive (relevant only for enormous gamma).
    delta = LEFT_DELTA_REL * abs_b
    b = -delta
    fb = z_prime(b, gamma, w, phi)
    tries = 0
    while not (math.isfinite(fb) and fb > 0.0):
        delta *= 0.5
        b = -delta
        if b <= a or tries >= MAX_BRACKET_TRIES:
            return (1, 0.0, 0.0, iterations, 0.0)
        fb = z_prime(b, gamma, w, phi)
        tries += 1
        iterations += 1

    if not a < b:
        return (1, 0.0, 0.0, iterations, 0.0)

    # Brent's method on z' over [a, b], with a scale-aware residual stop
    # and a width stop measured against |B|.
    xpre, xcur = a, b
    fpre, fcur = fa, fb
    xblk = fblk = spre = scur = 0.0
    half_width_tol = 0.5 * WIDTH_REL * abs_b

    for _ in range(MAX_ITER):
        iterations += 1
        if fpre * fcur < 0.0:
            xblk, fblk = xpre, fpre
            spre = scur = xcur - xpre
        if abs(fblk) < abs(fcur):
            xpre, xcur, xblk = xcur, xblk, xcur
            fpre, fcur, fblk = fcur, fblk, fcur

        sbis = (xblk - xcur) / 2.0
        if fcur == 0.0 or abs(sbis) < half_width_tol:
            return (0, xcur, z_value(xcur, gamma, w, phi), iterations, abs(fcur))

        if abs(spre) > half_width_tol and abs(fcur) < abs(fpre):
            if xpre == xblk:
                stry = -fcur * (xcur - xpre) / (fcur - fpre)
            else:
                dpre = (fpre - fcur) / (xpre - xcur)
                dblk = (fblk - fcur) / (xblk - xcur)
                stry = (
                    -fcur
                    * (fblk * dblk - fpre * dpre)
                    / (dblk * dpre * (fblk - fpre))
                )
            if 2.0 * abs(stry) < min(abs(spre), 3.0 * abs(sbis) - half_width_tol):
                spre, scur = scur, stry
            else:
                spre = scur = sbis
        else:
            spre = scur = sbis

        xpre, fpre = xcur, fcur
        if abs(scur) > half_width_tol:
            xcur += scur
        else:
            xcur += half_width_tol if sbis > 0.0 else -half_width_tol
        fcur = z_prime(xcur, gamma, w, phi)
        if abs(fcur) <= STOP_REL / (xcur * xcur):
            return (0, xcur, z_value(xcur, gamma, w, phi), iterations, abs(fcur))

    return (2, xcur, z_value(xcur, gamma, w, phi), iterations, abs(fcur))
