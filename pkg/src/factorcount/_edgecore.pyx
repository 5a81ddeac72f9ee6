# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel for the spectral-edge solver.

Mirrors _edgepy: same map, same bracket recipe, same Brent loop, same
stopping rules. Summations are Kahan-compensated so atom order cannot
move the result. Kept free of the numpy C API on purpose; inputs are
plain contiguous double buffers.
"""

from libc.math cimport fabs, isfinite

cdef double LEFT_DELTA_REL = 1e-12
cdef double STOP_REL = 1e-10
cdef double WIDTH_REL = 1e-14
cdef int MAX_ITER = 200
cdef int MAX_BRACKET_TRIES = 120


cdef inline double _zsum(double v, double[::1] w, double[::1] phi) noexcept nogil:
    cdef double s = 0.0, c = 0.0, term, y, t
    cdef Py_ssize_t j, m = w.shape[0]
    for j in range(m):
        term = w[j] * phi[j] / (1.0 + phi[j] * v)
        y = term - c
        t = s + y
        c = (t - s) - y
        s = t
    return s


cdef inline double _zprimesum(double v, double[::1] w, double[::1] phi) noexcept nogil:
    cdef double s = 0.0, c = 0.0, term, den, y, t
    cdef Py_ssize_t j, m = w.shape[0]
    for j in range(m):
        den = 1.0 + phi[j] * v
        term = w[j] * phi[j] * phi[j] / (den * den)
        y = term - c
        t = s + y
        c = (t - s) - y
        s = t
    return s


cdef inline double _zval(double v, double gamma, double[::1] w, double[::1] phi) noexcept nogil:
    return -1.0 / v + gamma * _zsum(v, w, phi)


cdef inline double _zprime(double v, double gamma, double[::1] w, double[::1] phi) noexcept nogil:
    return 1.0 / (v * v) - gamma * _zprimesum(v, w, phi)


def z_value(double v, double gamma, double[::1] w, double[::1] phi):
    return _zval(v, gamma, w, phi)


def z_prime(double v, double gamma, double[::1] w, double[::1] phi):
    return _zprime(v, gamma, w, phi)


def solve_edge(double gamma, double[::1] w, double[::1] phi, double phi_max):
    cdef double B = -1.0 / phi_max
    cdef double abs_b = -B
    cdef int iterations = 0
    cdef int tries, it
    cdef double delta, a, b, fa, fb

    # Left endpoint: z' -> -inf as v -> B+, so start a hair inside and
    # widen geometrically only if rounding or tiny top-atom weight left
    # the derivative nonnegative there.
    delta = LEFT_DELTA_REL * abs_b
    a = B + delta
    fa = _zprime(a, gamma, w, phi)
    tries = 0
    while not (isfinite(fa) and fa < 0.0):
        delta *= 2.0
        a = B + delta
        if a >= 0.0 or tries >= MAX_BRACKET_TRIES:
            return (1, 0.0, 0.0, iterations, 0.0)
        fa = _zprime(a, gamma, w, phi)
        tries += 1
        iterations += 1

    # Right endpoint: z' -> +inf as v -> 0-, so shrink toward zero until
    # the derivative is positive (relevant only for enormous gamma).
    delta = LEFT_DELTA_REL * abs_b
    b = -delta
    fb = _zprime(b, gamma, w, phi)
    tries = 0
    while not (isfinite(fb) and fb > 0.0):
        delta *= 0.5
        b = -delta
        if b <= a or tries >= MAX_BRACKET_TRIES:
            return (1, 0.0, 0.0, iterations, 0.0)
        fb = _zprime(b, gamma, w, phi)
        tries += 1
        iterations += 1

    if not a < b:
        return (1, 0.0, 0.0, iterations, 0.0)

    # Brent's method on z' over [a, b], with a scale-aware residual stop
    # and a width stop measured against |B|.
    cdef double xpre = a, xcur = b, xblk = 0.0
    cdef double fpre = fa, fcur = fb, fblk = 0.0
    cdef double spre = 0.0, scur = 0.0
    cdef double sbis, stry, dpre, dblk
    cdef double half_width_tol = 0.5 * WIDTH_REL * abs_b

    for it in range(MAX_ITER):
        iterations += 1
        if fpre * fcur < 0.0:
            xblk = xpre
            fblk = fpre
            spre = scur = xcur - xpre
        if fabs(fblk) < fabs(fcur):
            xpre = xcur
            xcur = xblk
            xblk = xpre
            fpre = fcur
            fcur = fblk
            fblk = fpre

        sbis = (xblk - xcur) / 2.0
        if fcur == 0.0 or fabs(sbis) < half_width_tol:
            return (0, xcur, _zval(xcur, gamma, w, phi), iterations, fabs(fcur))

        if fabs(spre) > half_width_tol and fabs(fcur) < fabs(fpre):
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
            if 2.0 * fabs(stry) < min(fabs(spre), 3.0 * fabs(sbis) - half_width_tol):
                spre = scur
                scur = stry
            else:
                spre = scur = sbis
        else:
            spre = scur = sbis

        xpre = xcur
        fpre = fcur
        if fabs(scur) > half_width_tol:
            xcur += scur
        else:
            xcur += half_width_tol if sbis > 0.0 else -half_width_tol
        fcur = _zprime(xcur, gamma, w, phi)
        if fabs(fcur) <= STOP_REL / (xcur * xcur):
            return (0, xcur, _zval(xcur, gamma, w, phi), iterations, fabs(fcur))

    return (2, xcur, _zval(xcur, gamma, w, phi), iterations, fabs(fcur))
