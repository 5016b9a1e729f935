"""Pure-Python fraction-free elimination over the Gaussian integers."""


def _gdiv(tr, ti, pr, pi, pnorm):
    # Exact division of (tr + ti i) by (pr + pi i); Bareiss guarantees divisibility.
    if pi == 0:
        qr, rr = divmod(tr, pr)
        qi, ri = divmod(ti, pr)
    else:
        qr, rr = divmod(tr * pr + ti * pi, pnorm)
        qi, ri = divmod(ti * pr - tr * pi, pnorm)
    if rr or ri:
        raise ArithmeticError("inexact Bareiss division")
    return qr, qi


def bareiss_rank(re, im, nrows, ncols):
    """Rank of a Gaussian-integer matrix with full pivoting.

    ``re`` and ``im`` are flat row-major sequences of Python ints.  The pivot
    at each step is the entry of largest norm ``re**2 + im**2``; ties go to
    the lowest original ``(row, col)``.  Returns ``(rank, pivot_rows,
    pivot_cols)`` with indices into the original matrix.
    """
    ar = [list(re[i * ncols:(i + 1) * ncols]) for i in range(nrows)]
    ai = [list(im[i * ncols:(i + 1) * ncols]) for i in range(nrows)]
    rperm = list(range(nrows))
    cperm = list(range(ncols))
    pr, pi, pnorm = 1, 0, 1
    k = 0
    n = min(nrows, ncols)
    while k < n:
        best = 0
        bi = bj = -1
        for i in range(k, nrows):
            rr = ar[i]
            ri = ai[i]
            oi = rperm[i]
            for j in range(k, ncols):
                x = rr[j]
                y = ri[j]
                if x or y:
                    v = x * x + y * y
                    if v > best or (v == best and (oi, cperm[j]) < (rperm[bi], cperm[bj])):
                        best, bi, bj = v, i, j
        if best == 0:
            break
        if bi != k:
            ar[k], ar[bi] = ar[bi], ar[k]
            ai[k], ai[bi] = ai[bi], ai[k]
            rperm[k], rperm[bi] = rperm[bi], rperm[k]
        if bj != k:
            for i in range(k, nrows):
                rr = ar[i]
                ri = ai[i]
                rr[k], rr[bj] = rr[bj], rr[k]
                ri[k], ri[bj] = ri[bj], ri[k]
            cperm[k], cperm[bj] = cperm[bj], cperm[k]
        kr = ar[k]
        ki = ai[k]
        qr, qi = kr[k], ki[k]
        for i in range(k + 1, nrows):
            rr = ar[i]
            ri = ai[i]
            xr, xi = rr[k], ri[k]
            for j in range(k + 1, ncols):
                a, b = rr[j], ri[j]
                c, d = kr[j], ki[j]
                tr = qr * a - qi * b - (xr * c - xi * d)
                ti = qr * b + qi * a - (xr * d + xi * c)
                if pnorm == 1 and pi == 0 and pr == 1:
                    rr[j], ri[j] = tr, ti
                else:
                    rr[j], ri[j] = _gdiv(tr, ti, pr, pi, pnorm)
            rr[k] = 0
            ri[k] = 0
        pr, pi = qr, qi
        pnorm = pr * pr + pi * pi
        k += 1
    return k, rperm[:k], cperm[:k]
