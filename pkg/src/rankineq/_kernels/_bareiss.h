/* Fraction-free Gaussian-integer elimination in checked 128-bit arithmetic.
 * Mirrors _pykernel.bareiss_rank step for step; any overflow aborts with
 * BAREISS_OVERFLOW so the caller can rerun on arbitrary-precision ints. */
#ifndef RANKINEQ_BAREISS_H
#define RANKINEQ_BAREISS_H

#include <stdint.h>
#include <stdlib.h>

#define BAREISS_OVERFLOW (-1)
#define BAREISS_INEXACT (-2)
#define BAREISS_NOMEM (-3)

typedef __int128 i128;

#define CHK(expr) do { if (__builtin_expect((expr), 0)) { rc = BAREISS_OVERFLOW; goto done; } } while (0)

static int gauss_bareiss_rank(const int64_t *re, const int64_t *im, int nr, int nc,
                              int *prow, int *pcol)
{
    int rc = 0;
    size_t sz = (size_t)nr * (size_t)nc;
    i128 *ar = (i128 *)malloc(sz * sizeof(i128));
    i128 *ai = (i128 *)malloc(sz * sizeof(i128));
    int *rperm = (int *)malloc((size_t)nr * sizeof(int));
    int *cperm = (int *)malloc((size_t)nc * sizeof(int));
    if (!ar || !ai || !rperm || !cperm) { rc = BAREISS_NOMEM; goto done; }
    for (size_t t = 0; t < sz; ++t) { ar[t] = re[t]; ai[t] = im[t]; }
    for (int i = 0; i < nr; ++i) rperm[i] = i;
    for (int j = 0; j < nc; ++j) cperm[j] = j;

    i128 pr = 1, pi = 0, pnorm = 1;
    int n = nr < nc ? nr : nc;
    int k = 0;
    for (; k < n; ++k) {
        i128 best = 0;
        int bi = -1, bj = -1;
        for (int i = k; i < nr; ++i) {
            for (int j = k; j < nc; ++j) {
                i128 x = ar[(size_t)i * nc + j], y = ai[(size_t)i * nc + j];
                if (x == 0 && y == 0) continue;
                i128 xx, yy, v;
                CHK(__builtin_mul_overflow(x, x, &xx));
                CHK(__builtin_mul_overflow(y, y, &yy));
                CHK(__builtin_add_overflow(xx, yy, &v));
                if (v > best || (v == best && (rperm[i] < rperm[bi] ||
                                               (rperm[i] == rperm[bi] && cperm[j] < cperm[bj])))) {
                    best = v; bi = i; bj = j;
                }
            }
        }
        if (best == 0) break;
        if (bi != k) {
            for (int j = 0; j < nc; ++j) {
                i128 t = ar[(size_t)k * nc + j]; ar[(size_t)k * nc + j] = ar[(size_t)bi * nc + j]; ar[(size_t)bi * nc + j] = t;
                t = ai[(size_t)k * nc + j]; ai[(size_t)k * nc + j] = ai[(size_t)bi * nc + j]; ai[(size_t)bi * nc + j] = t;
            }
            int t = rperm[k]; rperm[k] = rperm[bi]; rperm[bi] = t;
        }
        if (bj != k) {
            for (int i = k; i < nr; ++i) {
                i128 t = ar[(size_t)i * nc + k]; ar[(size_t)i * nc + k] = ar[(size_t)i * nc + bj]; ar[(size_t)i * nc + bj] = t;
                t = ai[(size_t)i * nc + k]; ai[(size_t)i * nc + k] = ai[(size_t)i * nc + bj]; ai[(size_t)i * nc + bj] = t;
            }
            int t = cperm[k]; cperm[k] = cperm[bj]; cperm[bj] = t;
        }
        i128 qr = ar[(size_t)k * nc + k], qi = ai[(size_t)k * nc + k];
        int trivial_div = (pr == 1 && pi == 0);
        for (int i = k + 1; i < nr; ++i) {
            i128 xr = ar[(size_t)i * nc + k], xi = ai[(size_t)i * nc + k];
            for (int j = k + 1; j < nc; ++j) {
                i128 a = ar[(size_t)i * nc + j], b = ai[(size_t)i * nc + j];
                i128 c = ar[(size_t)k * nc + j], d = ai[(size_t)k * nc + j];
                i128 p1, p2, p3, p4, s1, s2, tr, ti;
                /* tr = qr*a - qi*b - (xr*c - xi*d) */
                CHK(__builtin_mul_overflow(qr, a, &p1));
                CHK(__builtin_mul_overflow(qi, b, &p2));
                CHK(__builtin_mul_overflow(xr, c, &p3));
                CHK(__builtin_mul_overflow(xi, d, &p4));
                CHK(__builtin_sub_overflow(p1, p2, &s1));
                CHK(__builtin_sub_overflow(p3, p4, &s2));
                CHK(__builtin_sub_overflow(s1, s2, &tr));
                /* ti = qr*b + qi*a - (xr*d + xi*c) */
                CHK(__builtin_mul_overflow(qr, b, &p1));
                CHK(__builtin_mul_overflow(qi, a, &p2));
                CHK(__builtin_mul_overflow(xr, d, &p3));
                CHK(__builtin_mul_overflow(xi, c, &p4));
                CHK(__builtin_add_overflow(p1, p2, &s1));
                CHK(__builtin_add_overflow(p3, p4, &s2));
                CHK(__builtin_sub_overflow(s1, s2, &ti));
                if (!trivial_div) {
                    i128 nr_, ni_;
                    if (pi == 0) {
                        nr_ = tr; ni_ = ti;
                        if (nr_ % pr != 0 || ni_ % pr != 0) { rc = BAREISS_INEXACT; goto done; }
                        tr = nr_ / pr; ti = ni_ / pr;
                    } else {
                        CHK(__builtin_mul_overflow(tr, pr, &p1));
                        CHK(__builtin_mul_overflow(ti, pi, &p2));
                        CHK(__builtin_add_overflow(p1, p2, &nr_));
                        CHK(__builtin_mul_overflow(ti, pr, &p3));
                        CHK(__builtin_mul_overflow(tr, pi, &p4));
                        CHK(__builtin_sub_overflow(p3, p4, &ni_));
                        if (nr_ % pnorm != 0 || ni_ % pnorm != 0) { rc = BAREISS_INEXACT; goto done; }
                        tr = nr_ / pnorm; ti = ni_ / pnorm;
                    }
                }
                ar[(size_t)i * nc + j] = tr;
                ai[(size_t)i * nc + j] = ti;
            }
            ar[(size_t)i * nc + k] = 0;
            ai[(size_t)i * nc + k] = 0;
        }
        pr = qr; pi = qi;
        {
            i128 a2, b2;
            CHK(__builtin_mul_overflow(pr, pr, &a2));
            CHK(__builtin_mul_overflow(pi, pi, &b2));
            CHK(__builtin_add_overflow(a2, b2, &pnorm));
        }
    }
    for (int t = 0; t < k; ++t) { prow[t] = rperm[t]; pcol[t] = cperm[t]; }
    rc = k;
done:
    free(ar); free(ai); free(rperm); free(cperm);
    return rc;
}

#undef CHK

/* Same elimination on GMP integers; cannot overflow. */
#include <gmp.h>

static int gauss_bareiss_rank_mpz(const int64_t *re, const int64_t *im, int nr, int nc,
                                  int *prow, int *pcol)
{
    size_t sz = (size_t)nr * (size_t)nc;
    mpz_t *ar = (mpz_t *)malloc(sz * sizeof(mpz_t));
    mpz_t *ai = (mpz_t *)malloc(sz * sizeof(mpz_t));
    int *rperm = (int *)malloc((size_t)nr * sizeof(int));
    int *cperm = (int *)malloc((size_t)nc * sizeof(int));
    if (!ar || !ai || !rperm || !cperm) {
        free(ar); free(ai); free(rperm); free(cperm);
        return BAREISS_NOMEM;
    }
    for (size_t t = 0; t < sz; ++t) {
        mpz_init_set_si(ar[t], (long)re[t]);
        mpz_init_set_si(ai[t], (long)im[t]);
    }
    for (int i = 0; i < nr; ++i) rperm[i] = i;
    for (int j = 0; j < nc; ++j) cperm[j] = j;

    mpz_t pr, pi, pnorm, qr, qi, best, v, tmp, tr, ti, s1, s2;
    mpz_inits(pr, pi, pnorm, qr, qi, best, v, tmp, tr, ti, s1, s2, NULL);
    mpz_set_ui(pr, 1); mpz_set_ui(pnorm, 1);

    int rc = 0;
    int n = nr < nc ? nr : nc;
    int k = 0;
    for (; k < n; ++k) {
        mpz_set_ui(best, 0);
        int bi = -1, bj = -1;
        for (int i = k; i < nr; ++i) {
            for (int j = k; j < nc; ++j) {
                size_t o = (size_t)i * nc + j;
                if (mpz_sgn(ar[o]) == 0 && mpz_sgn(ai[o]) == 0) continue;
                mpz_mul(v, ar[o], ar[o]);
                mpz_addmul(v, ai[o], ai[o]);
                int c = mpz_cmp(v, best);
                if (c > 0 || (c == 0 && (rperm[i] < rperm[bi] ||
                                         (rperm[i] == rperm[bi] && cperm[j] < cperm[bj])))) {
                    mpz_set(best, v); bi = i; bj = j;
                }
            }
        }
        if (mpz_sgn(best) == 0) break;
        if (bi != k) {
            for (int j = 0; j < nc; ++j) {
                mpz_swap(ar[(size_t)k * nc + j], ar[(size_t)bi * nc + j]);
                mpz_swap(ai[(size_t)k * nc + j], ai[(size_t)bi * nc + j]);
            }
            int t = rperm[k]; rperm[k] = rperm[bi]; rperm[bi] = t;
        }
        if (bj != k) {
            for (int i = k; i < nr; ++i) {
                mpz_swap(ar[(size_t)i * nc + k], ar[(size_t)i * nc + bj]);
                mpz_swap(ai[(size_t)i * nc + k], ai[(size_t)i * nc + bj]);
            }
            int t = cperm[k]; cperm[k] = cperm[bj]; cperm[bj] = t;
        }
        mpz_set(qr, ar[(size_t)k * nc + k]);
        mpz_set(qi, ai[(size_t)k * nc + k]);
        int trivial_div = (mpz_cmp_ui(pr, 1) == 0 && mpz_sgn(pi) == 0);
        int real_div = (mpz_sgn(pi) == 0);
        for (int i = k + 1; i < nr; ++i) {
            size_t ok = (size_t)i * nc + k;
            for (int j = k + 1; j < nc; ++j) {
                size_t o = (size_t)i * nc + j, kj = (size_t)k * nc + j;
                /* tr = qr*a - qi*b - xr*c + xi*d */
                mpz_mul(tr, qr, ar[o]);
                mpz_submul(tr, qi, ai[o]);
                mpz_submul(tr, ar[ok], ar[kj]);
                mpz_addmul(tr, ai[ok], ai[kj]);
                /* ti = qr*b + qi*a - xr*d - xi*c */
                mpz_mul(ti, qr, ai[o]);
                mpz_addmul(ti, qi, ar[o]);
                mpz_submul(ti, ar[ok], ai[kj]);
                mpz_submul(ti, ai[ok], ar[kj]);
                if (trivial_div) {
                    mpz_swap(ar[o], tr);
                    mpz_swap(ai[o], ti);
                } else if (real_div) {
                    if (!mpz_divisible_p(tr, pr) || !mpz_divisible_p(ti, pr)) { rc = BAREISS_INEXACT; goto done; }
                    mpz_divexact(ar[o], tr, pr);
                    mpz_divexact(ai[o], ti, pr);
                } else {
                    mpz_mul(s1, tr, pr);
                    mpz_addmul(s1, ti, pi);
                    mpz_mul(s2, ti, pr);
                    mpz_submul(s2, tr, pi);
                    if (!mpz_divisible_p(s1, pnorm) || !mpz_divisible_p(s2, pnorm)) { rc = BAREISS_INEXACT; goto done; }
                    mpz_divexact(ar[o], s1, pnorm);
                    mpz_divexact(ai[o], s2, pnorm);
                }
            }
            mpz_set_ui(ar[ok], 0);
            mpz_set_ui(ai[ok], 0);
        }
        mpz_set(pr, qr); mpz_set(pi, qi);
        mpz_mul(pnorm, pr, pr);
        mpz_addmul(pnorm, pi, pi);
    }
    for (int t = 0; t < k; ++t) { prow[t] = rperm[t]; pcol[t] = cperm[t]; }
    rc = k;
done:
    mpz_clears(pr, pi, pnorm, qr, qi, best, v, tmp, tr, ti, s1, s2, NULL);
    for (size_t t = 0; t < sz; ++t) { mpz_clear(ar[t]); mpz_clear(ai[t]); }
    free(ar); free(ai); free(rperm); free(cperm);
    return rc;
}

#endif
