# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled graded-product kernel over the dense bitmask representation.

Operates on float64 views of the complex coefficient arrays with the naive
(a*c - b*d, a*d + b*c) product, matching numpy's complex multiply bit for
bit; gcc's native complex lowering would introduce FMA contractions.
"""


def graded_multiply(const double[::1] x, const double[::1] y,
                    const int[::1] left, const int[::1] right,
                    const int[::1] target, const double[::1] sign,
                    double[::1] out):
    cdef Py_ssize_t k, l2, r2, t2
    cdef double s, p, q, c, d
    cdef Py_ssize_t n = left.shape[0]
    for k in range(n):
        l2 = 2 * left[k]
        r2 = 2 * right[k]
        t2 = 2 * target[k]
        s = sign[k]
        p = s * x[l2]
        q = s * x[l2 + 1]
        c = y[r2]
        d = y[r2 + 1]
        out[t2] += p * c - q * d
        out[t2 + 1] += p * d + q * c
