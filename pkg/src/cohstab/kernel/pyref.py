"""Pure-numpy reference kernel.

Works on the real/imaginary components explicitly so every operation is a
single IEEE rounding (numpy's vectorized complex multiply may contract to
FMA on some CPUs). The accumulation uses np.add.at, an unbuffered
sequential scatter-add, in the same index order as the compiled loop, so
both backends produce bit-identical results.
"""

import numpy as np


def graded_multiply(x, y, left, right, target, sign, out):
    p = sign * x.real[left]
    q = sign * x.imag[left]
    c = y.real[right]
    d = y.imag[right]
    re = p * c - q * d
    im = p * d + q * c
    flat = out.view(np.float64)
    np.add.at(flat, 2 * target, re)
    np.add.at(flat, 2 * target + 1, im)
