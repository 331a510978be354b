"""Pure-Python/numpy fallback for the dense exterior-algebra kernels.

Forms of dimension ``n <= 8`` are stored densely as arrays of length ``2**n``
indexed by the bitmask of the basis index set (bit ``i`` <-> generator
``i + 1``).  Only masks of the right popcount carry non-zero entries.
"""

import numpy as np

MAX_DIM = 8
_SIZE = 1 << MAX_DIM

_POPCOUNT = np.array([bin(m).count("1") for m in range(_SIZE)], dtype=np.int64)


def _build_sign_table():
    # sign[a, b] = sign of e^a ^ e^b relative to e^(a|b); 0 if a and b overlap
    table = np.zeros((_SIZE, _SIZE), dtype=np.float64)
    for a in range(_SIZE):
        for b in range(_SIZE):
            if a & b:
                continue
            inversions = 0
            bb = b
            while bb:
                j = (bb & -bb).bit_length() - 1
                inversions += _POPCOUNT[a >> (j + 1)]
                bb &= bb - 1
            table[a, b] = -1.0 if inversions & 1 else 1.0
    return table


_SIGN = _build_sign_table()
# sign of removing bit i from mask m: (-1)^(number of set bits below i)
_BELOW = np.array(
    [[_POPCOUNT[m & ((1 << i) - 1)] for i in range(MAX_DIM)] for m in range(_SIZE)],
    dtype=np.int64,
)


def wedge(a, b, n):
    size = 1 << n
    out = np.zeros(size)
    ia = np.flatnonzero(a)
    ib = np.flatnonzero(b)
    if ia.size == 0 or ib.size == 0:
        return out
    sign = _SIGN[np.ix_(ia, ib)]
    vals = (a[ia][:, None] * b[ib][None, :]) * sign
    masks = ia[:, None] | ib[None, :]
    np.add.at(out, masks.ravel(), vals.ravel())
    return out


def interior(v, a, n):
    size = 1 << n
    out = np.zeros(size)
    for m in np.flatnonzero(a):
        c = a[m]
        mm = int(m)
        while mm:
            i = (mm & -mm).bit_length() - 1
            mm &= mm - 1
            if v[i] == 0.0:
                continue
            s = -1.0 if _BELOW[m, i] & 1 else 1.0
            out[m ^ (1 << i)] += s * v[i] * c
    return out


def wedge_sign(a, b):
    return _SIGN[a, b]
