# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled dense exterior-algebra kernels (see ``_kernels_py`` for layout)."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline int _popcount(unsigned int x) nogil:
    cdef int c = 0
    while x:
        x &= x - 1
        c += 1
    return c


cdef inline double _wedge_sign(unsigned int a, unsigned int b) nogil:
    cdef int inversions = 0
    cdef unsigned int bb = b
    cdef unsigned int low
    cdef int j
    while bb:
        low = bb & (~bb + 1)
        j = 0
        while (low >> j) != 1:
            j += 1
        inversions += _popcount(a >> (j + 1))
        bb &= bb - 1
    return -1.0 if (inversions & 1) else 1.0


def wedge(const double[::1] a, const double[::1] b, int n):
    cdef Py_ssize_t size = 1 << n
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_arr = np.zeros(size)
    cdef double[::1] out = out_arr
    cdef unsigned int i, j
    cdef double ca
    with nogil:
        for i in range(size):
            ca = a[i]
            if ca == 0.0:
                continue
            for j in range(size):
                if b[j] == 0.0 or (i & j):
                    continue
                out[i | j] += _wedge_sign(i, j) * ca * b[j]
    return out_arr


def interior(const double[::1] v, const double[::1] a, int n):
    cdef Py_ssize_t size = 1 << n
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_arr = np.zeros(size)
    cdef double[::1] out = out_arr
    cdef unsigned int m, mm, low
    cdef int i
    cdef double c, s
    with nogil:
        for m in range(size):
            c = a[m]
            if c == 0.0:
                continue
            mm = m
            while mm:
                low = mm & (~mm + 1)
                i = 0
                while (low >> i) != 1:
                    i += 1
                mm &= mm - 1
                if v[i] == 0.0:
                    continue
                s = -1.0 if (_popcount(m & (low - 1)) & 1) else 1.0
                out[m ^ low] += s * v[i] * c
    return out_arr


def wedge_sign(unsigned int a, unsigned int b):
    if a & b:
        return 0.0
    return _wedge_sign(a, b)
