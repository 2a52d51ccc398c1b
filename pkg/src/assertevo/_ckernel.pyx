# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled postfix assertion kernel. Mirrors ``_pykernel.run_program``.

Rows are processed in blocks: every instruction runs over a whole block
before the next one is dispatched, so the inner loops are branch-free and
the dispatch cost is paid once per block instead of once per row.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, fmod, nearbyint

cnp.import_array()

cdef enum:
    MAX_STACK = 128
    BLOCK = 256
cdef double EXACT = 4503599627370496.0


cdef inline double round_scaled(double v, double scale) noexcept nogil:
    cdef double s = v * scale
    if not (fabs(s) < EXACT):
        return v
    return nearbyint(s) / scale


cdef void _binary(int code, double* a, const double* b, signed char* err,
                  Py_ssize_t m, double scale) noexcept nogil:
    cdef Py_ssize_t i
    if code == 10:
        for i in range(m):
            a[i] = a[i] + b[i]
    elif code == 11:
        for i in range(m):
            a[i] = a[i] - b[i]
    elif code == 12:
        for i in range(m):
            a[i] = a[i] * b[i]
    elif code == 13:
        for i in range(m):
            err[i] |= b[i] == 0.0
            a[i] = a[i] / b[i]
    elif code == 14:
        for i in range(m):
            err[i] |= b[i] == 0.0
            a[i] = fmod(a[i], b[i])
    elif code == 20:
        for i in range(m):
            a[i] = round_scaled(a[i], scale) == round_scaled(b[i], scale)
    elif code == 21:
        for i in range(m):
            a[i] = round_scaled(a[i], scale) != round_scaled(b[i], scale)
    elif code == 22:
        for i in range(m):
            a[i] = a[i] < b[i]
    elif code == 23:
        for i in range(m):
            a[i] = a[i] <= b[i]
    elif code == 24:
        for i in range(m):
            a[i] = a[i] > b[i]
    elif code == 25:
        for i in range(m):
            a[i] = a[i] >= b[i]
    elif code == 30:
        for i in range(m):
            a[i] = (a[i] != 0.0) & (b[i] != 0.0)
    elif code == 31:
        for i in range(m):
            a[i] = (a[i] != 0.0) | (b[i] != 0.0)
    elif code == 32:
        for i in range(m):
            a[i] = (a[i] != 0.0) ^ (b[i] != 0.0)
    elif code == 33:
        for i in range(m):
            a[i] = (a[i] == 0.0) | (b[i] != 0.0)
    else:
        for i in range(m):
            a[i] = (a[i] != 0.0) == (b[i] != 0.0)


cdef void _run(const int[::1] codes, const double[::1] operands,
               const double[:, ::1] data, double scale, double[:, ::1] stack,
               signed char[::1] out) noexcept nogil:
    cdef signed char err[BLOCK]
    cdef Py_ssize_t n = data.shape[0]
    cdef Py_ssize_t ncode = codes.shape[0]
    cdef Py_ssize_t start, m, i, pc, sp, col
    cdef int code
    cdef double value
    cdef double* top
    start = 0
    while start < n:
        m = n - start if n - start < BLOCK else BLOCK
        for i in range(m):
            err[i] = 0
        sp = 0
        for pc in range(ncode):
            code = codes[pc]
            if code == 0:
                top = &stack[sp, 0]
                col = <Py_ssize_t>operands[pc]
                for i in range(m):
                    top[i] = data[start + i, col]
                sp += 1
            elif code == 1:
                top = &stack[sp, 0]
                value = operands[pc]
                for i in range(m):
                    top[i] = value
                sp += 1
            elif code == 2:
                top = &stack[sp - 1, 0]
                for i in range(m):
                    top[i] = 1.0 - top[i]
            else:
                sp -= 1
                _binary(code, &stack[sp - 1, 0], &stack[sp, 0], err, m, scale)
        top = &stack[0, 0]
        for i in range(m):
            out[start + i] = -1 if err[i] else (1 if top[i] != 0.0 else 0)
        start += m


def run_program(codes, operands, data, double scale):
    cdef const int[::1] c = np.ascontiguousarray(codes, dtype=np.int32)
    cdef const double[::1] o = np.ascontiguousarray(operands, dtype=np.float64)
    cdef const double[:, ::1] d = np.ascontiguousarray(data, dtype=np.float64)
    if c.shape[0] == 0:
        raise ValueError("empty program")
    if c.shape[0] > MAX_STACK:
        raise ValueError("program longer than the kernel stack")
    cdef Py_ssize_t depth = 0, need = 0
    for i in range(c.shape[0]):
        if c[i] <= 1:
            if c[i] == 0 and not (0 <= o[i] < d.shape[1]):
                raise IndexError("variable column out of range")
            depth += 1
        elif c[i] >= 10:
            depth -= 1
        if depth < 1:
            raise ValueError("malformed program")
        if depth > need:
            need = depth
    if depth != 1:
        raise ValueError("malformed program")
    out = np.empty(d.shape[0], dtype=np.int8)
    cdef signed char[::1] ov = out
    cdef double[:, ::1] stack = np.empty((need, BLOCK), dtype=np.float64)
    with nogil:
        _run(c, o, d, scale, stack, ov)
    return out
