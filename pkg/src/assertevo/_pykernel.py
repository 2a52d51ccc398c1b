"""Numpy fallback for the postfix assertion kernel.

Vectorises over rows: each opcode is applied to whole columns at once. Must
stay bit-for-bit consistent with ``_ckernel.pyx``.
"""

import numpy as np

_EXACT = 4503599627370496.0  # 2**52: at this magnitude every double is integral


def round_scaled(values, scale):
    scaled = values * scale
    keep = ~(np.abs(scaled) < _EXACT)
    with np.errstate(invalid="ignore"):
        rounded = np.rint(scaled) / scale
    return np.where(keep, values, rounded)


def run_program(codes, operands, data, scale):
    n = data.shape[0]
    stack = []
    error = np.zeros(n, dtype=bool)
    with np.errstate(all="ignore"):
        for code, operand in zip(codes.tolist(), operands.tolist()):
            if code == 0:
                stack.append(data[:, int(operand)])
                continue
            if code == 1:
                stack.append(np.full(n, operand))
                continue
            if code == 2:
                stack.append(1.0 - stack.pop())
                continue
            b = stack.pop()
            a = stack.pop()
            if code == 10:
                r = a + b
            elif code == 11:
                r = a - b
            elif code == 12:
                r = a * b
            elif code == 13 or code == 14:
                zero = b == 0.0
                error |= zero
                r = a / b if code == 13 else np.fmod(a, b)
            elif code == 20 or code == 21:
                eq = round_scaled(a, scale) == round_scaled(b, scale)
                r = (eq if code == 20 else ~eq).astype(np.float64)
            elif code == 22:
                r = (a < b).astype(np.float64)
            elif code == 23:
                r = (a <= b).astype(np.float64)
            elif code == 24:
                r = (a > b).astype(np.float64)
            elif code == 25:
                r = (a >= b).astype(np.float64)
            else:
                x = a != 0.0
                y = b != 0.0
                if code == 30:
                    r = x & y
                elif code == 31:
                    r = x | y
                elif code == 32:
                    r = x ^ y
                elif code == 33:
                    r = ~x | y
                elif code == 34:
                    r = x == y
                else:
                    raise ValueError(f"bad opcode {code}")
                r = r.astype(np.float64)
            stack.append(r)
    result = stack.pop()
    out = (result != 0.0).astype(np.int8)
    out[error] = -1
    return out
