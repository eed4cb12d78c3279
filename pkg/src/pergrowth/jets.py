"""Truncated bivariate Taylor series (jets) of total order <= 3.

Maps evaluate through the same node code on floats, numpy arrays or jets;
the only transcendental functions needed are sin and cos, routed through
:func:`jsin` / :func:`jcos`.
"""

from __future__ import annotations

import numpy as np

ORDER = 3


class Jet:
    is_jet = True
    __array_priority__ = 100

    def __init__(self, c):
        self.c = np.asarray(c, dtype=complex)

    @classmethod
    def const(cls, v):
        c = np.zeros((ORDER + 1, ORDER + 1), dtype=complex)
        c[0, 0] = v
        return cls(c)

    @classmethod
    def variable(cls, which, value=0.0):
        j = cls.const(value)
        j.c[(1, 0) if which == 0 else (0, 1)] = 1.0
        return j

    @classmethod
    def linear(cls, value, du, dv):
        j = cls.const(value)
        j.c[1, 0] = du
        j.c[0, 1] = dv
        return j

    @property
    def value(self):
        return self.c[0, 0]

    def coeff(self, i, j):
        return self.c[i, j]

    def _wrap(self, other):
        return other if isinstance(other, Jet) else Jet.const(other)

    def __add__(self, other):
        return Jet(self.c + self._wrap(other).c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __sub__(self, other):
        return Jet(self.c - self._wrap(other).c)

    def __rsub__(self, other):
        return Jet(self._wrap(other).c - self.c)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c * other)
        a, b = self.c, other.c
        out = np.zeros_like(a)
        for i in range(ORDER + 1):
            for j in range(ORDER + 1 - i):
                if a[i, j] == 0:
                    continue
                for k in range(ORDER + 1 - i - j):
                    for m in range(ORDER + 1 - i - j - k):
                        out[i + k, j + m] += a[i, j] * b[k, m]
        return Jet(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.c / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n):
        out = Jet.const(1.0)
        for _ in range(int(n)):
            out = out * self
        return out

    def nilpotent(self):
        c = self.c.copy()
        c[0, 0] = 0.0
        return Jet(c)

    def reciprocal(self):
        a0 = self.value
        n = self.nilpotent() / a0
        # 1/(a0 (1+n)) = (1 - n + n^2 - n^3) / a0
        return (Jet.const(1.0) - n + n * n - n * n * n) / a0


def jsin(x):
    if isinstance(x, Jet):
        a0, n = x.value, x.nilpotent()
        n2 = n * n
        n3 = n2 * n
        cosn = Jet.const(1.0) - n2 * 0.5
        sinn = n - n3 * (1.0 / 6.0)
        return cosn * np.sin(a0) + sinn * np.cos(a0)
    return np.sin(x)


def jcos(x):
    if isinstance(x, Jet):
        a0, n = x.value, x.nilpotent()
        n2 = n * n
        n3 = n2 * n
        cosn = Jet.const(1.0) - n2 * 0.5
        sinn = n - n3 * (1.0 / 6.0)
        return cosn * np.cos(a0) - sinn * np.sin(a0)
    return np.cos(x)
