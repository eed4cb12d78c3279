"""Real trigonometric polynomials on the circle R/Z.

A :class:`TrigPoly` stores ``mean + sum_k a_k cos(2 pi k x) + b_k sin(2 pi k x)``
for k = 1..D as dense coefficient arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

TWO_PI = 2.0 * np.pi


_CHUNK = 1 << 20


def _powers(e, D):
    """Table e^k, k = 1..D, as a blocked outer product of short power runs."""
    B = max(1, int(np.sqrt(D)))
    nb = -(-D // B)
    low = np.cumprod(np.broadcast_to(e[:, None], (e.size, B)), axis=1)  # e^1..e^B
    high = np.cumprod(np.broadcast_to(low[:, -1:], (e.size, nb)), axis=1) / low[:, -1:]  # e^0, e^B, ...
    return (high[:, :, None] * low[:, None, :]).reshape(e.size, nb * B)[:, :D]


_TAYLOR_MIN_DEGREE = 48
_TAYLOR_ORDER = 16


def _taylor_table(p):
    """Cached table p^{(n)}(j/G)/n! on a grid of G >= 8 D points.

    Within half a grid cell 2 pi D |dx| <= pi/8, so the local Taylor sum to
    order 16 is exact to roundoff relative to the coefficient norm.
    """
    tab = p.__dict__.get("_taylor")
    if tab is not None:
        return tab
    D = p.a.size
    G = 1 << max(6, int(np.ceil(np.log2(8 * D))))
    c = np.zeros(G // 2 + 1, dtype=complex)
    c[1:D + 1] = 0.5 * (p.a - 1j * p.b)
    ik = 1j * TWO_PI * np.arange(G // 2 + 1)
    tab = np.empty((G, _TAYLOR_ORDER + 1))
    fact = 1.0
    for n in range(_TAYLOR_ORDER + 1):
        if n:
            c = c * ik
            fact *= n
        tab[:, n] = np.fft.irfft(c * G, G) / fact
    tab[:, 0] += p.mean
    object.__setattr__(p, "_taylor", tab)
    return tab


def _eval_taylor(p, flat):
    tab = _taylor_table(p)
    G = tab.shape[0]
    u = (flat - np.floor(flat)) * G
    r = np.floor(u + 0.5)
    d = (u - r) / G
    rows = tab[r.astype(np.int64) % G]
    acc = rows[:, -1].copy()
    for n in range(_TAYLOR_ORDER - 1, -1, -1):
        acc *= d
        acc += rows[:, n]
    return acc


def eval_stack(polys, x):
    """Evaluate several TrigPolys at the same real points, shape (len(polys), *x.shape).

    Low degrees share one table of powers e^{2 pi i k x} (a single complex
    matmul); high degrees use cached local Taylor tables.
    """
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1)
    out = np.empty((len(polys), flat.size))
    small = []
    for i, p in enumerate(polys):
        if p.a.size >= _TAYLOR_MIN_DEGREE and flat.size:
            out[i] = _eval_taylor(p, flat)
        else:
            out[i] = p.mean
            if p.a.size:
                small.append(i)
    if small and flat.size:
        D = max(polys[i].a.size for i in small)
        C = np.zeros((D, len(small)), dtype=complex)
        for j, i in enumerate(small):
            p = polys[i]
            C[:p.a.size, j] = p.a - 1j * p.b
        E = np.exp(1j * TWO_PI * (flat - np.floor(flat)))
        step = max(1, _CHUNK // D)
        idx = np.array(small)
        for s in range(0, flat.size, step):
            out[idx, s:s + step] += (_powers(E[s:s + step], D) @ C).real.T
    return out.reshape((len(polys),) + x.shape)


def _as_array(v):
    return np.asarray(v, dtype=float).reshape(-1)


@dataclass(frozen=True)
class TrigPoly:
    mean: float
    a: np.ndarray  # a[k-1] multiplies cos(2 pi k x)
    b: np.ndarray  # b[k-1] multiplies sin(2 pi k x)

    def __post_init__(self):
        a, b = _as_array(self.a), _as_array(self.b)
        n = max(a.size, b.size)
        a = np.pad(a, (0, n - a.size))
        b = np.pad(b, (0, n - b.size))
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "mean", float(self.mean))

    # ------------------------------------------------------------------ build
    @classmethod
    def constant(cls, c):
        return cls(c, [], [])

    @classmethod
    def cos_mode(cls, k, amp=1.0):
        a = np.zeros(k)
        a[k - 1] = amp
        return cls(0.0, a, np.zeros(k))

    @classmethod
    def sin_mode(cls, k, amp=1.0):
        b = np.zeros(k)
        b[k - 1] = amp
        return cls(0.0, np.zeros(k), b)

    @classmethod
    def from_harmonics(cls, mean, harmonics):
        """Build from ``[(k, a_k, b_k), ...]``."""
        D = max((k for k, _, _ in harmonics), default=0)
        a, b = np.zeros(D), np.zeros(D)
        for k, ak, bk in harmonics:
            if k < 1:
                raise ValueError("harmonic frequencies must be positive")
            a[k - 1] += ak
            b[k - 1] += bk
        return cls(mean, a, b)

    @classmethod
    def from_complex(cls, c):
        """From coefficients c_k, k = -D..D (length 2D+1, Hermitian)."""
        c = np.asarray(c, dtype=complex)
        D = (c.size - 1) // 2
        pos = c[D + 1:]
        return cls(c[D].real, 2.0 * pos.real, -2.0 * pos.imag)

    @classmethod
    def from_samples(cls, values, degree=None):
        """Trigonometric interpolant of samples at x_m = m/n.

        For even n the Nyquist term is a pure cosine, so the interpolant is
        unique and has degree <= n/2.
        """
        v = _as_array(values)
        n = v.size
        F = np.fft.rfft(v) / n
        a = 2.0 * F[1:].real
        b = -2.0 * F[1:].imag
        if n % 2 == 0:
            a[-1] = F[-1].real
            b[-1] = 0.0
        p = cls(F[0].real, a, b)
        if degree is not None:
            p = p.truncate_degree(degree)
        return p

    # ------------------------------------------------------------ accessors
    @property
    def degree(self):
        nz = np.nonzero((self.a != 0.0) | (self.b != 0.0))[0]
        return int(nz[-1] + 1) if nz.size else 0

    @property
    def harmonics(self):
        return [(k + 1, float(self.a[k]), float(self.b[k]))
                for k in range(self.a.size) if self.a[k] != 0.0 or self.b[k] != 0.0]

    def complex_coeffs(self, D=None):
        """Coefficients c_k for k = -D..D."""
        D = self.a.size if D is None else D
        c = np.zeros(2 * D + 1, dtype=complex)
        m = min(D, self.a.size)
        pos = 0.5 * (self.a[:m] - 1j * self.b[:m])
        c[D] = self.mean
        c[D + 1:D + 1 + m] = pos
        c[D - m:D][::-1] = np.conj(pos)
        return c

    def coeff_norm(self):
        """Sum of coefficient magnitudes; bounds the sup norm."""
        return abs(self.mean) + float(np.sum(np.hypot(self.a, self.b)))

    # ------------------------------------------------------------ evaluate
    def __call__(self, x):
        if hasattr(x, "is_jet"):
            return self._eval_generic(x)
        if np.iscomplexobj(x):
            return self.eval_complex(x)
        x = np.asarray(x, dtype=float)
        if self.a.size == 0:
            return np.full(x.shape, self.mean) if x.ndim else self.mean
        out = eval_stack((self,), x)[0]
        return out if x.ndim else float(out)

    def eval_complex(self, z):
        """Evaluate at complex points (strip evaluation)."""
        z = np.asarray(z, dtype=complex)
        D = self.a.size
        if D == 0:
            return np.full(z.shape, self.mean, dtype=complex)
        Ep = np.exp(1j * TWO_PI * z)
        Em = np.exp(-1j * TWO_PI * z)
        cp = 0.5 * (self.a - 1j * self.b)
        cm = 0.5 * (self.a + 1j * self.b)
        accp = np.full(z.shape, cp[-1], dtype=complex)
        accm = np.full(z.shape, cm[-1], dtype=complex)
        for k in range(D - 2, -1, -1):
            accp = accp * Ep + cp[k]
            accm = accm * Em + cm[k]
        return accp * Ep + accm * Em + self.mean

    def _eval_generic(self, x):
        from .jets import jcos, jsin
        out = x * 0.0 + self.mean
        for k in range(self.a.size):
            if self.a[k] != 0.0:
                out = out + self.a[k] * jcos(TWO_PI * (k + 1) * x)
            if self.b[k] != 0.0:
                out = out + self.b[k] * jsin(TWO_PI * (k + 1) * x)
        return out

    def samples(self, n):
        """Values on x_m = m/n; exact when n > 2 * degree."""
        if n <= 2 * self.a.size:
            return self(np.arange(n) / n)
        F = np.zeros(n // 2 + 1, dtype=complex)
        F[0] = self.mean
        D = self.a.size
        F[1:D + 1] = 0.5 * (self.a - 1j * self.b)
        return np.fft.irfft(F * n, n)

    def sup_norm(self, n=None):
        n = n or max(1024, 8 * self.a.size + 8)
        return float(np.max(np.abs(self.samples(n))))

    # ------------------------------------------------------------- calculus
    def deriv(self, order=1):
        p = self
        for _ in range(order):
            k = TWO_PI * np.arange(1, p.a.size + 1)
            p = TrigPoly(0.0, k * p.b, -k * p.a)
        return p

    def antideriv(self, tol=1e-13):
        """Mean-free antiderivative; requires a (numerically) zero mean."""
        if abs(self.mean) > tol * max(1.0, self.coeff_norm()):
            raise ValueError(f"antiderivative needs zero mean, got {self.mean:.3e}")
        k = TWO_PI * np.arange(1, self.a.size + 1)
        return TrigPoly(0.0, -self.b / k, self.a / k)

    def shift(self, theta):
        """x -> p(x + theta)."""
        k = TWO_PI * np.arange(1, self.a.size + 1) * theta
        c, s = np.cos(k), np.sin(k)
        return TrigPoly(self.mean, self.a * c + self.b * s, self.b * c - self.a * s)

    # ------------------------------------------------------------ algebra
    def __add__(self, other):
        if not isinstance(other, TrigPoly):
            return TrigPoly(self.mean + float(other), self.a, self.b)
        n = max(self.a.size, other.a.size)
        return TrigPoly(self.mean + other.mean,
                        np.pad(self.a, (0, n - self.a.size)) + np.pad(other.a, (0, n - other.a.size)),
                        np.pad(self.b, (0, n - self.b.size)) + np.pad(other.b, (0, n - other.b.size)))

    __radd__ = __add__

    def __neg__(self):
        return TrigPoly(-self.mean, -self.a, -self.b)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, TrigPoly):
            s = float(other)
            return TrigPoly(s * self.mean, s * self.a, s * self.b)
        c1, c2 = self.complex_coeffs(), other.complex_coeffs()
        if c1.size * c2.size > 4096:
            c = fftconvolve(c1, c2)
        else:
            c = np.convolve(c1, c2)
        c = 0.5 * (c + np.conj(c[::-1]))
        return TrigPoly.from_complex(c)

    __rmul__ = __mul__

    def truncate_degree(self, D):
        return TrigPoly(self.mean, self.a[:D], self.b[:D])

    def trimmed(self, rel_tol=0.0):
        """Drop trailing harmonics whose magnitude is <= rel_tol * coeff_norm."""
        mag = np.hypot(self.a, self.b)
        cut = rel_tol * max(self.coeff_norm(), 1e-300)
        keep = np.nonzero(mag > cut)[0]
        D = int(keep[-1] + 1) if keep.size else 0
        return self.truncate_degree(D)

    def __repr__(self):
        return f"TrigPoly(mean={self.mean:.6g}, degree={self.degree})"
