"""Forward-mode automatic differentiation for polarized complex evaluators.

Field evaluators throughout this package are written in *polarized* form
``f(z, zb)``: the holomorphic and antiholomorphic coordinates enter as
independent argument lists, and on the real slice ``zb[k] == conj(z[k])``.
Because a polarized evaluator only reaches its arguments through
arithmetic, ``exp_``, ``log_`` and ``sqrt_``, Wirtinger derivatives reduce
to ordinary single-slot forward-mode derivatives:

    d/dz^mu  f  ->  perturb z[mu]
    d/dzb^mu f  ->  perturb zb[mu]

Nesting is handled with tagged epsilons: each derivative pass allocates a
fresh tag, distinct tags are independent nilpotents, and mixed second or
third derivatives come out exact (no step-size error).

Five-point finite-difference helpers live here too; they are the
independent cross-check used by ``metric_jet`` and by the test oracles.
"""

from __future__ import annotations

import cmath
import itertools
from typing import Callable, Sequence

from .errors import SingularMetricError

_TAGS = itertools.count(1)


class Dual:
    """Truncated number ``val + eps * e`` for one perturbation direction.

    ``val`` and ``eps`` may themselves be ``Dual`` instances carrying a
    *smaller* tag; the largest tag always sits on top. Only the derivative
    drivers below construct seeds, which preserves that invariant.
    """

    __slots__ = ("val", "eps", "tag")

    def __init__(self, val, eps, tag: int):
        self.val = val
        self.eps = eps
        self.tag = tag

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Dual):
            if other.tag == self.tag:
                return Dual(self.val + other.val, self.eps + other.eps, self.tag)
            if other.tag > self.tag:
                return Dual(self + other.val, other.eps, other.tag)
        return Dual(self.val + other, self.eps, self.tag)

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.val, -self.eps, self.tag)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Dual):
            if other.tag == self.tag:
                return Dual(
                    self.val * other.val,
                    self.val * other.eps + self.eps * other.val,
                    self.tag,
                )
            if other.tag > self.tag:
                return Dual(self * other.val, self * other.eps, other.tag)
        return Dual(self.val * other, self.eps * other, self.tag)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            if other.tag == self.tag:
                return Dual(
                    self.val / other.val,
                    (self.eps * other.val - self.val * other.eps)
                    / (other.val * other.val),
                    self.tag,
                )
            if other.tag > self.tag:
                return other.__rtruediv__(self)
        return Dual(self.val / other, self.eps / other, self.tag)

    def __rtruediv__(self, other):
        # other / self with other a constant relative to self.tag
        return Dual(
            other / self.val,
            -other * self.eps / (self.val * self.val),
            self.tag,
        )

    def __pow__(self, k):
        if isinstance(k, int):
            if k == 0:
                return 1.0 + 0j
            if k < 0:
                return 1.0 / (self ** (-k))
            out = self
            for _ in range(k - 1):
                out = out * self
            return out
        return exp_(k * log_(self))

    def conjugate(self):
        """Entrywise conjugate.

        Only valid inside the reflection composition ``polar_conj`` (conj
        of inputs and output together), where the chain rule for the
        doubly antiholomorphic composite is again entrywise conjugation.
        """
        return Dual(conj_(self.val), conj_(self.eps), self.tag)

    def __repr__(self):
        return f"Dual({self.val!r}, {self.eps!r}, tag={self.tag})"


def value(x) -> complex:
    """Collapse nested duals to the underlying complex value."""
    while isinstance(x, Dual):
        x = x.val
    return complex(x)


def exp_(x):
    if isinstance(x, Dual):
        e = exp_(x.val)
        return Dual(e, x.eps * e, x.tag)
    return cmath.exp(x)


def log_(x):
    if isinstance(x, Dual):
        return Dual(log_(x.val), x.eps / x.val, x.tag)
    return cmath.log(x)


def sqrt_(x):
    if isinstance(x, Dual):
        s = sqrt_(x.val)
        return Dual(s, x.eps / (2.0 * s), x.tag)
    return cmath.sqrt(x)


def conj_(x):
    if isinstance(x, Dual):
        return x.conjugate()
    return complex(x).conjugate()


def _eps(x, tag: int):
    """Coefficient of the tag's epsilon inside a (possibly nested) value."""
    if isinstance(x, Dual):
        if x.tag == tag:
            return x.eps
        if x.tag > tag:
            return Dual(_eps(x.val, tag), _eps(x.eps, tag), x.tag)
    return 0j


def tmap(fn, obj):
    """Map ``fn`` over a scalar or arbitrarily nested lists of scalars."""
    if isinstance(obj, list):
        return [tmap(fn, o) for o in obj]
    return fn(obj)


# -- derivative drivers ------------------------------------------------

Polarized = Callable[[Sequence, Sequence], object]


def d_holo(f: Polarized, z: Sequence, zb: Sequence, mu: int):
    """Holomorphic derivative of ``f`` with respect to ``z[mu]``."""
    tag = next(_TAGS)
    z2 = list(z)
    z2[mu] = Dual(z[mu], 1.0 + 0j, tag)
    return tmap(lambda u: _eps(u, tag), f(z2, list(zb)))


def d_anti(f: Polarized, z: Sequence, zb: Sequence, nu: int):
    """Antiholomorphic derivative of ``f`` with respect to ``zb[nu]``."""
    tag = next(_TAGS)
    zb2 = list(zb)
    zb2[nu] = Dual(zb[nu], 1.0 + 0j, tag)
    return tmap(lambda u: _eps(u, tag), f(list(z), zb2))


def d_dir(f: Polarized, z: Sequence, zb: Sequence, k: int, n: int):
    """Derivative in direction ``k`` of the 2n-index convention.

    Directions ``0..n-1`` are holomorphic, ``n..2n-1`` antiholomorphic.
    """
    if k < n:
        return d_holo(f, z, zb, k)
    return d_anti(f, z, zb, k - n)


def d_second(f: Polarized, z: Sequence, zb: Sequence, j: int, k: int, n: int):
    """Exact second derivative in directions ``j`` then ``k``."""

    def inner(z2, zb2):
        return d_dir(f, z2, zb2, k, n)

    return d_dir(inner, z, zb, j, n)


def polar_conj(f: Polarized) -> Polarized:
    """Polarized extension of the complex conjugate of a field.

    If ``f`` restricts to ``F`` on the real slice, the returned evaluator
    restricts to ``conj(F)`` and stays holomorphic in each slot (Schwarz
    reflection: conjugate the swapped inputs and the output).
    """

    def fbar(z, zb):
        zr = [conj_(w) for w in zb]
        zbr = [conj_(w) for w in z]
        return tmap(conj_, f(zr, zbr))

    return fbar


# -- small generic linear algebra ---------------------------------------


def generic_inverse(m, n: int):
    """Invert an ``n x n`` matrix of scalars or duals (Gauss-Jordan).

    Pivots on the magnitude of the underlying complex value, so nested
    duals are handled transparently. Raises ``SingularMetricError`` when
    no acceptable pivot exists.
    """
    a = [list(row) for row in m]
    inv = [[1.0 + 0j if i == j else 0j for j in range(n)] for i in range(n)]
    scale = max(abs(value(a[i][j])) for i in range(n) for j in range(n))
    floor = 1e-13 * max(scale, 1e-30)
    for col in range(n):
        piv_row = max(range(col, n), key=lambda r: abs(value(a[r][col])))
        if abs(value(a[piv_row][col])) < floor:
            raise SingularMetricError("matrix is singular to working precision")
        if piv_row != col:
            a[col], a[piv_row] = a[piv_row], a[col]
            inv[col], inv[piv_row] = inv[piv_row], inv[col]
        piv = a[col][col]
        a[col] = [x / piv for x in a[col]]
        inv[col] = [x / piv for x in inv[col]]
        for r in range(n):
            if r == col:
                continue
            factor = a[r][col]
            if isinstance(factor, complex) and factor == 0:
                continue
            a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
            inv[r] = [x - factor * y for x, y in zip(inv[r], inv[col])]
    return inv


def transpose(m):
    return [list(row) for row in zip(*m)]


# -- finite-difference cross-checks -------------------------------------


def _fd1(fn, x: float, h: float):
    """Five-point first derivative of a scalar-argument callable."""
    return (fn(x - 2 * h) - 8 * fn(x - h) + 8 * fn(x + h) - fn(x + 2 * h)) / (12 * h)


def _shift(coords, mu, dx, dy):
    out = list(coords)
    out[mu] = out[mu] + complex(dx, dy)
    return out


def fd_wirtinger(point_fn, coords: Sequence[complex], mu: int, h: float = 1e-5,
                 anti: bool = False):
    """Finite-difference Wirtinger derivative of a point evaluator.

    ``point_fn`` maps a coordinate list to an ndarray-like value; the
    returned derivative is ``(d/dx -+ i d/dy)/2`` in coordinate ``mu``.
    """
    dx = _fd1(lambda t: point_fn(_shift(coords, mu, t, 0.0)), 0.0, h)
    dy = _fd1(lambda t: point_fn(_shift(coords, mu, 0.0, t)), 0.0, h)
    sign = 1j if anti else -1j
    return 0.5 * (dx + sign * dy)


def fd_wirtinger_mixed(point_fn, coords: Sequence[complex], mu: int, nu: int,
                       h: float = 1e-4):
    """Finite-difference mixed second derivative d_mu d_nubar."""

    def inner(c):
        return fd_wirtinger(point_fn, c, nu, h, anti=True)

    return fd_wirtinger(inner, coords, mu, h, anti=False)
