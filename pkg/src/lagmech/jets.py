"""Forward-mode jet arithmetic and small dense linear algebra.

The jet carried here is tailored to Lagrange-space geometry on a single
chart: for a scalar field f(x, y) it propagates, exactly and to machine
precision,

* the value,
* first derivatives in x and y,
* second derivatives in (y, y) and mixed (y, x),
* third derivatives in (y, y, y).

No (x, x) block is carried; every identity in scope needs position
derivatives only to first order directly, and anything deeper (such as
position derivatives of the metric) is obtained by threading one extra
dual layer through the full evaluation pipeline with
:func:`push_direction`.  That same dual layer passes through matrix
inversion inside :func:`sym_invert`, so directional derivatives of
quantities built from the inverse metric need no hand-written calculus.

A finite-difference oracle with the same block layout is provided for
testing; it is deliberately independent of the jet propagation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularMetric
from .phase import PhasePoint

__all__ = [
    "Dual",
    "Jet",
    "SymMatrix",
    "eval_jet",
    "fd_oracle",
    "push_direction",
    "jacobian_y",
    "sym_invert",
    "value_of",
    "dual_dot",
    "tower_vector",
    "ipow",
    "power",
    "apply_function",
    "SCALAR_FUNCTIONS",
]


# ---------------------------------------------------------------------------
# dual numbers (the single extra derivative layer)
# ---------------------------------------------------------------------------


class Dual:
    """First-order dual number ``val + dot * eps`` with float components.

    Used as the coordinate type when a directional derivative of an entire
    evaluation pipeline is requested; never nested.
    """

    __slots__ = ("val", "dot")

    def __init__(self, val, dot=0.0):
        self.val = float(val)
        self.dot = float(dot)

    def __repr__(self):
        return f"Dual({self.val!r}, {self.dot!r})"

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.dot + other.dot)
        return Dual(self.val + other, self.dot)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.dot - other.dot)
        return Dual(self.val - other, self.dot)

    def __rsub__(self, other):
        return Dual(other - self.val, -self.dot)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val * other.val, self.val * other.dot + self.dot * other.val)
        return Dual(self.val * other, self.dot * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            if other.val == 0.0:
                raise DomainError("division by zero in dual evaluation")
            v = self.val / other.val
            return Dual(v, (self.dot - v * other.dot) / other.val)
        if other == 0.0:
            raise DomainError("division by zero in dual evaluation")
        return Dual(self.val / other, self.dot / other)

    def __rtruediv__(self, other):
        if self.val == 0.0:
            raise DomainError("division by zero in dual evaluation")
        v = other / self.val
        return Dual(v, -v * self.dot / self.val)

    def __neg__(self):
        return Dual(-self.val, -self.dot)

    def __pos__(self):
        return self

    def __pow__(self, k):
        return power(self, k)


def value_of(v):
    """Float value part of a tower scalar."""
    return v.val if isinstance(v, Dual) else float(v)


def tower_vector(seq) -> np.ndarray:
    """Pack tower scalars into an array: float dtype when possible, object
    dtype when dual numbers are present."""
    vals = list(seq)
    if any(isinstance(v, Dual) for v in vals):
        return np.array(vals, dtype=object)
    return np.array([float(v) for v in vals])


def dual_dot(v):
    """Derivative part of a tower scalar (zero for plain numbers)."""
    return v.dot if isinstance(v, Dual) else 0.0


# ---------------------------------------------------------------------------
# elementary functions on the value tower (floats and duals)
# ---------------------------------------------------------------------------


def s_sqrt(v):
    if isinstance(v, Dual):
        if v.val <= 0.0:
            raise DomainError("sqrt requires a positive argument for derivatives")
        s = math.sqrt(v.val)
        return Dual(s, 0.5 / s * v.dot)
    if v < 0.0:
        raise DomainError("sqrt of a negative value")
    return math.sqrt(v)


def s_sin(v):
    if isinstance(v, Dual):
        return Dual(math.sin(v.val), math.cos(v.val) * v.dot)
    return math.sin(v)


def s_cos(v):
    if isinstance(v, Dual):
        return Dual(math.cos(v.val), -math.sin(v.val) * v.dot)
    return math.cos(v)


def s_tan(v):
    if isinstance(v, Dual):
        t = math.tan(v.val)
        return Dual(t, (1.0 + t * t) * v.dot)
    return math.tan(v)


def s_exp(v):
    if isinstance(v, Dual):
        e = math.exp(v.val)
        return Dual(e, e * v.dot)
    return math.exp(v)


def s_log(v):
    if isinstance(v, Dual):
        if v.val <= 0.0:
            raise DomainError("log of a non-positive value")
        return Dual(math.log(v.val), v.dot / v.val)
    if v <= 0.0:
        raise DomainError("log of a non-positive value")
    return math.log(v)


SCALAR_FUNCTIONS = {
    "sqrt": s_sqrt,
    "sin": s_sin,
    "cos": s_cos,
    "tan": s_tan,
    "exp": s_exp,
    "log": s_log,
}


def ipow(v, k: int):
    """Integer power by repeated multiplication.

    Stays smooth through zero for non-negative exponents, which plain
    ``a ** b`` through logarithms would not.  Shared by every numeric
    tower so value slots agree bit for bit across towers.
    """

    if k == 0:
        return 1.0
    if k < 0:
        return 1.0 / ipow(v, -k)
    if k == 1:
        return v
    if k == 2:
        return v * v
    if k == 3:
        return v * v * v
    if k == 4:
        vv = v * v
        return vv * vv
    r = None
    base = v
    while True:
        if k & 1:
            r = base if r is None else r * base
        k >>= 1
        if not k:
            return r
        base = base * base


def power(base, exponent):
    """Generic power: integer exponents multiply out, real exponents
    require a positive base."""

    if isinstance(exponent, (int, float)) and float(exponent).is_integer():
        k = int(exponent)
        if k < 0 and value_of(base) == 0.0:
            raise DomainError("zero raised to a negative power")
        return ipow(base, k)
    if isinstance(exponent, (int, float)):
        b = float(exponent)
        if isinstance(base, Jet):
            return base.pow_real(b)
        if isinstance(base, Dual):
            if base.val <= 0.0:
                raise DomainError("non-integer power of a non-positive base")
            f0 = math.pow(base.val, b)
            return Dual(f0, b * math.pow(base.val, b - 1.0) * base.dot)
        if base <= 0.0:
            raise DomainError("non-integer power of a non-positive base")
        return math.pow(base, b)
    # exponent is itself a varying tower value: a^b = exp(b * log(a))
    return apply_function("exp", exponent * apply_function("log", base))


def apply_function(name, v):
    """Apply a named elementary function to a tower scalar or jet."""
    if isinstance(v, Jet):
        return getattr(v, name)()
    return SCALAR_FUNCTIONS[name](v)


# ---------------------------------------------------------------------------
# block helpers
# ---------------------------------------------------------------------------

_BASIS_CACHE: dict = {}
_ZERO_CACHE: dict = {}
_SYM3_INDEX_CACHE: dict = {}


def _zeros(shape, obj):
    key = (shape, obj)
    z = _ZERO_CACHE.get(key)
    if z is None:
        z = np.full(shape, 0.0, dtype=object) if obj else np.zeros(shape)
        z.setflags(write=False)
        _ZERO_CACHE[key] = z
    return z


def _basis(n, i, obj):
    key = (n, i, obj)
    e = _BASIS_CACHE.get(key)
    if e is None:
        e = np.full(n, 0.0, dtype=object) if obj else np.zeros(n)
        e[i] = 1.0
        e.setflags(write=False)
        _BASIS_CACHE[key] = e
    return e


def _sym3_indices(n):
    """Index arrays that map every (i, j, k) to its sorted permutation."""
    idx = _SYM3_INDEX_CACHE.get(n)
    if idx is None:
        grid = np.indices((n, n, n)).reshape(3, -1)
        s = np.sort(grid, axis=0)
        idx = (s[0].reshape(n, n, n), s[1].reshape(n, n, n), s[2].reshape(n, n, n))
        _SYM3_INDEX_CACHE[n] = idx
    return idx


def _mirror3(t):
    """Force bitwise total symmetry by copying each entry from its
    sorted-index representative."""
    i, j, k = _sym3_indices(t.shape[0])
    return t[i, j, k]


def _sym_yy_y(a, b):
    """Symmetrized a_{ij} b_k over the three placements of the single index:
    a_ij b_k + a_ik b_j + a_jk b_i."""
    r = np.multiply.outer(a, b)
    return r + r.transpose(0, 2, 1) + r.transpose(2, 0, 1)


def _sym_y_yy(a, b):
    """Symmetrized a_i b_{jk} over the three placements of the single index:
    a_i b_jk + a_j b_ik + a_k b_ij."""
    p = np.multiply.outer(a, b)
    return p + p.transpose(1, 0, 2) + p.transpose(1, 2, 0)


# ---------------------------------------------------------------------------
# the jet
# ---------------------------------------------------------------------------


class Jet:
    """Truncated Taylor carrier for one scalar field evaluation.

    Blocks (``None`` above the tracked order, zero-filled after
    :meth:`finalized`):

    ``value``            scalar
    ``d_x[i]``           df/dx_i
    ``d_y[i]``           df/dy_i
    ``d_yy[i, j]``       d2f/dy_i dy_j           (bitwise symmetric)
    ``d_xy[i, j]``       d2f/dy_i dx_j           (row = y index)
    ``d_yyy[i, j, k]``   d3f/dy_i dy_j dy_k      (bitwise totally symmetric)

    Supports ``+ - * / **`` against jets of the same shape and plain
    numbers, plus the elementary functions of the expression language.
    Instances are never mutated after construction.
    """

    __slots__ = ("n", "order", "obj", "value", "d_x", "d_y", "d_yy", "d_xy", "d_yyy")

    def __init__(self, n, order, obj, value, d_x=None, d_y=None, d_yy=None, d_xy=None, d_yyy=None):
        self.n = n
        self.order = order
        self.obj = obj
        self.value = value
        self.d_x = d_x
        self.d_y = d_y
        self.d_yy = d_yy
        self.d_xy = d_xy
        self.d_yyy = d_yyy

    # -- constructors -------------------------------------------------

    @classmethod
    def constant(cls, c, n, order, obj=False):
        j = cls(n, order, obj, c)
        if order >= 1:
            j.d_x = _zeros((n,), obj)
            j.d_y = _zeros((n,), obj)
        if order >= 2:
            j.d_yy = _zeros((n, n), obj)
            j.d_xy = _zeros((n, n), obj)
        if order >= 3:
            j.d_yyy = _zeros((n, n, n), obj)
        return j

    @classmethod
    def seed_x(cls, value, i, n, order, obj=False):
        j = cls.constant(value, n, order, obj)
        if order >= 1:
            j.d_x = _basis(n, i, obj)
        return j

    @classmethod
    def seed_y(cls, value, i, n, order, obj=False):
        j = cls.constant(value, n, order, obj)
        if order >= 1:
            j.d_y = _basis(n, i, obj)
        return j

    def _const(self, c):
        return Jet.constant(c, self.n, self.order, self.obj or isinstance(c, Dual))

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet):
            o = self.order
            j = Jet(self.n, o, self.obj or other.obj, self.value + other.value)
            if o >= 1:
                j.d_x = self.d_x + other.d_x
                j.d_y = self.d_y + other.d_y
            if o >= 2:
                j.d_yy = self.d_yy + other.d_yy
                j.d_xy = self.d_xy + other.d_xy
            if o >= 3:
                j.d_yyy = self.d_yyy + other.d_yyy
            return j
        j = Jet(self.n, self.order, self.obj or isinstance(other, Dual), self.value + other)
        j.d_x, j.d_y, j.d_yy, j.d_xy, j.d_yyy = self.d_x, self.d_y, self.d_yy, self.d_xy, self.d_yyy
        return j

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Jet):
            o = self.order
            j = Jet(self.n, o, self.obj or other.obj, self.value - other.value)
            if o >= 1:
                j.d_x = self.d_x - other.d_x
                j.d_y = self.d_y - other.d_y
            if o >= 2:
                j.d_yy = self.d_yy - other.d_yy
                j.d_xy = self.d_xy - other.d_xy
            if o >= 3:
                j.d_yyy = self.d_yyy - other.d_yyy
            return j
        j = Jet(self.n, self.order, self.obj or isinstance(other, Dual), self.value - other)
        j.d_x, j.d_y, j.d_yy, j.d_xy, j.d_yyy = self.d_x, self.d_y, self.d_yy, self.d_xy, self.d_yyy
        return j

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        o = self.order
        j = Jet(self.n, o, self.obj, -self.value)
        if o >= 1:
            j.d_x = -self.d_x
            j.d_y = -self.d_y
        if o >= 2:
            j.d_yy = -self.d_yy
            j.d_xy = -self.d_xy
        if o >= 3:
            j.d_yyy = -self.d_yyy
        return j

    def __pos__(self):
        return self

    def __mul__(self, other):
        o = self.order
        if isinstance(other, Jet):
            sv, ov = self.value, other.value
            j = Jet(self.n, o, self.obj or other.obj, sv * ov)
            if o >= 1:
                j.d_x = self.d_x * ov + other.d_x * sv
                j.d_y = self.d_y * ov + other.d_y * sv
            if o >= 2:
                q = np.multiply.outer(self.d_y, other.d_y)
                j.d_yy = (self.d_yy * ov + other.d_yy * sv) + (q + q.T)
                j.d_xy = (self.d_xy * ov + other.d_xy * sv) \
                    + np.multiply.outer(self.d_y, other.d_x) \
                    + np.multiply.outer(other.d_y, self.d_x)
            if o >= 3:
                t = (self.d_yyy * ov + other.d_yyy * sv) \
                    + _sym_yy_y(self.d_yy, other.d_y) \
                    + _sym_y_yy(self.d_y, other.d_yy)
                j.d_yyy = _mirror3(t)
            return j
        j = Jet(self.n, o, self.obj or isinstance(other, Dual), self.value * other)
        if o >= 1:
            j.d_x = self.d_x * other
            j.d_y = self.d_y * other
        if o >= 2:
            j.d_yy = self.d_yy * other
            j.d_xy = self.d_xy * other
        if o >= 3:
            j.d_yyy = self.d_yyy * other
        return j

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self.order
        if not isinstance(other, Jet):
            if value_of(other) == 0.0:
                raise DomainError("division by zero")
            j = Jet(self.n, o, self.obj or isinstance(other, Dual), self.value / other)
            if o >= 1:
                j.d_x = self.d_x / other
                j.d_y = self.d_y / other
            if o >= 2:
                j.d_yy = self.d_yy / other
                j.d_xy = self.d_xy / other
            if o >= 3:
                j.d_yyy = self.d_yyy / other
            return j
        if value_of(other.value) == 0.0:
            raise DomainError("division by zero")
        w0 = self.value / other.value
        q = 1.0 / other.value
        j = Jet(self.n, o, self.obj or other.obj, w0)
        if o >= 1:
            j.d_x = (self.d_x - other.d_x * w0) * q
            j.d_y = (self.d_y - other.d_y * w0) * q
        if o >= 2:
            c = np.multiply.outer(j.d_y, other.d_y)
            j.d_yy = (self.d_yy - other.d_yy * w0 - (c + c.T)) * q
            j.d_xy = (self.d_xy - other.d_xy * w0
                      - np.multiply.outer(j.d_y, other.d_x)
                      - np.multiply.outer(other.d_y, j.d_x)) * q
        if o >= 3:
            t = (self.d_yyy - other.d_yyy * w0
                 - _sym_yy_y(j.d_yy, other.d_y)
                 - _sym_y_yy(j.d_y, other.d_yy)) * q
            j.d_yyy = _mirror3(t)
        return j

    def __rtruediv__(self, other):
        return self._const(other) / self

    def __pow__(self, k):
        return power(self, k)

    # -- chain rule ----------------------------------------------------

    def _compose(self, f0, f1, f2=None, f3=None):
        o = self.order
        j = Jet(self.n, o, self.obj, f0)
        if o >= 1:
            j.d_x = self.d_x * f1
            j.d_y = self.d_y * f1
        if o >= 2:
            j.d_yy = self.d_yy * f1 + np.multiply.outer(self.d_y, self.d_y) * f2
            j.d_xy = self.d_xy * f1 + np.multiply.outer(self.d_y, self.d_x) * f2
        if o >= 3:
            cube = np.multiply.outer(np.multiply.outer(self.d_y, self.d_y), self.d_y)
            t = self.d_yyy * f1 + _sym_yy_y(self.d_yy, self.d_y) * f2 + cube * f3
            j.d_yyy = _mirror3(t)
        return j

    def sqrt(self):
        v = self.value
        if value_of(v) <= 0.0:
            raise DomainError("sqrt requires a positive argument for derivatives")
        s = s_sqrt(v)
        f1 = 0.5 / s
        f2 = f3 = None
        if self.order >= 2:
            f2 = -0.25 / (s * v)
        if self.order >= 3:
            f3 = 0.375 / (s * v * v)
        return self._compose(s, f1, f2, f3)

    def sin(self):
        s = s_sin(self.value)
        c = s_cos(self.value)
        return self._compose(s, c, -s, -c)

    def cos(self):
        s = s_sin(self.value)
        c = s_cos(self.value)
        return self._compose(c, -s, -c, s)

    def tan(self):
        t = s_tan(self.value)
        sec2 = 1.0 + t * t
        f2 = f3 = None
        if self.order >= 2:
            f2 = 2.0 * t * sec2
        if self.order >= 3:
            f3 = 2.0 * sec2 * (1.0 + 3.0 * t * t)
        return self._compose(t, sec2, f2, f3)

    def exp(self):
        e = s_exp(self.value)
        return self._compose(e, e, e, e)

    def log(self):
        if value_of(self.value) <= 0.0:
            raise DomainError("log of a non-positive value")
        f1 = 1.0 / self.value
        f2 = f3 = None
        if self.order >= 2:
            f2 = -(f1 * f1)
        if self.order >= 3:
            f3 = 2.0 * (f1 * f1 * f1)
        return self._compose(s_log(self.value), f1, f2, f3)

    def pow_real(self, b: float):
        v = self.value
        if value_of(v) <= 0.0:
            raise DomainError("non-integer power of a non-positive base")
        if isinstance(v, Dual):
            f0 = Dual(math.pow(v.val, b), b * math.pow(v.val, b - 1.0) * v.dot)
        else:
            f0 = math.pow(v, b)
        f1 = b * power(v, b - 1.0)
        f2 = f3 = None
        if self.order >= 2:
            f2 = b * (b - 1.0) * power(v, b - 2.0)
        if self.order >= 3:
            f3 = b * (b - 1.0) * (b - 2.0) * power(v, b - 3.0)
        return self._compose(f0, f1, f2, f3)

    # -- finalization ----------------------------------------------------

    def finalized(self):
        """Zero-fill blocks above the tracked order and verify finiteness."""
        n, o, obj = self.n, self.order, self.obj
        j = Jet(n, o, obj, self.value)
        j.d_x = self.d_x if self.d_x is not None else _zeros((n,), obj)
        j.d_y = self.d_y if self.d_y is not None else _zeros((n,), obj)
        j.d_yy = self.d_yy if self.d_yy is not None else _zeros((n, n), obj)
        j.d_xy = self.d_xy if self.d_xy is not None else _zeros((n, n), obj)
        j.d_yyy = self.d_yyy if self.d_yyy is not None else _zeros((n, n, n), obj)
        # blocks above the tracked order are shared zero arrays; only the
        # propagated ones can carry non-finite values
        filled = []
        if o >= 1:
            filled += [j.d_x, j.d_y]
        if o >= 2:
            filled += [j.d_yy, j.d_xy]
        if o >= 3:
            filled.append(j.d_yyy)
        if obj:
            if not math.isfinite(value_of(j.value)):
                raise DomainError("field evaluation produced a non-finite value")
            for b in filled:
                for v in b.flat:
                    if not math.isfinite(value_of(v)):
                        raise DomainError("field evaluation produced a non-finite derivative")
        else:
            if not math.isfinite(j.value):
                raise DomainError("field evaluation produced a non-finite value")
            for b in filled:
                if not np.isfinite(b).all():
                    raise DomainError("field evaluation produced a non-finite derivative")
        return j

    def __repr__(self):
        return f"Jet(n={self.n}, order={self.order}, value={self.value!r})"


# ---------------------------------------------------------------------------
# public entry points
# ---------------------------------------------------------------------------


def eval_jet(f, p: PhasePoint, order: int = 3) -> Jet:
    """Evaluate a scalar field at ``p`` carrying derivatives up to ``order``.

    Blocks above the requested order come back zero-filled, with
    ``jet.order`` recording which blocks were actually propagated.

    Raises
    ------
    DomainError
        If the evaluation produces a non-finite value or derivative.
    """

    if order not in (0, 1, 2, 3):
        raise ValueError(f"jet order must be 0..3, got {order}")
    n = p.n
    # obj mode is tracked per seed so a dual layer in, say, the x slots
    # costs nothing for fields that never reference x: blocks stay float
    # until a dual value actually flows into them.
    xs = [Jet.seed_x(p.x[i], i, n, order, isinstance(p.x[i], Dual)) for i in range(n)]
    ys = [Jet.seed_y(p.y[i], i, n, order, isinstance(p.y[i], Dual)) for i in range(n)]
    out = f(xs, ys)
    if not isinstance(out, Jet):
        out = Jet.constant(out, n, order, isinstance(out, Dual))
    return out.finalized()


def push_direction(pipeline, p: PhasePoint, direction, wrt: str = "y"):
    """Directional derivative of an arbitrary evaluation pipeline.

    Re-runs ``pipeline`` at ``p`` with one dual layer seeded along
    ``direction`` in the ``y`` (default) or ``x`` coordinates, and returns
    the derivative part of the output.  The pipeline may involve jets,
    metric inversion, contractions: the layer is threaded through all of
    it.  Output shape mirrors the pipeline output (scalar, vector or
    matrix of floats).
    """

    n = p.n
    if len(direction) != n:
        raise ValueError("direction length must equal the dimension")
    if wrt == "y":
        q = PhasePoint(p.x, tuple(Dual(value_of(v), float(d)) for v, d in zip(p.y, direction)))
    elif wrt == "x":
        q = PhasePoint(tuple(Dual(value_of(v), float(d)) for v, d in zip(p.x, direction)), p.y)
    else:
        raise ValueError("wrt must be 'x' or 'y'")
    out = pipeline(q)
    if isinstance(out, (int, float, Dual)):
        return dual_dot(out)
    arr = np.asarray(out, dtype=object)
    flat = np.array([dual_dot(v) for v in arr.flat], dtype=float)
    return flat.reshape(arr.shape)


def jacobian_y(pipeline, p: PhasePoint) -> np.ndarray:
    """Full y-Jacobian of a vector pipeline, column by column.

    Column j holds the derivative of the pipeline along the j-th fiber
    basis direction.
    """

    n = p.n
    cols = [push_direction(pipeline, p, _basis(n, j, False), wrt="y") for j in range(n)]
    return np.stack(cols, axis=-1)


# ---------------------------------------------------------------------------
# finite-difference oracle
# ---------------------------------------------------------------------------

# Step floors per derivative order.  Central differences at the caller's h
# are meaningless for second and third derivatives once h drops below the
# roundoff balance point (~eps^(1/4) and ~eps^(1/5) times the value scale),
# so the base step is clamped upward per order and scaled with the value
# magnitude; third-order stencils are Richardson-extrapolated twice, which
# pushes their truncation to O(step^6) and lets the step stay large enough
# to keep roundoff in check.  First-order blocks always honor h.
_FD_FLOOR_2 = 1.5e-4
_FD_FLOOR_3 = 6.0e-3


def fd_oracle(f, p: PhasePoint, order: int = 3, h: float = 1e-5) -> Jet:
    """Central-difference estimate of the same blocks as :func:`eval_jet`.

    Pure value-level evaluations; entirely independent of the jet
    propagation.  Truncation is O(step^2) per stencil before
    extrapolation.  Intended as a test oracle, not a production
    differentiator.
    """

    if h <= 0.0:
        raise ValueError("h must be positive")
    n = p.n
    x0 = np.array([float(v) for v in p.x])
    y0 = np.array([float(v) for v in p.y])

    def ev(dx, dy):
        q = PhasePoint(x0 + dx, y0 + dy)
        return float(f(q.x, q.y))

    zero = np.zeros(n)
    f0 = ev(zero, zero)
    scale = max(1.0, (abs(f0) / 2.0) ** (1.0 / 3.0))
    s1 = h
    s2 = max(h, _FD_FLOOR_2) * scale
    s3 = max(h, _FD_FLOOR_3) * scale

    out = Jet.constant(f0, n, order)
    if order >= 1:
        d_x = np.zeros(n)
        d_y = np.zeros(n)
        for i in range(n):
            e = np.zeros(n)
            e[i] = s1
            d_x[i] = (ev(e, zero) - ev(-e, zero)) / (2.0 * s1)
            d_y[i] = (ev(zero, e) - ev(zero, -e)) / (2.0 * s1)
        out.d_x, out.d_y = d_x, d_y
    if order >= 2:
        d_yy = np.zeros((n, n))
        d_xy = np.zeros((n, n))
        for i in range(n):
            ei = np.zeros(n)
            ei[i] = s2
            d_yy[i, i] = (ev(zero, ei) - 2.0 * f0 + ev(zero, -ei)) / (s2 * s2)
            for j in range(i + 1, n):
                ej = np.zeros(n)
                ej[j] = s2
                v = (ev(zero, ei + ej) - ev(zero, ei - ej)
                     - ev(zero, ej - ei) + ev(zero, -ei - ej)) / (4.0 * s2 * s2)
                d_yy[i, j] = v
                d_yy[j, i] = v
            for j in range(n):
                ex = np.zeros(n)
                ex[j] = s2
                d_xy[i, j] = (ev(ex, ei) - ev(-ex, ei)
                              - ev(ex, -ei) + ev(-ex, -ei)) / (4.0 * s2 * s2)
        out.d_yy, out.d_xy = d_yy, d_xy
    if order >= 3:
        def third(a, b, c, s):
            acc = 0.0
            for sa in (1.0, -1.0):
                for sb in (1.0, -1.0):
                    for sc in (1.0, -1.0):
                        shift = np.zeros(n)
                        shift[a] += sa * s
                        shift[b] += sb * s
                        shift[c] += sc * s
                        acc += sa * sb * sc * ev(zero, shift)
            return acc / (8.0 * s * s * s)

        d_yyy = np.zeros((n, n, n))
        for a in range(n):
            for b in range(a, n):
                for c in range(b, n):
                    t1 = third(a, b, c, s3)
                    t2 = third(a, b, c, s3 / 2.0)
                    t4 = third(a, b, c, s3 / 4.0)
                    r1 = (4.0 * t2 - t1) / 3.0
                    r2 = (4.0 * t4 - t2) / 3.0
                    v = (16.0 * r2 - r1) / 15.0
                    for idx in {(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)}:
                        d_yyy[idx] = v
        out.d_yyy = d_yyy
    return out.finalized()


# ---------------------------------------------------------------------------
# symmetric inversion with the dual layer threaded through
# ---------------------------------------------------------------------------


@dataclass
class SymMatrix:
    """A symmetric matrix with its inverse and a rank diagnostic.

    ``entries @ inverse`` equals the identity to roundoff scaled by the
    condition number.  Entries may carry dual numbers; the eigenvalue
    estimate always refers to the float value parts.
    """

    entries: np.ndarray
    inverse: np.ndarray
    min_abs_eigen_estimate: float
    max_abs_eigen: float

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def _value_shadow(m):
    return np.array([[value_of(v) for v in row] for row in m])


def _gauss_jordan(m, obj):
    """Invert by Gauss-Jordan with partial pivoting on the value parts.

    Generic over the scalar tower: dividing and multiplying duals keeps
    the derivative layer flowing through the factorization itself.
    """

    n = m.shape[0]
    a = [list(row) for row in m]
    inv = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    for col in range(n):
        piv_row = max(range(col, n), key=lambda r: abs(value_of(a[r][col])))
        if value_of(a[piv_row][col]) == 0.0:
            raise SingularMetric("exact zero pivot during inversion")
        if piv_row != col:
            a[col], a[piv_row] = a[piv_row], a[col]
            inv[col], inv[piv_row] = inv[piv_row], inv[col]
        piv = a[col][col]
        for j in range(n):
            a[col][j] = a[col][j] / piv
            inv[col][j] = inv[col][j] / piv
        for r in range(n):
            if r == col:
                continue
            factor = a[r][col]
            if value_of(factor) == 0.0:
                continue
            for j in range(n):
                a[r][j] = a[r][j] - factor * a[col][j]
                inv[r][j] = inv[r][j] - factor * inv[col][j]
    dtype = object if obj else float
    return np.array(inv, dtype=dtype)


def sym_invert(m, rel_tol: float = 1e-10) -> SymMatrix:
    """Symmetrize, gate on rank, and invert a small dense matrix.

    Raises
    ------
    SingularMetric
        When the smallest eigenvalue magnitude of the value part falls
        below ``rel_tol`` times the largest; beyond that point the inverse
        amplifies noise past every tolerance used downstream.
    ValueError
        If the input is not symmetric to 1e-12 relative.
    """

    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("sym_invert expects a square matrix")
    obj = any(isinstance(v, Dual) for v in m.flat)
    shadow = _value_shadow(m) if obj else m.astype(float)
    norm = np.abs(shadow).max()
    if np.abs(shadow - shadow.T).max() > 1e-12 * (1.0 + norm):
        raise ValueError("matrix is not symmetric within 1e-12 relative")
    ms = (m + m.T) * 0.5
    shadow = (shadow + shadow.T) * 0.5
    if ms.shape[0] == 1:
        mn = mx = abs(shadow[0, 0])
    elif ms.shape[0] == 2:
        # closed-form symmetric 2x2 spectrum
        a, b, d = shadow[0, 0], shadow[0, 1], shadow[1, 1]
        half_tr = 0.5 * (a + d)
        disc = math.sqrt(max(0.0, (0.5 * (a - d)) ** 2 + b * b))
        e1, e2 = abs(half_tr + disc), abs(half_tr - disc)
        mn, mx = min(e1, e2), max(e1, e2)
    else:
        eig = np.linalg.eigvalsh(shadow)
        mn = float(np.abs(eig).min())
        mx = float(np.abs(eig).max())
    if mx == 0.0 or mn < rel_tol * mx:
        raise SingularMetric(
            f"metric rank failure: |eig| range [{mn:.3e}, {mx:.3e}]",
            min_abs_eigen=mn,
            max_abs_eigen=mx,
        )
    inv = _gauss_jordan(ms, obj)
    return SymMatrix(ms if obj else ms.astype(float), inv, mn, mx)
