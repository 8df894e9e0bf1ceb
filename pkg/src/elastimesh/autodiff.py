"""Automatic differentiation: hyper-dual forward mode and a reverse tape.

Two cooperating mechanisms:

* ``HyperDual`` numbers carry a value, two directional first derivatives and
  the mixed second derivative through arbitrary smooth arithmetic.  Three
  seeded forward passes of the mesh map give every first and second partial
  with respect to the computational coordinates, with no truncation error.

* ``Tape``/``Var`` implement reverse mode for parameter gradients.  A tape
  records primitive real operations in evaluation order; ``backprop`` runs
  one reverse sweep.  Hyper-dual components may themselves be tape variables,
  so the gradient of a loss that contains second derivatives is an ordinary
  reverse sweep over the recorded real arithmetic.

Tape values are either scalars or arrays batched over collocation points.
Each recorded operation is still primitive real arithmetic, applied
elementwise (or as a plain matrix product); batching exists purely so the
per-epoch cost is a few thousand numpy calls instead of tens of millions of
interpreted ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import DomainEvaluationError, InvalidArgumentError, NumericError

_SINGULAR_TOL = 1e-12


def _value_of(u):
    """Plain numeric payload of a component (Var -> recorded value)."""
    return u.value if isinstance(u, Var) else u


# ---------------------------------------------------------------------------
# Reverse-mode tape
# ---------------------------------------------------------------------------

@dataclass
class TapeOp:
    """One recorded primitive: opcode, operand slots, constant payload."""

    code: str
    inputs: tuple[int, ...]
    aux: Any = None


class Tape:
    """Ordered record of primitive real operations.

    Slot ``i`` holds the result of ``ops[i]``; operands always refer to
    earlier slots, so the record is topologically ordered by construction.
    Leaves are explicit ``"leaf"`` ops; leaves created through :meth:`param`
    are flagged as parameters and receive gradients from :func:`backprop`.
    """

    def __init__(self):
        self.ops: list[TapeOp] = []
        self.values: list[Any] = []
        self.param_slots: list[int] = []

    def __len__(self) -> int:
        return len(self.ops)

    def _push(self, code: str, inputs: tuple[int, ...], aux, value) -> "Var":
        self.ops.append(TapeOp(code, inputs, aux))
        self.values.append(value)
        return Var(self, len(self.ops) - 1)

    def leaf(self, value) -> "Var":
        value = np.asarray(value, dtype=float)
        if value.ndim == 0:
            value = float(value)
        return self._push("leaf", (), value, value)

    def param(self, value) -> "Var":
        var = self.leaf(value)
        self.param_slots.append(var.slot)
        return var

    def record(self, code: str, operands: tuple["Var", ...], aux=None) -> "Var":
        for v in operands:
            if v.tape is not self:
                raise InvalidArgumentError("operands belong to different tapes")
        slots = tuple(v.slot for v in operands)
        value = _eval_op(code, [self.values[s] for s in slots], aux)
        return self._push(code, slots, aux, value)

    def replay(self) -> list:
        """Recompute every slot from the record; bit-identical to forward."""
        out: list[Any] = []
        for op in self.ops:
            if op.code == "leaf":
                out.append(op.aux)
            else:
                out.append(_eval_op(op.code, [out[s] for s in op.inputs], op.aux))
        return out


class Var:
    """Handle to one tape slot; supports numpy-style arithmetic."""

    __slots__ = ("tape", "slot")
    # Make numpy defer to our reflected operators instead of broadcasting
    # over the object.
    __array_ufunc__ = None
    __array_priority__ = 1000

    def __init__(self, tape: Tape, slot: int):
        self.tape = tape
        self.slot = slot

    @property
    def value(self):
        return self.tape.values[self.slot]

    def __repr__(self) -> str:
        return f"Var(slot={self.slot}, value={self.value!r})"

    # -- binary arithmetic ---------------------------------------------------

    def _binary(self, other, code: str, ccode: str):
        if isinstance(other, Var):
            return self.tape.record(code, (self, other))
        return self.tape.record(ccode, (self,), _as_const(other))

    def __add__(self, other):
        return self._binary(other, "add", "addc")

    def __radd__(self, other):
        return self._binary(other, "add", "addc")

    def __sub__(self, other):
        if isinstance(other, Var):
            return self.tape.record("sub", (self, other))
        return self.tape.record("addc", (self,), _as_const(-np.asarray(other, dtype=float)))

    def __rsub__(self, other):  # const - var
        return self.tape.record("crsub", (self,), _as_const(other))

    def __mul__(self, other):
        return self._binary(other, "mul", "mulc")

    def __rmul__(self, other):
        return self._binary(other, "mul", "mulc")

    def __truediv__(self, other):
        if isinstance(other, Var):
            return self.tape.record("div", (self, other))
        return self.tape.record("mulc", (self,), _as_const(1.0 / np.asarray(other, dtype=float)))

    def __rtruediv__(self, other):  # const / var
        return self.tape.record("crdiv", (self,), _as_const(other))

    def __neg__(self):
        return self.tape.record("neg", (self,))

    def __pow__(self, exponent):
        if isinstance(exponent, Var):
            raise InvalidArgumentError("variable exponents are not supported on the tape")
        return self.tape.record("pow", (self,), float(exponent))

    def __matmul__(self, other):
        if isinstance(other, Var):
            return self.tape.record("matmul", (self, other))
        return self.tape.record("matmulc", (self,), _as_const(other))

    def __rmatmul__(self, other):  # const @ var
        return self.tape.record("cmatmul", (self,), _as_const(other))

    # -- unary / structural ----------------------------------------------------

    def _unary(self, code: str):
        return self.tape.record(code, (self,))

    def exp(self):
        return self._unary("exp")

    def log(self):
        if np.any(_value_of(self) <= 0.0):
            raise DomainEvaluationError("log")
        return self._unary("log")

    def tanh(self):
        return self._unary("tanh")

    def sigmoid(self):
        return self._unary("sigmoid")

    def sin(self):
        return self._unary("sin")

    def cos(self):
        return self._unary("cos")

    def tan(self):
        if np.any(np.abs(np.cos(self.value)) < _SINGULAR_TOL):
            raise DomainEvaluationError("tan")
        return self._unary("tan")

    def sum(self):
        """Sum of all elements; the reduction used by loss assembly."""
        return self._unary("sum")

    def index(self, i: int):
        """Scalar element of a 1-D value."""
        return self.tape.record("index", (self,), int(i))

    def col(self, j: int):
        """Column ``j`` of a 2-D value as a 1-D vector."""
        return self.tape.record("col", (self,), int(j))

    @property
    def T(self):
        return self._unary("transpose")


def _as_const(x):
    arr = np.asarray(x, dtype=float)
    return float(arr) if arr.ndim == 0 else arr


def _sigmoid_np(x):
    # Stable in both tails.
    x = np.asarray(x, dtype=float)
    e = np.exp(-np.abs(x))
    out = np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    return out if out.ndim else float(out)


def _eval_op(code, vals, aux):
    """Forward evaluation shared by recording and replay."""
    if code == "add":
        return vals[0] + vals[1]
    if code == "addc":
        return vals[0] + aux
    if code == "sub":
        return vals[0] - vals[1]
    if code == "crsub":
        return aux - vals[0]
    if code == "mul":
        return vals[0] * vals[1]
    if code == "mulc":
        return vals[0] * aux
    if code == "div":
        return vals[0] / vals[1]
    if code == "crdiv":
        return aux / vals[0]
    if code == "neg":
        return -vals[0]
    if code == "pow":
        return vals[0] ** aux
    if code == "exp":
        return np.exp(vals[0])
    if code == "log":
        return np.log(vals[0])
    if code == "tanh":
        return np.tanh(vals[0])
    if code == "sigmoid":
        return _sigmoid_np(vals[0])
    if code == "sin":
        return np.sin(vals[0])
    if code == "cos":
        return np.cos(vals[0])
    if code == "tan":
        return np.tan(vals[0])
    if code == "matmul":
        return vals[0] @ vals[1]
    if code == "matmulc":
        return vals[0] @ aux
    if code == "cmatmul":
        return aux @ vals[0]
    if code == "transpose":
        return vals[0].T
    if code == "sum":
        return float(np.sum(vals[0]))
    if code == "index":
        return float(vals[0][aux])
    if code == "col":
        return vals[0][:, aux]
    raise InvalidArgumentError(f"unknown opcode {code!r}")


def _unbroadcast(grad, shape):
    """Reduce a broadcast gradient back to the operand's shape."""
    grad = np.asarray(grad, dtype=float)
    if shape == ():
        return float(np.sum(grad))
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _shape(v):
    return np.shape(v)


def backprop(tape: Tape, loss: Var) -> dict[int, np.ndarray]:
    """Reverse sweep from ``loss``; returns gradients per parameter slot.

    The loss must be a scalar slot on ``tape``.  Parameters that do not
    influence the loss receive exact zero gradients.
    """
    if not isinstance(loss, Var) or loss.tape is not tape:
        raise InvalidArgumentError("loss is not a slot on this tape")
    if not (0 <= loss.slot < len(tape.ops)):
        raise InvalidArgumentError("loss slot out of range")
    if _shape(tape.values[loss.slot]) != ():
        raise InvalidArgumentError("loss must be a scalar slot")

    adj: list[Any] = [None] * len(tape.ops)
    adj[loss.slot] = 1.0
    values = tape.values

    def acc(slot, g):
        g = _unbroadcast(g, _shape(values[slot]))
        if adj[slot] is None:
            adj[slot] = g
        else:
            adj[slot] = adj[slot] + g

    for i in range(loss.slot, -1, -1):
        g = adj[i]
        if g is None:
            continue
        op = tape.ops[i]
        code, ins, aux = op.code, op.inputs, op.aux
        if code == "leaf":
            continue
        elif code == "add":
            acc(ins[0], g)
            acc(ins[1], g)
        elif code == "addc":
            acc(ins[0], g)
        elif code == "sub":
            acc(ins[0], g)
            acc(ins[1], -g)
        elif code == "crsub":
            acc(ins[0], -g)
        elif code == "mul":
            acc(ins[0], g * values[ins[1]])
            acc(ins[1], g * values[ins[0]])
        elif code == "mulc":
            acc(ins[0], g * aux)
        elif code == "div":
            acc(ins[0], g / values[ins[1]])
            acc(ins[1], -g * values[ins[0]] / values[ins[1]] ** 2)
        elif code == "crdiv":
            acc(ins[0], -g * aux / values[ins[0]] ** 2)
        elif code == "neg":
            acc(ins[0], -g)
        elif code == "pow":
            acc(ins[0], g * aux * values[ins[0]] ** (aux - 1.0))
        elif code == "exp":
            acc(ins[0], g * values[i])
        elif code == "log":
            acc(ins[0], g / values[ins[0]])
        elif code == "tanh":
            acc(ins[0], g * (1.0 - values[i] ** 2))
        elif code == "sigmoid":
            acc(ins[0], g * values[i] * (1.0 - values[i]))
        elif code == "sin":
            acc(ins[0], g * np.cos(values[ins[0]]))
        elif code == "cos":
            acc(ins[0], -g * np.sin(values[ins[0]]))
        elif code == "tan":
            acc(ins[0], g * (1.0 + values[i] ** 2))
        elif code == "matmul":
            acc(ins[0], g @ values[ins[1]].T)
            acc(ins[1], values[ins[0]].T @ g)
        elif code == "matmulc":
            acc(ins[0], g @ aux.T)
        elif code == "cmatmul":
            acc(ins[0], aux.T @ g)
        elif code == "transpose":
            acc(ins[0], np.asarray(g).T)
        elif code == "sum":
            acc(ins[0], g * np.ones_like(values[ins[0]]))
        elif code == "index":
            z = np.zeros_like(values[ins[0]])
            z[aux] = g
            acc(ins[0], z)
        elif code == "col":
            z = np.zeros_like(values[ins[0]])
            z[:, aux] = g
            acc(ins[0], z)
        else:
            raise InvalidArgumentError(f"unknown opcode {code!r}")

    out = {}
    for slot in tape.param_slots:
        if adj[slot] is None:
            out[slot] = np.zeros_like(np.asarray(values[slot], dtype=float))
        else:
            out[slot] = np.asarray(adj[slot], dtype=float)
    return out


# ---------------------------------------------------------------------------
# Generic elementwise functions (ndarray | Var | HyperDual)
# ---------------------------------------------------------------------------

def _smooth(u, triple):
    """Apply a scalar function given by ``triple(re) -> (f, f', f'')``."""
    if isinstance(u, HyperDual):
        f, fp, fpp = triple(u.re)
        return HyperDual(f, fp * u.d1, fp * u.d2,
                         fpp * (u.d1 * u.d2) + fp * u.d12)
    f, _, _ = triple(u)
    return f


def tanh(u):
    def triple(re):
        t = re.tanh() if isinstance(re, Var) else np.tanh(re)
        fp = 1.0 - t * t
        return t, fp, -2.0 * t * fp
    return _smooth(u, triple)


def sigmoid(u):
    def triple(re):
        s = re.sigmoid() if isinstance(re, Var) else _sigmoid_np(re)
        fp = s * (1.0 - s)
        return s, fp, fp * (1.0 - 2.0 * s)
    return _smooth(u, triple)


def sin(u):
    def triple(re):
        if isinstance(re, Var):
            return re.sin(), re.cos(), -re.sin()
        return np.sin(re), np.cos(re), -np.sin(re)
    return _smooth(u, triple)


def cos(u):
    def triple(re):
        if isinstance(re, Var):
            return re.cos(), -re.sin(), -re.cos()
        return np.cos(re), -np.sin(re), -np.cos(re)
    return _smooth(u, triple)


def tan(u):
    def triple(re):
        if np.any(np.abs(np.cos(_value_of(re))) < _SINGULAR_TOL):
            raise DomainEvaluationError("tan")
        t = re.tan() if isinstance(re, Var) else np.tan(re)
        fp = 1.0 + t * t
        return t, fp, 2.0 * t * fp
    return _smooth(u, triple)


def cot(u):
    """cos/sin with a guard on |sin|, as used by the input augmentation."""
    if np.any(np.abs(np.sin(_value_of(u.re if isinstance(u, HyperDual) else u))) < _SINGULAR_TOL):
        raise DomainEvaluationError("cot")
    return cos(u) / sin(u)


def exp(u):
    def triple(re):
        e = re.exp() if isinstance(re, Var) else np.exp(re)
        return e, e, e
    return _smooth(u, triple)


def log(u):
    if np.any(_value_of(u.re if isinstance(u, HyperDual) else u) <= 0.0):
        raise DomainEvaluationError("log")

    def triple(re):
        f = re.log() if isinstance(re, Var) else np.log(re)
        inv = 1.0 / re
        return f, inv, -inv * inv
    return _smooth(u, triple)


# ---------------------------------------------------------------------------
# Hyper-dual numbers
# ---------------------------------------------------------------------------

class HyperDual:
    """Number with two first-derivative channels and one mixed second.

    ``d1`` and ``d2`` follow two seed directions; ``d12`` is the mixed
    second derivative along both.  Components may be floats, arrays batched
    over evaluation points, or tape variables.
    """

    __slots__ = ("re", "d1", "d2", "d12")

    def __init__(self, re, d1=0.0, d2=0.0, d12=0.0):
        self.re = re
        self.d1 = d1
        self.d2 = d2
        self.d12 = d12

    def __repr__(self) -> str:
        return f"HyperDual(re={self.re!r}, d1={self.d1!r}, d2={self.d2!r}, d12={self.d12!r})"

    @staticmethod
    def lift(x):
        return x if isinstance(x, HyperDual) else HyperDual(x)

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, o):
        if isinstance(o, HyperDual):
            return HyperDual(self.re + o.re, self.d1 + o.d1,
                             self.d2 + o.d2, self.d12 + o.d12)
        return HyperDual(self.re + o, self.d1, self.d2, self.d12)

    __radd__ = __add__

    def __sub__(self, o):
        if isinstance(o, HyperDual):
            return HyperDual(self.re - o.re, self.d1 - o.d1,
                             self.d2 - o.d2, self.d12 - o.d12)
        return HyperDual(self.re - o, self.d1, self.d2, self.d12)

    def __rsub__(self, o):
        return HyperDual(o - self.re, -self.d1, -self.d2, -self.d12)

    def __neg__(self):
        return HyperDual(-self.re, -self.d1, -self.d2, -self.d12)

    def __mul__(self, o):
        if isinstance(o, HyperDual):
            return HyperDual(
                self.re * o.re,
                self.re * o.d1 + self.d1 * o.re,
                self.re * o.d2 + self.d2 * o.re,
                self.re * o.d12 + self.d1 * o.d2 + self.d2 * o.d1 + self.d12 * o.re,
            )
        return HyperDual(self.re * o, self.d1 * o, self.d2 * o, self.d12 * o)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if not isinstance(o, HyperDual):
            inv = 1.0 / o
            return self * inv
        if np.any(np.abs(_value_of(o.re)) < _SINGULAR_TOL):
            raise DomainEvaluationError("div")
        w = self.re / o.re
        d1 = (self.d1 - w * o.d1) / o.re
        d2 = (self.d2 - w * o.d2) / o.re
        d12 = (self.d12 - d1 * o.d2 - d2 * o.d1 - w * o.d12) / o.re
        return HyperDual(w, d1, d2, d12)

    def __rtruediv__(self, o):
        return HyperDual.lift(o) / self

    def __pow__(self, p):
        if isinstance(p, HyperDual):
            return exp(p * log(self))
        p = float(p)

        def triple(re):
            # Low integer exponents avoid 0 * inf at re == 0.
            if p == 0.0:
                return re ** 0.0, 0.0, 0.0
            if p == 1.0:
                return re ** 1.0, 1.0, 0.0
            if p == 2.0:
                return re * re, 2.0 * re, 2.0
            return re ** p, p * re ** (p - 1.0), p * (p - 1.0) * re ** (p - 2.0)
        return _smooth(self, triple)

    # -- structural (components batched over rows) ----------------------------

    def __matmul__(self, o):
        if isinstance(o, HyperDual):
            raise InvalidArgumentError("matmul between two hyper-duals is not used")
        return HyperDual(self.re @ o, self.d1 @ o, self.d2 @ o, self.d12 @ o)

    def col(self, j: int):
        def pick(c):
            return c.col(j) if isinstance(c, Var) else c[:, j]
        return HyperDual(pick(self.re), pick(self.d1), pick(self.d2), pick(self.d12))

    @staticmethod
    def stack_columns(channels: list["HyperDual"]) -> "HyperDual":
        """Column-stack per-point channels into one batched hyper-dual.

        Channel components must be plain arrays (the mesh-map inputs are
        constants with respect to the tape).
        """
        def gather(attr):
            cols = []
            for ch in channels:
                c = getattr(ch, attr)
                if isinstance(c, Var):
                    raise InvalidArgumentError("cannot stack tape variables")
                cols.append(np.asarray(c, dtype=float))
            return np.column_stack(cols)
        return HyperDual(gather("re"), gather("d1"), gather("d2"), gather("d12"))


# ---------------------------------------------------------------------------
# Second-order jets of the mesh map
# ---------------------------------------------------------------------------

def seeded_inputs(xi, eta, direction_a: str, direction_b: str):
    """Hyper-dual inputs for one pass; directions are 'xi' or 'eta'."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    one, zero = np.ones_like(xi), np.zeros_like(xi)
    xi_hd = HyperDual(xi, one if direction_a == "xi" else zero,
                      one if direction_b == "xi" else zero, zero)
    eta_hd = HyperDual(eta, one if direction_a == "eta" else zero,
                       one if direction_b == "eta" else zero, zero)
    return xi_hd, eta_hd


def evaluate_jet(model, xi: float, eta: float):
    """All first and second partials of the model map at one point.

    Runs three hyper-dual forward passes with seed direction pairs
    (xi,xi), (eta,eta) and (xi,eta); the value and first-derivative
    channels agree across passes because the value path never depends on
    the seeds.
    """
    from .network import jet_batch  # local import to avoid a module cycle

    jet = jet_batch(model.params_view(), np.asarray([float(xi)]), np.asarray([float(eta)]),
                    activation=model.activation, bbox=model.bbox)
    return jet.map_components(lambda c: float(c[0]))


def check_finite(value, context: str):
    arr = np.asarray(_value_of(value), dtype=float)
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"non-finite value in {context}")
