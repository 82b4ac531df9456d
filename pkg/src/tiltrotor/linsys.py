"""Linear-systems core: polynomials, transfer functions, state space, RK4.

Conventions used throughout the package:

* Polynomial coefficients are stored in ascending powers of s, so
  ``Polynomial((0.65, 5.0, 1.0))`` is ``s**2 + 5*s + 0.65``.
* Transfer functions are ratios of two such polynomials and are compared
  in canonical form (monic denominator, near-zero leading coefficients
  trimmed at a 1e-12 relative threshold).
* State-space realizations use the controllable canonical layout.
* Time integration is classical fixed-step RK4 and is deterministic:
  the same inputs produce bit-identical trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Polynomial",
    "RationalTransfer",
    "StateSpaceModel",
    "TimeSeries",
    "DivergenceError",
    "poly_mul",
    "poly_add",
    "poly_roots",
    "tf_series",
    "tf_feedback_unity",
    "tf_to_ss",
    "integrate_fixed_step",
    "saturate",
]

_TRIM_REL = 1e-12


class DivergenceError(RuntimeError):
    """Raised when an integrated state stops being finite.

    Attributes
    ----------
    time : float
        Simulation time at which the non-finite value appeared.
    """

    def __init__(self, time: float):
        super().__init__(f"state diverged (non-finite) at t = {time:.6f} s")
        self.time = time


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial in s with ascending-power coefficients.

    Exact trailing zeros (highest powers) are stripped at construction so
    the leading coefficient is nonzero unless the polynomial is
    identically zero, which is stored as the single coefficient 0.0.
    """

    coefficients: tuple[float, ...]

    def __init__(self, coefficients: Sequence[float]):
        coeffs = [float(c) for c in coefficients]
        if not coeffs:
            coeffs = [0.0]
        while len(coeffs) > 1 and coeffs[-1] == 0.0:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def is_zero(self) -> bool:
        return self.coefficients == (0.0,)

    def __call__(self, s: complex) -> complex:
        acc = 0.0 + 0.0j if isinstance(s, complex) else 0.0
        for c in reversed(self.coefficients):
            acc = acc * s + c
        return acc

    def __mul__(self, other: "Polynomial | float") -> "Polynomial":
        if isinstance(other, Polynomial):
            return poly_mul(self, other)
        return Polynomial(tuple(c * float(other) for c in self.coefficients))

    __rmul__ = __mul__

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return poly_add(self, other)

    def monic(self) -> "Polynomial":
        lead = self.coefficients[-1]
        if lead == 0.0:
            raise ValueError("cannot normalize the zero polynomial")
        return Polynomial(tuple(c / lead for c in self.coefficients))

    def scaled_trim(self) -> "Polynomial":
        """Drop leading coefficients below 1e-12 of the largest magnitude."""
        mags = [abs(c) for c in self.coefficients]
        biggest = max(mags)
        if biggest == 0.0:
            return Polynomial((0.0,))
        coeffs = list(self.coefficients)
        while len(coeffs) > 1 and abs(coeffs[-1]) <= _TRIM_REL * biggest:
            coeffs.pop()
        return Polynomial(coeffs)


def poly_mul(p: Polynomial, q: Polynomial) -> Polynomial:
    """Product of two polynomials by coefficient convolution."""
    return Polynomial(np.convolve(p.coefficients, q.coefficients))


def poly_add(p: Polynomial, q: Polynomial) -> Polynomial:
    n = max(len(p.coefficients), len(q.coefficients))
    a = np.zeros(n)
    a[: len(p.coefficients)] += p.coefficients
    a[: len(q.coefficients)] += q.coefficients
    return Polynomial(a)


def poly_roots(p: Polynomial) -> tuple[complex, ...]:
    """Roots of ``p`` via eigenvalues of its companion matrix.

    Returned in ascending order of real part, then imaginary part,
    which keeps conjugate pairs adjacent and the output deterministic.
    """
    if p.is_zero:
        raise ValueError("zero polynomial has no defined roots")
    if p.degree == 0:
        return ()
    monic = p.monic().coefficients
    n = p.degree
    comp = np.zeros((n, n))
    comp[1:, :-1] = np.eye(n - 1)
    comp[:, -1] = [-c for c in monic[:-1]]
    roots = np.linalg.eigvals(comp)
    return tuple(sorted((complex(r) for r in roots), key=lambda z: (z.real, z.imag)))


@dataclass(frozen=True)
class RationalTransfer:
    """Transfer function num(s)/den(s).

    Values may be improper (numerator degree above denominator degree);
    only :func:`tf_to_ss` requires properness. Equality of dynamics is
    checked through :meth:`canonical`, not through structural equality.
    """

    num: Polynomial
    den: Polynomial

    def __post_init__(self):
        if self.den.is_zero:
            raise ValueError("transfer function denominator is zero")

    def canonical(self) -> "RationalTransfer":
        """Monic-denominator form with near-zero leading terms trimmed."""
        num = self.num.scaled_trim()
        den = self.den.scaled_trim()
        lead = den.coefficients[-1]
        num = Polynomial(tuple(c / lead for c in num.coefficients))
        den = Polynomial(tuple(c / lead for c in den.coefficients))
        return RationalTransfer(num, den)

    @property
    def is_proper(self) -> bool:
        return self.num.degree <= self.den.degree

    def dc_gain(self) -> float:
        den0 = self.den(0.0)
        if den0 == 0.0:
            raise ZeroDivisionError("pole at s = 0: DC gain is unbounded")
        return self.num(0.0) / den0

    def close_to(self, other: "RationalTransfer", rel: float = 1e-9) -> bool:
        a, b = self.canonical(), other.canonical()
        for pa, pb in ((a.num, b.num), (a.den, b.den)):
            if len(pa.coefficients) != len(pb.coefficients):
                return False
            scale = max(max(abs(c) for c in pa.coefficients), 1e-300)
            for ca, cb in zip(pa.coefficients, pb.coefficients):
                if abs(ca - cb) > rel * max(scale, abs(cb)):
                    return False
        return True


def tf_series(g1: RationalTransfer, g2: RationalTransfer) -> RationalTransfer:
    """Cascade g1*g2, returned in canonical form."""
    return RationalTransfer(
        poly_mul(g1.num, g2.num), poly_mul(g1.den, g2.den)
    ).canonical()


def tf_feedback_unity(g: RationalTransfer) -> RationalTransfer:
    """Closed loop g/(1+g) under unity negative feedback, canonical form."""
    return RationalTransfer(g.num, poly_add(g.den, g.num)).canonical()


@dataclass(frozen=True)
class StateSpaceModel:
    """Realization dx/dt = A x + B u, y = C x + D u (single input/output)."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "d", float(self.d))
        n = self.a.shape[0]
        if self.a.shape != (n, n) or self.b.shape != (n,) or self.c.shape != (n,):
            raise ValueError("inconsistent state-space dimensions")

    @property
    def n_states(self) -> int:
        return self.a.shape[0]

    def derivative(self, x: np.ndarray, u: float) -> np.ndarray:
        return self.a @ x + self.b * u

    def output(self, x: np.ndarray, u: float) -> float:
        return float(self.c @ x + self.d * u)


def tf_to_ss(g: RationalTransfer) -> StateSpaceModel:
    """Controllable canonical realization of a proper transfer function."""
    can = g.canonical()
    if not can.is_proper:
        raise ValueError(
            "improper transfer function (numerator degree "
            f"{can.num.degree} > denominator degree {can.den.degree}) "
            "has no state-space realization"
        )
    den = can.den.coefficients
    n = len(den) - 1
    if n == 0:
        return StateSpaceModel(np.zeros((0, 0)), np.zeros(0), np.zeros(0), can.num(0.0))
    num = np.zeros(n + 1)
    num[: len(can.num.coefficients)] = can.num.coefficients
    d = num[n]
    a = np.zeros((n, n))
    a[:-1, 1:] = np.eye(n - 1)
    a[-1, :] = [-c for c in den[:-1]]
    b = np.zeros(n)
    b[-1] = 1.0
    c = np.array([num[i] - d * den[i] for i in range(n)])
    return StateSpaceModel(a, b, c, d)


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled named channels over a shared time grid.

    Arrays are marked read-only at construction; a TimeSeries value is
    immutable once built.
    """

    t: np.ndarray
    channels: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        t = np.array(self.t, dtype=float)
        t.setflags(write=False)
        object.__setattr__(self, "t", t)
        chans = {}
        for name, values in self.channels.items():
            arr = np.array(values, dtype=float)
            if arr.shape != t.shape:
                raise ValueError(f"channel {name!r} length differs from time grid")
            arr.setflags(write=False)
            chans[name] = arr
        object.__setattr__(self, "channels", chans)
        if len(t) < 1:
            raise ValueError("empty time grid")

    def __len__(self) -> int:
        return len(self.t)

    @property
    def dt(self) -> float:
        if len(self.t) < 2:
            raise ValueError("time step undefined for a single sample")
        return float(self.t[1] - self.t[0])

    def __getitem__(self, name: str) -> np.ndarray:
        return self.channels[name]


def integrate_fixed_step(
    dynamics: Callable[[float, np.ndarray, float], np.ndarray],
    x0: Sequence[float],
    input_fn: Callable[[float], float],
    dt: float,
    t_final: float,
    channel_names: Sequence[str] | None = None,
) -> TimeSeries:
    """Integrate ``dx/dt = dynamics(t, x, u(t))`` with classical RK4.

    Parameters
    ----------
    dynamics : callable
        Derivative function of (t, state vector, scalar input).
    x0 : sequence of float
        Initial state.
    input_fn : callable
        Scalar input as a function of time, sampled at the RK4 stage times.
    dt, t_final : float
        Step size and end time; the grid is ``round(t_final/dt)`` steps.
    channel_names : sequence of str, optional
        Names for the state channels; defaults to ``x1..xn``.

    Raises
    ------
    DivergenceError
        If any state component becomes NaN or infinite.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_final < dt:
        raise ValueError("t_final must be at least one step")
    n_steps = int(round(t_final / dt))
    x = np.array(x0, dtype=float)
    names = list(channel_names) if channel_names else [f"x{i+1}" for i in range(len(x))]
    if len(names) != len(x):
        raise ValueError("channel_names length differs from state size")
    out = np.empty((n_steps + 1, len(x)))
    out[0] = x
    t = 0.0
    half = dt / 2.0
    # overflow and invalid-value warnings are muted because a state that
    # stops being finite is detected right below and reported as a
    # DivergenceError instead
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(n_steps):
            k1 = dynamics(t, x, input_fn(t))
            k2 = dynamics(t + half, x + half * k1, input_fn(t + half))
            k3 = dynamics(t + half, x + half * k2, input_fn(t + half))
            k4 = dynamics(t + dt, x + dt * k3, input_fn(t + dt))
            x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t = (i + 1) * dt
            if not np.all(np.isfinite(x)):
                raise DivergenceError(t)
            out[i + 1] = x
    grid = np.arange(n_steps + 1) * dt
    return TimeSeries(grid, {name: out[:, j] for j, name in enumerate(names)})


def saturate(u: float, lo: float, hi: float) -> float:
    """Clamp ``u`` to the closed interval [lo, hi]."""
    if lo > hi:
        raise ValueError(f"saturation bounds reversed: lo={lo} > hi={hi}")
    if u < lo:
        return lo
    if u > hi:
        return hi
    return u
