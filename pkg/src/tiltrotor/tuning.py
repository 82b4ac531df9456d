"""PID synthesis by fourth-order pole placement, and stability verdicts.

The closed loop of PID + motor lag + vertical body has the monic quartic
characteristic polynomial

    s^4 + kb s^3 + c2 s^2 + c1 s + c0

where kb = R_m/L_m + lambda_up/m depends only on the plant. Pole
placement therefore carries a hard constraint: the chosen poles must sum
to -kb. That constraint is enforced here with a descriptive error rather
than silently projected away.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linsys import Polynomial, RationalTransfer, poly_roots
from .vehicle import MotorParams

__all__ = [
    "PidGains",
    "PolePlacementSpec",
    "PoleSumError",
    "StabilityVerdict",
    "pid_tf",
    "characteristic_poly",
    "place_poles",
    "stability_check",
    "routh_hurwitz_stable",
]

POLE_SUM_REL_TOL = 1e-6
_ROUTH_EPS = 1e-9


class PoleSumError(ValueError):
    """Pole set does not satisfy the structural sum constraint.

    Attributes
    ----------
    required_sum : float
        The value -kb that the pole sum must equal.
    actual_sum : complex
        The sum of the offending pole set.
    """

    def __init__(self, required_sum: float, actual_sum: complex):
        super().__init__(
            f"pole sum {actual_sum:.9g} violates the plant constraint: "
            f"poles must sum to -kb = {required_sum:.9g}"
        )
        self.required_sum = required_sum
        self.actual_sum = actual_sum


@dataclass(frozen=True)
class PidGains:
    kp: float
    ki: float
    kd: float

    def __post_init__(self):
        for name in ("kp", "ki", "kd"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class PolePlacementSpec:
    """Validated pole-placement request: four poles plus the fixed kb.

    Construction checks conjugate closure and the sum constraint, so a
    held instance is always placeable.
    """

    poles: tuple[complex, ...]
    kb: float

    def __post_init__(self):
        poles = tuple(complex(p) for p in self.poles)
        object.__setattr__(self, "poles", poles)
        if len(poles) != 4:
            raise ValueError(f"exactly four poles required, got {len(poles)}")
        _check_conjugate_closed(poles)
        total = sum(poles)
        if abs(total + self.kb) > POLE_SUM_REL_TOL * abs(self.kb):
            raise PoleSumError(-self.kb, total)


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    roots: tuple[complex, ...]
    margin: float


def pid_tf(g: PidGains) -> RationalTransfer:
    """PID transfer function (kd s^2 + kp s + ki)/s.

    With ki = 0 the integrator is genuinely absent, so the pole at the
    origin is dropped rather than left as an exact cancellation.
    """
    if g.kp == 0.0 and g.ki == 0.0 and g.kd == 0.0:
        raise ValueError("all-zero PID gains define no controller")
    if g.ki == 0.0:
        return RationalTransfer(Polynomial((g.kp, g.kd)), Polynomial((1.0,)))
    return RationalTransfer(Polynomial((g.ki, g.kp, g.kd)), Polynomial((0.0, 1.0)))


def characteristic_poly(
    motor: MotorParams, m: float, lambda_up: float, g: PidGains
) -> Polynomial:
    """Closed-loop monic quartic of PID + motor lag + vertical body.

    Coefficients (ascending): c0 = K_m k_t ki/(L_m m),
    c1 = K_m k_t kp/(L_m m), c2 = (R_m lambda_up + K_m k_t kd)/(L_m m),
    c3 = kb = R_m/L_m + lambda_up/m.
    """
    lm = motor.l_m * m
    gain = motor.k_m * motor.k_t
    kb = motor.r_m / motor.l_m + lambda_up / m
    return Polynomial((
        gain * g.ki / lm,
        gain * g.kp / lm,
        (motor.r_m * lambda_up + gain * g.kd) / lm,
        kb,
        1.0,
    ))


def place_poles(
    motor: MotorParams, m: float, lambda_up: float, poles: Sequence[complex]
) -> PidGains:
    """Gains whose closed-loop quartic has exactly the requested poles.

    Raises
    ------
    PoleSumError
        When the pole sum differs from -kb by more than 1e-6 relative.
    ValueError
        When the pole set is not closed under conjugation or is not
        exactly four poles.
    """
    kb = motor.r_m / motor.l_m + lambda_up / m
    spec = PolePlacementSpec(tuple(complex(p) for p in poles), kb)
    desc = np.poly(np.array(spec.poles))
    if np.max(np.abs(desc.imag)) > 1e-9 * np.max(np.abs(desc.real)):
        raise ValueError("pole product has residual imaginary coefficients")
    _, _, c2, c1, c0 = np.real(desc)
    lm = motor.l_m * m
    gain = motor.k_m * motor.k_t
    return PidGains(
        kp=c1 * lm / gain,
        ki=c0 * lm / gain,
        kd=(c2 * lm - motor.r_m * lambda_up) / gain,
    )


def _check_conjugate_closed(poles: Sequence[complex], tol: float = 1e-9) -> None:
    scale = max(abs(p) for p in poles) or 1.0
    unmatched = [p for p in poles if abs(p.imag) > tol * scale]
    while unmatched:
        p = unmatched.pop()
        for i, q in enumerate(unmatched):
            if abs(q - p.conjugate()) <= tol * scale:
                unmatched.pop(i)
                break
        else:
            raise ValueError(f"pole set is not conjugate-closed: {p} has no partner")


def stability_check(p: Polynomial) -> StabilityVerdict:
    """Asymptotic-stability verdict via roots, cross-checked by Routh.

    Real parts within 1e-9 (relative to the root magnitude) of zero are
    snapped to the imaginary axis, so marginal cases report margin 0 and
    stable False. The root verdict and the Routh table must agree; a
    disagreement raises, since it would mean a numerical defect here.
    """
    if p.degree < 1:
        raise ValueError("stability is defined for degree >= 1 polynomials")
    roots = poly_roots(p)
    snapped = tuple(
        complex(0.0, r.imag) if abs(r.real) <= 1e-9 * max(1.0, abs(r)) else r
        for r in roots
    )
    margin = max(r.real for r in snapped)
    stable = margin < 0.0
    if routh_hurwitz_stable(p) != stable:
        raise RuntimeError(
            "stability cross-check failed: root margin and Routh table disagree"
        )
    return StabilityVerdict(stable=stable, roots=snapped, margin=margin)


def routh_hurwitz_stable(p: Polynomial) -> bool:
    """True when the Routh table finds all roots strictly in the left half plane.

    Degenerate tables (a zero first-column pivot, or an all-zero row,
    which signals roots on or symmetric about the imaginary axis) are
    never asymptotically stable and return False. Zero pivots in
    otherwise nonzero rows are perturbed by 1e-9 to finish the table.
    """
    desc = list(p.monic().coefficients[::-1])
    n = len(desc) - 1
    if n < 1:
        raise ValueError("degree must be at least 1")
    width = (n // 2) + 1
    row0 = desc[0::2] + [0.0] * width
    row1 = desc[1::2] + [0.0] * width
    rows = [row0[:width], row1[:width]]
    degenerate = False
    for _ in range(n - 1):
        upper, lower = rows[-2], rows[-1]
        if all(abs(v) <= 1e-300 for v in lower):
            # all-zero row: differentiate the auxiliary polynomial of the
            # row above (even powers) to continue
            degenerate = True
            order = n - (len(rows) - 2)
            aux = []
            for j, v in enumerate(upper):
                power = order - 2 * j
                aux.append(v * power if power > 0 else 0.0)
            lower = aux
            rows[-1] = lower
        pivot = lower[0]
        if pivot == 0.0:
            degenerate = True
            pivot = _ROUTH_EPS
        new = []
        for j in range(width - 1):
            new.append((pivot * upper[j + 1] - upper[0] * lower[j + 1]) / pivot)
        new.append(0.0)
        rows.append(new)
    if degenerate:
        return False
    first_col = [r[0] for r in rows[: n + 1]]
    return all(v > 0.0 for v in first_col)
