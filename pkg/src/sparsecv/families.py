"""GLM loss families and their pointwise derivatives.

Two families are supported: squared-error ("linear") and binary logistic
with labels in {-1, +1}. All evaluations go through overflow-safe
softplus/sigmoid forms so that |z| in the thousands stays finite.
"""

from __future__ import annotations

import enum

import numpy as np
from scipy.special import expit

from .errors import InvalidLabelError

__all__ = ["GlmFamily", "loss_value", "loss_d1_d2", "check_labels"]


class GlmFamily(str, enum.Enum):
    LINEAR = "linear"
    LOGISTIC = "logistic"

    @classmethod
    def parse(cls, name) -> "GlmFamily":
        if isinstance(name, GlmFamily):
            return name
        return cls(str(name).lower())


def check_labels(y) -> None:
    """Validate logistic labels; every entry must be exactly -1 or +1."""
    y = np.asarray(y, dtype=float)
    bad = ~np.isin(y, (-1.0, 1.0))
    if np.any(bad):
        raise InvalidLabelError(
            f"logistic labels must be in {{-1, +1}}; got {np.unique(y[bad])!r}"
        )


def loss_value(family, z, y):
    """Pointwise loss f(z, y).

    linear:   0.5 * (z - y)^2
    logistic: log(1 + exp(-y * z)), computed as softplus(-y*z)

    Accepts scalars or arrays (broadcast elementwise).
    """
    family = GlmFamily.parse(family)
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    if family is GlmFamily.LINEAR:
        out = 0.5 * (z - y) ** 2
    else:
        check_labels(y)
        out = np.logaddexp(0.0, -y * z)
    return out if out.ndim else float(out)


def loss_d1_d2(family, z, y):
    """First and second derivatives of f(z, y) in z.

    linear:   d1 = z - y,                 d2 = 1
    logistic: d1 = -y / (1 + exp(y*z)),   d2 = e^z / (1 + e^z)^2

    For logistic, |d1| <= 1 and 0 <= d2 <= 1/4 always hold.
    """
    family = GlmFamily.parse(family)
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    if family is GlmFamily.LINEAR:
        d1 = z - y
        d2 = np.ones_like(d1)
    else:
        check_labels(y)
        d1 = -y * expit(-y * z)
        d2 = expit(z) * expit(-z)
    if d1.ndim:
        return d1, d2
    return float(d1), float(d2)
