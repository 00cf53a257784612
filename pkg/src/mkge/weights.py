"""Learnable weight vectors: range restrictions and sparsity penalties."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

RESTRICTIONS = ("none", "tanh", "sigmoid", "softmax")

# |omega| below this is clamped inside the log of the Dirichlet penalty
DIRICHLET_CLAMP = 1e-12


def _check_kind(kind: str) -> None:
    if kind not in RESTRICTIONS:
        raise ValueError(f"unknown restriction {kind!r}; expected one of {RESTRICTIONS}")


def restrict(raw: np.ndarray, kind: str = "none") -> np.ndarray:
    """Map raw parameters to the weight vector the score actually uses.

    softmax is taken over the whole flattened vector, not per axis.
    """
    _check_kind(kind)
    raw = np.asarray(raw, dtype=np.float64)
    if kind == "none":
        return raw.copy()
    if kind == "tanh":
        return np.tanh(raw)
    if kind == "sigmoid":
        return expit(raw)
    z = np.exp(raw - raw.max())
    return z / z.sum()


def restrict_vjp(raw: np.ndarray, kind: str, grad_omega: np.ndarray) -> np.ndarray:
    """Pull a gradient w.r.t. omega back to the raw parameters."""
    _check_kind(kind)
    grad_omega = np.asarray(grad_omega, dtype=np.float64)
    if kind == "none":
        return grad_omega.copy()
    w = restrict(raw, kind)
    if kind == "tanh":
        return grad_omega * (1.0 - w * w)
    if kind == "sigmoid":
        return grad_omega * w * (1.0 - w)
    return w * (grad_omega - np.sum(w * grad_omega))


@dataclass
class DirichletRegConfig:
    alpha: float = 1.0 / 16
    lambda_dir: float = 1e-2
    enabled: bool = False
    # optional L1 penalty on omega, experimentation only
    lambda_l1: float = 0.0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.lambda_dir < 0 or self.lambda_l1 < 0:
            raise ValueError("regularization strengths must be >= 0")


def dirichlet_reg(omega: np.ndarray, cfg: DirichletRegConfig) -> tuple[float, np.ndarray]:
    """Dirichlet negative log-likelihood of |omega| / ||omega||_1 and its gradient.

    The clamped magnitudes enter both the log and the L1 normaliser, which keeps
    the penalty exactly invariant to positive rescaling away from the clamp.
    sign(0) is taken as 0.
    """
    omega = np.asarray(omega, dtype=np.float64)
    if not np.any(omega != 0):
        raise ValueError("Dirichlet penalty undefined for an all-zero weight vector")
    coef = -cfg.lambda_dir * (cfg.alpha - 1.0)
    if coef == 0.0:
        return 0.0, np.zeros_like(omega)
    mag = np.maximum(np.abs(omega), DIRICHLET_CLAMP)
    total = mag.sum()
    loss = coef * float(np.sum(np.log(mag / total)))
    grad = coef * np.sign(omega) * (1.0 / mag - omega.size / total)
    return loss, grad


def l1_reg(omega: np.ndarray, lam: float) -> tuple[float, np.ndarray]:
    omega = np.asarray(omega, dtype=np.float64)
    return lam * float(np.abs(omega).sum()), lam * np.sign(omega)
