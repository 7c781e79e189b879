from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ..world_model import is_soo_label, ncv_process_noise, ncv_transition


class FilterError(ArithmeticError):
    """Raised on a singular innovation or information matrix."""


def symmetrize(P: np.ndarray) -> np.ndarray:
    return 0.5 * (P + P.T)


@dataclass(frozen=True)
class TrackEstimate:
    id: int
    label: str
    xi: np.ndarray
    P: np.ndarray

    @property
    def dim(self) -> int:
        return self.xi.shape[0]

    @property
    def position(self) -> np.ndarray:
        return self.xi[:2]

    @property
    def is_static(self) -> bool:
        return is_soo_label(self.label) or self.dim == 2


def position_selector(dim: int) -> np.ndarray:
    H = np.zeros((2, dim))
    H[0, 0] = H[1, 1] = 1.0
    return H


def kf_predict(track: TrackEstimate, dt: float, q: float) -> TrackEstimate:
    if dt <= 0:
        raise ValueError("dt must be positive")
    if track.is_static:
        return track
    F = ncv_transition(dt)
    return replace(track, xi=F @ track.xi, P=symmetrize(F @ track.P @ F.T + ncv_process_noise(q, dt)))


def kf_update(track: TrackEstimate, z, R: np.ndarray) -> TrackEstimate:
    H = position_selector(track.dim)
    S = H @ track.P @ H.T + R
    try:
        S_inv = np.linalg.inv(S)
    except np.linalg.LinAlgError as exc:
        raise FilterError("singular innovation covariance") from exc
    if not np.all(np.isfinite(S_inv)):
        raise FilterError("singular innovation covariance")
    K = track.P @ H.T @ S_inv
    nu = np.asarray(z, dtype=float) - H @ track.xi
    I_KH = np.eye(track.dim) - K @ H
    # Joseph form keeps P PSD under rounding
    P = I_KH @ track.P @ I_KH.T + K @ R @ K.T
    return replace(track, xi=track.xi + K @ nu, P=symmetrize(P))


def info_update_trace(P_pred: np.ndarray, observers: Sequence[tuple[np.ndarray, np.ndarray]]):
    """Information-form covariance update; returns (P_post, trace(P_post))."""
    if not observers:
        return P_pred.copy(), float(np.trace(P_pred))
    try:
        info = np.linalg.inv(P_pred)
        for H, R in observers:
            info = info + H.T @ np.linalg.inv(R) @ H
        P_post = np.linalg.inv(info)
    except np.linalg.LinAlgError as exc:
        raise FilterError("information matrix not invertible") from exc
    P_post = symmetrize(P_post)
    return P_post, float(np.trace(P_post))
