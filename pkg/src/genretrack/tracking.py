"""Constant-acceleration Kalman predictor over the genre space.

A user is modelled as a point moving through the d-dimensional genre space
with position, velocity and acceleration per axis, stacked into a 3d state
ordered as [positions | velocities | accelerations].  The transition matrix
is the kinematic block form

    A = [[a*I, T*I, T^2/2*I],
         [0,   a*I, T*I    ],
         [0,   0,   a*I    ]]

with d x d identity blocks, scalar diagonal ``a`` (alpha) and inter-sample
interval ``T``.  Measurements are the positions alone: H = [I | 0 | 0].

The filter is the one-step-ahead predictor: consuming observation z_k with
prediction x_hat = X(k | k-1) and covariance P = P(k | k-1),

    S = H P H' + R                      innovation covariance
    K = A P H' S^-1                     predictor gain
    nu = z_k - H x_hat                  innovation
    X(k+1 | k) = A x_hat + K nu
    P(k+1 | k) = A P A' - K (A P H')' + Q    (symmetrized)

All linear solves go through a Cholesky factorization of S; no explicit
matrix inverse is formed anywhere.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import scipy.linalg

from .ioutil import fmt
from .profiles import ProfileSeries
from .space import ConceptSpace

__all__ = [
    "TrackingModel",
    "FilterState",
    "TrackRecord",
    "DivergenceError",
    "SingularInnovationError",
    "build_model",
    "init_filter",
    "gain",
    "predict_step",
    "covariance_step",
    "steady_state_covariance",
    "track_series",
    "track_series_decoupled",
    "read_track_record",
    "write_track_record",
    "read_final_states",
    "write_final_states",
]

# Condition-number ceiling for the innovation covariance solve.
COND_LIMIT = 1e12
# Most negative covariance eigenvalue tolerated before declaring divergence.
PSD_TOL = 1e-9

DEFAULT_P0 = 10.0


class DivergenceError(RuntimeError):
    """The prediction covariance lost positive semidefiniteness."""


class SingularInnovationError(RuntimeError):
    """The innovation covariance is numerically singular or ill-conditioned."""


def _transition_block(T: float, alpha: float) -> np.ndarray:
    return np.array(
        [
            [alpha, T, 0.5 * T * T],
            [0.0, alpha, T],
            [0.0, 0.0, alpha],
        ]
    )


def _white_accel_block(T: float) -> np.ndarray:
    # Covariance of (T^2/2, T, 1) * a for unit-variance acceleration noise a.
    g = np.array([0.5 * T * T, T, 1.0])
    return np.outer(g, g)


@dataclass(frozen=True, eq=False)
class TrackingModel:
    """State-space model shared by every filter instance for one parameterization.

    ``A`` and ``H`` are derived from (d, T, alpha) at construction and always
    have the kinematic block structure above, so they cannot drift out of
    shape.  ``Q`` must be symmetric PSD, ``R`` symmetric PD.  Immutable.
    """

    d: int
    T: float
    alpha: float
    Q: np.ndarray
    R: np.ndarray
    A: np.ndarray = field(init=False, repr=False)
    H: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if not self.T > 0:
            raise ValueError(f"inter-sample interval T must be > 0, got {self.T}")
        Q = np.asarray(self.Q, dtype=float)
        R = np.asarray(self.R, dtype=float)
        n = 3 * self.d
        if Q.shape != (n, n):
            raise ValueError(f"Q must be {n}x{n}, got {Q.shape}")
        if R.shape != (self.d, self.d):
            raise ValueError(f"R must be {self.d}x{self.d}, got {R.shape}")
        if not np.allclose(Q, Q.T, atol=1e-12):
            raise ValueError("Q must be symmetric")
        if not np.allclose(R, R.T, atol=1e-12):
            raise ValueError("R must be symmetric")
        if np.linalg.eigvalsh(Q).min() < -1e-12:
            raise ValueError("Q must be positive semidefinite")
        if np.linalg.eigvalsh(R).min() <= 0.0:
            raise ValueError("R must be positive definite")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "R", R)
        eye = np.eye(self.d)
        A = np.kron(_transition_block(self.T, self.alpha), eye)
        H = np.kron(np.array([[1.0, 0.0, 0.0]]), eye)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "H", H)

    @property
    def state_dim(self) -> int:
        return 3 * self.d


def build_model(
    d: int,
    T: float = 1.0,
    alpha: float = 1.0,
    q: float = 1e-3,
    r: float = 1e-2,
    q_structure: str = "white_accel",
) -> TrackingModel:
    """Assemble the tracking model for a d-dimensional genre space.

    Parameters
    ----------
    d : space dimension (number of genre axes).
    T : inter-sample interval; one filter step per profile snapshot.
    alpha : transition diagonal scalar; 1 gives plain kinematics.
    q : process-noise scale, >= 0.
    r : measurement-noise variance per axis, > 0 (the gain solve needs an
        invertible innovation covariance).
    q_structure : "white_accel" for q times the discrete white-acceleration
        block per axis, or "identity" for plain q*I (ablation variant).
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if not T > 0:
        raise ValueError(f"inter-sample interval T must be > 0, got {T}")
    if q < 0:
        raise ValueError(f"process-noise scale q must be >= 0, got {q}")
    if not r > 0:
        raise ValueError(f"measurement-noise variance r must be > 0, got {r}")
    eye = np.eye(d)
    if q_structure == "white_accel":
        Q = q * np.kron(_white_accel_block(T), eye)
    elif q_structure == "identity":
        Q = q * np.eye(3 * d)
    else:
        raise ValueError(f"unknown q_structure: {q_structure!r}")
    return TrackingModel(d=d, T=T, alpha=alpha, Q=Q, R=r * eye)


@dataclass(frozen=True, eq=False)
class FilterState:
    """One-step-ahead prediction X(k | k-1), its covariance, and step bookkeeping.

    ``last_innovation`` and ``last_gain`` describe the observation consumed to
    produce this state; both are None on a freshly initialized filter.
    """

    x_hat: np.ndarray
    P: np.ndarray
    k: int = 0
    last_innovation: Optional[np.ndarray] = None
    last_gain: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        x = np.asarray(self.x_hat, dtype=float)
        P = np.asarray(self.P, dtype=float)
        object.__setattr__(self, "x_hat", x)
        object.__setattr__(self, "P", P)
        if x.ndim != 1 or x.size % 3 != 0:
            raise ValueError(f"state vector must be a flat 3d vector, got {x.shape}")
        n = x.size
        if P.shape != (n, n):
            raise ValueError(f"covariance must be {n}x{n}, got {P.shape}")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(P)):
            raise ValueError("filter state contains non-finite values")

    @property
    def d(self) -> int:
        return self.x_hat.size // 3

    def position(self) -> np.ndarray:
        """The predicted interest vector (position block of the state)."""
        return self.x_hat[: self.d].copy()


def init_filter(model: TrackingModel, z0: np.ndarray, p0: float = DEFAULT_P0) -> FilterState:
    """Start a filter at the first observation with zero velocity/acceleration."""
    z0 = np.asarray(z0, dtype=float)
    if z0.shape != (model.d,):
        raise ValueError(f"initial observation must have shape ({model.d},), got {z0.shape}")
    if not np.all(np.isfinite(z0)):
        raise ValueError("initial observation contains non-finite values")
    if not p0 > 0:
        raise ValueError(f"initial covariance scale p0 must be > 0, got {p0}")
    x0 = np.zeros(3 * model.d)
    x0[: model.d] = z0
    return FilterState(x_hat=x0, P=p0 * np.eye(3 * model.d), k=0)


def _factor_innovation(S: np.ndarray):
    """Condition-check S and return its Cholesky factorization."""
    w = np.linalg.eigvalsh(S)
    if w[0] <= 0.0 or w[-1] > COND_LIMIT * w[0]:
        raise SingularInnovationError(
            f"innovation covariance ill-conditioned: eigenvalue range "
            f"[{w[0]:.3e}, {w[-1]:.3e}]"
        )
    return scipy.linalg.cho_factor(S, lower=True)


def _gain_and_cross(model: TrackingModel, P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return (K, A P H') for prediction covariance P."""
    AP = model.A @ P
    APHt = AP @ model.H.T
    S = model.H @ (P @ model.H.T) + model.R
    S = 0.5 * (S + S.T)
    factor = _factor_innovation(S)
    K = scipy.linalg.cho_solve(factor, APHt.T).T
    return K, APHt


def gain(model: TrackingModel, P: np.ndarray) -> np.ndarray:
    """Predictor gain K = A P H' (H P H' + R)^-1 for covariance P.

    The solve runs against the symmetric PD innovation covariance; an
    eigenvalue-ratio estimate above ``COND_LIMIT`` raises
    :class:`SingularInnovationError`.
    """
    P = np.asarray(P, dtype=float)
    n = 3 * model.d
    if P.shape != (n, n):
        raise ValueError(f"covariance must be {n}x{n}, got {P.shape}")
    K, _ = _gain_and_cross(model, P)
    return K


def predict_step(model: TrackingModel, state: FilterState, z: np.ndarray) -> FilterState:
    """Consume one observation and advance the predictor by one step.

    Returns the next one-step-ahead state; the consumed innovation and the
    gain that weighted it are recorded on the returned state.  Raises
    :class:`DivergenceError` if the updated covariance has an eigenvalue
    below ``-PSD_TOL``.
    """
    if state.d != model.d:
        raise ValueError(f"state dimension {state.d} does not match model d={model.d}")
    z = np.asarray(z, dtype=float)
    if z.shape != (model.d,):
        raise ValueError(f"observation must have shape ({model.d},), got {z.shape}")
    if not np.all(np.isfinite(z)):
        raise ValueError("observation contains non-finite values")

    P = state.P
    K, APHt = _gain_and_cross(model, P)
    innovation = z - model.H @ state.x_hat
    x_next = model.A @ state.x_hat + K @ innovation
    P_next = (model.A @ P) @ model.A.T - K @ APHt.T + model.Q
    P_next = 0.5 * (P_next + P_next.T)
    # Cholesky of P + tol*I succeeds exactly when min eig > -tol.
    try:
        np.linalg.cholesky(P_next + PSD_TOL * np.eye(P_next.shape[0]))
    except np.linalg.LinAlgError:
        raise DivergenceError(
            f"prediction covariance lost PSD at step {state.k + 1}"
        ) from None
    return FilterState(
        x_hat=x_next,
        P=P_next,
        k=state.k + 1,
        last_innovation=innovation,
        last_gain=K,
    )


def covariance_step(model: TrackingModel, P: np.ndarray) -> np.ndarray:
    """One iteration of the prediction-covariance (Riccati) recursion.

    Shares the exact arithmetic of :func:`predict_step`, so a fixed point of
    this map is a fixed point of the filter's covariance trajectory.
    """
    P = np.asarray(P, dtype=float)
    K, APHt = _gain_and_cross(model, P)
    P_next = (model.A @ P) @ model.A.T - K @ APHt.T + model.Q
    return 0.5 * (P_next + P_next.T)


def steady_state_covariance(
    model: TrackingModel,
    p0: float = DEFAULT_P0,
    tol: float = 1e-10,
    max_iter: int = 1000,
) -> np.ndarray:
    """Iterate the covariance recursion from p0*I until ||P_next - P|| < tol."""
    P = p0 * np.eye(3 * model.d)
    for _ in range(max_iter):
        P_next = covariance_step(model, P)
        delta = np.linalg.norm(P_next - P)
        P = P_next
        if delta < tol:
            return P
    raise RuntimeError(f"covariance recursion did not settle within {max_iter} iterations")


@dataclass(frozen=True, eq=False)
class TrackRecord:
    """Per-step tracking log pairing each observation with the prediction made first.

    Row i describes step k = steps[i]: ``predicted[i]`` is the position block
    of X(k | k-1), i.e. the forecast issued before observation z_k arrived;
    ``innovations[i]`` is z_k minus that forecast; ``gain_norms[i]`` is the
    Frobenius norm of the gain that consumed z_k; ``p_traces[i]`` is the trace
    of P(k | k-1).  The trivial step 0, whose forecast is the initial
    observation itself, is not recorded.  ``final_state`` is the one-step
    forecast past the last observation (None for records read from disk).
    """

    user_id: str
    steps: np.ndarray
    predicted: np.ndarray
    innovations: np.ndarray
    gain_norms: np.ndarray
    p_traces: np.ndarray
    final_state: Optional[FilterState] = None

    @property
    def n_steps(self) -> int:
        return int(self.steps.size)


def track_series(
    model: TrackingModel,
    observations: ProfileSeries,
    p0: float = DEFAULT_P0,
) -> TrackRecord:
    """Run the predictor over a profile series, one filter step per snapshot.

    The filter starts at the first observation; every subsequent snapshot is
    paired with the prediction made before it was consumed, so the record is
    honest out-of-sample output.  Needs at least 2 observations.
    """
    Z = observations.profiles
    if observations.d != model.d:
        raise ValueError(
            f"series dimension {observations.d} does not match model d={model.d}"
        )
    n_obs = observations.n_instants
    if n_obs < 2:
        raise ValueError(f"tracking needs at least 2 observations, got {n_obs}")

    state = init_filter(model, Z[0], p0)
    steps: list[int] = []
    predicted: list[np.ndarray] = []
    innovations: list[np.ndarray] = []
    gain_norms: list[float] = []
    p_traces: list[float] = []
    for k in range(n_obs):
        previous = state
        state = predict_step(model, state, Z[k])
        if k >= 1:
            steps.append(k)
            predicted.append(previous.position())
            innovations.append(state.last_innovation)
            gain_norms.append(float(np.linalg.norm(state.last_gain)))
            p_traces.append(float(np.trace(previous.P)))
    return TrackRecord(
        user_id=observations.user_id,
        steps=np.array(steps, dtype=int),
        predicted=np.vstack(predicted),
        innovations=np.vstack(innovations),
        gain_norms=np.array(gain_norms),
        p_traces=np.array(p_traces),
        final_state=state,
    )


def _per_axis_blocks(model: TrackingModel) -> tuple[np.ndarray, np.ndarray]:
    """Split Q and R into per-axis pieces, or fail if they couple axes."""
    d = model.d
    R = model.R
    if np.any(R != np.diag(np.diag(R))):
        raise ValueError("R couples genre axes; decoupled tracking needs a diagonal R")
    Q = model.Q
    idx = np.arange(d)
    Qb = np.empty((d, 3, 3))
    for a in range(3):
        for b in range(3):
            block = Q[a * d : (a + 1) * d, b * d : (b + 1) * d]
            if np.any(block != np.diag(np.diag(block))):
                raise ValueError(
                    "Q couples genre axes; decoupled tracking needs per-axis blocks"
                )
            Qb[:, a, b] = block[idx, idx]
    return Qb, np.diag(R).copy()


def track_series_decoupled(
    model: TrackingModel,
    observations: ProfileSeries,
    p0: float = DEFAULT_P0,
) -> TrackRecord:
    """Run d independent 3-state scalar-observation filters, one per genre axis.

    Numerically equivalent to :func:`track_series` whenever Q and R carry no
    cross-axis coupling (true of every :func:`build_model` output), at a small
    fraction of the floating-point cost: the dense path multiplies 3d x 3d
    matrices per step, this one works on a (d, 3, 3) stack.
    """
    Z = observations.profiles
    if observations.d != model.d:
        raise ValueError(
            f"series dimension {observations.d} does not match model d={model.d}"
        )
    n_obs = observations.n_instants
    if n_obs < 2:
        raise ValueError(f"tracking needs at least 2 observations, got {n_obs}")
    if not p0 > 0:
        raise ValueError(f"initial covariance scale p0 must be > 0, got {p0}")
    if not np.all(np.isfinite(Z)):
        raise ValueError("observations contain non-finite values")

    d = model.d
    Qb, r_diag = _per_axis_blocks(model)
    A3 = _transition_block(model.T, model.alpha)

    # Per-axis state rows (position, velocity, acceleration) and 3x3 covariances.
    X = np.zeros((d, 3))
    X[:, 0] = Z[0]
    P = np.broadcast_to(p0 * np.eye(3), (d, 3, 3)).copy()

    steps: list[int] = []
    predicted: list[np.ndarray] = []
    innovations: list[np.ndarray] = []
    gain_norms: list[float] = []
    p_traces: list[float] = []
    nu = np.zeros(d)
    K = np.zeros((d, 3))
    for k in range(n_obs):
        prev_X, prev_P = X, P
        S = prev_P[:, 0, 0] + r_diag
        if np.any(S <= 0.0) or S.max() > COND_LIMIT * S.min():
            raise SingularInnovationError(
                f"innovation covariance ill-conditioned: eigenvalue range "
                f"[{S.min():.3e}, {S.max():.3e}]"
            )
        AP = A3 @ prev_P                       # (d, 3, 3)
        cross = AP[:, :, 0]                    # A P e1 per axis
        K = cross / S[:, None]
        nu = Z[k] - prev_X[:, 0]
        X = prev_X @ A3.T + K * nu[:, None]
        P = AP @ A3.T - cross[:, :, None] * cross[:, None, :] / S[:, None, None] + Qb
        P = 0.5 * (P + np.transpose(P, (0, 2, 1)))
        if np.linalg.eigvalsh(P).min() < -PSD_TOL:
            raise DivergenceError(f"prediction covariance lost PSD at step {k + 1}")
        if k >= 1:
            steps.append(k)
            predicted.append(prev_X[:, 0].copy())
            innovations.append(nu.copy())
            gain_norms.append(float(np.sqrt(np.sum(K * K))))
            p_traces.append(float(prev_P[:, (0, 1, 2), (0, 1, 2)].sum()))

    final_state = FilterState(
        x_hat=X.T.ravel().copy(),
        P=_assemble_dense_covariance(P),
        k=n_obs,
        last_innovation=nu.copy(),
        last_gain=_assemble_dense_gain(K),
    )
    return TrackRecord(
        user_id=observations.user_id,
        steps=np.array(steps, dtype=int),
        predicted=np.vstack(predicted),
        innovations=np.vstack(innovations),
        gain_norms=np.array(gain_norms),
        p_traces=np.array(p_traces),
        final_state=final_state,
    )


def _assemble_dense_covariance(P_stack: np.ndarray) -> np.ndarray:
    d = P_stack.shape[0]
    idx = np.arange(d)
    dense = np.zeros((3 * d, 3 * d))
    for a in range(3):
        for b in range(3):
            dense[a * d + idx, b * d + idx] = P_stack[:, a, b]
    return dense


def _assemble_dense_gain(K_stack: np.ndarray) -> np.ndarray:
    d = K_stack.shape[0]
    idx = np.arange(d)
    dense = np.zeros((3 * d, d))
    for a in range(3):
        dense[a * d + idx, idx] = K_stack[:, a]
    return dense


# ---------------------------------------------------------------------------
# track-record file format: CSV with header
#   step, pred_<genre>..., innov_<genre>..., gain_norm, p_trace
# one row per recorded step, floats at full precision.
# ---------------------------------------------------------------------------


def write_track_record(record: TrackRecord, space: ConceptSpace, path: str | Path) -> None:
    d = record.predicted.shape[1]
    if d != space.d:
        raise ValueError(f"record dimension {d} does not match space d={space.d}")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["step"]
            + [f"pred_{name}" for name in space.names]
            + [f"innov_{name}" for name in space.names]
            + ["gain_norm", "p_trace"]
        )
        for i in range(record.n_steps):
            writer.writerow(
                [int(record.steps[i])]
                + [fmt(x) for x in record.predicted[i]]
                + [fmt(x) for x in record.innovations[i]]
                + [fmt(record.gain_norms[i]), fmt(record.p_traces[i])]
            )


def _final_state_header(space: ConceptSpace) -> list[str]:
    return (
        ["user_id"]
        + [f"pos_{name}" for name in space.names]
        + [f"vel_{name}" for name in space.names]
        + [f"acc_{name}" for name in space.names]
    )


def write_final_states(
    states: dict[str, FilterState], space: ConceptSpace, path: str | Path
) -> None:
    """One row per user: the final predicted state vector, [pos | vel | acc]."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_final_state_header(space))
        for user_id in sorted(states):
            state = states[user_id]
            if state.d != space.d:
                raise ValueError(
                    f"state for {user_id!r} has d={state.d}, space has d={space.d}"
                )
            writer.writerow([user_id] + [fmt(x) for x in state.x_hat])


def read_final_states(path: str | Path, space: ConceptSpace) -> dict[str, np.ndarray]:
    """Final state vectors keyed by user id; covariances are not persisted."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _final_state_header(space):
            raise ValueError(f"final-state file {path} does not match the vocabulary")
        states: dict[str, np.ndarray] = {}
        for row in reader:
            if not row:
                continue
            user_id = row[0]
            if user_id in states:
                raise ValueError(f"duplicate final state for user {user_id!r}")
            vec = np.array([float(x) for x in row[1:]])
            if vec.size != 3 * space.d:
                raise ValueError(
                    f"final-state row for {user_id!r} has {vec.size} values, "
                    f"expected {3 * space.d}"
                )
            states[user_id] = vec
    return states


def read_track_record(path: str | Path, space: ConceptSpace, user_id: str = "") -> TrackRecord:
    expected = (
        ["step"]
        + [f"pred_{name}" for name in space.names]
        + [f"innov_{name}" for name in space.names]
        + ["gain_norm", "p_trace"]
    )
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != expected:
            raise ValueError(f"track record {path} does not match the vocabulary")
        rows = [row for row in reader if row]
    if not rows:
        raise ValueError(f"track record {path} has no steps")
    d = space.d
    data = np.array([[float(x) for x in row] for row in rows])
    return TrackRecord(
        user_id=user_id,
        steps=data[:, 0].astype(int),
        predicted=data[:, 1 : 1 + d],
        innovations=data[:, 1 + d : 1 + 2 * d],
        gain_norms=data[:, 1 + 2 * d],
        p_traces=data[:, 2 + 2 * d],
        final_state=None,
    )
