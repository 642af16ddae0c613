"""Randomised single-hidden-layer networks, ensembles, and a linear baseline.

The regressor is deliberately cheap to train: hidden weights and biases
are drawn at random and never touched again, and only the linear output
layer is fitted, by minimum-norm least squares on the hidden activations.
Averaging an ensemble of such networks (here 100 by default) smooths out
the variance of the random hidden layer.

Hidden weights are uniform on [-1, 1] and hidden biases uniform on [0, 1],
drawn in that order from a generator derived from the training seed, so a
given (seed, node_count, activation) triple always yields the same model.
The output layer has no bias term.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np

from .numkernel import as_matrix, as_vector, pinv_solve
from .seeding import STREAM_CV, STREAM_MEMBER, derive_rng, derive_seed

DEFAULT_NODE_GRID = (5, 10, 20, 40, 70, 100, 150, 200, 300)


class Activation(enum.Enum):
    SIGMOID = "sigmoid"
    RADIAL_BASIS = "radial-basis"
    SOFTPLUS = "softplus"


class TrimPolicy(enum.Enum):
    NONE = "none"
    DROP_MIN_MAX = "drop-min-max"


def activation_value(kind: Activation, z: float) -> float:
    """Scalar activation; see _activate for the vectorised forms."""
    return float(_activate(kind, np.asarray([float(z)]))[0])


def _activate(kind: Activation, z: np.ndarray) -> np.ndarray:
    if kind is Activation.SIGMOID:
        # split by sign so exp never sees a large positive argument
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out
    if kind is Activation.RADIAL_BASIS:
        # exp(-z^2); |z| capped where the result already underflows to 0
        return np.exp(-np.square(np.minimum(np.abs(z), 40.0)))
    if kind is Activation.SOFTPLUS:
        # log(1 + e^z) = max(z, 0) + log1p(e^{-|z|}), stable at both ends
        return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))
    raise ValueError(f"unknown activation {kind!r}")


@dataclass(frozen=True)
class ElmModel:
    """One trained network: frozen hidden layer plus fitted output weights."""

    hidden_weights: np.ndarray   # (L, d)
    hidden_biases: np.ndarray    # (L,)
    output_weights: np.ndarray   # (L, m)
    activation: Activation
    seed: int | None = None
    output_bias_included: bool = False

    @property
    def node_count(self) -> int:
        return self.hidden_weights.shape[0]

    @property
    def input_dim(self) -> int:
        return self.hidden_weights.shape[1]


def _hidden_activations(model_weights, model_biases, activation, X):
    return _activate(activation, X @ model_weights.T + model_biases)


def elm_train(inputs, targets, node_count: int, activation: Activation,
              seed: int, rel_tol: float = 1e-10) -> ElmModel:
    """Draw a random hidden layer and fit the output weights to targets.

    ``targets`` is (N, m); pass a single-column matrix for scalar targets.
    """
    X = as_matrix(inputs, "inputs")
    Y = as_matrix(targets, "targets")
    if X.shape[0] < 1:
        raise ValueError("elm_train requires at least one training row")
    if Y.shape[0] != X.shape[0]:
        raise ValueError(f"inputs have {X.shape[0]} rows but targets has {Y.shape[0]}")
    if node_count < 1:
        raise ValueError(f"node_count must be at least 1, got {node_count}")
    if not isinstance(activation, Activation):
        raise ValueError(f"activation must be an Activation, got {activation!r}")
    rng = derive_rng(seed)
    W = rng.uniform(-1.0, 1.0, size=(node_count, X.shape[1]))
    b = rng.uniform(0.0, 1.0, size=node_count)
    H = _hidden_activations(W, b, activation, X)
    if not np.isfinite(H).all():
        raise RuntimeError(
            f"hidden activations are not finite (activation={activation.value}, "
            f"node_count={node_count}); input scaling is probably missing"
        )
    B = pinv_solve(H, Y, rel_tol=rel_tol)
    return ElmModel(hidden_weights=W, hidden_biases=b, output_weights=B,
                    activation=activation, seed=int(seed))


def elm_predict(model: ElmModel, inputs) -> np.ndarray:
    """Network outputs, shape (N, m)."""
    X = as_matrix(inputs, "inputs")
    if X.shape[1] != model.input_dim:
        raise ValueError(
            f"inputs have {X.shape[1]} columns, model expects {model.input_dim}"
        )
    H = _hidden_activations(model.hidden_weights, model.hidden_biases,
                            model.activation, X)
    return H @ model.output_weights


@dataclass(frozen=True)
class EnsembleModel:
    members: tuple[ElmModel, ...]
    trim_policy: TrimPolicy
    seed: int | None = None

    def __post_init__(self):
        if not self.members:
            raise ValueError("an ensemble needs at least one member")
        first = self.members[0]
        for m in self.members[1:]:
            if (m.activation is not first.activation
                    or m.node_count != first.node_count
                    or m.input_dim != first.input_dim):
                raise ValueError("ensemble members must share activation, "
                                 "node count and input dimension")
        if self.trim_policy is TrimPolicy.DROP_MIN_MAX and len(self.members) < 3:
            raise ValueError(
                f"drop-min-max trimming needs at least 3 members, got {len(self.members)}"
            )

    @property
    def activation(self) -> Activation:
        return self.members[0].activation

    @property
    def node_count(self) -> int:
        return self.members[0].node_count

    @property
    def input_dim(self) -> int:
        return self.members[0].input_dim


def ensemble_train(inputs, targets, node_count: int, activation: Activation,
                   member_count: int = 100, seed: int = 0,
                   rel_tol: float = 1e-10) -> EnsembleModel:
    """Train ``member_count`` independent networks on the same data.

    Member i trains on a seed derived from (seed, member stream, i), so
    members are decorrelated but the whole ensemble is reproducible from
    the single ``seed``.  The radial-basis activation occasionally
    produces wild individual members, so that activation gets the
    drop-min-max trim policy; the others average all members.
    """
    if member_count < 1:
        raise ValueError(f"member_count must be at least 1, got {member_count}")
    trim = (TrimPolicy.DROP_MIN_MAX if activation is Activation.RADIAL_BASIS
            else TrimPolicy.NONE)
    members = tuple(
        elm_train(inputs, targets, node_count, activation,
                  seed=derive_seed(seed, STREAM_MEMBER, i), rel_tol=rel_tol)
        for i in range(member_count)
    )
    return EnsembleModel(members=members, trim_policy=trim, seed=int(seed))


def ensemble_predict(ensemble: EnsembleModel, inputs) -> np.ndarray:
    """Combine member predictions pointwise, shape (N, m).

    Under drop-min-max the single largest and single smallest member
    prediction at each output cell are excluded before averaging.
    """
    stacked = np.stack([elm_predict(m, inputs) for m in ensemble.members])
    if ensemble.trim_policy is TrimPolicy.NONE:
        return stacked.mean(axis=0)
    count = stacked.shape[0]
    total = stacked.sum(axis=0) - stacked.max(axis=0) - stacked.min(axis=0)
    return total / (count - 2)


@dataclass(frozen=True)
class CvConfig:
    """Cross-validation settings for hidden-node selection."""

    folds: int = 5
    candidate_node_counts: tuple[int, ...] = DEFAULT_NODE_GRID
    seed: int = 0

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError(f"folds must be at least 2, got {self.folds}")
        counts = tuple(self.candidate_node_counts)
        if not counts:
            raise ValueError("candidate_node_counts must not be empty")
        if any(c < 1 for c in counts):
            raise ValueError(f"candidate node counts must be positive, got {counts}")
        if any(b <= a for a, b in zip(counts, counts[1:])):
            raise ValueError(
                f"candidate node counts must be strictly increasing, got {counts}"
            )


def default_node_grid(n_train: int, folds: int = 5) -> tuple[int, ...]:
    """DEFAULT_NODE_GRID truncated to counts trainable on every fold."""
    if n_train < folds:
        raise ValueError(f"need at least {folds} rows for {folds}-fold selection")
    limit = n_train * (folds - 1) // folds
    grid = tuple(c for c in DEFAULT_NODE_GRID if c <= limit)
    if not grid:
        grid = (max(1, limit),)
    return grid


def select_node_count(inputs, targets, activation: Activation, cv: CvConfig):
    """Pick the hidden-node count with the lowest mean validation MSE.

    Folds are contiguous blocks in row order: the datasets this targets
    are time ordered, and shuffling would leak adjacent (correlated) rows
    between train and validation.  Each (fold, candidate) pair trains a
    fresh network on its own derived seed.  Ties go to the smaller count.

    Returns (node_count, mean_mse_per_candidate) where the second element
    maps each evaluated candidate to its score.
    """
    X = as_matrix(inputs, "inputs")
    Y = as_matrix(targets, "targets")
    if Y.shape[0] != X.shape[0]:
        raise ValueError(f"inputs have {X.shape[0]} rows but targets has {Y.shape[0]}")
    n = X.shape[0]
    if n < cv.folds:
        raise ValueError(f"need at least {cv.folds} rows for {cv.folds}-fold selection")
    blocks = np.array_split(np.arange(n), cv.folds)
    min_train_rows = n - max(len(b) for b in blocks)
    scores: dict[int, float] = {}
    for ci, L in enumerate(cv.candidate_node_counts):
        if L > min_train_rows:
            warnings.warn(
                f"skipping candidate node count {L}: exceeds the smallest "
                f"training fold ({min_train_rows} rows)"
            )
            continue
        fold_mse = []
        for fi, block in enumerate(blocks):
            mask = np.ones(n, dtype=bool)
            mask[block] = False
            model = elm_train(X[mask], Y[mask], L, activation,
                              seed=derive_seed(cv.seed, STREAM_CV, ci, fi))
            err = elm_predict(model, X[block]) - Y[block]
            fold_mse.append(float(np.mean(err * err)))
        scores[int(L)] = float(np.mean(fold_mse))
    if not scores:
        raise ValueError(
            "no candidate node count is trainable on every fold; "
            "provide smaller candidates"
        )
    best = min(scores, key=lambda L: (scores[L], L))
    return best, scores


@dataclass(frozen=True)
class LinearModel:
    coefficients: np.ndarray  # (d,)
    intercept: float


def lr_fit(inputs, targets) -> LinearModel:
    """Ordinary least squares with an intercept, via the same SVD solve.

    Rank-deficient inputs (e.g. duplicated columns) get the minimum-norm
    coefficient split rather than an error.
    """
    X = as_matrix(inputs, "inputs")
    y = as_vector(targets, "targets")
    if X.shape[0] < 1:
        raise ValueError("lr_fit requires at least one training row")
    if y.size != X.shape[0]:
        raise ValueError(f"inputs have {X.shape[0]} rows but targets has {y.size}")
    design = np.hstack([X, np.ones((X.shape[0], 1))])
    B = pinv_solve(design, y[:, None])
    return LinearModel(coefficients=B[:-1, 0].copy(), intercept=float(B[-1, 0]))


def lr_predict(model: LinearModel, inputs) -> np.ndarray:
    X = as_matrix(inputs, "inputs")
    if X.shape[1] != model.coefficients.size:
        raise ValueError(
            f"inputs have {X.shape[1]} columns, model expects {model.coefficients.size}"
        )
    return X @ model.coefficients + model.intercept
