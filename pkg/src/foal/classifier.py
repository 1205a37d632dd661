"""Analytic linear classifier updated by recursive least squares.

The only trainable state is the weight matrix ``W`` (D x C, one column per
class seen so far) and the regularized feature autocorrelation matrix ``R``,
which is the inverse of (sum of X^T X over all batches seen + gamma * I).
Starting from R = (1/gamma) * I and an empty W, each mini-batch (X, y) is
folded in by a Woodbury rank-S downdate of R followed by a gain step on W:

    K = I_S + X R X^T              (small S x S system, SPD)
    R <- R - (R X^T) K^{-1} (X R)
    W <- W + (R X^T) (Y - X W)     using the already-updated R

New class columns are appended as zeros the first time their label appears,
so the update is identical whether classes arrive task-by-task or trickle in.
After any sequence of batches, W equals the one-shot ridge solution on all
data seen so far, up to floating-point error; ``closed_form`` computes that
solution directly and serves as the independent oracle.

State arrays are float64 regardless of input precision. ``update`` returns a
new state; existing snapshots are never mutated, so prediction and
diagnostics can run concurrently with training on a snapshot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, solve

from .encoder import ActivationBatch
from .errors import FoalError, NotPositiveDefiniteError


class LabelBatch:
    """External class identifiers, one per activation row."""

    __slots__ = ("class_ids",)

    def __init__(self, class_ids):
        self.class_ids = tuple(class_ids)

    def __len__(self) -> int:
        return len(self.class_ids)


@dataclass(frozen=True)
class ClassifierState:
    W: np.ndarray          # (dim, n_classes) float64
    R: np.ndarray          # (dim, dim) float64, symmetric positive definite
    gamma: float
    class_ids: tuple       # column order of W
    samples_seen: int

    @property
    def dim(self) -> int:
        return self.R.shape[0]

    @property
    def num_classes(self) -> int:
        return self.W.shape[1]

    def column_of(self, class_id) -> int:
        return self.class_ids.index(class_id)


def new_classifier(dim: int, gamma: float) -> ClassifierState:
    """Fresh state: R = (1/gamma) * I, W with zero columns, nothing seen."""
    if dim < 1:
        raise FoalError("classifier dimension must be >= 1")
    if not gamma > 0:
        raise FoalError("gamma must be positive")
    R = np.eye(dim, dtype=np.float64) / float(gamma)
    W = np.zeros((dim, 0), dtype=np.float64)
    return ClassifierState(W=W, R=R, gamma=float(gamma), class_ids=(),
                           samples_seen=0)


def expand_classes(state: ClassifierState, new_ids) -> ClassifierState:
    """Append one all-zero weight column per new class id; R is untouched."""
    new_ids = list(new_ids)
    if not new_ids:
        return state
    known = set(state.class_ids)
    for cid in new_ids:
        if cid in known:
            raise FoalError(f"class id {cid!r} already present")
        known.add(cid)
    pad = np.zeros((state.dim, len(new_ids)), dtype=np.float64)
    return ClassifierState(
        W=np.hstack([state.W, pad]),
        R=state.R,
        gamma=state.gamma,
        class_ids=state.class_ids + tuple(new_ids),
        samples_seen=state.samples_seen,
    )


def _one_hot(labels: LabelBatch, class_ids: tuple) -> np.ndarray:
    columns = {cid: j for j, cid in enumerate(class_ids)}
    Y = np.zeros((len(labels), len(class_ids)), dtype=np.float64)
    for row, cid in enumerate(labels.class_ids):
        Y[row, columns[cid]] = 1.0
    return Y


def update(state: ClassifierState, X: ActivationBatch,
           Y: LabelBatch) -> ClassifierState:
    """Fold one mini-batch into the state and return the successor state.

    Labels unseen so far trigger class expansion first. Only the S x S
    system (I + X R X^T) is factorized; R stays D x D forever, so the cost
    per batch does not grow with stream length. R is re-symmetrized to damp
    float drift over long streams.
    """
    if len(X) != len(Y):
        raise FoalError(
            f"batch size mismatch: {len(X)} activation rows vs {len(Y)} labels"
        )
    if X.dim != state.dim:
        raise FoalError(
            f"activation dim {X.dim} does not match classifier dim {state.dim}"
        )

    fresh = []
    seen = set(state.class_ids)
    for cid in Y.class_ids:
        if cid not in seen:
            fresh.append(cid)
            seen.add(cid)
    if fresh:
        state = expand_classes(state, fresh)

    Xb = X.rows.astype(np.float64)
    Yb = _one_hot(Y, state.class_ids)
    S = Xb.shape[0]

    G = state.R @ Xb.T                      # (D, S)
    K = np.eye(S) + Xb @ G                  # (S, S), SPD by construction
    K = (K + K.T) / 2.0
    try:
        factor = cho_factor(K, lower=True)
    except LinAlgError as exc:
        raise NotPositiveDefiniteError(
            "per-batch system I + X R X^T is not positive definite",
            condition=float(np.linalg.cond(K)),
        ) from exc
    gain_T = cho_solve(factor, G.T)         # (S, D) = K^{-1} (X R)

    R_new = state.R - G @ gain_T
    R_new = (R_new + R_new.T) / 2.0
    # gain_T.T equals R_new @ X^T: R_new X^T = (R - G K^{-1} G^T) X^T
    # = G - G K^{-1} (K - I) = G K^{-1}.
    W_new = state.W + gain_T.T @ (Yb - Xb @ state.W)

    return ClassifierState(
        W=W_new,
        R=R_new,
        gamma=state.gamma,
        class_ids=state.class_ids,
        samples_seen=state.samples_seen + S,
    )


def closed_form(X_all: np.ndarray, Y_all: np.ndarray,
                gamma: float) -> np.ndarray:
    """One-shot ridge solution (X^T X + gamma I)^{-1} X^T Y on stacked data.

    The joint-learning oracle the recursive updates must reproduce. With no
    rows the pure ridge answer is the zero matrix.
    """
    if not gamma > 0:
        raise FoalError("gamma must be positive")
    X_all = np.asarray(X_all, dtype=np.float64)
    Y_all = np.asarray(Y_all, dtype=np.float64)
    if X_all.ndim != 2 or Y_all.ndim != 2:
        raise FoalError("stacked activations and labels must be 2-D")
    if X_all.shape[0] != Y_all.shape[0]:
        raise FoalError(
            f"row mismatch: {X_all.shape[0]} activations vs {Y_all.shape[0]} labels"
        )
    dim = X_all.shape[1]
    if X_all.shape[0] == 0:
        return np.zeros((dim, Y_all.shape[1]), dtype=np.float64)
    A = X_all.T @ X_all + float(gamma) * np.eye(dim)
    B = X_all.T @ Y_all
    return solve(A, B, assume_a="pos")


def predict(state: ClassifierState, X: ActivationBatch):
    """Class id per row plus raw logits; ties go to the lowest column index."""
    if state.num_classes == 0:
        raise FoalError("no classes learned")
    if X.dim != state.dim:
        raise FoalError(
            f"activation dim {X.dim} does not match classifier dim {state.dim}"
        )
    logits = X.rows.astype(np.float64) @ state.W
    winners = np.argmax(logits, axis=1)
    ids = [state.class_ids[j] for j in winners]
    return ids, logits


def weight_column_norms(state: ClassifierState):
    """(class id, L2 norm of its weight column) in class order.

    Flat norms across classes indicate the absence of recency bias; a
    classifier favouring recent classes shows outsized norms on them.
    """
    norms = np.linalg.norm(state.W, axis=0)
    return list(zip(state.class_ids, norms.tolist()))


def save_state(state: ClassifierState, path) -> None:
    """Persist a classifier snapshot as an .npz archive."""
    np.savez(
        path,
        W=state.W,
        R=state.R,
        gamma=np.float64(state.gamma),
        class_ids=np.asarray(state.class_ids, dtype=np.int64),
        samples_seen=np.int64(state.samples_seen),
    )


def load_state(path) -> ClassifierState:
    with np.load(path) as archive:
        return ClassifierState(
            W=archive["W"],
            R=archive["R"],
            gamma=float(archive["gamma"]),
            class_ids=tuple(int(c) for c in archive["class_ids"]),
            samples_seen=int(archive["samples_seen"]),
        )
