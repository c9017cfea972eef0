"""Incremental soft-margin linear classifier over the queried subset.

The model is trained only on samples whose selection flag has been set; the
selected set grows monotonically.  The dual is solved by a pairwise
working-set method that maintains sum(alpha * y) = 0 (so the prediction
carries a bias term), warm-started from the previous duals.  Set
``bias_mode='none'`` to drop the equality constraint and the bias.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
import struct

import numpy as np

from ._kernels import solve_dual
from .data import Pool

SNAPSHOT_MAGIC = b"ALMD"
SNAPSHOT_VERSION = 1


@dataclass
class SolverConfig:
    C: float = 1.0
    kkt_tol: float = 1e-3
    max_passes: int = 10000
    eq_tol: float = 1e-6
    bias_mode: str = "constrained"   # or "none"

    def __post_init__(self):
        if self.C <= 0 or self.kkt_tol <= 0 or self.max_passes <= 0 or self.eq_tol <= 0:
            raise ValueError("all solver parameters must be positive")
        if self.bias_mode not in ("constrained", "none"):
            raise ValueError(f"bias_mode must be 'constrained' or 'none', got {self.bias_mode!r}")


@dataclass
class LinearModel:
    """One binary classifier state; alpha/gamma are train-split indexed."""

    w: np.ndarray
    b: float
    alpha: np.ndarray
    gamma: np.ndarray          # uint8 selection flags, never cleared
    C: float
    bias_mode: str = "constrained"
    converged: bool = True

    @classmethod
    def untrained(cls, dim: int, n_train: int, config: SolverConfig | None = None):
        config = config or SolverConfig()
        return cls(w=np.zeros(dim), b=0.0, alpha=np.zeros(n_train),
                   gamma=np.zeros(n_train, dtype=np.uint8), C=config.C,
                   bias_mode=config.bias_mode)

    @property
    def selected_positions(self) -> np.ndarray:
        return np.flatnonzero(self.gamma)


def decision_value(model: LinearModel, x: np.ndarray):
    """w.x + b for a single vector or a (n, dim) matrix."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.w.shape[0]:
        raise ValueError(f"dimension mismatch: x has {x.shape[-1]}, model has {model.w.shape[0]}")
    out = x @ model.w + model.b
    return float(out) if out.ndim == 0 else out


def dual_objective(alpha: np.ndarray, y: np.ndarray, K: np.ndarray) -> float:
    """sum(alpha) - 0.5 * a' Q a with Q_ij = y_i y_j K_ij."""
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


def train_incremental(model: LinearModel, pool: Pool, labels: dict,
                      newly_selected, config: SolverConfig | None = None,
                      train_gram: np.ndarray | None = None) -> LinearModel:
    """Add newly selected samples and re-solve from the warm-started duals.

    `labels` maps global sample id -> ±1 for every selected sample;
    `newly_selected` holds global sample ids not selected before.
    `train_gram`, if given, is the gram matrix of the whole train split.
    """
    config = config or SolverConfig(C=model.C, bias_mode=model.bias_mode)
    train_ids = pool.train_indices
    pos_of = {int(g): i for i, g in enumerate(train_ids)}

    gamma = model.gamma.copy()
    for sid in newly_selected:
        sid = int(sid)
        if sid not in pos_of:
            raise ValueError(f"sample {sid} is not in the train split")
        p = pos_of[sid]
        if gamma[p]:
            raise ValueError(f"sample {sid} was already selected")
        if sid not in labels:
            raise ValueError(f"no label provided for selected sample {sid}")
        gamma[p] = 1

    sel = np.flatnonzero(gamma)
    sel_ids = train_ids[sel]
    y = np.empty(len(sel))
    for i, sid in enumerate(sel_ids):
        lab = labels.get(int(sid))
        if lab not in (1, -1):
            raise ValueError(f"missing or invalid label for selected sample {int(sid)}")
        y[i] = lab

    if train_gram is not None:
        K = train_gram[np.ix_(sel, sel)]
    else:
        x_sel = pool.features[sel_ids]
        K = x_sel @ x_sel.T

    alpha_sel = model.alpha[sel].copy()
    constrained = config.bias_mode == "constrained"
    b, _, converged = solve_dual(K, y, alpha_sel, config.C, config.kkt_tol,
                                 config.max_passes, constrained=constrained)

    alpha = np.zeros_like(model.alpha)
    alpha[sel] = alpha_sel
    w = pool.features[sel_ids].T @ (alpha_sel * y)
    return LinearModel(w=w, b=b, alpha=alpha, gamma=gamma, C=config.C,
                       bias_mode=config.bias_mode, converged=converged)


@dataclass
class KKTReport:
    residuals: dict          # global sample id -> KKT residual
    max_residual: float
    equality_residual: float


def check_kkt(model: LinearModel, pool: Pool, labels: dict,
              kkt_tol: float = 1e-3) -> KKTReport:
    """Recompute per-sample KKT residuals and the equality-constraint residual."""
    train_ids = pool.train_indices
    sel = model.selected_positions
    residuals = {}
    eq = 0.0
    for p in sel:
        sid = int(train_ids[p])
        yi = labels[sid]
        fi = decision_value(model, pool.features[sid])
        m = yi * fi
        a = model.alpha[p]
        if a <= 0:
            r = max(0.0, 1.0 - m)
        elif a >= model.C:
            r = max(0.0, m - 1.0)
        else:
            r = abs(m - 1.0)
        residuals[sid] = r
        eq += a * yi
    max_r = max(residuals.values()) if residuals else 0.0
    return KKTReport(residuals=residuals, max_residual=max_r,
                     equality_residual=abs(eq))


# ---------------------------------------------------------------------------
# Model snapshots
# ---------------------------------------------------------------------------

def save_snapshot(path, model: LinearModel, labels_by_position: dict):
    """Write the binary model snapshot; labels_by_position maps
    train-split position -> ±1 for every selected position."""
    sel = model.selected_positions
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        d = len(model.w)
        fh.write(struct.pack("<II", SNAPSHOT_VERSION, d))
        fh.write(np.asarray(model.w, dtype="<f4").tobytes())
        fh.write(struct.pack("<f", model.b))
        fh.write(struct.pack("<I", len(sel)))
        for p in sel:
            fh.write(struct.pack("<Ifb", int(p), float(model.alpha[p]),
                                 int(labels_by_position[int(p)])))


def load_snapshot(path, n_train: int, C: float = 1.0):
    """Read a snapshot; returns (LinearModel, labels_by_position)."""
    raw = open(path, "rb").read()
    if raw[:4] != SNAPSHOT_MAGIC:
        raise ValueError(f"{path}: bad snapshot magic {raw[:4]!r}")
    version, d = struct.unpack_from("<II", raw, 4)
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"{path}: unsupported snapshot version {version}")
    off = 12
    w = np.frombuffer(raw, dtype="<f4", count=d, offset=off).astype(np.float64)
    off += 4 * d
    (b,) = struct.unpack_from("<f", raw, off)
    off += 4
    (n_sel,) = struct.unpack_from("<I", raw, off)
    off += 4
    alpha = np.zeros(n_train)
    gamma = np.zeros(n_train, dtype=np.uint8)
    labels_by_position = {}
    for _ in range(n_sel):
        p, a, lab = struct.unpack_from("<Ifb", raw, off)
        off += struct.calcsize("<Ifb")
        alpha[p] = a
        gamma[p] = 1
        labels_by_position[p] = int(lab)
    model = LinearModel(w=w, b=float(b), alpha=alpha, gamma=gamma, C=C)
    return model, labels_by_position
