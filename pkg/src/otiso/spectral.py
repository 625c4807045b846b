"""Hermitian eigendecomposition with deterministic conventions, plus gap policies.

Everything downstream (cores, phase recovery, decisions) consumes
:class:`SpectralData` produced here, so the conventions are pinned hard:

* eigenvalues are returned in non-increasing order;
* eigenvector columns are paired with the eigenvalues and each column is
  normalized so that its largest-modulus entry is real and positive (ties
  broken by the lowest row index);
* the same input matrix yields bit-identical output on repeated calls.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, DimensionMismatch, NonHermitianInput

# Relative Hermiticity tolerance: inputs beyond this are rejected, inputs
# within it are symmetrized to (G + G*)/2 before factoring.
TAU_HERMITIAN_REL = 1e-10

# Residual tolerance ||G V - V diag(lam)||_F <= TAU_EIG_REL * ||G||_F.
TAU_EIG_REL = 1e-10

# Adjacent eigenvalues closer than this (relative to the largest modulus
# eigenvalue) are treated as a degenerate pair when a policy asks for
# simplicity; exact floating-point ties are rare even for genuinely repeated
# eigenvalues, so strict policies need a scale-aware floor.
DEGENERACY_REL = 1e-8


@dataclass(frozen=True)
class SpectralData:
    """Eigendecomposition of a Hermitian PSD matrix with fixed conventions."""

    eigenvalues: np.ndarray  # non-increasing, real
    vectors: np.ndarray      # column j pairs with eigenvalues[j]
    min_gap: float           # min adjacent difference; +inf for 1x1
    backward_error: float    # ||G V - V diag(lam)||_F

    @property
    def simple(self) -> bool:
        return self.min_gap > 0.0

    @property
    def dim(self) -> int:
        return int(self.eigenvalues.shape[0])

    def degeneracy_floor(self) -> float:
        """Scale-aware gap below which adjacent eigenvalues count as tied."""
        scale = float(np.max(np.abs(self.eigenvalues))) if self.dim else 0.0
        return DEGENERACY_REL * max(scale, 1e-300)

    def to_json(self) -> dict:
        return {
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "min_gap": float(self.min_gap),
            "backward_error": float(self.backward_error),
        }

    @staticmethod
    def json_dumps(payload: dict) -> str:
        return json.dumps(payload, sort_keys=True)


@dataclass(frozen=True)
class GapPolicy:
    """Acceptance policy on the minimum adjacent eigenvalue gap.

    ``mode == "strict_simple"`` requires the spectrum to be simple, i.e. the
    minimum gap must exceed the scale-aware degeneracy floor.  ``mode ==
    "threshold"`` passes iff ``min_gap >= delta_min``.
    """

    delta_min: float = 0.0
    mode: str = "strict_simple"

    def __post_init__(self):
        if self.mode not in ("strict_simple", "threshold"):
            raise ValueError(f"unknown gap policy mode {self.mode!r}")
        if not (self.delta_min >= 0.0):
            raise ValueError("delta_min must be >= 0")


def _fix_column_phases(vectors: np.ndarray) -> np.ndarray:
    """Largest-modulus entry per column made real and positive (ties: lowest row)."""
    V = vectors.copy()
    # np.argmax returns the first occurrence of the maximum, which is the
    # tie-break the convention asks for.
    for j in range(V.shape[1]):
        i = int(np.argmax(np.abs(V[:, j])))
        pivot = V[i, j]
        if np.iscomplexobj(V):
            mag = abs(pivot)
            if mag > 0.0:
                V[:, j] = V[:, j] * (pivot.conjugate() / mag)
        else:
            if pivot < 0.0:
                V[:, j] = -V[:, j]
    return V


def eig_hermitian(G: np.ndarray) -> SpectralData:
    """Eigendecomposition under the package conventions.

    Raises :class:`NonHermitianInput` when ``||G - G*||_F`` exceeds
    ``TAU_HERMITIAN_REL * ||G||_F`` and :class:`ConvergenceFailure` when the
    underlying LAPACK driver fails.  Inputs within the Hermiticity tolerance
    are symmetrized before factoring, so tiny asymmetries from floating-point
    products do not leak into the output.
    """
    G = np.asarray(G)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {G.shape}")
    normG = float(np.linalg.norm(G))
    defect = float(np.linalg.norm(G - G.conj().T))
    if defect > TAU_HERMITIAN_REL * max(normG, 1e-300):
        raise NonHermitianInput(f"Hermiticity defect {defect:.3e} exceeds tolerance for norm {normG:.3e}")
    H = (G + G.conj().T) / 2.0
    try:
        lam, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure is environment-dependent
        raise ConvergenceFailure(str(exc)) from exc
    lam = lam[::-1].copy()
    V = _fix_column_phases(V[:, ::-1])
    if lam.shape[0] > 1:
        min_gap = float(np.min(lam[:-1] - lam[1:]))
        # eigh guarantees ordering, so gaps are nonnegative up to roundoff
        min_gap = max(min_gap, 0.0)
    else:
        min_gap = float("inf")
    backward = float(np.linalg.norm(H @ V - V * lam[np.newaxis, :]))
    return SpectralData(eigenvalues=lam, vectors=V, min_gap=min_gap, backward_error=backward)


def spectra_close(s1: SpectralData, s2: SpectralData, tol: float) -> bool:
    """True iff the sorted eigenvalue sequences deviate by at most ``tol`` in sup norm."""
    if s1.dim != s2.dim:
        raise DimensionMismatch(f"spectra have different sizes {s1.dim} and {s2.dim}")
    return bool(np.max(np.abs(s1.eigenvalues - s2.eigenvalues)) <= tol)


def min_gap_check(s: SpectralData, policy: GapPolicy) -> tuple[bool, float]:
    """Evaluate a gap policy; returns ``(passed, observed_min_gap)``."""
    if policy.mode == "strict_simple":
        return (s.min_gap > s.degeneracy_floor(), s.min_gap)
    return (s.min_gap >= policy.delta_min, s.min_gap)


def weyl_perturbation_bound(G: np.ndarray, Gp: np.ndarray) -> float:
    """Certified sup-norm eigenvalue movement between ``G`` and ``Gp``.

    The Frobenius norm of the difference bounds the movement of each sorted
    eigenvalue; so does ``n * max |entry difference|``.  The smaller of the
    two is returned.
    """
    G = np.asarray(G)
    Gp = np.asarray(Gp)
    if G.shape != Gp.shape:
        raise DimensionMismatch(f"shapes {G.shape} and {Gp.shape} differ")
    E = Gp - G
    n = G.shape[0]
    return float(min(np.linalg.norm(E), n * np.max(np.abs(E)) if E.size else 0.0))
