"""Dense order-3 tensors, mode flattenings, Gram matrices, and group actions.

The objects here are deliberately small: a :class:`Tensor3` wraps a dense
``numpy`` array of shape ``(l, m, n)`` holding float64 or complex128 entries,
and a :class:`TransformTriple` wraps three square unitary (orthogonal in the
real case) factors, one per mode.  The triple acts on a tensor by

    B[i, j, k] = sum_{p,q,r} L[i, p] * R[j, q] * T[k, r] * A[p, q, r]

where ``L``, ``R``, ``T`` are the mode-1, mode-2, mode-3 factors.  All
entry indexing is 0-based in code; serialized formats that use 1-based
conventions convert at the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigInvalid,
    DimensionMismatch,
    NonFiniteEntries,
    NotUnitary,
    ScalarKindMismatch,
)

SCALAR_KINDS = ("real", "complex")

# Unitarity defect tolerance is per-dimension: ||X*X - I||_F <= TAU_UNITARY_REL * dim.
TAU_UNITARY_REL = 1e-10

_SEED_MASK = (1 << 64) - 1

_DTYPES = {"real": np.float64, "complex": np.complex128}


def _kind_of(arr: np.ndarray) -> str:
    return "complex" if np.iscomplexobj(arr) else "real"


def _as_scalar_array(values, kind: str | None) -> np.ndarray:
    arr = np.asarray(values)
    if kind is None:
        kind = _kind_of(arr)
    if kind not in SCALAR_KINDS:
        raise ConfigInvalid(f"unknown scalar kind {kind!r}")
    if kind == "real" and np.iscomplexobj(arr):
        raise ScalarKindMismatch("complex entries supplied for a real-kind object")
    return np.array(arr, dtype=_DTYPES[kind], order="C")


class Tensor3:
    """Dense order-3 tensor with a fixed scalar kind.

    Parameters
    ----------
    values : array_like
        Shape ``(l, m, n)`` with ``l, m, n >= 1``.  Entries must be finite.
    scalar_kind : {"real", "complex"}, optional
        Forced kind; inferred from the dtype when omitted.  Requesting
        ``"real"`` for complex data raises :class:`ScalarKindMismatch`.

    Notes
    -----
    The wrapped array is C-ordered and marked read-only, so the entry at
    ``(i, j, k)`` sits at flat offset ``k + n*j + n*m*i``: the left index is
    the slowest.  That lexicographic layout is also the on-disk entry order.
    """

    __slots__ = ("data",)

    def __init__(self, values, scalar_kind: str | None = None):
        arr = _as_scalar_array(values, scalar_kind)
        if arr.ndim != 3:
            raise DimensionMismatch(f"expected 3 axes, got {arr.ndim}")
        if min(arr.shape) < 1:
            raise DimensionMismatch(f"all dimensions must be >= 1, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteEntries("tensor entries must be finite")
        arr.flags.writeable = False
        self.data = arr

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.data.shape  # type: ignore[return-value]

    @property
    def scalar_kind(self) -> str:
        return _kind_of(self.data)

    @property
    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def astype_kind(self, kind: str) -> "Tensor3":
        """Return a copy with the requested scalar kind (real -> complex only)."""
        if kind == self.scalar_kind:
            return self
        if kind == "real":
            raise ScalarKindMismatch("cannot narrow a complex tensor to real")
        return Tensor3(self.data.astype(np.complex128), "complex")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tensor3):
            return NotImplemented
        return (
            self.scalar_kind == other.scalar_kind
            and self.dims == other.dims
            and bool(np.array_equal(self.data, other.data))
        )

    def __hash__(self):
        return hash((self.dims, self.scalar_kind, self.data.tobytes()))

    def __repr__(self) -> str:
        return f"Tensor3(dims={self.dims}, kind={self.scalar_kind}, norm={self.frobenius_norm:.6g})"


def unitarity_defect(X: np.ndarray) -> float:
    """``||X* X - I||_F`` for a square matrix."""
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise DimensionMismatch(f"factor must be square, got shape {X.shape}")
    n = X.shape[0]
    return float(np.linalg.norm(X.conj().T @ X - np.eye(n)))


class TransformTriple:
    """Three square unitary factors, one per tensor mode.

    Parameters
    ----------
    factors : sequence of three array_like
        Square matrices of sizes ``(l, l)``, ``(m, m)``, ``(n, n)``.
    scalar_kind : {"real", "complex"}, optional
    check : bool
        When True (default), each factor must satisfy
        ``||X*X - I||_F <= TAU_UNITARY_REL * dim``.  Pass ``check=False``
        for raw witness material whose unitarity is reported separately.
    """

    __slots__ = ("factors",)

    def __init__(self, factors, scalar_kind: str | None = None, check: bool = True):
        if len(factors) != 3:
            raise DimensionMismatch("a transform triple needs exactly 3 factors")
        kinds = {_kind_of(np.asarray(f)) for f in factors}
        if scalar_kind is None:
            scalar_kind = "complex" if "complex" in kinds else "real"
        mats = []
        for f in factors:
            M = _as_scalar_array(f, scalar_kind)
            if M.ndim != 2 or M.shape[0] != M.shape[1]:
                raise DimensionMismatch(f"factor must be square, got shape {M.shape}")
            if not np.all(np.isfinite(M)):
                raise NonFiniteEntries("transform factors must be finite")
            if check:
                defect = unitarity_defect(M)
                if defect > TAU_UNITARY_REL * M.shape[0]:
                    raise NotUnitary(f"factor of size {M.shape[0]} has unitarity defect {defect:.3e}")
            M.flags.writeable = False
            mats.append(M)
        self.factors = tuple(mats)

    @property
    def dims(self) -> tuple[int, int, int]:
        return tuple(f.shape[0] for f in self.factors)  # type: ignore[return-value]

    @property
    def scalar_kind(self) -> str:
        return "complex" if any(np.iscomplexobj(f) for f in self.factors) else "real"

    def __getitem__(self, d: int) -> np.ndarray:
        return self.factors[d]

    def unitarity_defects(self) -> tuple[float, float, float]:
        return tuple(unitarity_defect(f) for f in self.factors)  # type: ignore[return-value]

    def compose(self, other: "TransformTriple") -> "TransformTriple":
        """Group product: ``(self . other)`` acts as self after other."""
        if self.dims != other.dims:
            raise DimensionMismatch(f"cannot compose triples with dims {self.dims} and {other.dims}")
        kind = "complex" if "complex" in (self.scalar_kind, other.scalar_kind) else "real"
        return TransformTriple(
            [a @ b for a, b in zip(self.factors, other.factors)], scalar_kind=kind, check=False
        )

    def inverse(self) -> "TransformTriple":
        """Inverse triple; conjugate transpose of each factor."""
        return TransformTriple([f.conj().T for f in self.factors], check=False)

    def __repr__(self) -> str:
        return f"TransformTriple(dims={self.dims}, kind={self.scalar_kind})"


def identity_triple(dims, scalar_kind: str = "real") -> TransformTriple:
    """Identity element of the acting group for the given tensor dims."""
    return TransformTriple([np.eye(d, dtype=_DTYPES[scalar_kind]) for d in dims], scalar_kind)


@dataclass(frozen=True)
class RandomModel:
    """Entry distribution for random tensors and matrices.

    ``distribution`` is one of ``"gaussian"`` (standard normal),
    ``"rademacher"`` (uniform on {-1, +1}), or ``"uniform_pm"`` (uniform on
    [-sqrt(3), sqrt(3)]); each has mean zero and variance one per real
    coordinate.  For ``scalar_kind == "complex"`` the real and imaginary
    parts are drawn independently from the named law.

    ``seed`` is a 64-bit integer.  Sampling uses the Philox counter-based
    generator keyed by the seed; independent streams (one per trial, per
    factor, ...) are derived by spawn keys, so every draw is reproducible
    bit-for-bit from ``(seed, stream indices)``.
    """

    distribution: str = "gaussian"
    scalar_kind: str = "real"
    seed: int = 0

    def __post_init__(self):
        if self.distribution not in ("gaussian", "rademacher", "uniform_pm"):
            raise ConfigInvalid(f"unknown distribution {self.distribution!r}")
        if self.scalar_kind not in SCALAR_KINDS:
            raise ConfigInvalid(f"unknown scalar kind {self.scalar_kind!r}")
        object.__setattr__(self, "seed", int(self.seed) & _SEED_MASK)


def generator(seed: int, *stream: int) -> np.random.Generator:
    """Deterministic Philox generator for ``seed`` and a stream-splitting key."""
    ss = np.random.SeedSequence(entropy=int(seed) & _SEED_MASK, spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))


def _draw_real(rng: np.random.Generator, distribution: str, shape) -> np.ndarray:
    if distribution == "gaussian":
        return rng.standard_normal(shape)
    if distribution == "rademacher":
        return rng.integers(0, 2, size=shape).astype(np.float64) * 2.0 - 1.0
    # uniform_pm: symmetric interval scaled to unit variance
    s = math.sqrt(3.0)
    return rng.uniform(-s, s, size=shape)


def sample_entries(rng: np.random.Generator, model: RandomModel, shape) -> np.ndarray:
    """Array of i.i.d. entries per the model; complex draws re then im."""
    x = _draw_real(rng, model.distribution, shape)
    if model.scalar_kind == "complex":
        x = x + 1j * _draw_real(rng, model.distribution, shape)
    return x


def sample_tensor(dims, model: RandomModel, *, stream: tuple[int, ...] = ()) -> Tensor3:
    """Sample a random tensor; identical ``(model, stream)`` gives identical entries.

    Parameters
    ----------
    dims : tuple of 3 ints
    model : RandomModel
    stream : tuple of ints, optional
        Extra stream-splitting indices mixed into the seed stream, used by
        experiment harnesses to give each trial its own substream.
    """
    if len(dims) != 3 or min(dims) < 1:
        raise DimensionMismatch(f"dims must be three positive integers, got {dims}")
    rng = generator(model.seed, *stream)
    return Tensor3(sample_entries(rng, model, tuple(int(d) for d in dims)), model.scalar_kind)


def haar_factor(n: int, rng: np.random.Generator, scalar_kind: str = "real") -> np.ndarray:
    """One Haar-distributed orthogonal/unitary matrix.

    QR of a Ginibre sample, with the R diagonal's phases (signs in the real
    case) pushed into Q so the distribution is exactly Haar rather than the
    raw QR output.
    """
    z = rng.standard_normal((n, n))
    if scalar_kind == "complex":
        z = (z + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    ph = d / np.abs(d)
    return q * ph


def sample_haar_triple(dims, seed: int, scalar_kind: str = "real") -> TransformTriple:
    """Haar-random transform triple for the given tensor dims.

    Each factor gets its own derived stream, so triples for nested dims
    share no draws.
    """
    if scalar_kind not in SCALAR_KINDS:
        raise ConfigInvalid(f"unknown scalar kind {scalar_kind!r}")
    factors = [haar_factor(int(d), generator(seed, i), scalar_kind) for i, d in enumerate(dims)]
    return TransformTriple(factors, scalar_kind)


def _check_mode(mode: int) -> int:
    if mode not in (1, 2, 3):
        raise DimensionMismatch(f"mode must be 1, 2, or 3, got {mode}")
    return mode - 1


def flatten(a: Tensor3, mode: int) -> np.ndarray:
    """Mode-``mode`` flattening (matricization).

    Row ``i`` of the mode-1 flattening collects ``A[i, :, :]`` with the
    remaining indices ordered lexicographically, the smaller remaining mode
    number varying slower.  So for mode 1 the columns run ``(j, k)`` with
    ``j`` slow, for mode 2 ``(i, k)`` with ``i`` slow, for mode 3 ``(i, j)``
    with ``i`` slow.
    """
    ax = _check_mode(mode)
    arr = a.data
    return np.moveaxis(arr, ax, 0).reshape(arr.shape[ax], -1)


def unflatten(mat: np.ndarray, mode: int, dims) -> Tensor3:
    """Inverse of :func:`flatten` for the given full dims."""
    ax = _check_mode(mode)
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3:
        raise DimensionMismatch(f"dims must have length 3, got {dims}")
    rest = tuple(d for i, d in enumerate(dims) if i != ax)
    mat = np.asarray(mat)
    if mat.shape != (dims[ax], rest[0] * rest[1]):
        raise DimensionMismatch(f"matrix shape {mat.shape} does not match mode-{mode} flattening of {dims}")
    arr = np.moveaxis(mat.reshape((dims[ax],) + rest), 0, ax)
    return Tensor3(arr)


def gram(a: Tensor3, mode: int) -> np.ndarray:
    """Mode Gram matrix ``M M*`` of the mode flattening ``M``.

    Hermitian positive semidefinite by construction; its eigenvalues are
    invariant under the triple action, which is what the whole spectral
    pipeline rests on.
    """
    M = flatten(a, mode)
    return M @ M.conj().T


def apply_action(g: TransformTriple, a: Tensor3) -> Tensor3:
    """Act on ``a`` by the triple ``g``.

    Implemented as three successive mode products, each a matrix product
    against a flattening; the contraction order is fixed (mode 1, 2, 3), so
    results are bitwise reproducible for identical inputs.
    """
    if g.dims != a.dims:
        raise DimensionMismatch(f"triple dims {g.dims} do not match tensor dims {a.dims}")
    if g.scalar_kind != a.scalar_kind:
        raise ScalarKindMismatch(f"triple kind {g.scalar_kind} does not match tensor kind {a.scalar_kind}")
    out = a.data
    for ax, M in enumerate(g.factors):
        out = np.moveaxis(np.tensordot(M, out, axes=(1, ax)), 0, ax)
    return Tensor3(out, a.scalar_kind)
