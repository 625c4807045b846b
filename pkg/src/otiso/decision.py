"""Orbit decision procedures: exact isomorphism testing and gapped orbit distance.

Both pipelines share the same spine: eigendecompose the six mode Grams,
bail out when a spectrum is too degenerate to pin its eigenbasis, compare
cores entrywise, recover per-mode signs/phases, assemble a candidate
transform, and re-verify it directly against the input tensors.  A YES is
never returned on the pipeline's say-so alone; the recomputed residual must
clear the certified bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CannotDecide,
    ConfigInvalid,
    DimensionMismatch,
    EpsOutOfRange,
    Infeasible,
    ScalarKindMismatch,
)
from .hosvd import CoreComparison, CoreTensor, RejectFar, compare_cores, core_of
from .phases import PhaseAssignment, SignAssignment, assemble_witness, solve_phases, solve_signs, STRICT_TOL
from .spectral import GapPolicy, eig_hermitian, spectra_close
from .tensor import Tensor3, TransformTriple, apply_action, gram, unitarity_defect

MODES = ("exact_iso", "gapped_distance")

# Default multiplier in the certified residual bound gamma * eps.
C_GAMMA_DEFAULT = 8.0

# Exact-mode YES gate: residual <= max(8 n 2^-bits, 1e-8) * ||A~||_F.  The
# truncation term dominates only at very coarse precision; the floor absorbs
# eigensolver noise at full double precision.
EXACT_RESIDUAL_REL_FLOOR = 1e-8

# Relative tolerance for declaring two Gram spectra equal in exact mode.
TAU_SPECTRA_REL = 1e-8

_TINY = 1e-300


@dataclass(frozen=True)
class DecisionConfig:
    """Knobs for the decision pipelines.

    ``eps`` is required for gapped mode and optional for exact mode (where a
    solver-noise-aware default is derived from the input norms).
    ``precision_bits`` defaults to 53 in exact mode and to
    ``ceil(log2(1000 n^7 / eps))`` in gapped mode; explicit smaller values
    are rejected in gapped mode.  ``delta_override`` substitutes the measured
    spectral gap, for experiments only.
    """

    eps: float | None = None
    delta_override: float | None = None
    precision_bits: int | None = None
    mode: str = "exact_iso"
    c_gamma: float = C_GAMMA_DEFAULT

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigInvalid(f"unknown decision mode {self.mode!r}")
        if self.eps is not None and not (self.eps > 0.0):
            raise ConfigInvalid("eps must be positive when given")
        if self.precision_bits is not None and self.precision_bits < 1:
            raise ConfigInvalid("precision_bits must be a positive integer")
        if self.delta_override is not None and not (self.delta_override > 0.0):
            raise ConfigInvalid("delta_override must be positive when given")
        if not (self.c_gamma > 0.0):
            raise ConfigInvalid("c_gamma must be positive")


@dataclass(frozen=True)
class Decision:
    """Pipeline verdict with the evidence that backs it."""

    verdict: str  # "yes" | "no" | "cannot_decide"
    witness: TransformTriple | None
    residual: float | None
    gamma_bound: float | None
    diagnostics: dict


@dataclass(frozen=True)
class WitnessReport:
    """Direct recomputation of a candidate witness."""

    residual: float
    unitarity_defects: tuple[float, float, float]
    unitary_ok: bool
    unitarity_tolerance: float


def required_bits(n: int, eps: float) -> int:
    """Working precision for gapped mode: ceil(log2(1000 n^7 / eps))."""
    return max(1, math.ceil(math.log2(1000.0 * (n ** 7) / eps)))


def truncate_bits(x: np.ndarray, bits: int) -> np.ndarray:
    """Round every entry (componentwise for complex) to the nearest multiple of 2^-bits.

    Beyond ~512 bits the grid is finer than float64 resolution for any
    representable magnitude, so the array is returned unchanged.
    """
    if bits > 512:
        return np.array(x)
    scale = math.ldexp(1.0, int(bits))
    return np.round(np.asarray(x) * scale) / scale


def truncate_tensor(a: Tensor3, bits: int) -> Tensor3:
    return Tensor3(truncate_bits(a.data, bits), a.scalar_kind)


def verify_witness(a: Tensor3, b: Tensor3, witness) -> WitnessReport:
    """Recompute ``||witness . A - B||_F`` from scratch and audit unitarity.

    ``witness`` may be a :class:`TransformTriple` or a sequence of three
    matrices (no unitarity requirement; defects are reported, not enforced).
    """
    triple = witness if isinstance(witness, TransformTriple) else TransformTriple(witness, check=False)
    if triple.dims != a.dims:
        raise DimensionMismatch(f"witness dims {triple.dims} do not match tensor dims {a.dims}")
    if a.dims != b.dims:
        raise DimensionMismatch(f"tensor dims differ: {a.dims} vs {b.dims}")
    kind = "complex" if "complex" in (a.scalar_kind, triple.scalar_kind) else "real"
    if triple.scalar_kind != kind:
        triple = TransformTriple(triple.factors, kind, check=False)
    acted = apply_action(triple, a.astype_kind(kind))
    residual = float(np.linalg.norm(acted.data - b.astype_kind(kind).data))
    defects = triple.unitarity_defects()
    tol = 1e-10 * max(triple.dims)
    return WitnessReport(
        residual=residual,
        unitarity_defects=defects,
        unitary_ok=all(d <= 1e-10 * n for d, n in zip(defects, triple.dims)),
        unitarity_tolerance=tol,
    )


def _spectra_digest(core: CoreTensor) -> list[dict]:
    return [
        {"min_gap": float(s.min_gap), "backward_error": float(s.backward_error)}
        for s in core.spectra
    ]


def _identity_assignment(dims, kind):
    if kind == "complex":
        return PhaseAssignment(
            alpha=np.zeros(dims[0]), beta=np.zeros(dims[1]), gamma=np.zeros(dims[2]), max_residual=0.0
        )
    return SignAssignment(s1=np.ones(dims[0]), s2=np.ones(dims[1]), s3=np.ones(dims[2]))


def _solve_assignment(cmp: CoreComparison):
    """Dispatch on scalar kind: sign system for real cores, phase LP for complex."""
    if not cmp.phase_targets:
        return _identity_assignment(cmp.dims, cmp.scalar_kind), 0
    dead = [k for k, t in sorted(cmp.phase_targets.items()) if t.slack <= STRICT_TOL]
    if dead:
        raise Infeasible(dead, "targets with zero slack admit no strict solution")
    if cmp.scalar_kind == "real":
        signs = {k: (-1 if abs(t.phi) > math.pi / 2 else 1) for k, t in cmp.phase_targets.items()}
        return solve_signs(signs, cmp.dims), len(signs)
    return solve_phases(cmp), len(cmp.phase_targets)


def _finish_with_witness(a, b, sa, sb, assignment, gate, diag):
    witness = assemble_witness(sa, sb, assignment)
    report = verify_witness(a, b, witness)
    diag["residual_recomputed"] = report.residual
    diag["unitarity_defects"] = list(report.unitarity_defects)
    if report.residual <= gate and report.unitary_ok:
        return Decision("yes", witness, report.residual, gate, diag)
    # A feasible assignment whose witness fails verification means the
    # numerics left the certified regime; refusing to answer is the only
    # sound option.
    diag["step"] = "witness_verification"
    return Decision("cannot_decide", witness, report.residual, gate, diag)


def _validate_pair(a: Tensor3, b: Tensor3):
    if a.dims != b.dims:
        raise DimensionMismatch(f"tensor dims differ: {a.dims} vs {b.dims}")
    if a.scalar_kind != b.scalar_kind:
        raise ScalarKindMismatch(f"tensor kinds differ: {a.scalar_kind} vs {b.scalar_kind}")


def decide_isomorphism(a: Tensor3, b: Tensor3, cfg: DecisionConfig | None = None) -> Decision:
    """Decide whether some orthogonal/unitary triple carries ``a`` onto ``b``.

    Pipeline: truncate to working precision, eigendecompose all six Grams
    (cannot_decide on any near-degenerate spectrum), reject on mismatched
    spectra, compare cores, solve the sign/phase system, and verify the
    assembled witness directly.  YES verdicts always carry a witness whose
    recomputed residual clears the reported gate.
    """
    cfg = cfg or DecisionConfig()
    if cfg.mode != "exact_iso":
        raise ConfigInvalid("decide_isomorphism requires mode 'exact_iso'")
    _validate_pair(a, b)
    bits = cfg.precision_bits if cfg.precision_bits is not None else 53
    at = truncate_tensor(a, bits)
    bt = truncate_tensor(b, bits)
    n_eff = max(a.dims)
    norm_a = at.frobenius_norm
    norm_b = bt.frobenius_norm
    k_norm = norm_a + norm_b
    eps = cfg.eps if cfg.eps is not None else 1e-8 * max(k_norm, _TINY)
    diag: dict = {
        "mode": "exact_iso",
        "n": n_eff,
        "dims": list(a.dims),
        "scalar_kind": a.scalar_kind,
        "precision_bits": bits,
        "eps": eps,
        "norm_a": norm_a,
        "norm_b": norm_b,
    }
    gate = max(8.0 * n_eff * math.ldexp(1.0, -min(bits, 512)), EXACT_RESIDUAL_REL_FLOOR) * max(norm_a, _TINY)
    diag["residual_gate"] = gate

    try:
        ca = core_of(at)
        cb = core_of(bt)
    except CannotDecide as exc:
        diag["step"] = "gap_policy"
        diag["failed_mode"] = exc.mode
        diag["failed_gap"] = exc.gap
        return Decision("cannot_decide", None, None, gate, diag)
    diag["spectra_a"] = _spectra_digest(ca)
    diag["spectra_b"] = _spectra_digest(cb)

    # Weyl: truncation moves entries by <= 2^-bits each, hence any Gram
    # eigenvalue by at most 2 K t + t^2 with t = n^{3/2} 2^-bits; add a
    # relative floor for eigensolver noise.
    t_entry = math.ldexp(1.0, -min(bits, 512)) * (n_eff ** 1.5)
    for d in range(3):
        ga = ca.spectra[d]
        gb = cb.spectra[d]
        scale = max(float(np.max(np.abs(ga.eigenvalues))), float(np.max(np.abs(gb.eigenvalues))), _TINY)
        tol = TAU_SPECTRA_REL * scale + 2.0 * k_norm * t_entry + t_entry ** 2
        if not spectra_close(ga, gb, tol):
            diag["step"] = "spectra"
            diag["failed_mode"] = d + 1
            diag["spectra_tolerance"] = tol
            return Decision("no", None, None, gate, diag)

    delta = cfg.delta_override if cfg.delta_override is not None else min(ca.min_gap, cb.min_gap)
    diag["delta"] = delta

    cmp = compare_cores(ca, cb, eps, delta)
    if isinstance(cmp, RejectFar):
        diag["step"] = "modulus"
        diag["reject_entry"] = list(cmp.entry)
        diag["reject_threshold"] = cmp.threshold
        return Decision("no", None, None, gate, diag)
    diag["phase_targets"] = len(cmp.phase_targets)
    diag["threshold_modulus"] = cmp.threshold_used
    diag["support_ok"] = cmp.support_ok

    try:
        assignment, _ = _solve_assignment(cmp)
    except Infeasible as exc:
        diag["step"] = "phase_system"
        diag["certificate_size"] = len(exc.certificate)
        return Decision("no", None, None, gate, diag)

    return _finish_with_witness(a, b, ca, cb, assignment, gate, diag)


def decide_orbit_distance(a: Tensor3, b: Tensor3, cfg: DecisionConfig) -> Decision:
    """Gap-certified orbit distance decision.

    Requires cubic tensors and an explicit ``eps`` satisfying
    ``eps < delta / (4 (||A~|| + ||B~||))`` for the measured (or overridden)
    gap ``delta``.  YES means some triple carries ``a`` within
    ``gamma_bound = c_gamma n^{7/2} ||A~||^2 eps / delta`` of ``b``, witnessed
    and re-verified; NO certifies the orbits stay ``eps`` apart.
    """
    if cfg is None or cfg.eps is None:
        raise ConfigInvalid("gapped mode requires an explicit eps")
    if cfg.mode != "gapped_distance":
        raise ConfigInvalid("decide_orbit_distance requires mode 'gapped_distance'")
    _validate_pair(a, b)
    if not (a.dims[0] == a.dims[1] == a.dims[2]):
        raise DimensionMismatch(f"gapped mode requires cubic tensors, got dims {a.dims}")
    n = a.dims[0]
    eps = float(cfg.eps)
    need = required_bits(n, eps)
    if cfg.precision_bits is not None and cfg.precision_bits < need:
        raise ConfigInvalid(f"precision_bits={cfg.precision_bits} below required {need} for n={n}, eps={eps}")
    bits = cfg.precision_bits if cfg.precision_bits is not None else need

    at = truncate_tensor(a, bits)
    bt = truncate_tensor(b, bits)
    norm_a = at.frobenius_norm
    norm_b = bt.frobenius_norm
    k_norm = norm_a + norm_b
    diag: dict = {
        "mode": "gapped_distance",
        "n": n,
        "scalar_kind": a.scalar_kind,
        "precision_bits": bits,
        "eps": eps,
        "norm_a": norm_a,
        "norm_b": norm_b,
    }

    if abs(norm_a - norm_b) >= 2.0 * eps:
        diag["step"] = "norm"
        return Decision("no", None, None, None, diag)

    try:
        ca = core_of(at)
    except CannotDecide as exc:
        diag["step"] = "gap_policy"
        diag["failed_mode"] = exc.mode
        diag["failed_gap"] = exc.gap
        return Decision("cannot_decide", None, None, None, diag)
    delta = cfg.delta_override if cfg.delta_override is not None else ca.min_gap
    diag["delta"] = delta
    diag["spectra_a"] = _spectra_digest(ca)

    if not (eps < delta / (4.0 * max(k_norm, _TINY))):
        raise EpsOutOfRange(f"eps={eps} not below delta/(4(|A|+|B|))={delta / (4.0 * max(k_norm, _TINY)):.3e}")

    gamma_bound = cfg.c_gamma * (n ** 3.5) * (norm_a ** 2) * eps / delta
    diag["gamma_bound_spectral_form"] = gamma_bound
    diag["gamma_bound_dimension_form"] = cfg.c_gamma * (n ** 8) * eps

    spectra_b = [eig_hermitian(gram(bt, mode)) for mode in (1, 2, 3)]
    diag["spectra_b"] = [
        {"min_gap": float(s.min_gap), "backward_error": float(s.backward_error)} for s in spectra_b
    ]
    for d, s in enumerate(spectra_b):
        if s.min_gap < delta / 2.0:
            diag["step"] = "gap_b"
            diag["failed_mode"] = d + 1
            diag["failed_gap"] = float(s.min_gap)
            return Decision("no", None, None, gamma_bound, diag)
    inv_b = TransformTriple([s.vectors.conj().T for s in spectra_b], bt.scalar_kind, check=False)
    cb = CoreTensor(
        core=apply_action(inv_b, bt),
        bases=tuple(s.vectors for s in spectra_b),
        spectra=tuple(spectra_b),
        source_norm=norm_b,
    )

    cmp = compare_cores(ca, cb, eps, delta)
    if isinstance(cmp, RejectFar):
        diag["step"] = "modulus"
        diag["reject_entry"] = list(cmp.entry)
        diag["reject_threshold"] = cmp.threshold
        return Decision("no", None, None, gamma_bound, diag)
    diag["phase_targets"] = len(cmp.phase_targets)
    diag["threshold_modulus"] = cmp.threshold_used
    diag["support_ok"] = cmp.support_ok

    try:
        assignment, _ = _solve_assignment(cmp)
    except Infeasible as exc:
        diag["step"] = "phase_system"
        diag["certificate_size"] = len(exc.certificate)
        return Decision("no", None, None, gamma_bound, diag)

    return _finish_with_witness(a, b, ca, cb, assignment, gamma_bound, diag)
