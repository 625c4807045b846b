"""Sign and phase recovery from core-entry constraints, and witness assembly.

Given per-entry targets relating two cores, the solvers look for per-mode
diagonal corrections: signs ``s1(i) s2(j) s3(k) = t_ijk`` in the real case,
angles ``alpha_i + beta_j + gamma_k = phi_ijk (mod 2pi)`` within per-entry
slack in the complex case.  Both systems have a two-parameter gauge freedom
(shift all alpha by theta and all beta by -theta, and likewise alpha/gamma),
so solutions are pinned by gauging free directions to zero.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigInvalid, DimensionMismatch, Infeasible
from .hosvd import CoreComparison, CoreTensor, PhaseTarget
from .tensor import TransformTriple

TWO_PI = 2.0 * math.pi

# A circular residual strictly below (slack - STRICT_TOL) counts as satisfying
# the strict inequality; anything closer is treated as a violation.
STRICT_TOL = 1e-12


@dataclass(frozen=True)
class SignAssignment:
    """Per-mode sign vectors with entries in {-1, +1}."""

    s1: np.ndarray
    s2: np.ndarray
    s3: np.ndarray
    consistent: bool = True


@dataclass(frozen=True)
class PhaseAssignment:
    """Per-mode angle vectors in [0, 2pi) and the worst circular residual."""

    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    max_residual: float


def wrap_angle(x):
    """Wrap to (-pi, pi] elementwise."""
    r = np.remainder(np.asarray(x, dtype=np.float64) + math.pi, TWO_PI) - math.pi
    return np.where(r == -math.pi, math.pi, r)


def _canonical_angles(x: np.ndarray) -> np.ndarray:
    out = np.remainder(x, TWO_PI)
    out[out >= TWO_PI] = 0.0  # guard the closed-boundary rounding case
    return out


def _bits(mask: int):
    while mask:
        low = mask & (-mask)
        yield low.bit_length() - 1
        mask ^= low


def solve_signs(targets, dims) -> SignAssignment:
    """Solve ``s1(i) s2(j) s3(k) = t`` over {-1, +1} for all targets.

    ``targets`` maps index triples to +-1, ``dims`` gives the three vector
    lengths.  The system is linear over GF(2) (sign -1 encodes bit 1), so it
    is solved by elimination with provenance tracking: when a contradiction
    appears, the tracked subset of original constraints forms a parity
    certificate (their targets multiply to -1 while every variable they touch
    appears an even number of times) and is raised as :class:`Infeasible`.
    Free variables, one per gauge direction and connected component, are
    fixed to +1.
    """
    n1, n2, n3 = (int(d) for d in dims)
    keys = sorted(targets.keys())
    pivots: dict[int, tuple[int, int, int]] = {}
    for row_id, key in enumerate(keys):
        i, j, k = key
        if not (0 <= i < n1 and 0 <= j < n2 and 0 <= k < n3):
            raise DimensionMismatch(f"target key {key} out of range for dims {dims}")
        t = int(targets[key])
        if t not in (-1, 1):
            raise ConfigInvalid(f"sign target must be +-1, got {t!r} at {key}")
        coef = (1 << i) | (1 << (n1 + j)) | (1 << (n1 + n2 + k))
        rhs = 1 if t == -1 else 0
        prov = 1 << row_id
        while coef:
            col = (coef & (-coef)).bit_length() - 1
            if col in pivots:
                pc, pr, pp = pivots[col]
                coef ^= pc
                rhs ^= pr
                prov ^= pp
            else:
                pivots[col] = (coef, rhs, prov)
                break
        else:
            if rhs:
                certificate = [keys[b] for b in _bits(prov)]
                raise Infeasible(certificate, "sign constraints contain an odd inconsistency cycle")
            # coef and rhs both vanished: redundant constraint
    assign = 0
    for col in sorted(pivots.keys(), reverse=True):
        coef, rhs, _ = pivots[col]
        rest = coef & ~(1 << col)
        val = rhs ^ (int.bit_count(rest & assign) & 1)
        if val:
            assign |= 1 << col
    bit = lambda v: -1.0 if (assign >> v) & 1 else 1.0
    s1 = np.array([bit(i) for i in range(n1)])
    s2 = np.array([bit(n1 + j) for j in range(n2)])
    s3 = np.array([bit(n1 + n2 + k) for k in range(n3)])
    # elimination is exact, but verify anyway: a silent solver bug here would
    # poison every YES verdict downstream
    for (i, j, k), t in targets.items():
        if s1[i] * s2[j] * s3[k] != t:
            raise Infeasible([(i, j, k)], "internal: eliminated system fails verification")
    return SignAssignment(s1=s1, s2=s2, s3=s3, consistent=True)


def _extract_targets(cmp, dims):
    if isinstance(cmp, CoreComparison):
        return cmp.phase_targets, cmp.dims
    if dims is None:
        raise ConfigInvalid("dims required when passing a raw target mapping")
    return dict(cmp), tuple(int(d) for d in dims)


def _propagate_estimates(keys, targets, dims):
    """Stage 1: anchored propagation with weighted circular averaging.

    Returns an initial angle estimate per variable.  Components of the
    constraint hypergraph are seeded at their heaviest constraint (alpha and
    beta gauged to zero there); each subsequent variable is estimated by the
    weighted circular mean over every constraint that already has its other
    two variables estimated.  Untouched variables stay at zero.
    """
    n1, n2, n3 = dims
    nvar = n1 + n2 + n3
    var_of = lambda key: (key[0], n1 + key[1], n1 + n2 + key[2])
    con_vars = [var_of(k) for k in keys]
    by_var: list[list[int]] = [[] for _ in range(nvar)]
    for cid, vs in enumerate(con_vars):
        for v in vs:
            by_var[v].append(cid)

    est = np.zeros(nvar)
    assigned = np.zeros(nvar, dtype=bool)
    n_assigned = np.zeros(len(keys), dtype=np.int8)
    # heap of (-weight, cid) for constraints that might determine a variable
    ready: list[tuple[float, int]] = []
    # seeds ordered heaviest-first; heapq tie-breaks on cid, which is the
    # sorted-key order, so the whole walk is deterministic
    seeds = sorted(range(len(keys)), key=lambda c: (-targets[keys[c]].weight, c))

    def mark(v: int, value: float) -> None:
        est[v] = value
        assigned[v] = True
        for cid in by_var[v]:
            n_assigned[cid] += 1
            if n_assigned[cid] == 2:
                heapq.heappush(ready, (-targets[keys[cid]].weight, cid))

    def circular_mean_for(v: int) -> float:
        acc = 0.0 + 0.0j
        for cid in by_var[v]:
            vs = con_vars[cid]
            if sum(assigned[u] for u in vs if u != v) != 2:
                continue
            t = targets[keys[cid]]
            other = sum(est[u] for u in vs if u != v)
            acc += t.weight * complex(math.cos(t.phi - other), math.sin(t.phi - other))
        return math.atan2(acc.imag, acc.real) if acc != 0 else 0.0

    seed_pos = 0
    touched = {v for vs in con_vars for v in vs}
    while True:
        progressed = False
        while ready:
            _, cid = heapq.heappop(ready)
            vs = con_vars[cid]
            missing = [v for v in vs if not assigned[v]]
            if len(missing) != 1:
                continue
            mark(missing[0], circular_mean_for(missing[0]))
            progressed = True
        if all(assigned[v] for v in touched):
            break
        if not progressed or not ready:
            # new component, or a component reachable only through a single
            # shared variable: gauge-fix enough variables to continue
            while seed_pos < len(seeds):
                cid = seeds[seed_pos]
                vs = con_vars[cid]
                missing = [v for v in vs if not assigned[v]]
                if len(missing) >= 2:
                    t = targets[keys[cid]]
                    if len(missing) == 3:
                        mark(vs[0], 0.0)
                        mark(vs[1], 0.0)
                        mark(vs[2], float(wrap_angle(t.phi)))
                    else:
                        mark(missing[0], 0.0)
                        mark(missing[1], float(wrap_angle(t.phi - sum(est[u] for u in vs if assigned[u] and u != missing[1]))))
                    break
                seed_pos += 1
            else:
                break
    return est


def _circular_residuals(x, keys, targets, dims):
    n1, n2, _ = dims
    sums = np.array([x[i] + x[n1 + j] + x[n1 + n2 + k] for (i, j, k) in keys])
    phis = np.array([targets[k].phi for k in keys])
    return np.abs(wrap_angle(phis - sums))


def solve_phases(cmp, dims=None) -> PhaseAssignment:
    """Recover per-mode angles satisfying every target's strict slack bound.

    Accepts a :class:`CoreComparison` (or a raw ``{(i,j,k): PhaseTarget}``
    mapping plus ``dims``).  Two stages: propagation produces estimates good
    enough to pin each constraint's integer wrap; with wraps fixed the system
    is linear, solved by weighted least squares and, if any strict inequality
    still fails, refined by a maximum-margin linear program.  The returned
    assignment is verified post hoc against every constraint; failure raises
    :class:`Infeasible` with the violated keys.
    """
    targets, dims = _extract_targets(cmp, dims)
    if not targets:
        raise ConfigInvalid("at least one phase target is required")
    n1, n2, n3 = dims
    nvar = n1 + n2 + n3
    keys = sorted(targets.keys())
    for (i, j, k) in keys:
        if not (0 <= i < n1 and 0 <= j < n2 and 0 <= k < n3):
            raise DimensionMismatch(f"target key {(i, j, k)} out of range for dims {dims}")
    dead = [k for k in keys if targets[k].slack <= STRICT_TOL]
    if dead:
        raise Infeasible(dead, "targets with zero slack admit no strict solution")

    est = _propagate_estimates(keys, targets, dims)

    # Fix integer wraps at the estimates; the constraint becomes linear in R.
    rows = np.zeros((len(keys), nvar))
    t_lin = np.zeros(len(keys))
    weights = np.zeros(len(keys))
    slacks = np.zeros(len(keys))
    for r, (i, j, k) in enumerate(keys):
        t = targets[(i, j, k)]
        rows[r, i] = 1.0
        rows[r, n1 + j] = 1.0
        rows[r, n1 + n2 + k] = 1.0
        s0 = est[i] + est[n1 + j] + est[n1 + n2 + k]
        t_lin[r] = s0 + float(wrap_angle(t.phi - s0))
        weights[r] = max(t.weight, 1e-300)
        slacks[r] = t.slack

    w = np.sqrt(weights)
    x, *_ = np.linalg.lstsq(rows * w[:, None], t_lin * w, rcond=None)
    resid = _circular_residuals(x, keys, targets, dims)
    ok = resid < slacks - STRICT_TOL

    if not bool(np.all(ok)):
        x_lp = _max_margin_lp(rows, t_lin, slacks, x)
        if x_lp is not None:
            resid_lp = _circular_residuals(x_lp, keys, targets, dims)
            if float(np.max(resid_lp - slacks)) < float(np.max(resid - slacks)):
                x, resid = x_lp, resid_lp
            ok = resid < slacks - STRICT_TOL
    if not bool(np.all(ok)):
        violated = [keys[r] for r in np.flatnonzero(~ok)]
        raise Infeasible(violated, f"{len(violated)} phase constraints unsatisfied at the best point found")

    return PhaseAssignment(
        alpha=_canonical_angles(x[:n1]),
        beta=_canonical_angles(x[n1:n1 + n2]),
        gamma=_canonical_angles(x[n1 + n2:]),
        max_residual=float(np.max(resid)),
    )


def _max_margin_lp(rows, t_lin, slacks, x0):
    """maximize m s.t. |rows @ x - t_lin| <= slacks - m; None when the LP fails."""
    from scipy.optimize import linprog

    ncon, nvar = rows.shape
    # variables: (x, m); maximize m
    A_ub = np.zeros((2 * ncon, nvar + 1))
    b_ub = np.zeros(2 * ncon)
    A_ub[:ncon, :nvar] = rows
    A_ub[:ncon, nvar] = 1.0
    b_ub[:ncon] = slacks + t_lin
    A_ub[ncon:, :nvar] = -rows
    A_ub[ncon:, nvar] = 1.0
    b_ub[ncon:] = slacks - t_lin
    c = np.zeros(nvar + 1)
    c[nvar] = -1.0
    # keep x near the wrap-fixing estimates so the linearization stays valid
    bounds = [(float(x0[v] - TWO_PI), float(x0[v] + TWO_PI)) for v in range(nvar)] + [(None, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success:
        return None
    return np.asarray(res.x[:nvar])


def assemble_witness(sa: CoreTensor, sb: CoreTensor, assignment) -> TransformTriple:
    """Build the transform triple ``(V1 D1 U1*, V2 D2 U2*, V3 D3 U3*)``.

    ``U_d`` come from ``sa``, ``V_d`` from ``sb``.  For a
    :class:`PhaseAssignment` the diagonals are ``exp(i*alpha)``,
    ``exp(i*beta)``, ``exp(i*gamma)``; for a :class:`SignAssignment` they are
    the sign vectors.  Applying the result to ``sa``'s source tensor lands on
    ``sb``'s source whenever the assignment satisfied its constraints.
    """
    if sa.dims != sb.dims:
        raise DimensionMismatch(f"core dims differ: {sa.dims} vs {sb.dims}")
    if isinstance(assignment, PhaseAssignment):
        diags = [np.exp(1j * assignment.alpha), np.exp(1j * assignment.beta), np.exp(1j * assignment.gamma)]
        kind = "complex"
    elif isinstance(assignment, SignAssignment):
        diags = [assignment.s1.astype(np.float64), assignment.s2.astype(np.float64), assignment.s3.astype(np.float64)]
        kind = "complex" if sa.core.scalar_kind == "complex" else "real"
    else:
        raise ConfigInvalid(f"unsupported assignment type {type(assignment).__name__}")
    factors = []
    for d in range(3):
        U = sa.bases[d]
        V = sb.bases[d]
        if diags[d].shape[0] != U.shape[0]:
            raise DimensionMismatch(f"assignment length {diags[d].shape[0]} does not match mode-{d + 1} size {U.shape[0]}")
        factors.append((V * diags[d][np.newaxis, :]) @ U.conj().T)
    return TransformTriple(factors, scalar_kind=kind)
