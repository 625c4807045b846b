"""End-to-end decision procedures: exact orbit membership and gapped distance."""

import math

import numpy as np
import pytest

from otiso import (
    ConfigInvalid,
    DecisionConfig,
    DimensionMismatch,
    EpsOutOfRange,
    RandomModel,
    ScalarKindMismatch,
    Tensor3,
    TransformTriple,
    apply_action,
    decide_isomorphism,
    decide_orbit_distance,
    required_bits,
    sample_haar_triple,
    sample_tensor,
    truncate_bits,
    truncate_tensor,
    verify_witness,
)


def naive_action(L, R, T, a):
    n1, n2, n3 = a.shape
    out = np.zeros((n1, n2, n3), dtype=np.result_type(L, a))
    for i in range(n1):
        for j in range(n2):
            for k in range(n3):
                acc = 0.0
                for p in range(n1):
                    for q in range(n2):
                        for r in range(n3):
                            acc = acc + L[i, p] * R[j, q] * T[k, r] * a[p, q, r]
                out[i, j, k] = acc
    return out


def orbit_pair(dims, seed, kind):
    a = sample_tensor(dims, RandomModel("gaussian", kind, seed))
    g = sample_haar_triple(dims, seed + 1000, kind)
    return a, apply_action(g, a), g


def test_exact_iso_yes():
    for dims, seed, kind in [((4, 4, 4), 70, "real"), ((5, 3, 4), 71, "real"),
                             ((4, 4, 4), 72, "complex"), ((3, 5, 4), 73, "complex")]:
        a, b, _ = orbit_pair(dims, seed, kind)
        d = decide_isomorphism(a, b)
        assert d.verdict == "yes"
        assert d.witness is not None
        assert d.residual <= d.diagnostics["residual_gate"]
        rep = verify_witness(a, b, d.witness)
        assert rep.residual == d.diagnostics["residual_recomputed"]
        assert rep.unitary_ok


def test_exact_iso_no_independent_and_scaled():
    a = sample_tensor((4, 4, 4), RandomModel("gaussian", "real", 74))
    b = sample_tensor((4, 4, 4), RandomModel("gaussian", "real", 75))
    d = decide_isomorphism(a, b)
    assert d.verdict == "no"
    assert d.witness is None

    d2 = decide_isomorphism(a, Tensor3(2.0 * a.data))
    assert d2.verdict == "no"
    assert d2.diagnostics["step"] == "spectra"


def test_exact_iso_cannot_decide_on_degeneracy():
    ones = Tensor3(np.ones((3, 3, 3)))
    d = decide_isomorphism(ones, ones)
    assert d.verdict == "cannot_decide"
    assert d.diagnostics["step"] == "gap_policy"
    assert d.diagnostics["failed_mode"] in (1, 2, 3)


def test_exact_iso_deterministic():
    a, b, _ = orbit_pair((4, 4, 4), 76, "complex")
    d1 = decide_isomorphism(a, b)
    d2 = decide_isomorphism(a, b)
    assert d1.verdict == d2.verdict == "yes"
    assert d1.residual == d2.residual
    for m1, m2 in zip(d1.witness.factors, d2.witness.factors):
        assert np.array_equal(m1, m2)


def test_config_validation():
    with pytest.raises(ConfigInvalid):
        DecisionConfig(mode="fuzzy")
    with pytest.raises(ConfigInvalid):
        DecisionConfig(eps=0.0)
    with pytest.raises(ConfigInvalid):
        DecisionConfig(eps=-1.0)
    with pytest.raises(ConfigInvalid):
        DecisionConfig(precision_bits=0)
    with pytest.raises(ConfigInvalid):
        DecisionConfig(delta_override=-2.0)
    with pytest.raises(ConfigInvalid):
        DecisionConfig(c_gamma=0.0)
    a, b, _ = orbit_pair((3, 3, 3), 77, "real")
    with pytest.raises(ConfigInvalid):
        decide_isomorphism(a, b, DecisionConfig(mode="gapped_distance", eps=1e-3))
    with pytest.raises(ConfigInvalid):
        decide_orbit_distance(a, b, DecisionConfig(mode="exact_iso"))
    with pytest.raises(ConfigInvalid):
        decide_orbit_distance(a, b, DecisionConfig(mode="gapped_distance"))  # eps required


def test_pair_validation():
    a = sample_tensor((3, 3, 3), RandomModel("gaussian", "real", 78))
    c = sample_tensor((3, 3, 4), RandomModel("gaussian", "real", 78))
    z = sample_tensor((3, 3, 3), RandomModel("gaussian", "complex", 78))
    with pytest.raises(DimensionMismatch):
        decide_isomorphism(a, c)
    with pytest.raises(ScalarKindMismatch):
        decide_isomorphism(a, z)


def test_verify_witness_matches_naive_oracle():
    a, b, g = orbit_pair((3, 4, 2), 79, "complex")
    rep = verify_witness(a, b, g)
    oracle = np.linalg.norm(naive_action(g[0], g[1], g[2], a.data) - b.data)
    assert abs(rep.residual - oracle) <= 1e-12 * max(oracle, 1.0)
    assert rep.unitary_ok
    # raw matrices accepted; non-unitary factors are reported, not rejected
    rep2 = verify_witness(a, b, tuple(np.array(g[d]) for d in range(3)))
    assert rep2.residual == rep.residual
    bad = tuple(2.0 * np.eye(d) for d in (3, 4, 2))
    rep3 = verify_witness(a, b, bad)
    assert not rep3.unitary_ok


def test_truncate_bits_frozen():
    out = truncate_bits(np.array([0.1, -0.3]), 3)
    assert np.array_equal(out, np.array([0.125, -0.25]))
    z = truncate_bits(np.array([0.1 + 0.3j]), 3)
    assert z[0] == 0.125 + 0.25j
    x = np.array([0.1, -0.3])
    assert np.array_equal(truncate_bits(x, 600), x)
    t = truncate_tensor(Tensor3(np.full((2, 2, 2), 0.1)), 3)
    assert t.scalar_kind == "real"
    assert np.all(t.data == 0.125)


def test_required_bits_formula():
    assert required_bits(4, 0.5) == math.ceil(math.log2(1000.0 * 4 ** 7 / 0.5))
    assert required_bits(1, 8000.0) == max(1, math.ceil(math.log2(1000.0 / 8000.0)))


def test_gapped_yes_on_small_perturbation():
    n = 6
    a, b0, _ = orbit_pair((n, n, n), 80, "real")
    probe = decide_isomorphism(a, b0)
    delta = probe.diagnostics["delta"]
    eps = delta / (8.0 * (a.frobenius_norm + b0.frobenius_norm))
    e = sample_tensor((n, n, n), RandomModel("gaussian", "real", 81))
    b = Tensor3(b0.data + (0.5 * eps / e.frobenius_norm) * e.data)
    cfg = DecisionConfig(mode="gapped_distance", eps=eps)
    d = decide_orbit_distance(a, b, cfg)
    assert d.verdict == "yes"
    assert d.witness is not None
    assert d.residual <= d.gamma_bound
    assert d.diagnostics["precision_bits"] == required_bits(n, eps)
    assert d.diagnostics["gamma_bound_spectral_form"] == d.gamma_bound
    assert d.diagnostics["gamma_bound_dimension_form"] == 8.0 * n ** 8 * eps


def test_gapped_no_on_norm_mismatch():
    n = 5
    a, b0, _ = orbit_pair((n, n, n), 82, "real")
    probe = decide_isomorphism(a, b0)
    eps = probe.diagnostics["delta"] / (8.0 * (a.frobenius_norm + b0.frobenius_norm))
    far = Tensor3(3.0 * b0.data)
    d = decide_orbit_distance(a, far, DecisionConfig(mode="gapped_distance", eps=eps))
    assert d.verdict == "no"
    assert d.diagnostics["step"] == "norm"


def test_gapped_eps_out_of_range():
    a, b, _ = orbit_pair((4, 4, 4), 83, "real")
    with pytest.raises(EpsOutOfRange):
        decide_orbit_distance(a, b, DecisionConfig(mode="gapped_distance", eps=10.0))


def test_gapped_bits_below_required():
    a, b, _ = orbit_pair((4, 4, 4), 84, "real")
    cfg = DecisionConfig(mode="gapped_distance", eps=1e-6, precision_bits=10)
    with pytest.raises(ConfigInvalid):
        decide_orbit_distance(a, b, cfg)


def test_gapped_requires_cubic():
    a = sample_tensor((3, 4, 5), RandomModel("gaussian", "real", 85))
    with pytest.raises(DimensionMismatch):
        decide_orbit_distance(a, a, DecisionConfig(mode="gapped_distance", eps=1e-8))


def test_yes_with_explicit_precision_bits():
    a, b, _ = orbit_pair((4, 4, 4), 86, "real")
    d = decide_isomorphism(a, b, DecisionConfig(precision_bits=40))
    assert d.verdict == "yes"
    assert d.diagnostics["precision_bits"] == 40
