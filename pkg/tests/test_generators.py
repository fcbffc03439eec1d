import math

import numpy as np
import pytest

from eucsec.bounds import normalized_upper, thm1_upper
from eucsec.distortion import evaluate, lambda_heuristic, lambda_max_exact, lambda_min_exact
from eucsec.generators import (
    GENERATORS,
    FrequencySet,
    character_subspace,
    coordinate_subspace,
    gaussian_subspace,
    kashin_dimension,
    kashin_sample,
    make_subspace,
    random_frequencies,
    sidon_frequencies,
    spherical_linear_subspace,
    trig_subspace,
)
from eucsec.linalg import lp_norm, orthonormality_residual
from eucsec.types import DomainError, Field


def _same_span(A, B):
    PA = A @ A.conj().T
    PB = B @ B.conj().T
    return np.allclose(PA, PB, atol=1e-12)


def test_gaussian_determinism_and_provenance():
    a = gaussian_subspace(8, 4, 1)
    b = gaussian_subspace(8, 4, 1)
    assert a.basis.tobytes() == b.basis.tobytes()
    assert not np.array_equal(a.basis, gaussian_subspace(8, 4, 2).basis)
    assert a.provenance == {"generator": "gaussian", "N": 8, "d": 4, "seed": 1, "field": "real"}
    c = gaussian_subspace(8, 4, 1, "complex")
    assert c.field is Field.COMPLEX
    assert orthonormality_residual(c.basis) <= 1e-12


def test_gaussian_full_space():
    E = gaussian_subspace(6, 6, 3)
    assert lambda_min_exact(E).value == pytest.approx(1.0, abs=1e-12)
    assert lambda_max_exact(E).value == pytest.approx(math.sqrt(6), abs=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_gaussian_12_6_passes_checks(seed):
    est = evaluate(gaussian_subspace(12, 6, seed))
    assert est.bound_check["min_le_upper"] and est.bound_check["max_ge_prime"]


def test_coordinate():
    E = coordinate_subspace(5, 2)
    np.testing.assert_array_equal(E.basis, np.eye(5)[:, :2])
    with pytest.raises(DomainError):
        coordinate_subspace(2, 3)


def test_trig_n4():
    E = trig_subspace(4)
    s = np.array([0, 1, 0, -1]) / math.sqrt(2)
    c = np.array([1, 0, -1, 0]) / math.sqrt(2)
    assert _same_span(E.basis, np.column_stack([s, c]))
    assert orthonormality_residual(E.basis) <= 1e-12
    with pytest.raises(DomainError):
        trig_subspace(2)


def test_trig_error_shrinks_with_doubling():
    target = math.sqrt(8) / math.pi
    errs = [abs(lambda_min_exact(trig_subspace(90 * 2 ** k), "normalized").value - target)
            for k in range(4)]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[2] < 2e-3


def test_spherical_d1():
    E = spherical_linear_subspace(1, 2, 0)
    assert np.allclose(np.abs(E.basis.ravel()), 1 / math.sqrt(2))
    assert lambda_min_exact(E, "normalized").value == pytest.approx(1.0)
    assert lambda_max_exact(E, "normalized").value == pytest.approx(1.0)


def test_spherical_d2_matches_trig_limit():
    E = spherical_linear_subspace(2, 10_000, 0)
    val = lambda_min_exact(E, "normalized").value
    assert abs(val - math.sqrt(8) / math.pi) < 5e-3


def test_spherical_d3_saturates():
    E = spherical_linear_subspace(3, 10_000, 0)
    val = lambda_heuristic(E, 1.0, "min", 8, 0, "normalized").value
    assert val == pytest.approx(normalized_upper(3, 1.0), rel=0.01)
    assert normalized_upper(3, 1.0) == pytest.approx(math.sqrt(3) / 2, rel=1e-14)


def test_spherical_too_few_points():
    with pytest.raises(DomainError):
        spherical_linear_subspace(3, 2)


def test_frequency_set_validation_and_json():
    fs = FrequencySet(10, (1, 3, 4))
    assert FrequencySet.from_json(10, fs.to_json()) == fs
    assert fs.to_json() == "[1, 3, 4]"
    for bad in ((), (3, 1), (1, 1), (0, 10), (-1, 2)):
        with pytest.raises(DomainError):
            FrequencySet(10, bad)
    assert not FrequencySet(10, (1, 2, 3)).is_sidon()   # 1 + 3 = 2 + 2


def test_sidon_n32():
    fs = sidon_frequencies(32)
    assert fs.S == (0, 7, 13)
    assert fs.is_sidon()
    sums = sorted(a + b for i, a in enumerate(fs.S) for b in fs.S[i:])
    assert sums == [0, 7, 13, 14, 20, 26]


def test_sidon_property_and_size():
    for N in [64, 100, 256, 1000, 1024, 4096, 10_000, 65_536] + list(range(65, 400, 37)):
        fs = sidon_frequencies(N)
        assert fs.is_sidon()
        assert len(fs.S) >= math.isqrt(N // 8)
        assert all(0 <= k < N for k in fs.S)


def test_sidon_domain():
    with pytest.raises(DomainError):
        sidon_frequencies(7)


def test_random_frequencies_deterministic():
    a = random_frequencies(64, 5, 3)
    assert a == random_frequencies(64, 5, 3)
    assert len(a.S) == 5 and 0 not in a.S and max(a.S) <= 32
    with pytest.raises(DomainError):
        random_frequencies(8, 10)


def test_character_real_s1_is_trig():
    E = character_subspace(FrequencySet(12, (1,)), "real")
    assert _same_span(E.basis, trig_subspace(12).basis)


def test_character_real_zero_and_nyquist():
    E = character_subspace(FrequencySet(8, (0,)), "real")
    assert E.d == 1
    for p in (1.0, 1.5, 2.0, 4.0):
        assert lambda_heuristic(E, p, "min", 2, 0, "normalized").value == pytest.approx(1.0)
    assert character_subspace(FrequencySet(8, (0, 2, 4)), "real").d == 4


def test_character_complex_full_space():
    N = 8
    E = character_subspace(FrequencySet(N, tuple(range(N))), "complex")
    assert E.d == N
    assert _same_span(E.basis, np.eye(N))
    for tgt in ("min", "max"):
        v = lambda_heuristic(E, 2.0, tgt, 3, 0, "normalized").value
        assert v == pytest.approx(1.0, rel=1e-12)
    lo = lambda_heuristic(E, 1.0, "min", 20, 0).value
    hi = lambda_heuristic(E, 1.0, "max", 20, 0).value
    assert 1.0 - 1e-12 <= lo <= hi <= math.sqrt(N) + 1e-12


def test_sidon_vs_random_p4_report():
    # report-only comparison: both constants must respect the trivial range
    N = 2048
    sid = sidon_frequencies(N)
    S = tuple(sid.S[:16])
    Es = character_subspace(FrequencySet(N, S, "sidon"), "complex")
    Er = character_subspace(random_frequencies(N, 16, 0), "complex")
    for E in (Es, Er):
        v = lambda_heuristic(E, 4.0, "max", 4, 0, "normalized").value
        assert 1.0 - 1e-12 <= v <= N ** 0.25 + 1e-12


def test_kashin_dimension_rule():
    assert kashin_dimension(256, 0.5) == 128
    assert kashin_dimension(9, 1 / 3) == 6
    assert kashin_dimension(10, 0.25) == 7


def test_kashin_sample_bounds_and_determinism():
    a = kashin_sample(64, 0.5, 3)
    b = kashin_sample(64, 0.5, 3)
    assert a.row() == b.row()
    assert a.d == 32
    assert 0 < a.measured_c <= thm1_upper(64, 32) / 8 + 1e-12
    assert a.measured_c <= 1.0


def test_kashin_line_edge():
    # eta close to 1 leaves a line, where c = |v|_1 / sqrt(N)
    k = kashin_sample(10, 0.9, 4)
    assert k.d == 1
    v = k.subspace.basis[:, 0]
    assert k.measured_c == pytest.approx(lp_norm(v, 1) / math.sqrt(10), rel=1e-12)


def test_kashin_domain():
    for N, eta in [(10, 0.0), (10, 1.0), (10, 0.05)]:
        with pytest.raises(DomainError):
            kashin_sample(N, eta)


@pytest.mark.parametrize("name,params", [
    ("gaussian", {"N": 6, "d": 2}),
    ("coordinate", {"N": 6, "d": 2}),
    ("trig", {"N": 12}),
    ("spherical", {"d": 3, "M": 20}),
    ("character", {"N": 16, "S": [1, 3]}),
    ("sidon", {"N": 64}),
    ("kashin", {"N": 16, "eta": 0.5}),
])
def test_registry(name, params):
    assert name in GENERATORS
    a = make_subspace(name, params, seed=5)
    b = make_subspace(name, params, seed=5)
    assert a.basis.tobytes() == b.basis.tobytes()
    assert orthonormality_residual(a.basis) <= 1e-10


def test_registry_unknown():
    with pytest.raises(KeyError):
        make_subspace("nope", {})
