import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rescaled_greedy import dictionaries as dic


def max_norm_error(d):
    return np.max(np.abs(np.linalg.norm(d.atoms, axis=1) - 1.0))


def test_canonical_small():
    np.testing.assert_array_equal(dic.canonical_basis(2).atoms, [[1, 0], [0, 1]])
    d1 = dic.canonical_basis(1)
    assert len(d1) == 1 and d1[0].tolist() == [1.0]


def test_canonical_orthonormal():
    a = dic.canonical_basis(7).atoms
    np.testing.assert_array_equal(a @ a.T, np.eye(7))


def test_union_with_itself_keeps_duplicates():
    b = dic.canonical_basis(2)
    u = dic.union_of_bases([b, b])
    assert len(u) == 4 and u.kind == "union_of_bases"


def test_union_with_rotation_in_plane():
    c, s = np.cos(0.3), np.sin(0.3)
    rot = dic.from_atoms([[c, s], [-s, c]], kind="union_of_bases")
    u = dic.union_of_bases([dic.canonical_basis(2), rot])
    assert len(u) == 4
    assert max_norm_error(u) <= 1e-12


def test_union_of_one_is_identity():
    b = dic.rotated_basis(4, seed=2)
    assert dic.union_of_bases([b]) is b


def test_union_dimension_mismatch():
    with pytest.raises(ValueError):
        dic.union_of_bases([dic.canonical_basis(2), dic.canonical_basis(3)])


def test_random_unit_deterministic_and_spanning():
    a = dic.random_unit(3, 8, seed=7)
    b = dic.random_unit(3, 8, seed=7)
    np.testing.assert_array_equal(a.atoms, b.atoms)
    assert max_norm_error(a) <= 1e-12
    # rank via Gaussian elimination in a QR factorization
    r = np.linalg.qr(a.atoms.T, mode="r")
    assert np.sum(np.abs(np.diag(r)) > 1e-10) == 3


def test_random_unit_needs_enough_atoms():
    with pytest.raises(ValueError):
        dic.random_unit(4, 3, seed=0)


def test_non_spanning_rejected_unless_custom():
    atoms = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]
    with pytest.raises(ValueError):
        dic.Dictionary(np.array(atoms), "union_of_bases")
    assert len(dic.from_atoms(atoms)) == 2


def test_non_unit_atoms_rejected():
    with pytest.raises(ValueError):
        dic.Dictionary(np.array([[2.0]]), "custom")


def test_l1_examples():
    assert dic.l1_seminorm_upper_bound(dic.canonical_basis(3), [1, -2, 3]) == 6.0
    assert dic.l1_seminorm_upper_bound(dic.random_unit(3, 6, seed=1), np.zeros(3)) == 0.0
    dup = dic.union_of_bases([dic.canonical_basis(2)] * 2)
    assert dic.l1_seminorm_upper_bound(dup, [2.0, 0.0]) == pytest.approx(2.0, abs=1e-12)
    assert dic.brute_force_l1(dup, [2.0, 0.0]) == pytest.approx(2.0, abs=1e-12)


def test_l1_not_in_span():
    d = dic.from_atoms([[1.0, 0.0, 0.0]])
    with pytest.raises(dic.NotInSpanError):
        dic.l1_seminorm_upper_bound(d, [0.0, 1.0, 0.0])


@pytest.mark.parametrize("seed", range(6))
def test_l1_matches_enumeration_oracle(seed):
    rng = np.random.default_rng(seed)
    d = dic.random_unit(3, 7, seed=seed)
    x = rng.standard_normal(3)
    assert dic.l1_seminorm_upper_bound(d, x) == pytest.approx(dic.brute_force_l1(d, x), rel=1e-9)


def test_l1_union_never_above_basis_value():
    rng = np.random.default_rng(3)
    rot = dic.rotated_basis(5, seed=3)
    u = dic.union_of_bases([dic.canonical_basis(5), rot])
    for _ in range(10):
        x = rng.standard_normal(5)
        assert dic.l1_seminorm_upper_bound(u, x) <= np.abs(x).sum() + 1e-12
        assert dic.l1_seminorm_upper_bound(u, x) <= np.abs(rot.atoms @ x).sum() + 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 1000), st.floats(-50, 50, allow_nan=False).filter(lambda s: abs(s) > 1e-3))
def test_l1_absolutely_homogeneous(seed, s):
    d = dic.random_unit(4, 9, seed=seed % 7)
    x = np.random.default_rng(seed).standard_normal(4)
    base = dic.l1_seminorm_upper_bound(d, x)
    assert dic.l1_seminorm_upper_bound(d, s * x) == pytest.approx(abs(s) * base, rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=1, max_size=10))
def test_l1_canonical_is_coordinate_norm(x):
    d = dic.canonical_basis(len(x))
    assert dic.l1_seminorm_upper_bound(d, x) == float(np.abs(np.array(x)).sum())


@pytest.mark.parametrize("make", [
    lambda: dic.canonical_basis(6),
    lambda: dic.rotated_basis(6, seed=1),
    lambda: dic.random_unit(6, 20, seed=4),
    lambda: dic.union_of_bases([dic.canonical_basis(6), dic.rotated_basis(6, seed=9)]),
])
def test_constructed_atoms_are_unit(make):
    assert max_norm_error(make()) <= 1e-12


def test_save_load_roundtrip(tmp_path):
    d = dic.random_unit(4, 9, seed=11)
    path = tmp_path / "d.txt"
    dic.save_dictionary(d, path)
    assert path.read_text().splitlines()[0] == "4 9 random_unit"
    back = dic.load_dictionary(path)
    np.testing.assert_array_equal(back.atoms, d.atoms)
    assert back.kind == d.kind


def test_load_rejects_bad_header(tmp_path):
    path = tmp_path / "d.txt"
    path.write_text("2 3 canonical_basis\n1 0\n0 1\n")
    with pytest.raises(ValueError):
        dic.load_dictionary(path)


def test_inner_products_shape():
    d = dic.random_unit(3, 5, seed=0)
    g = np.array([1.0, -2.0, 0.5])
    np.testing.assert_allclose(d.inner_products(g), [a @ g for a in d.atoms], rtol=1e-14)
