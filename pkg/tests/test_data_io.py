"""Tests for the text-format parser, row normalization, synthetic problem
generation, and the portable counter-based RNG.

The RNG oracle is a pure-Python big-int reimplementation of splitmix64, so a
platform or numpy regression in the vectorized path cannot hide.
"""

import io

import numpy as np
import pytest

from pdbfw.data_io import (Dataset, DatasetMeta, ParseError, PortableRng,
                           SyntheticSpec, generate_synthetic, normalize_rows,
                           parse_libsvm, write_libsvm)

_MASK = (1 << 64) - 1


def _splitmix_reference(seed, index):
    """Pure-Python splitmix64 draw at a given counter position (0-based)."""
    z = (seed + (index + 1) * 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


# ---------------------------------------------------------------------------
# PortableRng


def test_rng_frozen_raw_draws():
    # [DERIVED] literals computed by the pure-Python reference above
    np.testing.assert_array_equal(
        PortableRng(0).raw(3),
        np.array([16294208416658607535, 7960286522194355700,
                  487617019471545679], dtype=np.uint64))
    np.testing.assert_array_equal(
        PortableRng(42).raw(3),
        np.array([13679457532755275413, 2949826092126892291,
                  5139283748462763858], dtype=np.uint64))


def test_rng_matches_pure_python_reference():
    for seed in (0, 1, 42, 2024, _MASK):
        got = PortableRng(seed).raw(16)
        want = [_splitmix_reference(seed & _MASK, i) for i in range(16)]
        assert got.tolist() == want


def test_rng_frozen_uniforms():
    # [DERIVED] ((raw >> 11) + 1) * 2^-53 at seed 0
    u = PortableRng(0).uniforms(2)
    assert u[0] == 0.8833108082136427
    assert u[1] == 0.4315279970485101


def test_rng_counter_continuation():
    # draws are a pure function of (seed, counter): batching cannot matter
    split = PortableRng(7)
    merged = PortableRng(7)
    first = np.concatenate([split.raw(2), split.raw(3)])
    np.testing.assert_array_equal(first, merged.raw(5))


def test_rng_uniforms_half_open_interval():
    u = PortableRng(99).uniforms(10_000)
    assert np.all(u > 0.0)
    assert np.all(u <= 1.0)


def test_rng_normals_deterministic_and_sized():
    a = PortableRng(5).normals(7)
    b = PortableRng(5).normals(7)
    assert a.shape == (7,)
    np.testing.assert_array_equal(a, b)
    assert np.all(np.isfinite(a))


def test_rng_integers_bounds():
    draws = PortableRng(3).integers(1000, 13)
    assert draws.min() >= 0
    assert draws.max() < 13
    with pytest.raises(ValueError, match="upper"):
        PortableRng(3).integers(5, 0)
    with pytest.raises(ValueError, match="count"):
        PortableRng(3).raw(-1)


# ---------------------------------------------------------------------------
# Parser


def test_parse_frozen_two_row_example():
    # [DERIVED] hand-expanded: row 0 has entries at columns 1 and 3,
    # row 1 at column 2; width is the max seen index.
    ds = parse_libsvm(io.StringIO("+1 1:0.5 3:-2\n-1 2:1.0\n"))
    np.testing.assert_array_equal(ds.matrix.to_dense(),
                                  [[0.5, 0.0, -2.0], [0.0, 1.0, 0.0]])
    np.testing.assert_array_equal(ds.labels, [1.0, -1.0])
    assert ds.meta == DatasetMeta(name="stdin", n=2, d=3, nnz=3)


def test_parse_label_remap_zero_one():
    ds = parse_libsvm(io.StringIO("0 1:1\n1 1:2\n"))
    np.testing.assert_array_equal(ds.labels, [-1.0, 1.0])


def test_parse_label_remap_one_two():
    # the 1/2 convention maps class 1 to +1 and class 2 to -1
    ds = parse_libsvm(io.StringIO("1 1:1\n2 1:2\n"))
    np.testing.assert_array_equal(ds.labels, [1.0, -1.0])


def test_parse_regression_targets_untouched():
    ds = parse_libsvm(io.StringIO("0.5 1:1\n2.5 1:2\n"))
    np.testing.assert_array_equal(ds.labels, [0.5, 2.5])


def test_parse_skips_blank_lines():
    ds = parse_libsvm(io.StringIO("+1 1:1\n\n   \n-1 1:2\n"))
    assert ds.meta.n == 2


def test_parse_forced_column_count():
    ds = parse_libsvm(io.StringIO("+1 1:1\n"), n_cols=5)
    assert ds.meta.d == 5
    assert ds.matrix.to_dense().shape == (1, 5)


def test_parse_from_path_uses_filename(tmp_path):
    path = tmp_path / "tiny.txt"
    path.write_text("+1 1:1\n")
    ds = parse_libsvm(str(path))
    assert ds.meta.name == str(path)


@pytest.mark.parametrize("text,lineno,fragment", [
    ("abc 1:1\n", 1, "bad label"),
    ("+1 novalue\n", 1, "index:value"),
    ("+1 1:abc\n", 1, "index:value"),
    ("+1 x:1\n", 1, "index:value"),
    ("+1 0:1\n", 1, "1-based"),
    ("+1 2:1 2:2\n", 1, "strictly increasing"),
    ("+1 3:1 2:1\n", 1, "strictly increasing"),
    ("+1 1:inf\n", 1, "non-finite"),
    ("+1 1:nan\n", 1, "non-finite"),
    ("+1 1:1\nbad 1:1\n", 2, "bad label"),
    ("", 1, "no samples"),
    ("\n\n", 1, "no samples"),
])
def test_parse_errors_carry_line_numbers(text, lineno, fragment):
    with pytest.raises(ParseError, match=fragment) as exc:
        parse_libsvm(io.StringIO(text))
    assert exc.value.line_number == lineno
    assert f"line {lineno}:" in str(exc.value)


def test_parse_rejects_index_beyond_forced_width():
    with pytest.raises(ParseError, match="exceeds"):
        parse_libsvm(io.StringIO("+1 3:1\n"), n_cols=2)


# ---------------------------------------------------------------------------
# Writer round trip


def test_write_then_parse_round_trips(tmp_path):
    text = "+1 1:0.5 3:-2.25\n-1 2:0.1\n+1 1:3.0 2:1e-3\n"
    ds = parse_libsvm(io.StringIO(text))
    path = str(tmp_path / "roundtrip.txt")
    write_libsvm(ds, path)
    back = parse_libsvm(path, n_cols=ds.meta.d)
    # repr-formatted values survive the trip bit for bit
    np.testing.assert_array_equal(back.matrix.to_dense(),
                                  ds.matrix.to_dense())
    np.testing.assert_array_equal(back.labels, ds.labels)


def test_write_to_open_handle():
    ds = parse_libsvm(io.StringIO("+1 1:0.5\n-1 1:1.5\n"))
    sink = io.StringIO()
    write_libsvm(ds, sink)
    assert sink.getvalue() == "1.0 1:0.5\n-1.0 1:1.5\n"


def test_write_rejects_matrix_targets():
    rng = PortableRng(1)
    from pdbfw.core_linalg import SparseDesignMatrix
    matrix = SparseDesignMatrix.from_dense(rng.normals(6).reshape(3, 2))
    ds = Dataset(matrix=matrix, labels=rng.normals(6).reshape(3, 2),
                 meta=DatasetMeta("m", 3, 2, 6))
    with pytest.raises(ValueError, match="1-D"):
        write_libsvm(ds, io.StringIO())


def test_dataset_rejects_label_row_mismatch():
    from pdbfw.core_linalg import SparseDesignMatrix
    matrix = SparseDesignMatrix.from_dense(np.eye(3))
    with pytest.raises(ValueError, match="labels"):
        Dataset(matrix=matrix, labels=np.zeros(2),
                meta=DatasetMeta("m", 3, 3, 3))


# ---------------------------------------------------------------------------
# Row normalization


def test_normalize_rows_frozen_three_four_five():
    # [DERIVED] (3, 4) has norm 5: scaled row is (0.6, 0.8)
    ds = parse_libsvm(io.StringIO("1 1:3 2:4\n"))
    out = normalize_rows(ds)
    np.testing.assert_allclose(out.matrix.to_dense(), [[0.6, 0.8]],
                               rtol=0, atol=1e-16)


def test_normalize_rows_leaves_zero_rows():
    ds = parse_libsvm(io.StringIO("1 1:3\n-1 2:0\n"), n_cols=2)
    out = normalize_rows(ds)
    np.testing.assert_array_equal(out.matrix.to_dense(),
                                  [[1.0, 0.0], [0.0, 0.0]])


def test_normalize_rows_idempotent():
    rng = PortableRng(17)
    from pdbfw.core_linalg import SparseDesignMatrix
    dense = rng.normals(20).reshape(4, 5) * 7.0
    ds = Dataset(matrix=SparseDesignMatrix.from_dense(dense),
                 labels=np.ones(4), meta=DatasetMeta("m", 4, 5, 20))
    once = normalize_rows(ds)
    twice = normalize_rows(once)
    np.testing.assert_allclose(twice.matrix.to_dense(),
                               once.matrix.to_dense(), rtol=0, atol=1e-15)
    assert np.allclose(np.linalg.norm(once.matrix.to_dense(), axis=1), 1.0)


def test_normalize_rows_copies_labels():
    ds = parse_libsvm(io.StringIO("1 1:3\n"))
    out = normalize_rows(ds)
    out.labels[0] = 99.0
    assert ds.labels[0] == 1.0


# ---------------------------------------------------------------------------
# Synthetic instances


def test_synthetic_sparse_deterministic_and_consistent():
    spec = SyntheticSpec(kind="sparse_regression", n=30, d=20,
                         true_sparsity_or_rank=4, noise_level=0.0, seed=9)
    ds1, x1 = generate_synthetic(spec)
    ds2, x2 = generate_synthetic(spec)
    np.testing.assert_array_equal(ds1.matrix.to_dense(),
                                  ds2.matrix.to_dense())
    np.testing.assert_array_equal(ds1.labels, ds2.labels)
    np.testing.assert_array_equal(x1, x2)
    assert np.count_nonzero(x1) == 4
    # noiseless targets are exactly the design applied to the truth
    np.testing.assert_array_equal(ds1.labels, ds1.matrix.to_dense() @ x1)
    assert ds1.meta.name == "sparse_regression-seed9"


def test_synthetic_rows_unit_norm():
    spec = SyntheticSpec(kind="sparse_regression", n=25, d=10, seed=2)
    ds, _ = generate_synthetic(spec)
    norms = np.linalg.norm(ds.matrix.to_dense(), axis=1)
    np.testing.assert_allclose(norms, 1.0, rtol=0, atol=1e-12)


def test_synthetic_noise_leaves_design_fixed():
    clean = SyntheticSpec(kind="sparse_regression", n=15, d=8, seed=4)
    noisy = SyntheticSpec(kind="sparse_regression", n=15, d=8, seed=4,
                          noise_level=0.5)
    ds_clean, x_clean = generate_synthetic(clean)
    ds_noisy, x_noisy = generate_synthetic(noisy)
    np.testing.assert_array_equal(ds_clean.matrix.to_dense(),
                                  ds_noisy.matrix.to_dense())
    np.testing.assert_array_equal(x_clean, x_noisy)
    assert not np.array_equal(ds_clean.labels, ds_noisy.labels)


def test_synthetic_trace_shapes_and_rank():
    spec = SyntheticSpec(kind="trace_sensing", n=40, d=12, c=9,
                         true_sparsity_or_rank=3, seed=6)
    ds, X0 = generate_synthetic(spec)
    assert ds.labels.shape == (40, 9)
    assert X0.shape == (12, 9)
    assert np.linalg.matrix_rank(X0) == 3
    np.testing.assert_array_equal(ds.labels, ds.matrix.to_dense() @ X0)


@pytest.mark.parametrize("kwargs,fragment", [
    (dict(kind="gaussian_mixture", n=5, d=5), "unknown synthetic kind"),
    (dict(kind="sparse_regression", n=0, d=5), ">= 1"),
    (dict(kind="trace_sensing", n=5, d=5), "column count"),
    (dict(kind="trace_sensing", n=5, d=5, c=0), "column count"),
    (dict(kind="sparse_regression", n=5, d=5, true_sparsity_or_rank=0),
     ">= 1"),
    (dict(kind="sparse_regression", n=5, d=3, true_sparsity_or_rank=4),
     "exceeds"),
    (dict(kind="trace_sensing", n=5, d=4, c=3, true_sparsity_or_rank=4),
     "exceeds"),
    (dict(kind="sparse_regression", n=5, d=5, noise_level=-0.1), ">= 0"),
])
def test_synthetic_spec_validation(kwargs, fragment):
    with pytest.raises(ValueError, match=fragment):
        SyntheticSpec(**kwargs)
