import numpy as np
import pytest

from rowblock import MatrixMarketError, csr_from_triplets, read_matrix_market, write_matrix_market

from conftest import random_csr


def write(tmp_path, text, name="m.mtx"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_basic_real_general(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 3.5\n")
    A = read_matrix_market(p)
    assert (A.n_rows, A.n_cols, A.nnz) == (2, 2, 1)
    assert A.row_cols(0).tolist() == [0]
    assert A.row_values(0).tolist() == [3.5]


def test_symmetric_mirrors_offdiagonal(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate real symmetric\n3 3 2\n2 1 5.0\n3 3 1.0\n")
    A = read_matrix_market(p)
    d = A.to_dense()
    assert d[1, 0] == 5.0 and d[0, 1] == 5.0
    assert d[2, 2] == 1.0
    assert A.nnz == 3  # diagonal not doubled


def test_pattern_entries_get_one(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate pattern general\n3 3 1\n3 2\n")
    A = read_matrix_market(p)
    assert A.to_dense()[2, 1] == 1.0


def test_integer_field(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate integer general\n2 2 1\n1 2 7\n")
    assert read_matrix_market(p).to_dense()[0, 1] == 7.0


def test_duplicates_summed(tmp_path):
    p = write(tmp_path,
              "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.5\n1 1 2.5\n")
    A = read_matrix_market(p)
    assert A.nnz == 1
    assert A.to_dense()[0, 0] == 4.0


def test_comments_and_blank_lines(tmp_path):
    p = write(tmp_path,
              "%%MatrixMarket matrix coordinate real general\n"
              "% a comment\n\n2 2 1\n% another\n2 2 -1.25\n")
    assert read_matrix_market(p).to_dense()[1, 1] == -1.25


@pytest.mark.parametrize("header", [
    "%%MatrixMarket matrix array real general",
    "%%MatrixMarket matrix coordinate complex general",
    "%%MatrixMarket matrix coordinate real hermitian",
    "%%MatrixMarket matrix coordinate real skew-symmetric",
])
def test_unsupported_headers(tmp_path, header):
    p = write(tmp_path, header + "\n2 2 1\n1 1 1.0\n")
    with pytest.raises(MatrixMarketError):
        read_matrix_market(p)


def test_parse_error_carries_line_number(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1.0\n")
    with pytest.raises(MatrixMarketError) as e:
        read_matrix_market(p)
    assert e.value.lineno == 3


def test_out_of_range_entry(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n")
    with pytest.raises(MatrixMarketError):
        read_matrix_market(p)


def test_entry_count_mismatch(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n")
    with pytest.raises(MatrixMarketError, match="declared 2"):
        read_matrix_market(p)


def test_missing_banner(tmp_path):
    p = write(tmp_path, "2 2 1\n1 1 1.0\n")
    with pytest.raises(MatrixMarketError) as e:
        read_matrix_market(p)
    assert e.value.lineno == 1


def test_round_trip_identity(tmp_path, rng):
    A = random_csr(rng, 20, 15, 0.15, positive=False)
    p = tmp_path / "rt.mtx"
    write_matrix_market(p, A)
    B = read_matrix_market(p)
    assert (B.n_rows, B.n_cols, B.nnz) == (A.n_rows, A.n_cols, A.nnz)
    assert np.array_equal(B.row_ptr, A.row_ptr)
    assert np.array_equal(B.col_idx, A.col_idx)
    assert np.allclose(B.values, A.values, rtol=1e-12, atol=0.0)


def test_write_then_read_empty(tmp_path):
    A = csr_from_triplets(3, 4, [])
    p = tmp_path / "e.mtx"
    write_matrix_market(p, A)
    B = read_matrix_market(p)
    assert (B.n_rows, B.n_cols, B.nnz) == (3, 4, 0)
