import numpy as np
import pytest

from uaggregation.data import PredictionMatrix, read_matrix_csv, read_vector_csv, write_matrix_csv
from uaggregation.exceptions import InputError


def test_default_ids_and_readonly():
    P = PredictionMatrix(np.arange(6.0).reshape(2, 3))
    assert P.model_ids == ("model_0", "model_1")
    assert P.sample_ids == ("sample_0", "sample_1", "sample_2")
    with pytest.raises(ValueError):
        P.values[0, 0] = 1.0


@pytest.mark.parametrize("bad", [np.ones(3), np.ones((1, 4)), np.array([[1.0, np.nan], [0, 1]])])
def test_rejects_bad_shapes_and_nonfinite(bad):
    with pytest.raises(InputError):
        PredictionMatrix(bad)


def test_duplicate_ids_rejected():
    with pytest.raises(InputError):
        PredictionMatrix(np.ones((2, 2)), ["a", "a"], ["x", "y"])


def test_csv_roundtrip_both_orientations(tmp_path):
    rng = np.random.default_rng(0)
    P = PredictionMatrix(rng.standard_normal((3, 5)), ["m1", "m2", "m3"], list("abcde"))
    path = tmp_path / "m.csv"
    write_matrix_csv(P, path)
    Q = read_matrix_csv(path)
    np.testing.assert_array_equal(P.values, Q.values)
    assert Q.model_ids == P.model_ids and Q.sample_ids == P.sample_ids
    # the same file read as samples-by-models gives the transpose
    R = read_matrix_csv(path, orientation="samples")
    np.testing.assert_array_equal(R.values, P.values.T)


def test_ragged_row_names_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("model_id,a,b,c\nm1,1,2,3\nm2,1,2\nm3,3,2,1\n")
    with pytest.raises(InputError, match="line 3"):
        read_matrix_csv(path)


def test_non_numeric_cell(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("model_id,a,b\nm1,1,x\nm2,1,2\n")
    with pytest.raises(InputError, match="line 2"):
        read_matrix_csv(path)


def test_read_vector(tmp_path):
    path = tmp_path / "v.csv"
    path.write_text("sample_id,value\na,1.5\nb,-2\n")
    ids, vals = read_vector_csv(path)
    assert ids == ["a", "b"]
    np.testing.assert_array_equal(vals, [1.5, -2.0])


def test_select_models_and_samples():
    P = PredictionMatrix(np.arange(12.0).reshape(3, 4))
    Q = P.select_models(np.array([True, False, True])).select_samples([0, 3])
    np.testing.assert_array_equal(Q.values, [[0, 3], [8, 11]])
    assert Q.model_ids == ("model_0", "model_2")
    assert Q.sample_ids == ("sample_0", "sample_3")


def test_caller_array_stays_writable():
    X = np.ones((2, 3))
    PredictionMatrix(X)
    X[0, 0] = 2.0
