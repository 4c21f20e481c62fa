import gzip

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualavg.dataio import (SparseExample, densify, format_libsvm, load_libsvm, parse_libsvm,
                            subsample, to_problem, write_libsvm)
from dualavg.errors import ContractError, ParseError


def test_basic_line():
    ex, dim = parse_libsvm("+1 1:0.5 3:-2\n")
    assert ex == [SparseExample(1, ((1, 0.5), (3, -2.0)))]
    assert dim == 3


def test_label_only_line():
    ex, dim = parse_libsvm("-1\n")
    assert ex[0].label == -1 and ex[0].entries == () and dim == 0


def test_decreasing_index_reports_line():
    with pytest.raises(ParseError) as info:
        parse_libsvm("1 3:1 2:1\n")
    assert info.value.line == 1 and "line 1" in str(info.value)


@pytest.mark.parametrize("text,line", [
    ("+1 1:0.5\n-1 0:1\n", 2),
    ("+1 1:abc\n", 1),
    ("yes 1:1\n", 1),
    ("+1 1:1\n\n-1 2=3\n", 3),
    ("+1 2:1 2:4\n", 1),
])
def test_parse_errors(text, line):
    with pytest.raises(ParseError) as info:
        parse_libsvm(text)
    assert info.value.line == line


def test_blank_lines_comments_and_scientific():
    text = "\n+1 2:1e-3 # trailing\n# whole line\n\n-1 1:-.5E+2\n"
    ex, dim = parse_libsvm(text.encode())
    assert [e.label for e in ex] == [1, -1]
    assert ex[0].entries == ((2, 1e-3),) and ex[1].entries == ((1, -50.0),)
    assert dim == 2


@pytest.mark.parametrize("labels,expect", [((0, 1), (-1, 1)), ((1, 2), (-1, 1)),
                                           ((2, 1), (1, -1))])
def test_label_normalization(labels, expect):
    text = "".join(f"{lab} 1:1\n" for lab in labels)
    assert tuple(e.label for e in parse_libsvm(text)[0]) == expect


def test_three_classes_rejected():
    with pytest.raises(ContractError):
        parse_libsvm("1 1:1\n2 1:1\n3 1:1\n")


def test_gzip_and_plain(tmp_path):
    examples = [SparseExample(1, ((1, 0.25),)), SparseExample(-1, ((2, 3.0), (5, -1.0)))]
    plain = tmp_path / "d.txt"
    write_libsvm(plain, examples)
    packed = tmp_path / "d.txt.gz"
    with gzip.open(packed, "wt") as fh:
        fh.write(format_libsvm(examples))
    assert load_libsvm(plain) == load_libsvm(packed) == (examples, 5)


def test_missing_file(tmp_path):
    with pytest.raises(ContractError, match="missing"):
        load_libsvm(tmp_path / "missing.txt")


def test_densify_and_dim_override():
    ex, _ = parse_libsvm("+1 1:2 3:4\n-1 2:1\n")
    X, y = densify(ex, dim=4)
    np.testing.assert_array_equal(X, [[2, 0, 4, 0], [0, 1, 0, 0]])
    np.testing.assert_array_equal(y, [1, -1])
    with pytest.raises(ContractError):
        densify(ex, dim=2)
    assert to_problem(ex, 0.5).dim == 3


def test_subsample_rules():
    ex = [SparseExample(1 if i % 2 else -1, ((1, float(i)),)) for i in range(50)]
    assert subsample(ex, 20, 3) == subsample(ex, 20, 3)
    full = subsample(ex, 50, 1)
    assert sorted(e.entries for e in full) == sorted(e.entries for e in ex)
    with pytest.raises(ContractError):
        subsample(ex, 51, 0)


def test_subsample_class_balance():
    """Class count stays within 5 hypergeometric standard deviations of n/2."""
    N, n = 10_000, 1000
    ex = [SparseExample(1 if i < N // 2 else -1, ()) for i in range(N)]
    # variance of a hypergeometric draw: n p (1-p) (N-n)/(N-1)
    sd = np.sqrt(n * 0.25 * (N - n) / (N - 1))
    for seed in range(5):
        pos = sum(e.label == 1 for e in subsample(ex, n, seed))
        assert abs(pos - n / 2) <= 5 * sd


entry_lists = st.lists(st.tuples(st.integers(1, 500), st.floats(allow_nan=False,
                                                                allow_infinity=False)),
                       max_size=8, unique_by=lambda e: e[0]).map(lambda es: tuple(sorted(es)))
example = st.builds(SparseExample, st.sampled_from([-1, 1]), entry_lists)


@settings(max_examples=150, deadline=None)
@given(st.lists(example, min_size=1, max_size=20))
def test_round_trip_property(examples):
    if len({e.label for e in examples}) < 2:
        examples = examples + [SparseExample(-examples[0].label, ())]
    parsed, _ = parse_libsvm(format_libsvm(examples))
    assert parsed == examples
