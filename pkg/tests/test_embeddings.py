import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relstream import EmbeddingFormatError, EmbeddingTable, load_binary, load_text, save_binary


def write_binary(path, entries, dim=None, trailing_newline=True, header=None):
    """entries: list of (token, list-of-floats)."""
    dim = dim if dim is not None else (len(entries[0][1]) if entries else 0)
    with open(path, "wb") as f:
        if header is None:
            header = f"{len(entries)} {dim}\n"
        f.write(header.encode("ascii"))
        for token, vec in entries:
            f.write(token.encode("utf-8") + b" ")
            f.write(struct.pack(f"<{len(vec)}f", *vec))
            if trailing_newline:
                f.write(b"\n")


class TestLoadBinary:
    def test_two_word_file(self, tmp_path):
        p = tmp_path / "vecs.bin"
        write_binary(p, [("a", [1, 2, 3]), ("b", [4, 5, 6])])
        table = load_binary(str(p))
        assert table.dim == 3
        assert len(table) == 2
        np.testing.assert_array_equal(table.lookup("a"), np.array([1, 2, 3], dtype=np.float32))
        np.testing.assert_array_equal(table.lookup("b"), np.array([4, 5, 6], dtype=np.float32))

    def test_no_trailing_newline_convention(self, tmp_path):
        p = tmp_path / "vecs.bin"
        write_binary(p, [("a", [1.5]), ("b", [-2.5])], trailing_newline=False)
        table = load_binary(str(p))
        assert table.lookup("b")[0] == np.float32(-2.5)

    def test_empty_vocabulary(self, tmp_path):
        p = tmp_path / "empty.bin"
        p.write_bytes(b"0 300\n")
        table = load_binary(str(p))
        assert len(table) == 0
        assert table.lookup("anything") is None

    def test_truncated_mid_vector_names_token(self, tmp_path):
        p = tmp_path / "trunc.bin"
        write_binary(p, [("a", [1, 2, 3]), ("b", [4, 5, 6])], trailing_newline=False)
        data = p.read_bytes()
        p.write_bytes(data[:-4])  # drop the last float of "b"
        with pytest.raises(EmbeddingFormatError, match="'b'"):
            load_binary(str(p))

    def test_malformed_header(self, tmp_path):
        p = tmp_path / "bad.bin"
        p.write_bytes(b"not a header\n")
        with pytest.raises(EmbeddingFormatError, match="header"):
            load_binary(str(p))

    def test_duplicate_token_reports_position(self, tmp_path):
        p = tmp_path / "dup.bin"
        write_binary(p, [("a", [1.0]), ("a", [2.0])])
        with pytest.raises(EmbeddingFormatError, match="position 1"):
            load_binary(str(p))


class TestLoadText:
    def test_single_line(self, tmp_path):
        p = tmp_path / "vecs.txt"
        p.write_text("hi 0.5 -0.5\n")
        table = load_text(str(p))
        assert table.dim == 2
        np.testing.assert_array_equal(table.lookup("hi"), np.array([0.5, -0.5], dtype=np.float32))

    def test_binary_and_text_encode_identical_tables(self, tmp_path):
        entries = [("alpha", [0.125, -3.5]), ("beta", [7.0, 0.0625])]
        pb = tmp_path / "vecs.bin"
        pt = tmp_path / "vecs.txt"
        write_binary(pb, entries)
        pt.write_text("".join(f"{t} {' '.join(str(v) for v in vec)}\n" for t, vec in entries))
        tb, tt = load_binary(str(pb)), load_text(str(pt))
        assert tb.dim == tt.dim
        assert tb.vocab == tt.vocab
        np.testing.assert_array_equal(tb.vectors, tt.vectors)

    def test_inconsistent_dimensionality(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("a 1 2\nb 1 2 3\n")
        with pytest.raises(EmbeddingFormatError, match="line 2"):
            load_text(str(p))

    def test_non_numeric_component(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("a 1 oops\n")
        with pytest.raises(EmbeddingFormatError, match="non-numeric"):
            load_text(str(p))


class TestLookup:
    def test_known_unknown_and_case(self):
        table = EmbeddingTable.from_pairs({"fire": [1.0, 2.0]})
        np.testing.assert_array_equal(table.lookup("fire"), np.array([1, 2], dtype=np.float32))
        assert table.lookup("flood") is None
        assert table.lookup("Fire") is None  # case-sensitive contract


token_st = st.text(
    alphabet=st.characters(min_codepoint=33, max_codepoint=0x2FF, exclude_characters=" \n"),
    min_size=1,
    max_size=8,
)


@settings(max_examples=50, deadline=None)
@given(
    data=st.dictionaries(
        token_st,
        st.lists(st.floats(-1e3, 1e3, width=32), min_size=3, max_size=3),
        min_size=1,
        max_size=6,
    )
)
def test_binary_roundtrip_is_bit_exact(tmp_path_factory, data):
    table = EmbeddingTable.from_pairs(data)
    path = str(tmp_path_factory.mktemp("rt") / "t.bin")
    save_binary(table, path)
    back = load_binary(path)
    assert back.dim == table.dim
    assert back.vocab == table.vocab
    assert back.vectors.tobytes() == table.vectors.tobytes()
