import numpy as np
import pytest

from app.ldc import known_codes, load_code, save_code, zoo
from app.ldc.loader import CodeFormatError, format_code, parse_code
from app.utils import InvalidArgument

ALAMOUTI_TEXT = """
# Alamouti, one column per round
name: my_alamouti
lt: 2
t_total: 2
k: 2
round_lengths: 1,1
C 1
1.0,0.0;0.0,0.0
0.0,0.0;0.0,0.0
D 1
0.0,0.0;0.0,0.0
0.0,0.0;1.0,0.0
C 2
0.0,0.0;0.0,0.0
1.0,0.0;0.0,0.0
D 2
0.0,0.0;-1.0,0.0
0.0,0.0;0.0,0.0
"""


def test_parse_matches_builtin(alamouti):
    code = parse_code(ALAMOUTI_TEXT)
    assert code.name == "my_alamouti"
    assert code.round_lengths == (1, 1)
    assert np.array_equal(code.c_mats, alamouti.c_mats)
    assert np.array_equal(code.d_mats, alamouti.d_mats)


@pytest.mark.parametrize("name", known_codes())
def test_builtin_codes_survive_save_and_load(name, tmp_path):
    code = zoo(name)
    path = tmp_path / f"{name}.ldc"
    save_code(code, str(path))
    assert load_code(str(path)).same_as(code)


def test_golden_entries_are_bit_exact():
    code = zoo("golden")
    again = parse_code(format_code(code))
    assert np.array_equal(again.c_mats, code.c_mats)


def test_missing_file():
    with pytest.raises(InvalidArgument):
        load_code("/nonexistent/code.ldc")


def test_missing_header_key():
    text = ALAMOUTI_TEXT.replace("k: 2\n", "")
    with pytest.raises(CodeFormatError, match="missing header keys"):
        parse_code(text)


def test_unknown_header_key():
    text = ALAMOUTI_TEXT.replace("name: my_alamouti", "title: my_alamouti")
    with pytest.raises(CodeFormatError, match="unknown header key"):
        parse_code(text)


def test_wrong_row_width():
    text = ALAMOUTI_TEXT.replace("1.0,0.0;0.0,0.0\n0.0,0.0;0.0,0.0\nD 1", "1.0,0.0\n0.0,0.0;0.0,0.0\nD 1")
    with pytest.raises(CodeFormatError, match="expected 2 entries"):
        parse_code(text)


def test_missing_block():
    text = ALAMOUTI_TEXT.split("D 2")[0]
    with pytest.raises(CodeFormatError, match="missing blocks: D 2"):
        parse_code(text)


def test_inconsistent_round_lengths():
    text = ALAMOUTI_TEXT.replace("round_lengths: 1,1", "round_lengths: 1,2")
    with pytest.raises(InvalidArgument):
        parse_code(text)
