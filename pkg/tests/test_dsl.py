import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from psdyn.dsl import SchemeSyntaxError, parse_scheme, print_scheme
from psdyn.switching import SwitchingScheme

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)
schemes = st.builds(
    lambda ms, ps, h: SwitchingScheme.of(ms[:len(ps)], ps[:len(ms)], h),
    st.lists(st.integers(1, 10**6), min_size=2, max_size=6),
    st.lists(finite, min_size=2, max_size=6),
    st.floats(min_value=1e-300, max_value=1e6, allow_nan=False),
)


@settings(max_examples=1000, deadline=None)
@given(schemes)
def test_round_trip(s):
    text = print_scheme(s)
    back = parse_scheme(text)
    assert back == s
    assert print_scheme(back) == text


def test_canonical_form():
    s = SwitchingScheme.of([1, 1], [0.422, 0.424], 0.005)
    assert print_scheme(s) == "[1*0.422, 1*0.424] @ h=0.005"


def test_variants_normalize():
    s = parse_scheme("  [ 1 ∘ 0.422 ,1∘0.424]@h = 0.005 ")
    assert print_scheme(s) == "[1*0.422, 1*0.424] @ h=0.005"
    assert print_scheme(parse_scheme(print_scheme(s))) == print_scheme(s)


def test_exponent_and_signs():
    s = parse_scheme("[2*-1.5e-3, 3*+4E2] @ h=1e-3")
    assert s.entries == ((2, -1.5e-3), (3, 400.0))
    assert s.h == 1e-3


@pytest.mark.parametrize("text,offset,token,fragment", [
    ("[1.5*0.4, 1*0.5] @ h=0.005", 1, "1.5", "integer"),
    ("[0*0.4, 1*0.5] @ h=0.005", 1, "0", "positive"),
    ("[01*0.4, 1*0.5] @ h=0.005", 1, "01", "leading zero"),
    ("[1*0.4.2, 1*0.5] @ h=0.005", 3, "0.4.2", "number"),
    ("[1*0.4] @ h=0.005", 6, "]", "exceed 1"),
    ("[1*0.4, 1*0.5]", 14, "<end of input>", "@ h="),
    ("[1*0.4, 1*0.5] @ h=-1", 19, "-1", "h"),
    ("[1*0.4, 1*0.5] @ h=0.005 x", 25, "x", "trailing"),
])
def test_diagnostics(text, offset, token, fragment):
    with pytest.raises(SchemeSyntaxError) as info:
        parse_scheme(text)
    err = info.value
    assert err.offset == offset
    assert err.token == token
    assert fragment.lower() in err.message.lower()


def test_offsets_are_utf8_bytes():
    with pytest.raises(SchemeSyntaxError) as info:
        parse_scheme("[1∘0.4, x∘0.5] @ h=0.005")
    assert info.value.offset == len("[1∘0.4, ".encode())


@settings(max_examples=300, deadline=None)
@given(st.text(max_size=40))
def test_garbage_never_crashes(text):
    try:
        s = parse_scheme(text)
    except SchemeSyntaxError:
        return
    assert isinstance(s, SwitchingScheme)
