import pytest
from hypothesis import given
import hypothesis.strategies as st

from proxykit.keys import ObjectKey


def test_generate_is_unique_per_call():
    keys = {ObjectKey.generate("ns").id for _ in range(64)}
    assert len(keys) == 64


def test_text_round_trip():
    key = ObjectKey.generate("my-store.v2")
    assert ObjectKey.parse(key.text()) == key
    assert str(key) == f"my-store.v2:{key.id}"


@given(st.text(alphabet="abcdefghijklmnopqrstuvwxyz0123456789._-", min_size=1, max_size=20))
def test_parse_format_losslessness(namespace):
    key = ObjectKey.generate(namespace)
    assert ObjectKey.parse(str(key)) == key


@pytest.mark.parametrize(
    "namespace, hex_id",
    [
        ("", "0" * 32),
        ("has:colon", "0" * 32),
        ("has/slash", "0" * 32),
        ("ok", "0" * 31),
        ("ok", "0" * 33),
        ("ok", "ABCDEF" + "0" * 26),  # uppercase rejected
    ],
)
def test_invalid_keys_rejected(namespace, hex_id):
    with pytest.raises(ValueError):
        ObjectKey(namespace, hex_id)


def test_parse_requires_separator():
    with pytest.raises(ValueError):
        ObjectKey.parse("no-separator")
