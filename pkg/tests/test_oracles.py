import pytest

from oracles import ORACLES


@pytest.mark.parametrize("name", sorted(ORACLES))
def test_oracle(name):
    ok, detail = ORACLES[name]()
    print(f"{name}: {detail}")
    assert ok, detail
