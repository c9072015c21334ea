import pytest

from cohfluct import acceptance as acc


@pytest.fixture(scope="module")
def mixtures():
    return acc.random_mixtures()


@pytest.mark.parametrize("criterion", acc.CRITERIA, ids=lambda f: f.__name__)
def test_criterion(criterion, mixtures):
    takes_mix = criterion in (acc.criterion_4, acc.criterion_6)
    out = criterion(mixtures) if takes_mix else criterion()
    print(out.line())
    assert out.passed, out.line()
