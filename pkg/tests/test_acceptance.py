"""Acceptance criteria, one test per reference check.

Run with ``pytest -s tests/test_acceptance.py`` to see the PASS/FAIL line
for each criterion together with its tolerance and measured error.
"""

import pytest

from spinflux.verification import CHECKS


@pytest.mark.parametrize("name", list(CHECKS))
def test_criterion(name):
    result = CHECKS[name]()
    print(result.line())
    assert result.passed, result.line()
