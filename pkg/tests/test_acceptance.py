"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]``/``[FAIL]`` line with the measured
quantities and the runtime against its budget.  Tolerances live in
``garding.acceptance`` next to the checks themselves.
"""
import time

import pytest

from garding.acceptance import CRITERIA, RUNTIME_LIMITS

SEED = 0


@pytest.mark.acceptance
@pytest.mark.parametrize("cid", sorted(CRITERIA))
def test_criterion(cid, capsys):
    t0 = time.perf_counter()
    result = CRITERIA[cid](SEED, quick=False)
    elapsed = time.perf_counter() - t0
    limit = RUNTIME_LIMITS[cid]
    in_time = elapsed < limit
    line = result.line() + f", runtime={elapsed:.1f}s (limit {limit}s)"
    if result.passed and not in_time:
        line = line.replace("[PASS]", "[FAIL]", 1) + " over budget"
    with capsys.disabled():
        print("\n" + line)
    assert result.passed, line
    assert in_time, line
