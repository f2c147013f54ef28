import numpy as np
import pytest

from phyauth import SystemParams
from phyauth.tag_codec import TableCodebook, all_keys

_REPORT = []


def record_criterion(label: str, name: str, passed: bool, detail: str):
    """Register one acceptance line; printed at the end of the session."""
    line = f"criterion {label} [{'PASS' if passed else 'FAIL'}] {name}: {detail}"
    _REPORT.append(line)
    print(line)
    return passed


@pytest.fixture
def report():
    return record_criterion


def pytest_terminal_summary(terminalreporter):
    if not _REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_REPORT):
        terminalreporter.write_line(line)


def distance_ensemble(d_min: int, l_t: int = 16) -> TableCodebook:
    """Two-bit-key codebook whose every codeword has its nearest neighbour at d_min.

    d_min = 0 keys the tag on the first key bit only, so each key has a twin.
    Otherwise each key bit is repeated d_min times and the rest is zero padding.
    """
    keys = all_keys(2)
    if d_min == 0:
        table = np.repeat(keys[:, :1], l_t, axis=1)
    else:
        if 2 * d_min > l_t:
            raise ValueError("two repeated key bits must fit into the tag")
        body = np.repeat(keys, d_min, axis=1)
        table = np.hstack([body, np.zeros((4, l_t - body.shape[1]), dtype=np.uint8)])
    return TableCodebook(SystemParams.make(l_k=2, l_t=l_t), table)
