import os

import numpy as np
import pytest

from ratml.algebra import BitMatrix
from ratml.code import (LinearCode, RandomCodeSpec, hamming_7_4, hermitian_16,
                        random_systematic_circulant, repetition)

DATA = os.path.join(os.path.dirname(__file__), "data")


def matrix(rows):
    """BitMatrix from a list of 0/1 lists or strings."""
    rows = [[int(c) for c in r] for r in rows]
    packed = tuple(sum(b << j for j, b in enumerate(r)) for r in rows)
    return BitMatrix(len(rows), len(rows[0]), packed)


def random_code(rng, n, k, name="rand"):
    """Random full-rank k x n code with no zero column (duplicates allowed)."""
    while True:
        G = rng.integers(0, 2, size=(k, n))
        if not G.any(axis=0).all():
            continue
        try:
            return LinearCode.from_generator(matrix(G.tolist()), name)
        except Exception:
            continue


def random_codes(count, seed, n_max=12, k_max=6, n_min=3):
    rng = np.random.default_rng(seed)
    out = []
    for c in range(count):
        n = int(rng.integers(n_min, n_max + 1))
        k = int(rng.integers(1, min(k_max, n - 1) + 1))
        out.append(random_code(rng, n, k, f"rand{c}"))
    return out


def small_codes():
    """Codes small enough for exhaustive oracles."""
    dup = LinearCode.from_generator(matrix(["1010", "0101"]), "dup2")
    return [
        repetition(3),
        repetition(4),
        hamming_7_4(),
        hermitian_16(),
        dup,
        random_systematic_circulant(RandomCodeSpec(4, 1, 2, 3)),
        random_systematic_circulant(RandomCodeSpec(5, 2, 3, 1)),
    ]


@pytest.fixture(scope="session")
def herm():
    return hermitian_16()


@pytest.fixture(scope="session")
def hamming():
    return hamming_7_4()


@pytest.fixture(params=small_codes(), ids=lambda c: c.name, scope="session")
def small_code(request):
    return request.param


# -- acceptance reporting --------------------------------------------------
# Acceptance tests attach ("criterion", id) and ("detail", text) user
# properties; each outcome is printed as one line in the terminal summary.

_CRITERIA = []


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    detail = props.get("detail", "")
    if report.failed:
        crash = getattr(report.longrepr, "reprcrash", None)
        if crash is not None and not detail:
            detail = crash.message.splitlines()[0]
    status = "PASS" if report.passed else "FAIL"
    _CRITERIA.append((props["criterion"], status, detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for cid, status, detail in sorted(_CRITERIA, key=lambda c: c[0]):
        terminalreporter.write_line(f"criterion {cid:>2}: {status}  {detail}")
