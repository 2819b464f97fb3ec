import itertools
import math
import re
import sys

import numpy as np
import pytest

from zqspec import ComplexSymTensor, SymTensor
from zqspec.tensor import orbit_keys


def random_sym(m, n, rng, scale=1.0):
    return SymTensor(m, n, scale * rng.standard_normal(len(orbit_keys(m, n))))


def random_complex(m, n, rng):
    return ComplexSymTensor(random_sym(m, n, rng), random_sym(m, n, rng))


def dense_loop_m1(D, w):
    """Naive ``sum_{i2..im} D[i, i2, ..., im] w[i2] ... w[im]`` over every index tuple."""
    m, n = D.ndim, D.shape[0]
    out = np.zeros(n, dtype=np.result_type(D, w))
    for idx in itertools.product(range(n), repeat=m):
        term = D[idx]
        for j in idx[1:]:
            term = term * w[j]
        out[idx[0]] += term
    return out


def dense_loop_m(D, w):
    return sum(D[idx] * math.prod(w[j] for j in idx) for idx in itertools.product(range(D.shape[0]), repeat=D.ndim))


def diag25():
    return SymTensor.diagonal(3, [2.0, -5.0])


DIAG25_SET = np.array([5.0, 2.0, 10 / math.sqrt(29), -10 / math.sqrt(29), -2.0, -5.0])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines, key=lambda s: int(re.search(r"criterion\s+(\d+)", s).group(1))):
        terminalreporter.write_line(line)
