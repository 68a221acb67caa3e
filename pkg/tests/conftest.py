import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)


def oracle_lz76_components(s: str) -> list[str]:
    """Reference LZ76 parser: tests reproducibility by exhaustive search.

    A candidate phrase s[m:m+k] is reproducible when it occurs starting at
    some position j < m (overlap with itself allowed).  This checks every j
    explicitly, sharing no code with the production parser.
    """
    n = len(s)
    components = []
    m = 0
    while m < n:
        k = 1
        while m + k < n:
            candidate = s[m : m + k]
            reproducible = any(
                s[j : j + k] == candidate for j in range(m)
            )
            if not reproducible:
                break
            k += 1
        components.append(s[m : m + k])
        m += k
    return components
