import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dirac_gaps.potentials import example_c15, potential_from_coeffs, xt_potential, zero_potential  # noqa: E402

# shared test potentials
X1 = potential_from_coeffs([(2, 0.2)], [(-2, 0.2)])                    # p(2) = q(-2) = 0.2
XM1 = xt_potential([(2, 0.3), (-2, 0.2), (4, 0.1j)], -1)                # skew-symmetric, gaps at both parities
C15_EQ = example_c15(0.1, 0.1, 0.1, 0.1)                              # |aA| = |bB|
C15_NEQ = example_c15(0.2, 0.1, 0.2, 0.1)                             # |aA| != |bB|
ZERO = zero_potential()
QZERO = potential_from_coeffs([(2, 0.3), (-2, 0.2), (4, 0.1)], [])


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)
