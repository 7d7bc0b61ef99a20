"""Numerical tolerances shared by every module.

All thresholds live in one frozen record so that tests and configuration
can pin or override them in one place::

    from dataclasses import replace
    tight = replace(TOL, degeneracy=1e-11)
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # construction-time checks
    hermitian_construct: float = 1e-12
    unit_norm: float = 1e-12
    # herm_expm input check
    hermitian_input: float = 1e-10
    # density matrices
    density_hermitian: float = 1e-10
    density_trace: float = 1e-10
    density_min_eig: float = -1e-9
    # eigen-decomposition
    eig_residual: float = 1e-9
    defective_condition: float = 1e12
    degeneracy: float = 1e-9
    # two-qubit closed form: |c| below this is a degenerate direction
    direction: float = 1e-12
    # iteration
    yield_underflow: float = 1e-300


TOL = Tolerances()
