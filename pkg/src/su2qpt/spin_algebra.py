"""Angular momentum operators on a single maximal-spin multiplet.

All matrices act in the ordered eigenbasis of the z component, quantum
number M running from -J up to +J, with J = N/2 for N two-level
particles.  Everything is kept real: the only imaginary operator in
this basis is J_y itself, so its square is exposed instead, which is
all the quadratic Casimir check needs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Multiplet",
    "OperatorMatrix",
    "build_jz",
    "build_ladder",
    "build_jx",
    "build_jy2",
    "build_j2",
    "commutator",
]


@dataclass(frozen=True)
class Multiplet:
    """Representation context: N particles in the symmetric sector J = N/2.

    Parameters
    ----------
    n_particles : int
        Number of two-level particles, at least 1.  The dimension of the
        multiplet is N + 1 and the Casimir eigenvalue is N(N+2)/4, both
        exact in floating point.
    """

    n_particles: int

    def __post_init__(self):
        n = self.n_particles
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            raise ValueError("n_particles must be an integer")
        if n < 1:
            raise ValueError("n_particles must be at least 1")
        object.__setattr__(self, "n_particles", int(n))

    @property
    def j(self) -> float:
        """Total spin J = N/2, a half-integer."""
        return self.n_particles / 2

    @property
    def dim(self) -> int:
        """Matrix dimension 2J + 1 = N + 1."""
        return self.n_particles + 1

    @property
    def casimir(self) -> float:
        """J(J+1) = N(N+2)/4."""
        return self.n_particles * (self.n_particles + 2) / 4

    def m_values(self) -> np.ndarray:
        """J_z quantum numbers in basis order, -J first."""
        return -self.j + np.arange(self.dim)


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense real operator together with its basis labels (ascending M).

    The entries are copied and frozen on construction so instances can be
    shared across concurrent callers.
    """

    entries: np.ndarray
    m_values: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=float)
        m = np.array(self.m_values, dtype=float)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ValueError("entries must form a square matrix")
        if m.shape != (e.shape[0],):
            raise ValueError("basis labels must match the matrix dimension")
        e.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "entries", e)
        object.__setattr__(self, "m_values", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def is_symmetric(self) -> bool:
        """Bit-exact symmetry check, no tolerance."""
        return bool(np.array_equal(self.entries, self.entries.T))


def build_jz(m: Multiplet) -> OperatorMatrix:
    """Diagonal z component, entries -J, -J+1, ..., +J."""
    ms = m.m_values()
    return OperatorMatrix(np.diag(ms), ms)


def build_ladder(m: Multiplet, sign: str) -> OperatorMatrix:
    """Raising or lowering operator; ``sign`` is ``"raise"`` or ``"lower"``.

    The raising operator sends |M> to sqrt(J(J+1) - M(M+1)) |M+1>.  In
    the ascending basis that amplitude sits at row M+1, column M, one
    place below the diagonal; the commutator [J_z, J_+] = +J_+ pins it
    there.  The lowering operator is the transpose.
    """
    if sign not in ("raise", "lower"):
        raise ValueError("sign must be 'raise' or 'lower'")
    ms = m.m_values()
    below = ms[:-1]
    amps = np.sqrt(m.casimir - below * (below + 1.0))
    plus = np.zeros((m.dim, m.dim))
    rows = np.arange(1, m.dim)
    plus[rows, rows - 1] = amps
    return OperatorMatrix(plus if sign == "raise" else plus.T, ms)


def build_jx(m: Multiplet) -> OperatorMatrix:
    """x component (J_+ + J_-)/2, real symmetric tridiagonal."""
    plus = build_ladder(m, "raise").entries
    return OperatorMatrix((plus + plus.T) / 2.0, m.m_values())


def build_jy2(m: Multiplet) -> OperatorMatrix:
    """Square of the y component as a real matrix, -(J_+ - J_-)^2 / 4.

    The product is symmetrized explicitly so the result is bit-exactly
    symmetric rather than symmetric only up to matmul rounding.
    """
    plus = build_ladder(m, "raise").entries
    diff = plus - plus.T
    raw = -0.25 * (diff @ diff)
    return OperatorMatrix((raw + raw.T) / 2.0, m.m_values())


def build_j2(m: Multiplet) -> OperatorMatrix:
    """Quadratic Casimir J(J+1) times the identity."""
    return OperatorMatrix(m.casimir * np.eye(m.dim), m.m_values())


def commutator(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    """ab - ba; both operators must share one multiplet."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} != {b.dim}")
    return OperatorMatrix(a.entries @ b.entries - b.entries @ a.entries, a.m_values)
