"""Conversion between Stratonovich and Ito parameterizations.

A Stratonovich generator triple (E, F, K) — hermitian scattering
generator, linear coupling coefficients, hermitian Hamiltonian constant —
describes the same dynamics as an Ito-side component (S, C, Omega).  The
two are linked by the consistency system

    (S − I) = −iE − (i/2)E(S − I)
    C       = −iF − (i/2)EC
    −½C†C − iΩ = −iK − (i/2)F†C

whose solution is the Cayley transform S = (I − iE/2)(I + iE/2)⁻¹ with
C = −i(I + iE/2)⁻¹F; Ω follows from the third equation.  The residuals of
these three equations are the single source of truth for both directions
and are exposed directly for use as an oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matkit
from .slh import LinearComponent


class CayleySingular(ValueError):
    """S has −1 in its spectrum, so no finite generator E exists."""


@dataclass(frozen=True, eq=False)
class StratonovichModel:
    """Generator triple (E, F, K); E and K must be hermitian."""

    E: np.ndarray
    F: np.ndarray
    K: np.ndarray

    def __post_init__(self):
        E = matkit.as_matrix(self.E, name="E")
        if E.shape[0] != E.shape[1]:
            raise ValueError(f"E must be square, got shape {E.shape}")
        n = E.shape[0]
        K = matkit.as_matrix(self.K, name="K")
        if K.shape[0] != K.shape[1]:
            raise ValueError(f"K must be square, got shape {K.shape}")
        m = K.shape[0]
        F = np.asarray(self.F, dtype=complex)
        if F.size == 0 and n * m == 0:
            F = np.zeros((n, m), dtype=complex)
        else:
            F = matkit.as_matrix(F, rows=n, cols=m, name="F")
        if not matkit.is_hermitian(E, matkit.STRUCT_TOL):
            raise ValueError("E must be hermitian")
        if not matkit.is_hermitian(K, matkit.STRUCT_TOL):
            raise ValueError("K must be hermitian")
        for arr in (E, F, K):
            arr.flags.writeable = False
        object.__setattr__(self, "E", E)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "K", K)

    @property
    def n_ports(self) -> int:
        return self.E.shape[0]

    @property
    def m_modes(self) -> int:
        return self.K.shape[0]


def strat_to_ito(sm: StratonovichModel) -> LinearComponent:
    """Solve the consistency system for (S, C, Omega).

    S is the Cayley transform of E (always unitary for hermitian E), and
    Omega is the hermitian solution of the third equation; the returned
    component leaves all three residuals at roundoff level.
    """
    n = sm.n_ports
    P = np.eye(n) + 0.5j * sm.E
    rhs = np.concatenate([np.eye(n) - 0.5j * sm.E, -1j * sm.F], axis=1)
    X = matkit.solve(P, rhs)   # (I + iE/2) is nonsingular for hermitian E
    S = X[:, :n]
    C = X[:, n:]
    Omega = matkit.herm_real(sm.K + 0.5 * sm.F.conj().T @ C
                             + 0.5j * C.conj().T @ C)
    return LinearComponent(S, C, Omega)


def ito_to_strat(comp: LinearComponent) -> StratonovichModel:
    """Invert the Cayley transform: E = 2i(S − I)(S + I)⁻¹, F = i(I + iE/2)C.

    Raises CayleySingular when −1 is in the spectrum of S (no finite E).
    """
    S, C, Omega = comp.S, comp.C, comp.Omega
    n = comp.n_ports
    if n:
        eigs = np.linalg.eigvals(S)
        if np.min(np.abs(eigs + 1.0)) < 1e-9:
            raise CayleySingular("-1 is an eigenvalue of S; no finite Stratonovich generator")
    E = matkit.herm_real(2j * matkit.solve(S + np.eye(n), S - np.eye(n)))
    F = 1j * (C + 0.5j * E @ C)
    K = matkit.herm_real(Omega - 0.5 * F.conj().T @ C - 0.5j * C.conj().T @ C)
    return StratonovichModel(E=E, F=F, K=K)


@dataclass(frozen=True)
class ConsistencyResiduals:
    """Max-norm residuals of the three consistency equations."""

    scattering: float
    coupling: float
    drift: float

    @property
    def worst(self) -> float:
        return max(self.scattering, self.coupling, self.drift)

    def __str__(self) -> str:
        return (f"scattering={self.scattering:.3e} coupling={self.coupling:.3e} "
                f"drift={self.drift:.3e}")


def ito_table_residuals(sm: StratonovichModel,
                        comp: LinearComponent) -> ConsistencyResiduals:
    """Evaluate the three consistency equations for a candidate pair.

    Serves as the acceptance oracle for both conversion directions: a
    matched pair leaves every residual at roundoff level, and each
    equation responds linearly to perturbations of its own unknown.
    """
    if sm.n_ports != comp.n_ports or sm.m_modes != comp.m_modes:
        raise ValueError("dimension mismatch between Stratonovich and Ito models")
    n = sm.n_ports
    S, C, Omega = comp.S, comp.C, comp.Omega
    d = S - np.eye(n)
    r1 = d + 1j * sm.E + 0.5j * sm.E @ d
    r2 = C + 1j * sm.F + 0.5j * sm.E @ C
    lhs = -0.5 * C.conj().T @ C - 1j * Omega
    rhs = -1j * sm.K - 0.5j * sm.F.conj().T @ C
    return ConsistencyResiduals(scattering=matkit.max_abs(r1),
                                coupling=matkit.max_abs(r2),
                                drift=matkit.max_abs(lhs - rhs))


def cayley_from_generator(E: np.ndarray) -> np.ndarray:
    """S = e^{−iJ} with J = 2·arctan(E/2), via the spectral calculus of E.

    Mathematically identical to the Cayley transform used by
    :func:`strat_to_ito`; kept as an independent route for cross-checks.
    """
    E = np.asarray(E, dtype=complex)
    values, projectors = matkit.eig_hermitian(E)
    n = E.shape[0]
    S = np.zeros((n, n), dtype=complex)
    for lam, proj in zip(values, projectors):
        S += np.exp(-2j * np.arctan(lam / 2)) * proj
    return S
