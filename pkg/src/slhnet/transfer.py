"""Transfer-function evaluation and the all-pass spectral closed form.

The transfer matrix of a component is Xi(s) = S − C(sI − A)⁻¹C†S with
A the drift matrix; the initial-condition kernel is xi(s) = C(sI − A)⁻¹.
On the imaginary axis (approached from the right half-plane) Xi is
unitary for every valid component; when Omega is a function of C†C the
whole matrix collapses to a sum of scalar all-pass factors over the
spectrum of CC†, which this module extracts and cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matkit
from .slh import LinearComponent, drift

#: Right-half-plane offset used to realize s = 0⁺ + iω on the axis.
SIGMA_MIN = 1e-10


class SingularAtS(ValueError):
    """Evaluation requested at a pole of the resolvent (sI − A singular)."""


class NotCommuting(ValueError):
    """Omega is not a function of C†C, so no all-pass closed form exists."""


class ZeroModeAmbiguity(ValueError):
    """CC† has a zero eigenvalue, whose detuning is invisible in Xi."""


@dataclass(frozen=True)
class TransferEvaluation:
    """Xi(s) and xi(s) at one Laplace point."""

    s: complex
    Xi: np.ndarray
    xi: np.ndarray


@dataclass(frozen=True)
class FreqPoint:
    """One grid point of a frequency response; evaluation is None at poles."""

    omega: float
    evaluation: TransferEvaluation | None

    @property
    def singular(self) -> bool:
        return self.evaluation is None


@dataclass(frozen=True)
class AxisUnitarityReport:
    """Per-frequency residuals ‖Xi·Xi† − I‖_max against a pass tolerance."""

    omegas: tuple[float, ...]
    residuals: tuple[float, ...]
    tol: float

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)

    @property
    def passed(self) -> bool:
        return all(r <= self.tol for r in self.residuals)


def eval_transfer(comp: LinearComponent, s: complex) -> TransferEvaluation:
    """Evaluate Xi(s) = S − C(sI−A)⁻¹C†S and xi(s) = C(sI−A)⁻¹.

    Raises SingularAtS when s is a pole (the resolvent solve detects rank
    deficiency).
    """
    s = complex(s)
    A = drift(comp)
    m = comp.m_modes
    resolvent_arg = s * np.eye(m) - A
    rhs = np.concatenate([comp.C.conj().T @ comp.S, np.eye(m)], axis=1)
    try:
        X = matkit.solve(resolvent_arg, rhs)
    except matkit.SingularMatrix as exc:
        raise SingularAtS(f"s = {s} is a pole of the transfer function") from exc
    n = comp.n_ports
    Xi = comp.S - comp.C @ X[:, :n]
    xi = comp.C @ X[:, n:]
    return TransferEvaluation(s=s, Xi=Xi, xi=xi)


def freq_response(comp: LinearComponent, omegas,
                  sigma: float = SIGMA_MIN) -> list[FreqPoint]:
    """Evaluate along s = sigma + iω for each ω, in grid order.

    Poles are reported per point (evaluation None) rather than aborting
    the sweep.
    """
    points = []
    for omega in omegas:
        s = sigma + 1j * float(omega)
        try:
            ev = eval_transfer(comp, s)
        except SingularAtS:
            ev = None
        points.append(FreqPoint(omega=float(omega), evaluation=ev))
    return points


def check_unitary_on_axis(comp: LinearComponent, omegas, tol: float = 1e-8,
                          sigma: float = SIGMA_MIN) -> AxisUnitarityReport:
    """Sweep the axis and report ‖Xi(iω)Xi(iω)† − I‖_max per frequency.

    A pole on the grid counts as an infinite residual.
    """
    omegas = [float(w) for w in omegas]
    residuals = []
    for point in freq_response(comp, omegas, sigma=sigma):
        if point.evaluation is None:
            residuals.append(float("inf"))
        else:
            Xi = point.evaluation.Xi
            residuals.append(matkit.max_abs(Xi @ Xi.conj().T - np.eye(comp.n_ports)))
    return AxisUnitarityReport(tuple(omegas), tuple(residuals), tol)


@dataclass(frozen=True)
class CommutingForm:
    """Spectral data of the all-pass closed form.

    Xi(s) = Σ_k (s − γ_k/2 + iε_k)/(s + γ_k/2 + iε_k) · E_k · S, where
    {γ_k, E_k} is the clustered spectral decomposition of CC† and ε_k the
    detuning seen by that cluster.  A γ_k = 0 term contributes the
    constant factor 1 (its pole and zero coincide and cancel).
    """

    gammas: np.ndarray
    epsilons: np.ndarray
    projectors: tuple[np.ndarray, ...]
    S: np.ndarray

    def evaluate(self, s: complex) -> np.ndarray:
        s = complex(s)
        n = self.S.shape[0]
        acc = np.zeros((n, n), dtype=complex)
        for gamma, eps, proj in zip(self.gammas, self.epsilons, self.projectors):
            if gamma == 0.0:
                factor = 1.0
            else:
                factor = (s - gamma / 2 + 1j * eps) / (s + gamma / 2 + 1j * eps)
            acc += factor * proj
        return acc @ self.S


def _selfcheck_points(comp: LinearComponent) -> list[complex]:
    # fixed probe grid: right half-plane plus continuation points kept away
    # from the drift spectrum
    points = [0.37 + 0.93j, 1.2 - 0.5j, 2.0 + 3.0j, 0.05 + 0.01j, 1.0 + 0.0j]
    candidates = [-0.31 + 0.77j, -0.8 - 1.3j, -1.7 + 0.39j, -0.12 - 2.1j]
    eigs = np.linalg.eigvals(drift(comp))
    for s in candidates:
        if eigs.size == 0 or np.min(np.abs(eigs - s)) > 0.15:
            points.append(s)
    return points


def commuting_form(comp: LinearComponent, comm_tol: float = 1e-9,
                   recon_tol: float = 1e-8) -> CommutingForm:
    """Extract {γ_k, ε_k, E_k} when Omega is a function of C†C.

    Raises NotCommuting when [C†C, Omega] exceeds ``comm_tol`` or when the
    reconstructed all-pass sum fails to reproduce eval_transfer (which
    happens when Omega merely commutes with C†C without being a function
    of it).  Raises ZeroModeAmbiguity when CC† has a zero eigenvalue: that
    cluster's detuning is unobservable in Xi and no value is invented.
    """
    CtC = comp.C.conj().T @ comp.C
    comm = matkit.max_abs(CtC @ comp.Omega - comp.Omega @ CtC)
    if comm > comm_tol:
        raise NotCommuting(f"[C†C, Omega] has max norm {comm:.3e}")
    CCt = matkit.herm_real(comp.C @ comp.C.conj().T)
    gammas, projectors = matkit.eig_hermitian(CCt)
    gammas = np.maximum(gammas, 0.0)
    if np.any(gammas <= 1e-10):
        raise ZeroModeAmbiguity(
            "CC† has a zero eigenvalue; its detuning cannot be recovered from Xi")
    COmC = comp.C @ comp.Omega @ comp.C.conj().T
    epsilons = np.array([
        float(np.trace(proj @ COmC).real / np.trace(proj @ CCt).real)
        for proj in projectors])
    form = CommutingForm(gammas=gammas, epsilons=epsilons,
                         projectors=tuple(projectors), S=comp.S.copy())
    for s in _selfcheck_points(comp):
        residual = matkit.max_abs(form.evaluate(s) - eval_transfer(comp, s).Xi)
        if residual > recon_tol:
            raise NotCommuting(
                "Omega commutes with C†C but is not a function of it "
                f"(reconstruction residual {residual:.3e} at s = {s})")
    return form


def poles_zeros_commuting(cf: CommutingForm) -> tuple[list[complex], list[complex]]:
    """Pole/zero pairs of the all-pass factors, one per spectral cluster.

    Poles sit at −γ_k/2 − iε_k and zeros at +γ_k/2 − iε_k: each zero is
    the reflection of its pole through the imaginary axis.  For a γ_k = 0
    cluster the two coincide at −iε_k and the factor cancels.
    """
    poles = [complex(-g / 2, -e) for g, e in zip(cf.gammas, cf.epsilons)]
    zeros = [complex(+g / 2, -e) for g, e in zip(cf.gammas, cf.epsilons)]
    return poles, zeros
