"""Composition algebra for feedback networks of linear components.

Closing internal channels of a component eliminates them and leaves a
smaller component over the external ports:

    S_red = S_ee + S_ei (η − S_ii)⁻¹ S_ie
    C_red = S_ei (η − S_ii)⁻¹ C_i + C_e
    Ω_red = Ω + Im{C_i† S_ii (η − S_ii)⁻¹ C_i} + Im{C_e† S_ei (η − S_ii)⁻¹ C_i}

with η the permutation pairing internal outputs to internal inputs and
Im{M} = (M − M†)/(2i).  The series product, beam-splitter loop and
Redheffer star product below are special wirings of the same reduction;
each also carries its closed-form parameter version.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matkit
from .slh import LinearComponent, concatenate
from .transfer import eval_transfer

_LOOP_RCOND = 1e-12


class BadPartition(ValueError):
    """Internal/external port bookkeeping is inconsistent."""


class AlgebraicLoop(ValueError):
    """(η − S_ii) is singular: instantaneous elimination impossible."""


class DimensionMismatch(ValueError):
    """Port or block dimensions of the operands do not line up."""


class OutsideDomain(ValueError):
    """Argument outside the domain of the Möbius transform."""


def _is_permutation(eta: np.ndarray) -> bool:
    if eta.shape[0] != eta.shape[1]:
        return False
    if eta.size == 0:
        return True
    if matkit.max_abs(eta - np.round(eta.real)) > 1e-12:
        return False
    ints = np.round(eta.real).astype(int)
    if not np.all((ints == 0) | (ints == 1)):
        return False
    return bool(np.all(ints.sum(axis=0) == 1) and np.all(ints.sum(axis=1) == 1))


@dataclass(frozen=True, eq=False)
class PartitionedComponent:
    """A component whose ports are split into internal and external sets.

    ``internal_out``/``internal_in`` are ordered port indices; ``eta`` is
    the permutation over internal channels with rows following
    ``internal_out`` and columns ``internal_in`` (η[s, r] = 1 when output
    s feeds input r).  External orders default to the ascending
    complements but may be given explicitly to control the port layout of
    the reduced component.
    """

    comp: LinearComponent
    internal_out: tuple[int, ...]
    internal_in: tuple[int, ...]
    eta: np.ndarray
    external_out: tuple[int, ...] | None = None
    external_in: tuple[int, ...] | None = None

    def __post_init__(self):
        n = self.comp.n_ports
        i_out = tuple(int(i) for i in self.internal_out)
        i_in = tuple(int(i) for i in self.internal_in)
        if len(i_out) != len(i_in):
            raise BadPartition(
                f"{len(i_out)} internal outputs vs {len(i_in)} internal inputs")
        for name, idx in (("internal_out", i_out), ("internal_in", i_in)):
            if len(set(idx)) != len(idx):
                raise BadPartition(f"duplicate port index in {name}")
            if any(i < 0 or i >= n for i in idx):
                raise BadPartition(f"{name} index out of range 0..{n - 1}")
        eta = np.asarray(self.eta, dtype=complex)
        if eta.size == 0 and len(i_out) == 0:
            eta = np.zeros((0, 0), dtype=complex)
        if eta.shape != (len(i_out), len(i_in)) or not _is_permutation(eta):
            raise BadPartition("eta must be a permutation matrix over internal channels")
        e_out = self.external_out
        if e_out is None:
            e_out = tuple(i for i in range(n) if i not in set(i_out))
        else:
            e_out = tuple(int(i) for i in e_out)
            if sorted(e_out + i_out) != list(range(n)):
                raise BadPartition("external_out must be the complement of internal_out")
        e_in = self.external_in
        if e_in is None:
            e_in = tuple(i for i in range(n) if i not in set(i_in))
        else:
            e_in = tuple(int(i) for i in e_in)
            if sorted(e_in + i_in) != list(range(n)):
                raise BadPartition("external_in must be the complement of internal_in")
        eta = eta.astype(complex)
        eta.flags.writeable = False
        object.__setattr__(self, "internal_out", i_out)
        object.__setattr__(self, "internal_in", i_in)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "external_out", e_out)
        object.__setattr__(self, "external_in", e_in)

    @property
    def n_internal(self) -> int:
        return len(self.internal_out)


def feedback_reduce(pc: PartitionedComponent) -> LinearComponent:
    """Eliminate the internal channels of ``pc`` and return the reduced component.

    Raises AlgebraicLoop when (η − S_ii) is singular or has condition
    estimate beyond 1/1e-12.
    """
    comp = pc.comp
    S, C = comp.S, comp.C
    io, ii = list(pc.internal_out), list(pc.internal_in)
    eo, ei = list(pc.external_out), list(pc.external_in)
    S_ii = S[np.ix_(io, ii)]
    S_ie = S[np.ix_(io, ei)]
    S_ei = S[np.ix_(eo, ii)]
    S_ee = S[np.ix_(eo, ei)]
    C_i = C[io, :]
    C_e = C[eo, :]
    loop = pc.eta - S_ii
    if loop.size:
        cond = np.linalg.cond(loop)
        if not np.isfinite(cond) or 1.0 / cond <= _LOOP_RCOND:
            raise AlgebraicLoop(
                f"(eta - S_ii) is singular (condition estimate {cond:.3e})")
    try:
        X = matkit.solve(loop, np.concatenate([S_ie, C_i], axis=1))
    except matkit.SingularMatrix as exc:
        raise AlgebraicLoop("(eta - S_ii) is singular") from exc
    k = len(ei)
    loop_S = X[:, :k]       # (η − S_ii)⁻¹ S_ie
    loop_C = X[:, k:]       # (η − S_ii)⁻¹ C_i
    S_red = S_ee + S_ei @ loop_S
    C_red = C_e + S_ei @ loop_C
    Omega_red = (comp.Omega
                 + matkit.herm_imag(C_i.conj().T @ S_ii @ loop_C)
                 + matkit.herm_imag(C_e.conj().T @ S_ei @ loop_C))
    labels = tuple(comp.port_labels[i] for i in ei)
    return LinearComponent(S_red, C_red, Omega_red, labels, comp.mode_labels)


def series_product(g2: LinearComponent, g1: LinearComponent,
                   prefixes: tuple[str, str] | None = None) -> LinearComponent:
    """Feed every output of g1 into the matching input of g2.

    Argument order follows the composition law S = S₂S₁: the second
    argument is the upstream system.  Modes are concatenated g1 first.
    """
    if g1.n_ports != g2.n_ports:
        raise DimensionMismatch(
            f"series product needs equal port counts, got {g1.n_ports} and {g2.n_ports}")
    if prefixes is None and set(g1.mode_labels) & set(g2.mode_labels):
        prefixes = ("g1", "g2")
    if prefixes is not None:
        g1 = g1.relabeled(prefixes[0])
        g2 = g2.relabeled(prefixes[1])
    m1, m2 = g1.m_modes, g2.m_modes
    S = g2.S @ g1.S
    C = np.concatenate([g2.S @ g1.C, g2.C], axis=1)
    coupling = np.zeros((m1 + m2, m1 + m2), dtype=complex)
    coupling[m1:, :m1] = g2.C.conj().T @ g2.S @ g1.C   # from Im{L₂†S₂L₁}
    Omega = np.zeros((m1 + m2, m1 + m2), dtype=complex)
    Omega[:m1, :m1] = g1.Omega
    Omega[m1:, m1:] = g2.Omega
    Omega = Omega + matkit.herm_imag(coupling)
    return LinearComponent(S, C, Omega, g2.port_labels,
                           g1.mode_labels + g2.mode_labels)


@dataclass(frozen=True)
class CascadeReport:
    """Residuals ‖Xi_series(s) − Xi₂(s)Xi₁(s)‖_max over a set of Laplace points."""

    s_points: tuple[complex, ...]
    residuals: tuple[float, ...]
    tol: float

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)

    @property
    def passed(self) -> bool:
        return all(r <= self.tol for r in self.residuals)


def cascade_transfer_check(g2: LinearComponent, g1: LinearComponent,
                           s_points, tol: float = 1e-10) -> CascadeReport:
    """Verify that the series transfer function factors as Xi₂·Xi₁ pointwise."""
    combined = series_product(g2, g1)
    s_points = tuple(complex(s) for s in s_points)
    residuals = []
    for s in s_points:
        lhs = eval_transfer(combined, s).Xi
        rhs = eval_transfer(g2, s).Xi @ eval_transfer(g1, s).Xi
        residuals.append(matkit.max_abs(lhs - rhs))
    return CascadeReport(s_points, tuple(residuals), tol)


@dataclass(frozen=True, eq=False)
class BeamSplitter:
    """Static unitary scatterer with a 2×2 block structure.

    ``T`` mixes the (n1 + n2)-dimensional field vector; the first block
    of dimension n1 faces the external world, the second block of
    dimension n2 faces the in-loop side.  Construction rejects
    non-unitary matrices.
    """

    T: np.ndarray
    n1: int
    n2: int

    def __post_init__(self):
        T = matkit.as_matrix(self.T, name="T")
        n = self.n1 + self.n2
        if self.n1 < 0 or self.n2 < 0 or T.shape != (n, n):
            raise ValueError(f"T must be {n}×{n} for block dims ({self.n1}, {self.n2})")
        if not matkit.is_unitary(T, matkit.STRUCT_TOL):
            raise ValueError("beam splitter matrix must be unitary")
        T.flags.writeable = False
        object.__setattr__(self, "T", T)

    @property
    def T11(self) -> np.ndarray:
        return self.T[:self.n1, :self.n1]

    @property
    def T12(self) -> np.ndarray:
        return self.T[:self.n1, self.n1:]

    @property
    def T21(self) -> np.ndarray:
        return self.T[self.n1:, :self.n1]

    @property
    def T22(self) -> np.ndarray:
        return self.T[self.n1:, self.n1:]

    def to_component(self) -> LinearComponent:
        """The splitter as a static component: S = T, no modes."""
        n = self.n1 + self.n2
        return LinearComponent(self.T, np.zeros((n, 0)), np.zeros((0, 0)))


def mixing_splitter(alpha: float) -> BeamSplitter:
    """Real 2×2 splitter [[α, β], [β, −α]] with β = √(1 − α²)."""
    if not -1.0 <= alpha <= 1.0:
        raise ValueError("mixing amplitude must lie in [-1, 1]")
    beta = np.sqrt(1.0 - alpha * alpha)
    return BeamSplitter(np.array([[alpha, beta], [beta, -alpha]]), 1, 1)


def mobius(T: BeamSplitter, X) -> np.ndarray:
    """Non-commutative Möbius transform T₁₁ + T₁₂(I − X·T₂₂)⁻¹X·T₂₁.

    Maps unitary X in its domain to unitary results.  Raises
    OutsideDomain when (I − X·T₂₂) is singular.
    """
    X = matkit.as_matrix(X, rows=T.n2, cols=T.n2, name="X")
    try:
        inner = matkit.solve(np.eye(T.n2) - X @ T.T22, X @ T.T21)
    except matkit.SingularMatrix as exc:
        raise OutsideDomain("(I - X T22) is singular") from exc
    return T.T11 + T.T12 @ inner


def beamsplitter_loop(T: BeamSplitter, plant: LinearComponent) -> LinearComponent:
    """Close a feedback loop around ``plant`` through beam splitter ``T``.

    The plant's n2 ports are wired to the splitter's in-loop block; the
    closed-loop component lives on the splitter's n1 external ports:

        S = T₁₁ + T₁₂(1 − S₀T₂₂)⁻¹S₀T₂₁
        C = T₁₂(1 − S₀T₂₂)⁻¹C₀
        Ω = Ω₀ + Im{C₀†(1 − S₀T₂₂)⁻¹C₀}
    """
    if plant.n_ports != T.n2:
        raise DimensionMismatch(
            f"plant has {plant.n_ports} ports, splitter loop block expects {T.n2}")
    S0, C0 = plant.S, plant.C
    loop = np.eye(T.n2) - S0 @ T.T22
    try:
        X = matkit.solve(loop, np.concatenate([S0 @ T.T21, C0], axis=1))
    except matkit.SingularMatrix as exc:
        raise AlgebraicLoop("(1 - S0 T22) is singular") from exc
    loop_S = X[:, :T.n1]
    loop_C = X[:, T.n1:]
    S = T.T11 + T.T12 @ loop_S
    C = T.T12 @ loop_C
    Omega = plant.Omega + matkit.herm_imag(C0.conj().T @ loop_C)
    return LinearComponent(S, C, Omega, mode_labels=plant.mode_labels)


def beamsplitter_network(T: BeamSplitter, plant: LinearComponent) -> PartitionedComponent:
    """The splitter-plant wiring as an explicit two-edge network.

    Internal edges: splitter loop outputs feed plant inputs, plant
    outputs feed splitter loop inputs.  Reducing this partition must give
    the same component as :func:`beamsplitter_loop`.
    """
    if plant.n_ports != T.n2:
        raise DimensionMismatch(
            f"plant has {plant.n_ports} ports, splitter loop block expects {T.n2}")
    comp = concatenate(T.to_component(), plant, prefixes=("bs", "plant"))
    n1, n2 = T.n1, T.n2
    loop_ports = tuple(range(n1, n1 + n2))
    plant_ports = tuple(range(n1 + n2, n1 + 2 * n2))
    eye = np.eye(n2)
    eta = np.zeros((2 * n2, 2 * n2))
    eta[:n2, n2:] = eye   # splitter loop output -> plant input
    eta[n2:, :n2] = eye   # plant output -> splitter loop input
    return PartitionedComponent(comp, internal_out=loop_ports + plant_ports,
                                internal_in=loop_ports + plant_ports, eta=eta)


def redheffer_star(a: LinearComponent, b: LinearComponent,
                   channels: int) -> LinearComponent:
    """Star-compose two components through ``channels`` crossed edges.

    The last ``channels`` ports of ``a`` and the first ``channels`` ports
    of ``b`` become internal: a's loop outputs feed b's loop inputs and
    vice versa.  The composite keeps a's leading ports followed by b's
    trailing ports.
    """
    k = int(channels)
    if k < 0 or k > a.n_ports or k > b.n_ports:
        raise DimensionMismatch(
            f"cannot cross {k} channels between {a.n_ports}- and {b.n_ports}-port components")
    comp = concatenate(a, b, prefixes=("a", "b"))
    na = a.n_ports
    a_loop = tuple(range(na - k, na))
    b_loop = tuple(range(na, na + k))
    eye = np.eye(k)
    eta = np.zeros((2 * k, 2 * k))
    eta[:k, k:] = eye   # a loop output -> b loop input
    eta[k:, :k] = eye   # b loop output -> a loop input
    pc = PartitionedComponent(comp, internal_out=a_loop + b_loop,
                              internal_in=a_loop + b_loop, eta=eta)
    return feedback_reduce(pc)


@dataclass(frozen=True)
class PathExpansionReport:
    """Truncated loop-path series against the closed-form reduction.

    ``residuals[j]`` is the max-norm gap between the order-j partial sum
    of S_ee + Σ_n S_ei ξ (S_ii ξ)ⁿ S_ie (ξ = η⁻¹) and the closed form.
    ``decay_rate`` is the geometric mean of successive residual ratios,
    None when fewer than two nonzero residuals exist.
    """

    order: int
    spectral_radius: float
    convergent: bool
    residuals: tuple[float, ...]
    decay_rate: float | None


def path_expansion_check(pc: PartitionedComponent, order: int) -> PathExpansionReport:
    """Compare the geometric path series with the closed-form S_red.

    The series converges iff the spectral radius of S_ii·ξ is below one;
    a report with ``convergent=False`` is returned otherwise (the closed
    form may still exist there).
    """
    comp = pc.comp
    io, ii = list(pc.internal_out), list(pc.internal_in)
    eo, ei = list(pc.external_out), list(pc.external_in)
    S = comp.S
    S_ii = S[np.ix_(io, ii)]
    S_ie = S[np.ix_(io, ei)]
    S_ei = S[np.ix_(eo, ii)]
    S_ee = S[np.ix_(eo, ei)]
    xi = pc.eta.T.conj()   # permutation inverse
    hop = S_ii @ xi
    if hop.size:
        radius = float(np.max(np.abs(np.linalg.eigvals(hop))))
    else:
        radius = 0.0
    convergent = radius < 1.0 - 1e-12
    closed = feedback_reduce(pc).S
    partial = S_ee.astype(complex).copy()
    term = xi @ S_ie
    residuals = []
    for _ in range(int(order) + 1):
        partial = partial + S_ei @ term
        residuals.append(matkit.max_abs(partial - closed))
        term = xi @ S_ii @ term
    ratios = [residuals[j + 1] / residuals[j]
              for j in range(len(residuals) - 1) if residuals[j] > 0 and residuals[j + 1] > 0]
    decay = float(np.exp(np.mean(np.log(ratios)))) if ratios else None
    return PathExpansionReport(order=int(order), spectral_radius=radius,
                               convergent=convergent,
                               residuals=tuple(residuals), decay_rate=decay)
