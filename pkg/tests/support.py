"""Random model generators and oracles shared across the test modules."""

from __future__ import annotations

import numpy as np

from slhnet import (BeamSplitter, LinearComponent, PartitionedComponent,
                    concatenate, feedback_reduce)


def haar_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-distributed unitary via QR with phase fixing."""
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    w = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (w + w.conj().T) / 2


def random_component(rng: np.random.Generator, n: int, m: int,
                     min_damping: float = 0.1) -> LinearComponent:
    """Valid random component: Haar S, Gaussian C, hermitian Omega.

    Resamples until every mode decays at rate >= ``min_damping``.  Nearly
    undamped modes put transfer-function poles within ~gamma of the
    imaginary axis, where the finite 1e-10 offset realizing 0+ costs
    ~8*sigma/gamma in axis-unitarity residual; bounding the damping keeps
    the ensemble generic while staying far from that degeneracy.
    """
    from slhnet import drift
    while True:
        C = (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / np.sqrt(2)
        comp = LinearComponent(haar_unitary(rng, n), C, random_hermitian(rng, m))
        if m == 0 or np.min(-np.linalg.eigvals(drift(comp)).real) >= min_damping:
            return comp


def random_splitter(rng: np.random.Generator, n1: int, n2: int) -> BeamSplitter:
    return BeamSplitter(haar_unitary(rng, n1 + n2), n1, n2)


def random_partitioned(rng: np.random.Generator, n: int, m: int,
                       k: int) -> PartitionedComponent:
    """Random valid component with k internal channels and a random eta.

    Regenerates until (eta - S_ii) is comfortably nonsingular so that
    reduction is well-posed for oracle comparisons.
    """
    while True:
        comp = random_component(rng, n, m)
        internal_out = tuple(sorted(rng.choice(n, size=k, replace=False).tolist()))
        internal_in = tuple(sorted(rng.choice(n, size=k, replace=False).tolist()))
        perm = rng.permutation(k)
        eta = np.zeros((k, k))
        eta[np.arange(k), perm] = 1.0
        pc = PartitionedComponent(comp, internal_out, internal_in, eta)
        S_ii = comp.S[np.ix_(list(internal_out), list(internal_in))]
        if k == 0 or np.linalg.cond(eta - S_ii) < 1e6:
            return pc


def random_rhp_points(rng: np.random.Generator, count: int) -> list[complex]:
    """Laplace points with positive real part."""
    return [complex(rng.uniform(0.05, 3.0), rng.uniform(-4.0, 4.0))
            for _ in range(count)]


def sequential_star(a: LinearComponent, b: LinearComponent,
                    first_edge: int) -> LinearComponent:
    """Star-product oracle: eliminate the two crossed edges one at a time.

    Single-channel blocks only: a's last port and b's first port are the
    loop ports.  ``first_edge`` selects which crossing goes first (1: a's
    output into b, 2: b's output into a); the surviving edge's indices are
    remapped into the once-reduced component before the second elimination.
    """
    comp = concatenate(a, b, prefixes=("a", "b"))
    na = a.n_ports
    a_out, b_in = na - 1, na
    b_out, a_in = na, na - 1
    if first_edge == 1:
        out1, in1, out2, in2 = a_out, b_in, b_out, a_in
    else:
        out1, in1, out2, in2 = b_out, a_in, a_out, b_in
    pc = PartitionedComponent(comp, internal_out=(out1,), internal_in=(in1,),
                              eta=np.eye(1))
    red = feedback_reduce(pc)
    out_map = [i for i in range(comp.n_ports) if i != out1]
    in_map = [i for i in range(comp.n_ports) if i != in1]
    pc2 = PartitionedComponent(red, internal_out=(out_map.index(out2),),
                               internal_in=(in_map.index(in2),), eta=np.eye(1))
    return feedback_reduce(pc2)
