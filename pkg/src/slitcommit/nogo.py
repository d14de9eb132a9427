"""Purification-based cheating demonstration, at toy scale.

If both committed values leave Bob holding the same reduced state, the two
joint pure states are purifications of one density matrix, and a unitary on
Alice's side alone maps one onto the other (Hughston/HJW).  This module
builds that unitary explicitly: Schmidt-decompose both states, align the
B-side bases block-by-block over (near-)degenerate spectral blocks via the
polar factor of the overlap matrix, map A-side vectors correspondingly, and
complete to a full unitary deterministically.

Index convention: a pure state on A (dim_a) and B (dim_b) is stored as a
flat amplitude vector; its matrix form psi[i, j] has the A index first, so
the B marginal is psi.T @ psi.conj().
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORM_ATOL = 1e-12
HERMITIAN_ATOL = 1e-12
TRACE_ATOL = 1e-12
EIGVAL_FLOOR = -1e-10
UNITARITY_ATOL = 1e-10  # max-entry norm of U†U - I
MARGINAL_TOL_DEFAULT = 1e-8  # trace distance allowed between the two marginals
BLOCK_ATOL = 1e-7  # spectral gap below which Schmidt blocks are merged
SCHMIDT_CUTOFF = 1e-12  # squared singular values at or below this are rank noise


class NogoError(ValueError):
    pass


class InsufficientAncillaError(NogoError):
    pass


class NotEquallyConcealingError(NogoError):
    pass


@dataclass(frozen=True)
class PureState:
    dim_a: int
    dim_b: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if self.dim_a < 1 or self.dim_b < 1:
            raise NogoError("dimensions must be positive")
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.dim_a * self.dim_b,):
            raise NogoError(
                f"amplitude vector must have length {self.dim_a * self.dim_b}, "
                f"got shape {amps.shape}"
            )
        norm_sq = float(np.vdot(amps, amps).real)
        if abs(norm_sq - 1.0) > NORM_ATOL:
            raise NogoError(f"state not normalized: |psi|^2 = {norm_sq!r}")
        object.__setattr__(self, "amplitudes", amps)

    def as_matrix(self) -> np.ndarray:
        """Amplitudes as a dim_a x dim_b matrix (A index first)."""
        return self.amplitudes.reshape(self.dim_a, self.dim_b)


@dataclass(frozen=True)
class DensityMatrix:
    dim: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.entries, dtype=complex)
        if m.shape != (self.dim, self.dim):
            raise NogoError(f"entries must be {self.dim}x{self.dim}, got {m.shape}")
        if np.abs(m - m.conj().T).max() > HERMITIAN_ATOL:
            raise NogoError("density matrix not Hermitian")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > TRACE_ATOL:
            raise NogoError(f"density matrix trace {tr!r} != 1")
        if float(np.linalg.eigvalsh(m).min()) < EIGVAL_FLOOR:
            raise NogoError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "entries", m)


@dataclass(frozen=True)
class UnitaryMatrix:
    dim: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.entries, dtype=complex)
        if m.shape != (self.dim, self.dim):
            raise NogoError(f"entries must be {self.dim}x{self.dim}, got {m.shape}")
        defect = np.abs(m.conj().T @ m - np.eye(self.dim)).max()
        if defect > UNITARITY_ATOL:
            raise NogoError(f"matrix not unitary: max |U†U - I| = {defect!r}")
        object.__setattr__(self, "entries", m)


def unitarity_defect(entries: np.ndarray) -> float:
    """max-entry norm of U†U - I for a square complex matrix."""
    m = np.asarray(entries, dtype=complex)
    return float(np.abs(m.conj().T @ m - np.eye(m.shape[0])).max())


def partial_trace_A(state: PureState) -> DensityMatrix:
    """B marginal: rho_B[j, j'] = sum_i psi[i, j] * conj(psi[i, j'])."""
    psi = state.as_matrix()
    rho = psi.T @ psi.conj()
    rho = 0.5 * (rho + rho.conj().T)  # kill roundoff asymmetry
    return DensityMatrix(dim=state.dim_b, entries=rho)


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    if rho.dim != sigma.dim:
        raise NogoError("trace distance needs equal dimensions")
    return float(0.5 * np.abs(np.linalg.eigvalsh(rho.entries - sigma.entries)).sum())


def fidelity(psi: PureState, phi: PureState) -> float:
    """|<psi|phi>| for pure states of equal dimensions."""
    if (psi.dim_a, psi.dim_b) != (phi.dim_a, phi.dim_b):
        raise NogoError("fidelity needs equal dimensions")
    return float(abs(np.vdot(psi.amplitudes, phi.amplitudes)))


def apply_on_A(unitary: UnitaryMatrix, state: PureState) -> PureState:
    """(U ⊗ I_B)|psi> as a new pure state."""
    if unitary.dim != state.dim_a:
        raise NogoError("unitary dimension does not match the A side")
    out = unitary.entries @ state.as_matrix()
    return PureState(state.dim_a, state.dim_b, out.reshape(-1))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR with the standard phase fix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_density_matrix(
    dim: int, rng: np.random.Generator, rank: int | None = None
) -> DensityMatrix:
    """Wishart-style random state of the given rank (full rank by default)."""
    r = dim if rank is None else rank
    if not 1 <= r <= dim:
        raise NogoError(f"rank must be in [1, {dim}], got {r}")
    g = (rng.standard_normal((dim, r)) + 1j * rng.standard_normal((dim, r))) / np.sqrt(2)
    m = g @ g.conj().T
    m = 0.5 * (m + m.conj().T)
    m /= np.trace(m).real
    return DensityMatrix(dim=dim, entries=m)


def random_purification(
    rho_b: DensityMatrix, dim_a: int, rng: np.random.Generator
) -> PureState:
    """Pure state on A ⊗ B whose B marginal is rho_b.

    Built from the spectral decomposition rho_b = sum_k lam_k |v_k><v_k| as
    psi = sum_k sqrt(lam_k) u_k v_k^T with the A-side frame {u_k} taken from
    a Haar-random unitary, so repeated calls give genuinely different
    purifications of the same state.
    """
    lam, vecs = np.linalg.eigh(rho_b.entries)
    keep = lam > SCHMIDT_CUTOFF
    rank = int(keep.sum())
    if dim_a < rank:
        raise InsufficientAncillaError(
            f"insufficient ancilla dimension: need dim_A >= rank {rank}, got {dim_a}"
        )
    frame = haar_unitary(dim_a, rng)[:, :rank]
    psi = frame @ np.diag(np.sqrt(lam[keep])) @ vecs[:, keep].T
    amps = psi.reshape(-1)
    amps = amps / np.linalg.norm(amps)
    return PureState(dim_a=dim_a, dim_b=rho_b.dim, amplitudes=amps)


def _spectral_blocks(weights: np.ndarray) -> list[np.ndarray]:
    """Split descending squared-Schmidt weights into near-degenerate blocks."""
    kept = np.flatnonzero(weights > SCHMIDT_CUTOFF)
    blocks: list[list[int]] = []
    for k in kept:
        if blocks and weights[blocks[-1][-1]] - weights[k] <= BLOCK_ATOL:
            blocks[-1].append(int(k))
        else:
            blocks.append([int(k)])
    return [np.array(b) for b in blocks]


def _complete_to_unitary(cols: np.ndarray) -> np.ndarray:
    """Extend orthonormal columns to a full unitary, deterministically.

    QR of [cols | I] yields an orthonormal basis whose leading columns span
    the input; the trailing columns are kept and the leading ones replaced by
    the exact inputs, so the given columns survive phase-untouched.
    """
    d, r = cols.shape
    if r == d:
        return cols
    q, _ = np.linalg.qr(np.concatenate([cols, np.eye(d, dtype=complex)], axis=1))
    return np.concatenate([cols, q[:, r:d]], axis=1)


def cheating_unitary(
    psi0: PureState, psi1: PureState, tol: float = MARGINAL_TOL_DEFAULT
) -> UnitaryMatrix:
    """Local unitary on A mapping psi0 to psi1, given matching B marginals.

    Both states are Schmidt-decomposed; within each spectral block the two
    B-side bases span the same eigenspace of the common marginal, so the
    overlap matrix between them is (numerically near-) unitary and its polar
    factor gives the change of frame.  Rotating the A-side Schmidt vectors of
    psi0 by that frame makes the two states share B-side bases term by term;
    the unitary then maps rotated A vectors onto psi1's A vectors and acts as
    a fixed completion on the orthogonal complement.
    """
    if (psi0.dim_a, psi0.dim_b) != (psi1.dim_a, psi1.dim_b):
        raise NogoError("states must share dimensions")
    dist = trace_distance(partial_trace_A(psi0), partial_trace_A(psi1))
    if dist > tol:
        raise NotEquallyConcealingError(
            f"not equally concealing — Hughston theorem inapplicable: "
            f"marginal trace distance {dist!r} exceeds tol {tol!r}"
        )

    u0, s0, v0h = np.linalg.svd(psi0.as_matrix(), full_matrices=False)
    u1, s1, v1h = np.linalg.svd(psi1.as_matrix(), full_matrices=False)
    weights = 0.5 * (s0**2 + s1**2)

    src_cols = []
    dst_cols = []
    for block in _spectral_blocks(weights):
        # Overlap of B-side Schmidt bases: w[k, l] = <v1_k | v0_l> where the
        # B vectors are the (unconjugated) rows of each Vh.
        w = v0h[block].conj() @ v1h[block].T  # shape (m, m): rows v0, cols v1
        uw, _, vwh = np.linalg.svd(w.conj().T)  # polar factor of <v1|v0>
        q = uw @ vwh
        # psi0's block rewritten on psi1's B basis: A vectors pick up q.T
        src_cols.append(u0[:, block] @ q.T)
        dst_cols.append(u1[:, block])

    a_src = _complete_to_unitary(np.concatenate(src_cols, axis=1))
    a_dst = _complete_to_unitary(np.concatenate(dst_cols, axis=1))
    return UnitaryMatrix(dim=psi0.dim_a, entries=a_dst @ a_src.conj().T)
