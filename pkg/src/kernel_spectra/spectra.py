"""Nystrom discretization and eigensolution for the reciprocal-floor kernel.

The integral operator is discretized on a composite Gauss grid as the
symmetric matrix A_ij = sqrt(w_i w_j) K(x_i, x_j), whose eigenvalues mu
approximate 1/lambda for the kernel eigenvalues lambda.  A hand-rolled
cyclic Jacobi solver (round-robin parallel ordering, batched rotations)
does the dense eigensolution; eigenfunctions come out of the Nystrom
interpolation formula phi(x) = lambda * sum_i w_i K(x, x_i) phi(x_i).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .iterated import K2Evaluator, k2_closed, k2_diag_exact
from .kernel import k_eval
from .quadrature import QuadratureRule

__all__ = [
    "DiscretizedOperator",
    "Spectrum",
    "EigenfunctionHandle",
    "K2CrossCheck",
    "assemble",
    "eigensolve",
    "eigenfunction",
    "evaluate",
    "cross_validate_k2",
    "default_threads",
    "EIGENVALUE_FLOOR_SCALE",
]

# matrix eigenvalues with |mu| < EIGENVALUE_FLOOR_SCALE / N are treated as
# discretization noise and never inverted: an N-point grid resolves only
# O(N) of the infinitely many kernel eigenvalues
EIGENVALUE_FLOOR_SCALE = 1e-3


def default_threads() -> int:
    """Thread count from KERNEL_SPECTRA_THREADS, else 1."""
    raw = os.environ.get("KERNEL_SPECTRA_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(n, 1)


@dataclass(frozen=True)
class DiscretizedOperator:
    """Grid plus the symmetric Nystrom matrix sqrt(w_i w_j) K(x_i, x_j)."""

    grid: QuadratureRule
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"matrix must be square, got shape {m.shape}")
        if not np.array_equal(m, m.T):
            raise ValueError("matrix must be exactly symmetric")
        object.__setattr__(self, "matrix", m)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def assemble(grid: QuadratureRule, threads: int | None = None) -> DiscretizedOperator:
    """Discretize the kernel operator on the grid.

    The thread count only splits the row blocks; every entry is computed
    the same way and written by index, so the result is identical for any
    thread count.
    """
    x = grid.nodes
    sq = np.sqrt(grid.weights)
    n = x.size
    threads = default_threads() if threads is None else max(int(threads), 1)
    if threads == 1 or n < 64:
        raw = k_eval(x[:, None], x[None, :])
    else:
        raw = np.empty((n, n))
        blocks = np.array_split(np.arange(n), threads)

        def fill(idx):
            raw[idx, :] = k_eval(x[idx, None], x[None, :])

        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill, blocks))
    m = sq[:, None] * raw * sq[None, :]
    m = 0.5 * (m + m.T)  # exact symmetry regardless of rounding
    return DiscretizedOperator(grid=grid, matrix=m)


@lru_cache(maxsize=8)
def _round_robin_rounds(n: int):
    """Disjoint rotation pairs covering all (p, q), p < q, in n-ish rounds.

    Circle method: one slot fixed, the rest rotate; each round's pairs are
    pairwise disjoint, so their Jacobi rotations commute and can be applied
    in one batched update.
    """
    m = n if n % 2 == 0 else n + 1
    ring = list(range(m))
    rounds = []
    for _ in range(m - 1):
        left = np.array(ring[: m // 2])
        right = np.array(ring[: m // 2 - 1 : -1])
        keep = (left < n) & (right < n)  # drop the bye slot for odd n
        p = np.minimum(left[keep], right[keep])
        q = np.maximum(left[keep], right[keep])
        rounds.append((p, q))
        ring = [ring[0], ring[-1]] + ring[1:-1]
    return tuple(rounds)


def _jacobi_eigen(matrix: np.ndarray, tol: float, max_sweeps: int):
    """Full symmetric eigendecomposition by batched cyclic Jacobi.

    Returns (mu, v) with matrix ~ v @ diag(mu) @ v.T; v has orthonormal
    columns.  Raises RuntimeError if the off-diagonal Frobenius mass does
    not fall below tol within max_sweeps sweeps.
    """
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return np.diag(a).copy(), v
    rounds = _round_robin_rounds(n)
    off = math.inf
    scratch = np.empty_like(a)
    for _ in range(max_sweeps):
        # sum the off-diagonal squares directly: the algebraic shortcut
        # ||A||_F^2 - ||diag||^2 cancels catastrophically once the mass is
        # below sqrt(ulp)*||A||_F and would never reach a tight tol
        np.square(a, out=scratch)
        np.fill_diagonal(scratch, 0.0)
        off = math.sqrt(float(np.sum(scratch)))
        if off < tol:
            return np.diag(a).copy(), v
        for p_all, q_all in rounds:
            apq = a[p_all, q_all]
            live = apq != 0.0
            if not np.any(live):
                continue
            p = p_all[live]
            q = q_all[live]
            apq = apq[live]
            with np.errstate(over="ignore", divide="ignore"):
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                # t = sign(tau)/(|tau| + sqrt(1+tau^2)), the smaller root;
                # at tau = 0 the correct limit is t = 1, not sign(0) = 0,
                # and huge tau needs the series form to dodge overflow
                t = np.where(
                    tau == 0.0,
                    1.0,
                    np.sign(tau) / (np.abs(tau) + np.sqrt(1.0 + tau * tau)),
                )
                t = np.where(np.abs(tau) > 1e150, 0.5 / tau, t)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            cc = c[:, None]
            ss = s[:, None]
            ap = a[p, :]
            aq = a[q, :]
            a[p, :] = cc * ap - ss * aq
            a[q, :] = ss * ap + cc * aq
            ap = a[:, p]
            aq = a[:, q]
            a[:, p] = ap * c - aq * s
            a[:, q] = ap * s + aq * c
            vp = v[:, p]
            vq = v[:, q]
            v[:, p] = vp * c - vq * s
            v[:, q] = vp * s + vq * c
    raise RuntimeError(
        f"Jacobi did not converge: off-diagonal mass {off:.3e} after "
        f"{max_sweeps} sweeps (target {tol:.1e}, n = {n})"
    )


@dataclass(frozen=True)
class Spectrum:
    """Kernel eigenvalues lambda_j = 1/mu_j with their eigenvectors.

    Ordered by |lambda_1| <= |lambda_2| <= ...; among equal moduli the
    positive eigenvalue comes first.  vectors[:, j] is the orthonormal
    matrix eigenvector for lambda_j (0-based column for the 1-based j).
    """

    eigenvalues: np.ndarray
    matrix_eigenvalues: np.ndarray
    vectors: np.ndarray
    ordering: str = "abs-ascending, positive first on ties"
    floor: float = 0.0
    discarded: int = 0

    def __len__(self) -> int:
        return int(self.eigenvalues.size)

    def multiplicity_groups(self, rel_tol: float = 1e-6) -> list[list[int]]:
        """Consecutive eigenvalues within rel_tol grouped as one index set.

        Echoes the notion of an eigenvalue's index (its multiplicity slot)
        without claiming exact degeneracy of the discretized values.
        Returned indices are 1-based like j elsewhere.
        """
        lam = self.eigenvalues
        groups: list[list[int]] = []
        for j in range(1, lam.size + 1):
            if groups:
                prev = lam[groups[-1][-1] - 1]
                cur = lam[j - 1]
                if abs(cur - prev) <= rel_tol * max(abs(cur), abs(prev)):
                    groups[-1].append(j)
                    continue
            groups.append([j])
        return groups


# moduli within this relative distance count as equal for the tie-break;
# exact float equality would make the positive-first rule unreachable
_TIE_REL = 1e-12


def _modulus_order(lam: np.ndarray) -> np.ndarray:
    """Sort indices by |lambda| ascending, positive before negative on ties."""
    order = np.argsort(np.abs(lam), kind="stable")
    mods = np.abs(lam[order])
    i = 0
    while i < order.size:
        j = i + 1
        while j < order.size and mods[j] - mods[j - 1] <= _TIE_REL * mods[j]:
            j += 1
        if j - i > 1:
            run = order[i:j]
            run_lam = lam[run]
            order[i:j] = run[np.lexsort((np.abs(run_lam), np.signbit(run_lam)))]
        i = j
    return order


def eigensolve(
    op: DiscretizedOperator,
    tol: float = 1e-11,
    max_sweeps: int = 100,
    threads: int | None = None,
) -> Spectrum:
    """Eigensolve the discretized operator and invert to kernel eigenvalues.

    tol is the absolute off-diagonal Frobenius target for the Jacobi
    iteration.  Matrix eigenvalues below the noise floor are discarded
    rather than inverted.  threads is accepted for interface symmetry with
    assemble; the batched rotations are already data-parallel, and the
    result never depends on it.
    """
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    del threads
    mu, v = _jacobi_eigen(op.matrix, tol, max_sweeps)
    floor = EIGENVALUE_FLOOR_SCALE / op.size
    keep = np.abs(mu) >= floor
    mu_kept = mu[keep]
    v_kept = v[:, keep]
    lam = 1.0 / mu_kept
    order = _modulus_order(lam)
    return Spectrum(
        eigenvalues=lam[order],
        matrix_eigenvalues=mu_kept[order],
        vectors=v_kept[:, order],
        floor=floor,
        discarded=int(np.sum(~keep)),
    )


@dataclass(frozen=True)
class EigenfunctionHandle:
    """Node values of one eigenfunction, unit-norm in the grid product."""

    eigenvalue: float
    node_values: np.ndarray
    grid: QuadratureRule
    sign_convention: str

    def __call__(self, x):
        return evaluate(self, x)


def eigenfunction(spectrum: Spectrum, j: int, grid: QuadratureRule) -> EigenfunctionHandle:
    """Handle for the j-th eigenfunction (j counts from 1).

    Node values are v_i / sqrt(w_i), renormalized to exact unit grid norm.
    Sign: phi_j(1) > 0; if phi_j(1) is numerically zero (below 1e-9), the
    node value of largest magnitude is made positive instead.
    """
    if not 1 <= j <= len(spectrum):
        raise ValueError(f"j must be in 1..{len(spectrum)}, got {j}")
    if spectrum.vectors.shape[0] != grid.nodes.size:
        raise ValueError("grid does not match the spectrum's discretization")
    lam = float(spectrum.eigenvalues[j - 1])
    w = grid.weights
    phi = spectrum.vectors[:, j - 1] / np.sqrt(w)
    phi = phi / math.sqrt(float(np.dot(w, phi * phi)))
    at_one = lam * float(np.dot(w * phi, k_eval(1.0, grid.nodes)))
    if abs(at_one) >= 1e-9:
        sign = math.copysign(1.0, at_one)
        tag = "phi(1) > 0"
    else:
        sign = math.copysign(1.0, phi[int(np.argmax(np.abs(phi)))])
        tag = "largest node value > 0 (phi(1) numerically zero)"
    return EigenfunctionHandle(
        eigenvalue=lam, node_values=sign * phi, grid=grid, sign_convention=tag
    )


def evaluate(handle: EigenfunctionHandle, x):
    """Nystrom interpolation lambda * sum_i w_i K(x, x_i) phi(x_i).

    Vectorized over x; returns a float for scalar input.  Exactly zero at
    x = 0 because the kernel row there vanishes identically.
    """
    xa = np.asarray(x, dtype=float)
    coeff = handle.grid.weights * handle.node_values
    vals = handle.eigenvalue * (
        k_eval(xa[..., None], handle.grid.nodes) @ coeff
    )
    if xa.ndim == 0:
        return float(vals)
    return vals


@dataclass(frozen=True)
class K2CrossCheck:
    """Comparison of the iterated-kernel route against the direct route.

    rel_discrepancies[h] compares the (h+1)-th largest matrix eigenvalue of
    the iterated-kernel operator with 1/lambda_{h+1}^2 from the direct
    spectrum.  k2_matrix_eigenvalues holds the full iterated-route matrix
    spectrum (descending), trace_partial_sums the running sums of
    1/lambda_j^2, and hs_norm_sq the grid integral of the exact diagonal.
    """

    rel_discrepancies: np.ndarray
    k2_matrix_eigenvalues: np.ndarray
    trace_partial_sums: np.ndarray
    hs_norm_sq: float
    count: int = field(default=0)


def _assemble_k2(grid: QuadratureRule, kernel_tol: float, threads: int) -> np.ndarray:
    x = grid.nodes
    n = x.size
    ev = K2Evaluator(tol=kernel_tol)
    raw = np.empty((n, n))

    def fill(rows):
        for i in rows:
            xi = float(x[i])
            for k in range(i, n):
                raw[i, k] = k2_closed(xi, float(x[k]), ev)

    # interleave rows so the upper-triangle work per thread is balanced
    row_sets = [np.arange(t, n, threads) for t in range(threads)]
    if threads == 1:
        fill(row_sets[0])
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill, row_sets))
    iu = np.tril_indices(n, -1)
    raw[iu] = raw.T[iu]
    sq = np.sqrt(grid.weights)
    m = sq[:, None] * raw * sq[None, :]
    return 0.5 * (m + m.T)


def cross_validate_k2(
    grid: QuadratureRule,
    count: int = 10,
    spectrum: Spectrum | None = None,
    kernel_tol: float = 1e-7,
    threads: int | None = None,
) -> K2CrossCheck:
    """Eigensolve the iterated-kernel operator and compare routes.

    The iterated kernel is continuous, so its Nystrom eigenvalues converge
    faster than the direct route's; agreement of 1/lambda_j^2 with the
    iterated matrix eigenvalues is therefore a genuine two-route check, not
    a tautology.  A precomputed direct spectrum can be passed to skip the
    direct eigensolve.
    """
    threads = default_threads() if threads is None else max(int(threads), 1)
    if spectrum is None:
        spectrum = eigensolve(assemble(grid, threads=threads))
    m2 = _assemble_k2(grid, kernel_tol, threads)
    mu2, _ = _jacobi_eigen(m2, 1e-12, 100)
    mu2 = np.sort(mu2)[::-1]
    lam = spectrum.eigenvalues
    count = min(count, lam.size, mu2.size)
    inv_sq = 1.0 / lam[:count] ** 2
    rel = np.abs(mu2[:count] - inv_sq) / inv_sq
    hs = float(np.dot(grid.weights, [k2_diag_exact(float(t)) for t in grid.nodes]))
    return K2CrossCheck(
        rel_discrepancies=rel,
        k2_matrix_eigenvalues=mu2,
        trace_partial_sums=np.cumsum(1.0 / lam**2),
        hs_norm_sq=hs,
        count=count,
    )
