#!/usr/bin/env python3
"""
Nystrom matrices for the generalized Neumann kernel N and its companion M.

    N(s,t) = (1/pi) Im( A(s)/A(t) * eta'(t) / (eta(t) - eta(s)) )
    M(s,t) = (1/pi) Re( A(s)/A(t) * eta'(t) / (eta(t) - eta(s)) )

N is continuous; its diagonal is the Taylor limit. On each component M is
split as -(1/2pi) cot((s-t)/2) + M1(s,t) with M1 continuous; the cotangent
part is discretized by the spectral conjugation matrix.
"""

import logging
from dataclasses import dataclass
from typing import Iterator, Tuple

import numpy as np

from core.errors import KernelError
from core.geometry import DomainGeometry

logger = logging.getLogger(__name__)

ROW_CHUNK: int = 512


@dataclass(frozen=True)
class CoefficientA:
    """A(t) and A'(t) sampled over all nodes of J."""

    values: np.ndarray
    derivs: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=complex)
        derivs = np.asarray(self.derivs, dtype=complex)
        if values.shape != derivs.shape:
            raise KernelError("A and A' must have the same shape")
        if np.any(values == 0):
            raise KernelError("A vanishes at a node", {"nodes": np.flatnonzero(values == 0)[:10].tolist()})
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "derivs", derivs)


@dataclass(frozen=True)
class KernelMatrices:
    """Nystrom matrices, quadrature weights included: (N mu)(s_i) ~ sum_j N[i, j] mu_j."""

    N: np.ndarray
    M: np.ndarray

    @property
    def size(self) -> int:
        return int(self.N.shape[0])


def conjugation_matrix(n: int) -> np.ndarray:
    """
    Discrete conjugation operator on n equispaced nodes (n even).

    Fourier multiplier -i*sgn(k) for |k| < n/2, zero on the mean and on the
    Nyquist mode. In closed form the entries are
    (1/n) * (1 - (-1)^(i-j)) * cot((t_i - t_j)/2) off the diagonal, 0 on it.
    """
    if n <= 0 or n % 2 != 0:
        raise KernelError(f"conjugation matrix needs an even node count, got {n}", {"n": n})
    m = np.arange(n)
    lag = (m[:, None] - m[None, :]) % n
    odd = (lag % 2) == 1
    out = np.zeros((n, n))
    out[odd] = (2.0 / n) / np.tan(np.pi * lag[odd] / n)
    return out


def conjugate(values: np.ndarray) -> np.ndarray:
    """Apply the conjugation multiplier via FFT (same operator as conjugation_matrix)."""
    values = np.asarray(values, dtype=float)
    n = values.shape[-1]
    if n % 2 != 0:
        raise KernelError(f"conjugation needs an even node count, got {n}", {"n": n})
    k = np.fft.fftfreq(n, d=1.0 / n)
    mult = -1j * np.sign(k)
    mult[n // 2] = 0.0
    return np.real(np.fft.ifft(mult * np.fft.fft(values, axis=-1), axis=-1))


def _check_layout(domain: DomainGeometry, A: CoefficientA) -> None:
    if A.values.shape != (domain.total_nodes,):
        raise KernelError(
            "coefficient A does not match the domain node layout",
            {"expected": domain.total_nodes, "got": list(A.values.shape)},
        )


def _row_blocks(total: int, chunk: int = ROW_CHUNK) -> Iterator[slice]:
    for lo in range(0, total, chunk):
        yield slice(lo, min(lo + chunk, total))


def _kernel_rows(domain: DomainGeometry, A: CoefficientA, rows: slice) -> np.ndarray:
    """A(s)/A(t) * eta'(t)/(eta(t) - eta(s)) for s in rows; diagonal entries set to 0."""
    eta = domain.nodes
    d1 = domain.first_derivs
    diff = eta[None, :] - eta[rows, None]
    idx = np.arange(rows.start, rows.stop)
    diff[idx - rows.start, idx] = 1.0
    block = (A.values[rows, None] / A.values[None, :]) * d1[None, :] / diff
    block[idx - rows.start, idx] = 0.0
    return block


def _diagonal_limits(domain: DomainGeometry, A: CoefficientA) -> np.ndarray:
    """eta''/(2 eta') - A'/A, the finite part of the kernel on the diagonal (0 at corner nodes)."""
    d1 = domain.first_derivs
    corner = domain.corner_mask
    safe = np.where(corner, 1.0, d1)
    limit = domain.second_derivs / (2.0 * safe) - A.derivs / A.values
    return np.where(corner, 0.0, limit)


def assemble_N(domain: DomainGeometry, A: CoefficientA) -> np.ndarray:
    """
    Nystrom matrix of the generalized Neumann kernel (trapezoidal weights 2*pi/n).

    Args:
        domain: boundary geometry
        A: coefficient sampled on the same nodes

    Returns:
        real (ell+1)n x (ell+1)n matrix
    """
    _check_layout(domain, A)
    weight = 2.0 * np.pi / domain.n
    total = domain.total_nodes
    out = np.empty((total, total))
    for rows in _row_blocks(total):
        out[rows] = np.imag(_kernel_rows(domain, A, rows)) * (weight / np.pi)
    diag = np.imag(_diagonal_limits(domain, A)) * (weight / np.pi)
    out[np.diag_indices(total)] = diag
    return out


def _cotangent_rows(domain: DomainGeometry, rows: slice) -> np.ndarray:
    """(1/2pi) cot((s-t)/2) on same-component pairs for s in rows, 0 elsewhere and on the diagonal."""
    n = domain.n
    comp = domain.component_ids
    params = domain.params
    total = domain.total_nodes
    idx = np.arange(rows.start, rows.stop)
    same = comp[idx, None] == comp[None, :]
    lag = (idx[:, None] % n) - (np.arange(total)[None, :] % n)
    same &= lag != 0
    out = np.zeros((idx.size, total))
    half = 0.5 * (params[idx, None] - params[None, :])
    out[same] = 1.0 / (2.0 * np.pi * np.tan(np.broadcast_to(half, out.shape)[same]))
    return out


def assemble_M(domain: DomainGeometry, A: CoefficientA) -> np.ndarray:
    """
    Nystrom matrix of the companion kernel M.

    Blocks between different components use the plain trapezoidal rule. On
    each diagonal block, M1 = M + (1/2pi) cot((s-t)/2) is continuous and uses
    the trapezoidal rule with the Taylor limit on the diagonal; the cotangent
    part -(1/2pi) cot((s-t)/2) becomes minus the conjugation matrix.

    Returns:
        real (ell+1)n x (ell+1)n matrix
    """
    _check_layout(domain, A)
    n = domain.n
    if n % 2 != 0:
        raise KernelError(f"M needs an even node count per component, got {n}", {"n": n})
    weight = 2.0 * np.pi / n
    total = domain.total_nodes
    out = np.empty((total, total))
    for rows in _row_blocks(total):
        m_rows = np.real(_kernel_rows(domain, A, rows)) / np.pi
        out[rows] = (m_rows + _cotangent_rows(domain, rows)) * weight

    diag = np.real(_diagonal_limits(domain, A)) * (weight / np.pi)
    out[np.diag_indices(total)] = diag

    conj = conjugation_matrix(n)
    for k in range(domain.ell + 1):
        block = domain.component_slice(k)
        out[block, block] -= conj
    return out


def assemble_kernels(domain: DomainGeometry, A: CoefficientA) -> KernelMatrices:
    N = assemble_N(domain, A)
    M = assemble_M(domain, A)
    logger.debug("📊 kernels assembled size=%d |N|max=%.3e", N.shape[0], float(np.max(np.abs(N))))
    return KernelMatrices(N=N, M=M)


def apply_operator(matrix: np.ndarray, vector: np.ndarray) -> np.ndarray:
    """Matrix-vector product; the only operation the iterative solver needs."""
    matrix = np.asarray(matrix)
    vector = np.asarray(vector)
    if matrix.ndim != 2 or vector.ndim != 1 or matrix.shape[1] != vector.shape[0]:
        raise KernelError(
            "operator and vector dimensions do not match",
            {"matrix": list(matrix.shape), "vector": list(vector.shape)},
        )
    return matrix @ vector


def kernel_pair(A_s: complex, A_t: complex, eta_s: complex, eta_t: complex, etap_t: complex) -> Tuple[float, float]:
    """Pointwise (N(s,t), M(s,t)) for s != t."""
    value = (A_s / A_t) * etap_t / (eta_t - eta_s)
    return float(np.imag(value) / np.pi), float(np.real(value) / np.pi)


def kernel_diagonal(A: complex, Ap: complex, etap: complex, etapp: complex) -> Tuple[float, float]:
    """Continuous limits (N(t,t), M1(t,t))."""
    value = etapp / (2.0 * etap) - Ap / A
    return float(np.imag(value) / np.pi), float(np.real(value) / np.pi)
