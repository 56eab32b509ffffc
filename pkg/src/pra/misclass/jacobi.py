'''
Module with the cyclic Jacobi eigenvalue algorithm for small dense symmetric matrices
'''
from dataclasses import dataclass

import numpy

from pra.logging.log_store import LogStore

log = LogStore.add_logger('pra:misclass:jacobi')
#------------------------------------------
class NotConverged(Exception):
    '''
    Raised when the off diagonal norm is still above tolerance after the maximum number of sweeps
    '''
#------------------------------------------
@dataclass(frozen=True)
class EigenDecomposition:
    '''
    Eigenvalues in decreasing order, eigenvectors as columns in the same order
    '''
    eigenvalues  : numpy.ndarray
    eigenvectors : numpy.ndarray
    nsweep       : int
    off_norm     : float
#------------------------------------------
def _off_norm(mat : numpy.ndarray) -> float:
    off = mat - numpy.diag(numpy.diag(mat))

    return float(numpy.sqrt(numpy.sum(off ** 2)))
#------------------------------------------
def _rotate(mat : numpy.ndarray, vec : numpy.ndarray, ip : int, iq : int) -> None:
    '''
    Applies the Givens rotation that zeroes mat[ip, iq], in place
    '''
    a_pq = mat[ip, iq]
    if a_pq == 0:
        return

    theta = (mat[iq, iq] - mat[ip, ip]) / (2 * a_pq)
    sign  = 1.0 if theta >= 0 else -1.0
    tan   = sign / (abs(theta) + numpy.sqrt(theta ** 2 + 1))
    cos   = 1 / numpy.sqrt(tan ** 2 + 1)
    sin   = tan * cos

    col_p = mat[:, ip].copy()
    col_q = mat[:, iq].copy()
    mat[:, ip] = cos * col_p - sin * col_q
    mat[:, iq] = sin * col_p + cos * col_q

    row_p = mat[ip, :].copy()
    row_q = mat[iq, :].copy()
    mat[ip, :] = cos * row_p - sin * row_q
    mat[iq, :] = sin * row_p + cos * row_q

    mat[ip, iq] = 0.0
    mat[iq, ip] = 0.0

    vec_p = vec[:, ip].copy()
    vec_q = vec[:, iq].copy()
    vec[:, ip] = cos * vec_p - sin * vec_q
    vec[:, iq] = sin * vec_p + cos * vec_q
#------------------------------------------
def jacobi_eigen(mat : numpy.ndarray, tol : float = 1e-12, max_sweeps : int = 100) -> EigenDecomposition:
    '''
    Diagonalizes symmetric matrix with cyclic sweeps of Givens rotations

    tol       : Sweeps stop when the Frobenius norm of the off diagonal part is below tol times the norm of the matrix
    max_sweeps: Raise NotConverged after this many sweeps
    '''
    mat = numpy.array(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f'Matrix must be square, found shape {mat.shape}')

    scale = max(float(numpy.abs(mat).max(initial=0)), 1.0)
    if not numpy.allclose(mat, mat.T, rtol=0, atol=1e-9 * scale):
        raise ValueError('Matrix is not symmetric')

    mat  = (mat + mat.T) / 2
    size = mat.shape[0]
    vec  = numpy.eye(size)
    norm = float(numpy.sqrt(numpy.sum(mat ** 2)))

    nsweep = 0
    while _off_norm(mat) > tol * norm:
        if nsweep == max_sweeps:
            raise NotConverged(f'Off diagonal norm {_off_norm(mat):.3e} after {nsweep} sweeps')

        for ip in range(size - 1):
            for iq in range(ip + 1, size):
                _rotate(mat, vec, ip, iq)

        nsweep += 1

    arr_val = numpy.diag(mat).copy()
    arr_ord = numpy.argsort(-arr_val, kind='stable')

    log.debug(f'Jacobi converged after {nsweep} sweeps')

    return EigenDecomposition(
            eigenvalues = arr_val[arr_ord],
            eigenvectors= vec[:, arr_ord],
            nsweep      = nsweep,
            off_norm    = _off_norm(mat))
#------------------------------------------
