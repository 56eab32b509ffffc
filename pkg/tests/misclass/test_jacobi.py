'''
Module with tests for the Jacobi eigenvalue algorithm
'''
import numpy
import pytest

from pra.logging.log_store import LogStore
from pra.misclass          import jacobi

log = LogStore.add_logger('pra:tests:test_jacobi')
# ----------------------------------------------
@pytest.fixture(scope='module', autouse=True)
def _initialize():
    LogStore.set_level('pra:misclass:jacobi', 10)
# ----------------------------------------------
def test_two_by_two():
    '''
    Symmetric 2x2 confusion with 10% swaps has eigenvalues 1 and 0.8
    '''
    dec = jacobi.jacobi_eigen(numpy.array([[0.9, 0.1], [0.1, 0.9]]))

    assert numpy.allclose(dec.eigenvalues, [1.0, 0.8], rtol=0, atol=1e-12)
    assert dec.off_norm < 1e-12
# ----------------------------------------------
def test_diagonal():
    '''
    Diagonal matrices need no sweep and come back sorted
    '''
    dec = jacobi.jacobi_eigen(numpy.diag([1.0, 3.0, 2.0]))

    assert dec.nsweep == 0
    assert numpy.array_equal(dec.eigenvalues, [3.0, 2.0, 1.0])
    assert numpy.array_equal(numpy.abs(dec.eigenvectors[:, 0]), [0, 1, 0])
# ----------------------------------------------
@pytest.mark.parametrize('size', [2, 3, 5, 8])
def test_random_symmetric(size : int):
    '''
    Eigenvalues agree with LAPACK, eigenvectors are orthonormal and diagonalize the matrix
    '''
    rng = numpy.random.default_rng(size)
    for _ in range(20):
        mat = rng.normal(size=(size, size))
        mat = mat + mat.T
        dec = jacobi.jacobi_eigen(mat)
        vec = dec.eigenvectors

        assert numpy.allclose(dec.eigenvalues, numpy.linalg.eigvalsh(mat)[::-1], rtol=0, atol=1e-10)
        assert numpy.allclose(vec.T @ vec, numpy.eye(size), rtol=0, atol=1e-10)
        assert numpy.allclose(mat @ vec, vec * dec.eigenvalues, rtol=0, atol=1e-9)
# ----------------------------------------------
def test_not_symmetric():
    '''
    Only symmetric matrices are accepted
    '''
    with pytest.raises(ValueError):
        jacobi.jacobi_eigen(numpy.array([[1.0, 2.0], [0.0, 1.0]]))

    with pytest.raises(ValueError):
        jacobi.jacobi_eigen(numpy.ones(3))
# ----------------------------------------------
def test_not_converged():
    '''
    Running out of sweeps is an error
    '''
    with pytest.raises(jacobi.NotConverged):
        jacobi.jacobi_eigen(numpy.array([[2.0, 1.0], [1.0, 2.0]]), max_sweeps=0)
