'''
Module with Monte Carlo simulations used to check the expected value identities of
misclassified regressions and the classical attenuation factor

Replicate r of a run with seed s uses the stream numpy.random.default_rng([s, r]),
so results do not depend on how replicates are split across workers
'''
from dataclasses import dataclass

import numpy
from joblib import Parallel, delayed

from pra.logging.log_store import LogStore
from pra.stats             import regress
from pra.misclass.flows    import ConfusionMatrix
from pra.misclass.theory   import DimensionMismatch

log = LogStore.add_logger('pra:misclass:monte_carlo')

BATCH_SIZE = 1000
#------------------------------------------
@dataclass(frozen=True)
class MonteCarloResult:
    '''
    Moments over replicates of the proxy estimator, the predicted counts and the predicted signal mass

    Replicates where some predicted class is empty are skipped, only counted
    '''
    mean           : numpy.ndarray
    variance       : numpy.ndarray
    std_error      : numpy.ndarray
    count_mean     : numpy.ndarray
    count_se       : numpy.ndarray
    mass_mean      : numpy.ndarray
    mass_se        : numpy.ndarray
    nreplicate     : int
    nskipped       : int
#------------------------------------------
@dataclass(frozen=True)
class AttenuationResult:
    '''
    Slope of y on the noisy regressor, with its standard error
    '''
    slope     : float
    std_error : float
    ndraw     : int
#------------------------------------------
def sample_flows(mat : numpy.ndarray, n : numpy.ndarray, rng : numpy.random.Generator) -> numpy.ndarray:
    '''
    Sends each member of true class k to class j with probability C[j][k]
    Returns flows matrix, entry [j][k] counts members of k predicted as j
    '''
    ncat  = mat.shape[0]
    flows = numpy.zeros((ncat, ncat), dtype=numpy.int64)
    for icat in range(ncat):
        flows[:, icat] = rng.multinomial(int(n[icat]), mat[:, icat])

    return flows
#------------------------------------------
def _run_replicate(mat      : numpy.ndarray,
                   n        : numpy.ndarray,
                   beta     : numpy.ndarray,
                   noise_sd : float,
                   seed     : int,
                   irep     : int) -> tuple[numpy.ndarray, numpy.ndarray, numpy.ndarray]:
    rng   = numpy.random.default_rng([seed, irep])
    ncat  = mat.shape[0]
    flows = sample_flows(mat, n, rng)

    arr_true = numpy.repeat(numpy.tile(  numpy.arange(ncat), ncat), flows.ravel())
    arr_pred = numpy.repeat(numpy.repeat(numpy.arange(ncat), ncat), flows.ravel())
    arr_y    = beta[arr_true]
    if noise_sd > 0:
        arr_y = arr_y + rng.normal(0, noise_sd, size=arr_y.size)

    arr_cnt  = flows.sum(axis=1).astype(float)
    arr_mas  = numpy.bincount(arr_pred, weights=arr_y, minlength=ncat)
    try:
        fit = regress.fit_cell_means(arr_pred, arr_y, ncat)
    except regress.EmptyCategory:
        return numpy.full(ncat, numpy.nan), arr_cnt, arr_mas

    return fit.coefficients, arr_cnt, arr_mas
#------------------------------------------
def _run_batch(mat, n, beta, noise_sd, seed, l_rep) -> tuple[numpy.ndarray, numpy.ndarray, numpy.ndarray]:
    l_out = [ _run_replicate(mat, n, beta, noise_sd, seed, irep) for irep in l_rep ]
    l_est, l_cnt, l_mas = zip(*l_out)

    return numpy.array(l_est), numpy.array(l_cnt), numpy.array(l_mas)
#------------------------------------------
def _moments(mat : numpy.ndarray) -> tuple[numpy.ndarray, numpy.ndarray, numpy.ndarray]:
    nrow = mat.shape[0]
    mean = mat.mean(axis=0)
    var  = mat.var(axis=0, ddof=1) if nrow > 1 else numpy.zeros(mat.shape[1])

    return mean, var, numpy.sqrt(var / nrow)
#------------------------------------------
def mc_misclassification_oracle(conf       : ConfusionMatrix | numpy.ndarray,
                                n          : numpy.ndarray,
                                beta       : numpy.ndarray,
                                noise_sd   : float,
                                replicates : int,
                                seed       : int,
                                njobs      : int = 1) -> MonteCarloResult:
    '''
    For each replicate: misclassifies the n_k members of each class with the columns of C,
    makes y = beta[true class] + gaussian noise and fits cell means on the predicted classes

    njobs: Number of joblib workers, results are identical for any value
    '''
    mat  = conf.matrix if isinstance(conf, ConfusionMatrix) else ConfusionMatrix(matrix=conf).matrix
    n    = numpy.asarray(n   , dtype=float)
    beta = numpy.asarray(beta, dtype=float)
    if n.shape != (mat.shape[0],) or beta.shape != n.shape:
        raise DimensionMismatch(f'Confusion of size {mat.shape[0]}, counts {n.shape}, effects {beta.shape}')

    if numpy.any(n < 0) or not numpy.all(n == numpy.round(n)):
        raise ValueError(f'Class sizes must be nonnegative integers: {n}')

    if replicates < 1:
        raise ValueError(f'Need at least one replicate, found {replicates}')

    if noise_sd < 0:
        raise ValueError(f'Invalid noise: {noise_sd}')

    l_batch = [ list(range(start, min(start + BATCH_SIZE, replicates))) for start in range(0, replicates, BATCH_SIZE) ]
    log.debug(f'Running {replicates} replicates in {len(l_batch)} batches with {njobs} jobs')

    l_res = Parallel(n_jobs=njobs)(delayed(_run_batch)(mat, n, beta, noise_sd, seed, l_rep) for l_rep in l_batch)

    mat_est = numpy.concatenate([ res[0] for res in l_res ])
    mat_cnt = numpy.concatenate([ res[1] for res in l_res ])
    mat_mas = numpy.concatenate([ res[2] for res in l_res ])

    is_ok   = numpy.all(numpy.isfinite(mat_est), axis=1)
    nskip   = int((~is_ok).sum())
    if nskip > 0:
        log.warning(f'Skipped {nskip}/{replicates} replicates with an empty predicted class')

    if nskip == replicates:
        nan = numpy.full(mat.shape[0], numpy.nan)
        mean, var, err = nan, nan, nan
    else:
        mean, var, err = _moments(mat_est[is_ok])

    cnt_mean, _, cnt_se = _moments(mat_cnt)
    mas_mean, _, mas_se = _moments(mat_mas)

    return MonteCarloResult(
            mean       = mean,
            variance   = var,
            std_error  = err,
            count_mean = cnt_mean,
            count_se   = cnt_se,
            mass_mean  = mas_mean,
            mass_se    = mas_se,
            nreplicate = replicates,
            nskipped   = nskip)
#------------------------------------------
def mc_attenuation_oracle(x_variance     : float,
                          error_variance : float,
                          beta           : float,
                          draws          : int,
                          seed           : int) -> AttenuationResult:
    '''
    Draws x ~ N(0, x_variance), e ~ N(0, error_variance), y = beta x, fits y on [1, x + e]
    Returns slope and its standard error
    '''
    if x_variance <= 0 or error_variance < 0 or draws < 3:
        raise ValueError(f'Invalid inputs: {x_variance}, {error_variance}, {draws}')

    rng   = numpy.random.default_rng(seed)
    arr_x = rng.normal(0, numpy.sqrt(x_variance)    , size=draws)
    arr_e = rng.normal(0, numpy.sqrt(error_variance), size=draws)
    arr_y = beta * arr_x
    arr_w = arr_x + arr_e

    design = numpy.column_stack([numpy.ones(draws), arr_w])
    fit    = regress.fit_ols(design, arr_y, column_names=['intercept', 'slope'])

    arr_c  = arr_w - arr_w.mean()
    err    = numpy.sqrt(fit.residual_variance / (arr_c @ arr_c))

    return AttenuationResult(slope=fit.coefficient('slope'), std_error=float(err), ndraw=draws)
#------------------------------------------
