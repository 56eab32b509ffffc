'''
Module with the algebra of regressions on misclassified categories:

- Decomposition of the proxy estimator into true effect, bias and noise
- Category wise mixing of the true effects through the flows
- Expected counts, expected signal mass, ratio of expectations estimator and expected bias
- Neutrality and detailed balance checks
- Variance shrinkage of the group effects
- Attenuation for classical, continuous, measurement errors
'''
from dataclasses import dataclass

import numpy

from pra.logging.log_store import LogStore
from pra.stats             import regress
from pra.misclass.flows    import ConfusionMatrix, FlowCounts, EmptyPredictedClass, EmptyTrueClass
from pra.misclass.jacobi   import jacobi_eigen

log = LogStore.add_logger('pra:misclass:theory')

IDENTITY_TOL = 1e-9
NEUTRAL_TOL  = 1e-12
BALANCE_TOL  = 1e-9
JACOBI_TOL   = 1e-12
#------------------------------------------
class DimensionMismatch(Exception):
    '''
    Raised when the confusion matrix, counts and effects have incompatible sizes
    '''
#------------------------------------------
class EmptyExpectedClass(Exception):
    '''
    Raised when the expected number of members predicted into a class is not positive
    '''
#------------------------------------------
@dataclass(frozen=True)
class GroupEffects:
    '''
    Effects of each group, with the group sizes and the derived signal

    signal_mass : n * beta
    beta_bar    : Average effect weighted by group size
    centered    : w = n * beta - beta_bar * n, adds up to zero
    '''
    beta : numpy.ndarray
    n    : numpy.ndarray
    #------------------------------------------
    def __post_init__(self):
        beta = numpy.array(self.beta, dtype=float)
        n    = numpy.array(self.n   , dtype=float)
        if beta.shape != n.shape or beta.ndim != 1:
            raise DimensionMismatch(f'Effects have shape {beta.shape}, counts have shape {n.shape}')

        if n.sum() <= 0:
            raise EmptyTrueClass('Groups have no members')

        object.__setattr__(self, 'beta', beta)
        object.__setattr__(self, 'n'   , n)
    #------------------------------------------
    @property
    def signal_mass(self) -> numpy.ndarray:
        '''
        n * beta, elementwise
        '''
        return self.n * self.beta
    #------------------------------------------
    @property
    def beta_bar(self) -> float:
        '''
        Size weighted mean effect
        '''
        return float(self.signal_mass.sum() / self.n.sum())
    #------------------------------------------
    @property
    def centered(self) -> numpy.ndarray:
        '''
        Centered signal w
        '''
        return self.signal_mass - self.beta_bar * self.n
#------------------------------------------
@dataclass(frozen=True)
class Decomposition:
    '''
    Proxy estimator split as beta_proxy = beta_true + bias_term + noise_term
    '''
    beta_true            : numpy.ndarray
    beta_proxy           : numpy.ndarray
    systematic_component : numpy.ndarray
    bias_term            : numpy.ndarray
    noise_term           : numpy.ndarray
#------------------------------------------
@dataclass(frozen=True)
class NeutralityCheck:
    '''
    Whether the expected class sizes are preserved, with the largest absolute deviation |Cn - n|
    '''
    passed    : bool
    deviation : float
#------------------------------------------
@dataclass(frozen=True)
class BalanceCheck:
    '''
    Whether expected flows between every pair of classes are equal, and whether the similarity transform is symmetric
    '''
    passed    : bool
    violation : float
    symmetric : bool
    asymmetry : float
#------------------------------------------
@dataclass(frozen=True)
class BiasReport:
    '''
    Expected estimator and bias, with the neutrality check and, when neutral, the neutral form of the bias
    '''
    expected_beta : numpy.ndarray
    bias          : numpy.ndarray
    neutrality    : NeutralityCheck
    neutral_bias  : numpy.ndarray | None
    form_gap      : float | None
#------------------------------------------
@dataclass(frozen=True)
class ShrinkageReport:
    '''
    Spread of the group effects before and after misclassification, in the size weighted norm
    '''
    ss_true           : float
    ss_proxy          : float
    similarity_matrix : numpy.ndarray
    eigenvalues       : numpy.ndarray | None
    neutral           : bool
    reversible        : bool
    spectrum_ok       : bool | None
    #------------------------------------------
    @property
    def shrinks(self) -> bool:
        '''
        True if the proxy spread does not exceed the true one, up to a relative 1e-9
        '''
        return self.ss_proxy <= self.ss_true + IDENTITY_TOL * self.ss_true
#------------------------------------------
def _as_matrix(conf : ConfusionMatrix | numpy.ndarray) -> numpy.ndarray:
    if isinstance(conf, ConfusionMatrix):
        return conf.matrix

    return ConfusionMatrix(matrix=conf).matrix
#------------------------------------------
def _check_sizes(mat : numpy.ndarray, *l_vec : numpy.ndarray) -> list[numpy.ndarray]:
    l_out = []
    for vec in l_vec:
        vec = numpy.asarray(vec, dtype=float)
        if vec.shape != (mat.shape[1],):
            raise DimensionMismatch(f'Expected vector of length {mat.shape[1]}, found shape {vec.shape}')

        l_out.append(vec)

    return l_out
#------------------------------------------
def decompose_proxy_estimator(true_labels  : numpy.ndarray,
                              proxy_labels : numpy.ndarray,
                              y            : numpy.ndarray,
                              ncat         : int | None = None) -> Decomposition:
    '''
    Fits cell means with true and proxy labels. The systematic component is the cell means fit,
    on the proxy labels, of the values fitted with the true labels
    '''
    true_labels  = numpy.asarray(true_labels , dtype=int)
    proxy_labels = numpy.asarray(proxy_labels, dtype=int)
    if ncat is None:
        ncat = int(max(true_labels.max(initial=-1), proxy_labels.max(initial=-1))) + 1

    fit_true  = regress.fit_cell_means(true_labels , y, ncat)
    fit_proxy = regress.fit_cell_means(proxy_labels, y, ncat)
    fit_syst  = regress.fit_cell_means(proxy_labels, fit_true.fitted, ncat)

    beta_true  = fit_true.coefficients
    beta_proxy = fit_proxy.coefficients
    systematic = fit_syst.coefficients

    return Decomposition(
            beta_true           = beta_true,
            beta_proxy          = beta_proxy,
            systematic_component= systematic,
            bias_term           = systematic - beta_true,
            noise_term          = beta_proxy - systematic)
#------------------------------------------
def mixture_coefficients(flows : FlowCounts, beta : numpy.ndarray) -> tuple[numpy.ndarray, numpy.ndarray]:
    '''
    Returns, per predicted class j, the mixture of effects

    ((n_j - n_out_j) beta_j + sum_{k != j} n_{k->j} beta_k) / n_pred_j

    and the bias of each class, mixture - beta
    '''
    beta     = numpy.asarray(beta, dtype=float)
    if beta.shape != (flows.size,):
        raise DimensionMismatch(f'Expected {flows.size} effects, found shape {beta.shape}')

    arr_pred = flows.predicted_counts
    arr_bad, = numpy.where(arr_pred == 0)
    if arr_bad.size > 0:
        raise EmptyPredictedClass(f'No observation predicted as: {flows.class_labels()[int(arr_bad[0])]}')

    mat      = flows.matrix.astype(float)
    arr_stay = (flows.true_counts - flows.out_flows) * beta
    arr_in   = mat @ beta - numpy.diag(mat) * beta
    arr_mix  = (arr_stay + arr_in) / arr_pred

    return arr_mix, arr_mix - beta
#------------------------------------------
def expected_counts(conf : ConfusionMatrix | numpy.ndarray, n : numpy.ndarray) -> numpy.ndarray:
    '''
    Expected predicted class sizes, Cn
    '''
    mat    = _as_matrix(conf)
    [n]    = _check_sizes(mat, n)

    return mat @ n
#------------------------------------------
def expected_signal_mass(conf : ConfusionMatrix | numpy.ndarray, n : numpy.ndarray, beta : numpy.ndarray) -> numpy.ndarray:
    '''
    Expected sum of the effects over the members of each predicted class, C(n * beta)
    '''
    mat       = _as_matrix(conf)
    n, beta   = _check_sizes(mat, n, beta)

    return mat @ (n * beta)
#------------------------------------------
def roe_expected_beta(conf : ConfusionMatrix | numpy.ndarray, n : numpy.ndarray, beta : numpy.ndarray) -> numpy.ndarray:
    '''
    Ratio of expectations approximation to the expected proxy estimator, diag(Cn)^-1 C (n * beta)
    '''
    arr_cnt = expected_counts(conf, n)
    arr_bad,= numpy.where(arr_cnt <= 0)
    if arr_bad.size > 0:
        raise EmptyExpectedClass(f'Expected size of class {int(arr_bad[0])} is {arr_cnt[arr_bad[0]]}')

    return expected_signal_mass(conf, n, beta) / arr_cnt
#------------------------------------------
def neutral_form_bias(conf : ConfusionMatrix | numpy.ndarray, n : numpy.ndarray, beta : numpy.ndarray) -> numpy.ndarray:
    '''
    Bias written as the balance of inflows and outflows, diag(Cn)^-1 (I - C)(n * beta)
    '''
    mat     = _as_matrix(conf)
    n, beta = _check_sizes(mat, n, beta)
    arr_cnt = mat @ n
    if numpy.any(arr_cnt <= 0):
        raise EmptyExpectedClass('Expected class size is not positive')

    return (numpy.eye(mat.shape[0]) - mat) @ (n * beta) / arr_cnt
#------------------------------------------
def check_neutrality(conf : ConfusionMatrix | numpy.ndarray, n : numpy.ndarray, tol : float = NEUTRAL_TOL) -> NeutralityCheck:
    '''
    Passes if |(Cn)_j - n_j| <= tol * n_j for every class
    '''
    mat     = _as_matrix(conf)
    [n]     = _check_sizes(mat, n)
    arr_dev = numpy.abs(mat @ n - n)

    return NeutralityCheck(passed=bool(numpy.all(arr_dev <= tol * n)), deviation=float(arr_dev.max(initial=0)))
#------------------------------------------
def bias_report(conf     : ConfusionMatrix | numpy.ndarray,
                n        : numpy.ndarray,
                beta     : numpy.ndarray,
                tol      : float = NEUTRAL_TOL,
                tol_form : float = IDENTITY_TOL) -> BiasReport:
    '''
    Expected estimator and bias, when the confusion is neutral the bias is also evaluated in its neutral form
    and both forms are compared
    '''
    arr_exp  = roe_expected_beta(conf, n, beta)
    arr_bias = numpy.asarray(beta, dtype=float) - arr_exp
    neutral  = check_neutrality(conf, n, tol)

    if not neutral.passed:
        log.info(f'Confusion is not neutral, largest deviation: {neutral.deviation:.3e}')
        return BiasReport(expected_beta=arr_exp, bias=arr_bias, neutrality=neutral, neutral_bias=None, form_gap=None)

    arr_ntr = neutral_form_bias(conf, n, beta)
    gap     = float(numpy.abs(arr_ntr - arr_bias).max(initial=0))
    if gap > tol_form * max(1.0, float(numpy.abs(arr_bias).max(initial=0))):
        log.warning(f'General and neutral forms of the bias differ by {gap:.3e}')

    return BiasReport(expected_beta=arr_exp, bias=arr_bias, neutrality=neutral, neutral_bias=arr_ntr, form_gap=gap)
#------------------------------------------
def expected_bias(conf : ConfusionMatrix | numpy.ndarray, n : numpy.ndarray, beta : numpy.ndarray) -> numpy.ndarray:
    '''
    Returns beta minus the ratio of expectations estimator
    '''
    return bias_report(conf, n, beta).bias
#------------------------------------------
def similarity_matrix(conf : ConfusionMatrix | numpy.ndarray, n : numpy.ndarray) -> numpy.ndarray:
    '''
    M = diag(n)^-1/2 C diag(n)^1/2, symmetric if and only if C is reversible with respect to n
    '''
    mat = _as_matrix(conf)
    [n] = _check_sizes(mat, n)
    if numpy.any(n <= 0):
        raise EmptyTrueClass(f'Class sizes must be positive, found {n}')

    arr_sq = numpy.sqrt(n)

    return mat * arr_sq[numpy.newaxis, :] / arr_sq[:, numpy.newaxis]
#------------------------------------------
def check_detailed_balance(conf : ConfusionMatrix | numpy.ndarray, n : numpy.ndarray, tol : float = BALANCE_TOL) -> BalanceCheck:
    '''
    Passes if |C_jk n_k - C_kj n_j| <= tol * max(n) for every pair.

    The symmetry of M is checked independently, on the same scale: |M_jk - M_kj| sqrt(n_j n_k) <= tol * max(n).
    The asymmetry reported is the largest |M_jk - M_kj|
    '''
    mat     = _as_matrix(conf)
    [n]     = _check_sizes(mat, n)
    mat_flw = mat * n[numpy.newaxis, :]
    viol    = float(numpy.abs(mat_flw - mat_flw.T).max(initial=0))

    mat_sim = similarity_matrix(mat, n)
    mat_asy = numpy.abs(mat_sim - mat_sim.T)
    arr_sq  = numpy.sqrt(n)
    asym_sc = float((mat_asy * numpy.outer(arr_sq, arr_sq)).max(initial=0))
    bound   = tol * float(n.max())

    return BalanceCheck(
            passed   = viol <= bound,
            violation= viol,
            symmetric= asym_sc <= bound,
            asymmetry= float(mat_asy.max(initial=0)))
#------------------------------------------
def weighted_norm(vec : numpy.ndarray, n : numpy.ndarray) -> float:
    '''
    Returns u^T diag(n)^-1 u
    '''
    vec = numpy.asarray(vec, dtype=float)
    n   = numpy.asarray(n  , dtype=float)

    return float(numpy.sum(vec ** 2 / n))
#------------------------------------------
def shrinkage_report(conf        : ConfusionMatrix | numpy.ndarray,
                     n           : numpy.ndarray,
                     beta        : numpy.ndarray,
                     tol_neutral : float = NEUTRAL_TOL,
                     tol_balance : float = BALANCE_TOL,
                     tol_jacobi  : float = JACOBI_TOL) -> ShrinkageReport:
    '''
    Compares the weighted spread of the centered signal w before, ||w||_n, and after, ||Cw||_n, misclassification.
    When C is reversible, the spectrum of M is computed and checked to lie in [-1, 1] with largest eigenvalue 1
    '''
    mat     = _as_matrix(conf)
    n, beta = _check_sizes(mat, n, beta)
    if numpy.any(n <= 0):
        raise EmptyTrueClass(f'Class sizes must be positive, found {n}')

    effects = GroupEffects(beta=beta, n=n)
    arr_w   = effects.centered
    ss_true = weighted_norm(arr_w, n)
    ss_prox = weighted_norm(mat @ arr_w, n)

    mat_sim = similarity_matrix(mat, n)
    neutral = check_neutrality(mat, n, tol_neutral).passed
    balance = check_detailed_balance(mat, n, tol_balance)

    arr_eig = None
    spec_ok = None
    if balance.passed:
        arr_eig = jacobi_eigen((mat_sim + mat_sim.T) / 2, tol=tol_jacobi).eigenvalues
        spec_ok = bool(numpy.all(numpy.abs(arr_eig) <= 1 + IDENTITY_TOL) and abs(arr_eig[0] - 1) <= IDENTITY_TOL)
        if not spec_ok:
            log.warning(f'Eigenvalues outside expected range: {arr_eig}')

    log.debug(f'Spread: true={ss_true:.6e}, proxy={ss_prox:.6e}')

    return ShrinkageReport(
            ss_true          = ss_true,
            ss_proxy         = ss_prox,
            similarity_matrix= mat_sim,
            eigenvalues      = arr_eig,
            neutral          = neutral,
            reversible       = balance.passed,
            spectrum_ok      = spec_ok)
#------------------------------------------
def classical_attenuation_matrix(xtx   : numpy.ndarray,
                                 sigma : numpy.ndarray,
                                 beta  : numpy.ndarray) -> tuple[numpy.ndarray, numpy.ndarray]:
    '''
    Regressors measured with additive errors of covariance sigma (summed over observations)

    Returns expected estimator (X^T X + sigma)^-1 X^T X beta and attenuation bias (X^T X + sigma)^-1 sigma beta
    '''
    xtx   = numpy.atleast_2d(numpy.asarray(xtx  , dtype=float))
    sigma = numpy.atleast_2d(numpy.asarray(sigma, dtype=float))
    beta  = numpy.atleast_1d(numpy.asarray(beta , dtype=float))
    if xtx.shape != sigma.shape or xtx.shape != (beta.size, beta.size):
        raise DimensionMismatch(f'Shapes do not match: {xtx.shape}, {sigma.shape}, {beta.shape}')

    mat_tot = xtx + sigma
    arr_exp = numpy.linalg.solve(mat_tot, xtx @ beta)
    arr_bia = numpy.linalg.solve(mat_tot, sigma @ beta)

    return arr_exp, arr_bia
#------------------------------------------
def classical_attenuation_baseline(x_variance : float, error_variance : float, beta : float) -> float:
    '''
    Expected slope when a single regressor of variance x_variance is measured with noise of variance error_variance
    '''
    if x_variance <= 0 or error_variance < 0:
        raise ValueError(f'Invalid variances: {x_variance}, {error_variance}')

    arr_exp, _ = classical_attenuation_matrix(x_variance, error_variance, beta)

    return float(arr_exp[0])
#------------------------------------------
