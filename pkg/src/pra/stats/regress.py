'''
Module with least squares fits for designs built from a categorical regressor,
either cell means (one dummy per category, no intercept) or intercept + reference coding + controls
'''
from enum        import Enum
from dataclasses import dataclass, field

import numpy
import pandas as pnd
import scipy.linalg as sla

from pra.logging.log_store import LogStore
from pra.synth.records     import AGE_BANDS, SES_NAMES

log = LogStore.add_logger('pra:stats:regress')

RANK_TOL = 1e-10
#------------------------------------------
class EmptyCategory(Exception):
    '''
    Raised when a category has no observations
    '''
    def __init__(self, categories : list[int]):
        self.categories = categories
        super().__init__(f'Categories without observations: {categories}')
#------------------------------------------
class RankDeficient(Exception):
    '''
    Raised when the design matrix does not have full column rank, carries the offending columns
    '''
    def __init__(self, columns : list[int], names : list[str] | None = None):
        self.columns = columns
        self.names   = names

        msg = f'Design is rank deficient, dependent columns: {columns}'
        if names is not None:
            msg += f' ({[ names[icol] for icol in columns ]})'

        super().__init__(msg)
#------------------------------------------
class Coding(str, Enum):
    '''
    How the categorical regressor enters the design
    '''
    CELL_MEANS = 'CELL_MEANS'
    REFERENCE  = 'REFERENCE'
    GENERIC    = 'GENERIC'
#------------------------------------------
@dataclass(frozen=True)
class DesignSpec:
    '''
    Description of a design matrix
    '''
    coding             : Coding
    reference_category : int | None    = None
    control_columns    : tuple[str, ...] = ()
    #------------------------------------------
    def __post_init__(self):
        if self.coding == Coding.REFERENCE and self.reference_category is None:
            raise ValueError('Reference coding needs a reference category')

        if self.coding != Coding.REFERENCE and self.reference_category is not None:
            raise ValueError(f'Reference category only allowed for reference coding, found {self.coding}')

        if self.coding == Coding.CELL_MEANS and len(self.control_columns) > 0:
            raise ValueError('Cell means designs do not take controls')
    #------------------------------------------
    @property
    def intercept(self) -> bool:
        '''
        True if the design has an intercept column
        '''
        return self.coding == Coding.REFERENCE
#------------------------------------------
@dataclass(frozen=True)
class RegressionFit:
    '''
    Result of a least squares fit
    '''
    coefficients      : numpy.ndarray
    fitted            : numpy.ndarray
    residuals         : numpy.ndarray
    residual_variance : float
    design            : DesignSpec
    rss               : float
    column_names      : list[str] = field(default_factory=list)
    #------------------------------------------
    def coefficient(self, name : str) -> float:
        '''
        Returns coefficient of column with given name
        '''
        if name not in self.column_names:
            raise ValueError(f'Column {name} not found among: {self.column_names}')

        return float(self.coefficients[self.column_names.index(name)])
#------------------------------------------
def _residual_variance(rss : float, nobs : int, ncol : int) -> float:
    if nobs > ncol:
        return rss / (nobs - ncol)

    return rss / nobs if nobs > 0 else 0.0
#------------------------------------------
def _check_labels(labels : numpy.ndarray, ncat : int | None) -> tuple[numpy.ndarray, int]:
    labels = numpy.asarray(labels)
    if labels.ndim != 1:
        raise ValueError('Labels are not a vector')

    if labels.size > 0 and not numpy.issubdtype(labels.dtype, numpy.integer):
        if not numpy.all(labels == numpy.round(labels)):
            raise ValueError('Labels are not integer category indices')

    labels = labels.astype(int)
    if ncat is None:
        ncat = int(labels.max()) + 1 if labels.size > 0 else 0

    if labels.size > 0 and (labels.min() < 0 or labels.max() >= ncat):
        raise ValueError(f'Labels outside [0, {ncat})')

    return labels, ncat
#------------------------------------------
def _check_y(y : numpy.ndarray, nobs : int) -> numpy.ndarray:
    y = numpy.asarray(y, dtype=float)
    if y.shape != (nobs,):
        raise ValueError(f'Outcome has shape {y.shape}, expected ({nobs},)')

    return y
#------------------------------------------
def one_hot(labels : numpy.ndarray, ncat : int | None = None) -> numpy.ndarray:
    '''
    Returns (n x ncat) design with a single 1 per row, in the column of the label
    '''
    labels, ncat = _check_labels(labels, ncat)
    mat = numpy.zeros((labels.size, ncat))
    mat[numpy.arange(labels.size), labels] = 1

    return mat
#------------------------------------------
def category_counts(labels : numpy.ndarray, ncat : int | None = None) -> numpy.ndarray:
    '''
    Returns number of observations per category
    '''
    labels, ncat = _check_labels(labels, ncat)

    return numpy.bincount(labels, minlength=ncat)
#------------------------------------------
def fit_cell_means(labels : numpy.ndarray, y : numpy.ndarray, ncat : int | None = None) -> RegressionFit:
    '''
    Fits y on one dummy per category, without intercept. The coefficients are the group means

    labels: Category index of each observation
    ncat  : Number of categories, by default the largest label plus one
    '''
    labels, ncat = _check_labels(labels, ncat)
    y            = _check_y(y, labels.size)

    arr_cnt = numpy.bincount(labels, minlength=ncat)
    l_empty = [ int(icat) for icat in numpy.where(arr_cnt == 0)[0] ]
    if len(l_empty) > 0 or ncat == 0:
        raise EmptyCategory(l_empty)

    arr_sum = numpy.bincount(labels, weights=y, minlength=ncat)
    coef    = arr_sum / arr_cnt
    fitted  = coef[labels]
    resid   = y - fitted
    rss     = float(resid @ resid)

    return RegressionFit(
            coefficients     = coef,
            fitted           = fitted,
            residuals        = resid,
            residual_variance= _residual_variance(rss, labels.size, ncat),
            design           = DesignSpec(coding=Coding.CELL_MEANS),
            rss              = rss,
            column_names     = [ f'cat_{icat}' for icat in range(ncat) ])
#------------------------------------------
def fit_ols(design       : numpy.ndarray,
            y            : numpy.ndarray,
            column_names : list[str] | None = None,
            spec         : DesignSpec | None = None,
            tol          : float = RANK_TOL) -> RegressionFit:
    '''
    Least squares fit through a QR decomposition with column pivoting

    tol: The design is rank deficient when its smallest singular value is below tol times the largest one
    '''
    mat = numpy.asarray(design, dtype=float)
    if mat.ndim != 2 or mat.shape[1] == 0:
        raise ValueError(f'Design must be a matrix with at least one column, found shape {mat.shape}')

    nobs, ncol = mat.shape
    y          = _check_y(y, nobs)
    spec       = DesignSpec(coding=Coding.GENERIC) if spec is None else spec
    names      = [ f'x{icol}' for icol in range(ncol) ] if column_names is None else list(column_names)

    log.debug(f'Fitting design with shape {mat.shape}')

    q_mat, r_mat, arr_piv = sla.qr(mat, mode='economic', pivoting=True)
    arr_sv = sla.svdvals(mat)
    rank   = int(numpy.sum(arr_sv > tol * arr_sv.max())) if arr_sv.max() > 0 else 0
    if rank < ncol:
        l_col = sorted(int(icol) for icol in arr_piv[rank:])
        raise RankDeficient(l_col, names)

    coef_piv      = sla.solve_triangular(r_mat, q_mat.T @ y)
    coef          = numpy.empty(ncol)
    coef[arr_piv] = coef_piv

    fitted = mat @ coef
    resid  = y - fitted
    rss    = float(resid @ resid)

    return RegressionFit(
            coefficients     = coef,
            fitted           = fitted,
            residuals        = resid,
            residual_variance= _residual_variance(rss, nobs, ncol),
            design           = spec,
            rss              = rss,
            column_names     = names)
#------------------------------------------
def reference_design(labels         : numpy.ndarray,
                     ncat           : int,
                     reference      : int,
                     controls       : numpy.ndarray | None = None,
                     control_names  : list[str]     | None = None,
                     category_names : list[str]     | None = None) -> tuple[numpy.ndarray, list[str]]:
    '''
    Builds design with intercept, one dummy per non reference category and control columns

    Returns design matrix and column names
    '''
    labels, ncat = _check_labels(labels, ncat)
    if not 0 <= reference < ncat:
        raise ValueError(f'Invalid reference category {reference} for {ncat} categories')

    l_cat   = [ f'cat_{icat}' for icat in range(ncat) ] if category_names is None else list(category_names)
    mat_hot = one_hot(labels, ncat)
    l_keep  = [ icat for icat in range(ncat) if icat != reference ]

    l_mat   = [numpy.ones((labels.size, 1)), mat_hot[:, l_keep]]
    l_name  = ['intercept'] + [ l_cat[icat] for icat in l_keep ]

    if controls is not None and numpy.size(controls) > 0:
        controls = numpy.asarray(controls, dtype=float).reshape(labels.size, -1)
        names    = [ f'control_{icol}' for icol in range(controls.shape[1]) ] if control_names is None else list(control_names)
        if len(names) != controls.shape[1]:
            raise ValueError(f'Got {len(names)} names for {controls.shape[1]} controls')

        l_mat.append(controls)
        l_name += names

    return numpy.hstack(l_mat), l_name
#------------------------------------------
def fit_reference(labels        : numpy.ndarray,
                  y             : numpy.ndarray,
                  reference     : int,
                  ncat          : int | None          = None,
                  controls      : numpy.ndarray | None = None,
                  control_names : list[str] | None     = None,
                  tol           : float                = RANK_TOL) -> RegressionFit:
    '''
    Fits y on intercept, reference coded categories and controls
    '''
    labels, ncat = _check_labels(labels, ncat)
    mat, l_name  = reference_design(labels, ncat, reference, controls, control_names)
    spec         = DesignSpec(
            coding            = Coding.REFERENCE,
            reference_category= reference,
            control_columns   = tuple(l_name[ncat:]))

    return fit_ols(mat, y, column_names=l_name, spec=spec, tol=tol)
#------------------------------------------
def reference_coefficients(fit : RegressionFit, ncat : int) -> dict[int, float]:
    '''
    Takes fit from fit_reference
    Returns map between non reference category and its coefficient
    '''
    reference = fit.design.reference_category
    if reference is None:
        raise ValueError('Fit does not use reference coding')

    l_keep = [ icat for icat in range(ncat) if icat != reference ]

    return { icat : float(fit.coefficients[1 + ipos]) for ipos, icat in enumerate(l_keep) }
#------------------------------------------
def adjusted_disparities(labels        : numpy.ndarray,
                         controls      : numpy.ndarray | None,
                         y             : numpy.ndarray,
                         reference     : int,
                         ncat          : int | None      = None,
                         control_names : list[str] | None = None,
                         tol           : float            = RANK_TOL) -> dict[int, float]:
    '''
    Returns, for each non reference category, its gap with respect to the reference,
    after adjusting for the controls
    '''
    labels, ncat = _check_labels(labels, ncat)
    fit = fit_reference(labels, y, reference, ncat=ncat, controls=controls, control_names=control_names, tol=tol)

    return reference_coefficients(fit, ncat)
#------------------------------------------
def control_matrix(df : pnd.DataFrame, kind : str) -> tuple[numpy.ndarray, list[str]]:
    '''
    Builds control columns from a record frame

    kind: none, demo (age band dummies and gender dummy) or demo+ses (demo plus MEDFAMINC, PPOV, PUNEMP)

    Age bands and genders absent from the frame get no column, the first present band and F are the references
    '''
    if kind not in ['none', 'demo', 'demo+ses']:
        raise ValueError(f'Invalid control set: {kind}')

    nobs = len(df)
    if kind == 'none':
        return numpy.zeros((nobs, 0)), []

    l_band = [ band for band in AGE_BANDS if (df['age_range'] == band).any() ]
    l_col  = []
    l_name = []
    for band in l_band[1:]:
        l_col.append((df['age_range'] == band).to_numpy(dtype=float))
        l_name.append(f'age_{band}')

    arr_male = (df['gender_code'] == 'M').to_numpy(dtype=float)
    if 0 < arr_male.sum() < nobs:
        l_col.append(arr_male)
        l_name.append('gender_M')

    if kind == 'demo+ses':
        for name in SES_NAMES:
            l_col.append(df[name].to_numpy(dtype=float))
            l_name.append(name)

    if len(l_col) == 0:
        return numpy.zeros((nobs, 0)), []

    return numpy.column_stack(l_col), l_name
#------------------------------------------
