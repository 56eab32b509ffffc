'''
Module with the two audit experiments run on a population with self reported and proxy races

Experiment 1: Premiums regressed on reported race, the fitted values of that model regressed on proxy race
              (mixing of the true effects) and premiums regressed on proxy race
Experiment 2: Region level regressions of the misclassification displacement on the deviation of the region's
              composition from the statewide one, and of the summed pricing residuals on both
'''
from dataclasses import dataclass, field

import numpy
import pandas as pnd

from pra.logging.log_store import LogStore
from pra.stats             import regress
from pra.stats.regress     import RANK_TOL, RegressionFit
from pra.proxy.tables      import RaceCategorySet
from pra.synth.records     import SES_NAMES
from pra.misclass          import flows  as mfl
from pra.misclass          import theory as mth

log = LogStore.add_logger('pra:audit:experiments')

MIN_CELLS = 3
#------------------------------------------
class AlignmentError(Exception):
    '''
    Raised when labels, outcomes or fitted values do not belong to the same observations
    '''
#------------------------------------------
class TooFewCells(Exception):
    '''
    Raised when a race has fewer region cells than needed for the region level regressions
    '''
#------------------------------------------
@dataclass(frozen=True)
class Exp1Report:
    '''
    Coefficients of the reported race, mixing and proxy race models, one entry per category.
    Adjusted variants hold the gaps with respect to the reference category, after controls
    '''
    races             : RaceCategorySet
    reference         : int
    reported          : numpy.ndarray
    mixing            : numpy.ndarray
    proxy             : numpy.ndarray
    control           : str                     = 'none'
    adjusted_reported : dict[int, float] | None = None
    adjusted_proxy    : dict[int, float] | None = None
    nobs              : int                     = 0
    #------------------------------------------
    def to_frame(self) -> pnd.DataFrame:
        '''
        Long format report, columns: model, control, category, coefficient
        '''
        l_row = []
        for model, arr_coef in [('reported', self.reported), ('mixing', self.mixing), ('proxy', self.proxy)]:
            for icat, label in enumerate(self.races.labels):
                l_row.append((model, 'none', label, float(arr_coef[icat])))

        for model, d_coef in [('reported_adjusted', self.adjusted_reported), ('proxy_adjusted', self.adjusted_proxy)]:
            if d_coef is None:
                continue

            for icat, value in d_coef.items():
                l_row.append((model, self.control, self.races.labels[icat], value))

        return pnd.DataFrame(l_row, columns=['model', 'control', 'category', 'coefficient'])
#------------------------------------------
@dataclass(frozen=True)
class Exp2Fit:
    '''
    Region level fits for one race and one control set

    alpha_0, alpha_1 : Intercept and slope of displacement on deviation
    gamma_d, gamma_e : Slopes of summed residuals on deviation and on the displacement residual eta, gamma_e is NaN when eta vanishes
    '''
    race          : str
    variant       : str
    ncell         : int
    alpha_0       : float
    alpha_1       : float
    alpha_se      : float
    gamma_d       : float
    gamma_e       : float
    gamma_se      : float
    gamma_0       : float | None       = None
    ses_coef      : dict[str, float]   = field(default_factory=dict)
    eta           : numpy.ndarray | None = None
    xi            : numpy.ndarray | None = None
#------------------------------------------
@dataclass(frozen=True)
class Exp2Report:
    '''
    Collection of region level fits
    '''
    fits : list[Exp2Fit]
    #------------------------------------------
    def get(self, race : str, variant : str) -> Exp2Fit:
        '''
        Returns fit for race and variant (baseline or ses)
        '''
        for fit in self.fits:
            if fit.race == race and fit.variant == variant:
                return fit

        raise ValueError(f'No fit for {race}/{variant}')
    #------------------------------------------
    def to_frame(self) -> pnd.DataFrame:
        '''
        Long format report, columns: race, variant, coefficient, value
        '''
        l_row = []
        for fit in self.fits:
            d_val = {
                    'alpha_0'  : fit.alpha_0,
                    'alpha_1'  : fit.alpha_1,
                    'alpha_se' : fit.alpha_se,
                    'gamma_d'  : fit.gamma_d,
                    'gamma_e'  : fit.gamma_e,
                    'gamma_se' : fit.gamma_se}
            if fit.gamma_0 is not None:
                d_val['gamma_0'] = fit.gamma_0

            d_val.update({ f'alpha_{name}' : value for name, value in fit.ses_coef.items() })
            d_val['ncell'] = fit.ncell

            for name, value in d_val.items():
                l_row.append((fit.race, fit.variant, name, float(value)))

        return pnd.DataFrame(l_row, columns=['race', 'variant', 'coefficient', 'value'])
#------------------------------------------
def _check_aligned(nobs : int, **d_arr) -> None:
    for name, arr in d_arr.items():
        if len(arr) != nobs:
            raise AlignmentError(f'{name} has {len(arr)} entries, expected {nobs}')
#------------------------------------------
def experiment1(df_rec       : pnd.DataFrame,
                proxy_labels : numpy.ndarray,
                races        : RaceCategorySet,
                reference    : int | None = None,
                control      : str        = 'none',
                tol          : float      = RANK_TOL) -> Exp1Report:
    '''
    Takes records (columns race, average_premium and the control inputs) and proxy race indices

    reference : Index of the reference category of the adjusted fits, by default the largest reported group
    control   : Control set of the adjusted fits, none, demo or demo+ses. With none, no adjusted fit is made
    tol       : Relative singular value below which the design of the adjusted fits is rank deficient
    '''
    proxy_labels = numpy.asarray(proxy_labels, dtype=int)
    _check_aligned(len(df_rec), proxy_labels=proxy_labels)

    ncat     = races.size
    arr_true = df_rec['race'].to_numpy(dtype=int)
    arr_y    = df_rec['average_premium'].to_numpy(dtype=float)

    fit_rep  = regress.fit_cell_means(arr_true, arr_y, ncat)
    fit_mix  = regress.fit_cell_means(proxy_labels, fit_rep.fitted, ncat)
    fit_prx  = regress.fit_cell_means(proxy_labels, arr_y, ncat)

    if reference is None:
        reference = int(numpy.argmax(numpy.bincount(arr_true, minlength=ncat)))

    adj_rep = None
    adj_prx = None
    if control != 'none':
        mat_ctl, l_name = regress.control_matrix(df_rec, control)
        adj_rep = regress.adjusted_disparities(arr_true    , mat_ctl, arr_y, reference, ncat, l_name, tol=tol)
        adj_prx = regress.adjusted_disparities(proxy_labels, mat_ctl, arr_y, reference, ncat, l_name, tol=tol)

    log.debug(f'Experiment 1 on {len(df_rec)} observations, control: {control}')

    return Exp1Report(
            races            = races,
            reference        = reference,
            reported         = fit_rep.coefficients,
            mixing           = fit_mix.coefficients,
            proxy            = fit_prx.coefficients,
            control          = control,
            adjusted_reported= adj_rep,
            adjusted_proxy   = adj_prx,
            nobs             = len(df_rec))
#------------------------------------------
def zip_aggregate(df_rec       : pnd.DataFrame,
                  proxy_labels : numpy.ndarray,
                  reported_fit : RegressionFit,
                  races        : RaceCategorySet) -> pnd.DataFrame:
    '''
    Tabulates, for every region i and race k:

    n_ik   : Members with reported race k
    n_pred : Members with proxy race k
    d      : n_ik - n_i n_k / n, deviation of the region from the statewide composition
    r      : n_ik - n_pred, displacement by the proxy
    eps    : Sum of the residuals of the reported race model over the members with reported race k
    '''
    proxy_labels = numpy.asarray(proxy_labels, dtype=int)
    _check_aligned(len(df_rec), proxy_labels=proxy_labels, residuals=reported_fit.residuals)

    ncat     = races.size
    arr_reg, arr_ireg = numpy.unique(df_rec['region'].to_numpy(dtype=str), return_inverse=True)
    nreg     = arr_reg.size
    arr_true = df_rec['race'].to_numpy(dtype=int)

    mat_n    = numpy.bincount(arr_ireg * ncat + arr_true    , minlength=nreg * ncat).reshape(nreg, ncat)
    mat_prd  = numpy.bincount(arr_ireg * ncat + proxy_labels, minlength=nreg * ncat).reshape(nreg, ncat)
    mat_eps  = numpy.bincount(arr_ireg * ncat + arr_true    , weights=reported_fit.residuals, minlength=nreg * ncat).reshape(nreg, ncat)

    arr_ni   = mat_n.sum(axis=1, keepdims=True)
    arr_nk   = mat_n.sum(axis=0, keepdims=True)
    mat_d    = mat_n - arr_ni * arr_nk / mat_n.sum()

    df = pnd.DataFrame({
        'region'    : numpy.repeat(arr_reg, ncat),
        'race'      : numpy.tile(numpy.array(races.labels, dtype=object), nreg),
        'race_index': numpy.tile(numpy.arange(ncat), nreg),
        'n_i'       : numpy.repeat(arr_ni[:, 0], ncat),
        'n_ik'      : mat_n.ravel(),
        'n_pred'    : mat_prd.ravel(),
        'd'         : mat_d.ravel(),
        'r'         : (mat_n - mat_prd).ravel(),
        'eps'       : mat_eps.ravel()})

    return df
#------------------------------------------
def _fit_race(df_cell   : pnd.DataFrame,
              race      : str,
              variant   : str,
              l_ses     : list[str],
              intercept : bool,
              tol       : float) -> Exp2Fit:
    ncell = len(df_cell)
    if ncell < MIN_CELLS:
        raise TooFewCells(f'Race {race} has {ncell} cells, need at least {MIN_CELLS}')

    arr_d = df_cell['d'].to_numpy(dtype=float)
    arr_r = df_cell['r'].to_numpy(dtype=float)
    arr_e = df_cell['eps'].to_numpy(dtype=float)

    mat_22  = numpy.column_stack([numpy.ones(ncell), arr_d] + [ df_cell[name].to_numpy(dtype=float) for name in l_ses ])
    fit_22  = regress.fit_ols(mat_22, arr_r, column_names=['alpha_0', 'alpha_1'] + l_ses, tol=tol)
    arr_eta = fit_22.residuals

    # eta vanishes when the displacement is explained by the regressors, gamma_e is then undefined
    has_eta = numpy.linalg.norm(arr_eta) > tol * max(1.0, float(numpy.linalg.norm(arr_r)))
    if not has_eta:
        log.warning(f'Displacement of {race} ({variant}) has no unexplained part, gamma_e is not defined')

    l_col   = [arr_d, arr_eta] if has_eta else [arr_d]
    l_name  = ['gamma_d', 'gamma_e'] if has_eta else ['gamma_d']
    if intercept:
        l_col   = [numpy.ones(ncell)] + l_col
        l_name  = ['gamma_0'] + l_name

    fit_23  = regress.fit_ols(numpy.column_stack(l_col), arr_e, column_names=l_name, tol=tol)

    return Exp2Fit(
            race     = race,
            variant  = variant,
            ncell    = ncell,
            alpha_0  = fit_22.coefficient('alpha_0'),
            alpha_1  = fit_22.coefficient('alpha_1'),
            alpha_se = float(numpy.sqrt(fit_22.residual_variance)),
            gamma_d  = fit_23.coefficient('gamma_d'),
            gamma_e  = fit_23.coefficient('gamma_e') if has_eta else numpy.nan,
            gamma_se = float(numpy.sqrt(fit_23.residual_variance)),
            gamma_0  = fit_23.coefficient('gamma_0') if intercept else None,
            ses_coef = { name : fit_22.coefficient(name) for name in l_ses },
            eta      = arr_eta,
            xi       = fit_23.residuals)
#------------------------------------------
def largest_races(df_cell : pnd.DataFrame, nrace : int = 2) -> list[str]:
    '''
    Returns labels of the races with most members, largest first
    '''
    ser_tot = df_cell.groupby('race', sort=False)['n_ik'].sum()
    ser_tot = ser_tot.sort_values(ascending=False, kind='stable')

    return ser_tot.index[:nrace].tolist()
#------------------------------------------
def experiment2(df_cell   : pnd.DataFrame,
                df_ses    : pnd.DataFrame | None = None,
                l_race    : list[str] | None     = None,
                intercept : bool                 = False,
                tol       : float                = RANK_TOL) -> Exp2Report:
    '''
    Takes cells from zip_aggregate and, optionally, a frame with columns region and the SES variables

    l_race   : Races analyzed one at a time, by default the two largest
    intercept: If True, the residual sum regression gets an intercept
    tol      : Relative singular value below which a region level design is rank deficient
    '''
    l_race  = largest_races(df_cell) if l_race is None else l_race
    l_var   = [('baseline', [])]
    if df_ses is not None:
        df_ses  = df_ses[['region'] + SES_NAMES].astype({'region' : str})
        df_cell = df_cell.merge(df_ses, on='region', how='left', validate='many_to_one')
        if df_cell[SES_NAMES].isna().any().any():
            raise AlignmentError('Some regions have no SES values')

        l_var.append(('ses', SES_NAMES))

    l_fit = []
    for race in l_race:
        df_race = df_cell[df_cell['race'] == race]
        for variant, l_ses in l_var:
            fit = _fit_race(df_race, race, variant, l_ses, intercept, tol)
            log.debug(f'{race:<10}{variant:<10}alpha_1={fit.alpha_1:.4f}, gamma_e={fit.gamma_e:.4f}')
            l_fit.append(fit)

    return Exp2Report(fits=l_fit)
#------------------------------------------
@dataclass(frozen=True)
class AuditResult:
    '''
    Outputs of both experiments and of the shrinkage analysis of the empirical confusion
    '''
    exp1      : Exp1Report
    cells     : pnd.DataFrame
    exp2      : Exp2Report
    flows     : mfl.FlowCounts
    shrinkage : mth.ShrinkageReport
#------------------------------------------
def run_audit(df_rec       : pnd.DataFrame,
              proxy_labels : numpy.ndarray,
              races        : RaceCategorySet,
              df_ses       : pnd.DataFrame | None = None,
              reference    : int | None           = None,
              control      : str                  = 'none',
              l_race       : list[str] | None     = None,
              intercept    : bool                 = False,
              tol          : float                = RANK_TOL) -> AuditResult:
    '''
    Runs both experiments and computes the shrinkage report of the empirical confusion,
    with the reported race coefficients as effects

    tol: Rank tolerance of every least squares fit with a general design
    '''
    exp1    = experiment1(df_rec, proxy_labels, races, reference=reference, control=control, tol=tol)

    arr_true= df_rec['race'].to_numpy(dtype=int)
    arr_y   = df_rec['average_premium'].to_numpy(dtype=float)
    fit_rep = regress.fit_cell_means(arr_true, arr_y, races.size)
    df_cell = zip_aggregate(df_rec, proxy_labels, fit_rep, races)
    exp2    = experiment2(df_cell, df_ses, l_race=l_race, intercept=intercept, tol=tol)

    flows   = mfl.flows_from_labels(arr_true, proxy_labels, ncat=races.size, labels=races.labels)
    conf    = mfl.confusion_from_flows(flows)
    shrink  = mth.shrinkage_report(conf, flows.true_counts, exp1.reported)

    return AuditResult(exp1=exp1, cells=df_cell, exp2=exp2, flows=flows, shrinkage=shrink)
#------------------------------------------
