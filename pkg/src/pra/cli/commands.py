'''
Module with the functions behind each subcommand of proxy_audit.

Every command takes a RunConfig, writes its outputs to the output directory and returns the exit code:
0 on success, 2 when the inputs are invalid and 3 when a numerical step fails
'''
import numpy
import pandas as pnd

from pra.logging.log_store  import LogStore
from pra.io                 import serialization as ser
from pra.io                 import report
from pra.cli.run_config     import RunConfig
from pra.proxy              import inference
from pra.proxy.tables       import ProxyTables, TableError, load_tables
from pra.proxy.inference    import FallbackPolicy, Mode, UnknownRegion, ZeroEvidence
from pra.stats.regress      import EmptyCategory, RankDeficient
from pra.misclass           import flows as mfl
from pra.misclass           import theory as mth
from pra.misclass.flows     import ConfusionMatrix, LengthMismatch, EmptyTrueClass, EmptyPredictedClass, NotColumnStochastic
from pra.misclass.theory    import DimensionMismatch, EmptyExpectedClass
from pra.misclass.jacobi    import NotConverged
from pra.misclass.monte_carlo import mc_misclassification_oracle
from pra.synth              import population as pop
from pra.synth.population   import InvalidConfig
from pra.synth.records      import SES_NAMES
from pra.audit.experiments  import AlignmentError, TooFewCells, run_audit

log = LogStore.add_logger('pra:cli:commands')

EXIT_OK         = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL  = 3

VALIDATION_ERRORS = (
        ser.ParseError,
        ser.LabelMismatch,
        InvalidConfig,
        LengthMismatch,
        AlignmentError,
        TableError,
        UnknownRegion,
        DimensionMismatch,
        NotColumnStochastic,
        EmptyCategory,
        TooFewCells)

NUMERICAL_ERRORS = (
        RankDeficient,
        ZeroEvidence,
        EmptyTrueClass,
        EmptyPredictedClass,
        EmptyExpectedClass,
        NotConverged)
#------------------------------------------
def exit_code(exc : Exception) -> int:
    '''
    Returns exit code associated to exception, raises it back if it is not a known failure
    '''
    if isinstance(exc, VALIDATION_ERRORS):
        return EXIT_VALIDATION

    if isinstance(exc, NUMERICAL_ERRORS):
        return EXIT_NUMERICAL

    raise exc
#------------------------------------------
def _load_tables(cfg : RunConfig) -> ProxyTables:
    tables = load_tables(
            surname  = cfg.input_path('surname'),
            firstname= cfg.input_path('first'),
            geo      = cfg.input_path('geo'),
            races    = cfg.races)

    return tables.smoothed(cfg.smoothing)
#------------------------------------------
def _policy(cfg : RunConfig) -> FallbackPolicy:
    return FallbackPolicy(allow_bisg=cfg.infer['allow_bisg'], allow_geo_only=cfg.infer['allow_geo_only'])
#------------------------------------------
def _read_individuals(path : str) -> pnd.DataFrame:
    '''
    Reads file with one individual per row and columns surname, first and region (or zip_code)
    '''
    df = ser.read_table(path)
    if 'region' not in df.columns and 'zip_code' in df.columns:
        df = df.rename(columns={'zip_code' : 'region'})

    ser.require_columns(df, ['surname', 'first', 'region'])
    if 'id' not in df.columns:
        df.insert(0, 'id', [ str(irow) for irow in range(len(df)) ])

    return df
#------------------------------------------
def _label_indices(df : pnd.DataFrame, column : str, cfg : RunConfig) -> numpy.ndarray:
    '''
    Maps race labels in column to category indices, unknown labels raise LabelMismatch naming the line
    '''
    ser.require_columns(df, [column])
    arr_lab = df[column].str.strip().to_numpy()
    arr_idx = pnd.Categorical(arr_lab, categories=list(cfg.labels)).codes.astype(int)

    arr_bad,= numpy.where(arr_idx < 0)
    if arr_bad.size > 0:
        irow = int(arr_bad[0])
        path = df.attrs.get('path', '<memory>')
        raise ser.LabelMismatch(f'{path}:{ser.line_of(df, irow)}: label "{arr_lab[irow]}" not in {cfg.labels}')

    return arr_idx
#------------------------------------------
def _read_inputs(cfg : RunConfig) -> tuple[ConfusionMatrix, numpy.ndarray, numpy.ndarray]:
    '''
    Reads confusion matrix, class sizes and effects
    '''
    l_lab = list(cfg.labels)
    mat   = ser.read_matrix(cfg.input_path('confusion'), l_lab)
    conf  = ConfusionMatrix(matrix=mat, tol=cfg.tolerance('identity'))
    arr_n = ser.read_vector(cfg.input_path('counts'), l_lab)
    arr_b = ser.read_vector(cfg.input_path('beta')  , l_lab)

    return conf, arr_n, arr_b
#------------------------------------------
def _shrinkage_frames(rep : mth.ShrinkageReport, l_lab : list[str]) -> tuple[pnd.DataFrame, pnd.DataFrame]:
    df_sum = pnd.DataFrame({
        'ss_true'    : [rep.ss_true],
        'ss_proxy'   : [rep.ss_proxy],
        'shrinks'    : [rep.shrinks],
        'neutral'    : [rep.neutral],
        'reversible' : [rep.reversible],
        'spectrum_ok': ['' if rep.spectrum_ok is None else str(rep.spectrum_ok)]})

    arr_eig = numpy.full(len(l_lab), numpy.nan) if rep.eigenvalues is None else rep.eigenvalues
    df_eig  = pnd.DataFrame({'index' : numpy.arange(1, len(l_lab) + 1), 'eigenvalue' : arr_eig})

    return df_sum, df_eig
#------------------------------------------
def cmd_infer(cfg : RunConfig) -> int:
    '''
    Writes posteriors.csv with, per individual, the posterior, the information used and the max-classified race.
    Individuals whose inference failed are written with mode FAILED and counted in the header
    '''
    tables  = _load_tables(cfg)
    df_in   = _read_individuals(cfg.input_path('microdata'))
    df_post = inference.infer_batch(df_in, tables, _policy(cfg))
    df_post.insert(0, 'id', df_in['id'].to_numpy())

    nunkn, nzero = inference.failure_counts(df_post, df_in, tables)
    l_comment    = cfg.comments([f'failed_unknown_region: {nunkn}', f'failed_zero_evidence: {nzero}'])
    ser.write_table(df_post, f'{cfg.out}/posteriors.csv', l_comment)

    log.info(f'Inferred race for {len(df_post) - nunkn - nzero}/{len(df_post)} individuals')
    if nunkn > 0:
        raise UnknownRegion(f'{nunkn} individuals live in regions missing from the geography table')

    if nzero > 0:
        raise ZeroEvidence(f'{nzero} individuals have zero evidence for every race')

    return EXIT_OK
#------------------------------------------
def cmd_classify(cfg : RunConfig) -> int:
    '''
    Applies the max-classification rule to a posterior file, rows with mode FAILED are skipped
    '''
    races = cfg.races
    l_col = races.columns(prefix='p_')
    df    = ser.read_table(cfg.input_path('posteriors'))
    ser.require_columns(df, l_col)

    is_ok = numpy.ones(len(df), dtype=bool)
    if 'mode' in df.columns:
        is_ok = (df['mode'].str.strip() != Mode.FAILED.value).to_numpy()

    arr_line = df.attrs['lines'][is_ok]
    df       = df[is_ok].reset_index(drop=True)
    df.attrs['lines'] = arr_line
    df.attrs['path']  = cfg.input_path('posteriors')

    mat     = ser.to_float(df, l_col)
    arr_dev = numpy.abs(mat.sum(axis=1) - 1)
    arr_bad,= numpy.where((mat < 0).any(axis=1) | (arr_dev > cfg.tolerance('identity')))
    if arr_bad.size > 0:
        raise ser.ParseError(df.attrs['path'], ser.line_of(df, int(arr_bad[0])), 'posterior is not a probability vector')

    arr_max, arr_tie = inference.argmax_with_ties(mat)
    df_out = pnd.DataFrame({
        'argmax'      : numpy.array(races.labels, dtype=object)[arr_max],
        'argmax_index': arr_max,
        'tie_broken'  : arr_tie})
    if 'id' in df.columns:
        df_out.insert(0, 'id', df['id'].to_numpy())

    ser.write_table(df_out, f'{cfg.out}/classified.csv', cfg.comments())
    log.info(f'Classified {len(df_out)} individuals, {int(arr_tie.sum())} ties')

    return EXIT_OK
#------------------------------------------
def cmd_confusion(cfg : RunConfig) -> int:
    '''
    Cross tabulates reported and proxy labels, writes flows (with row sums and precision per row),
    the column stochastic confusion matrix and the precision per predicted class
    '''
    l_lab    = list(cfg.labels)
    df_true  = ser.read_table(cfg.input_path('pairs'))
    arr_true = _label_indices(df_true, cfg.confusion['true_col'], cfg)

    pred_path = cfg.inputs.get('predictions')
    df_pred   = df_true if pred_path is None else ser.read_table(pred_path)
    arr_pred  = _label_indices(df_pred, cfg.confusion['pred_col'], cfg)

    if arr_true.size != arr_pred.size:
        raise LengthMismatch(f'Found {arr_true.size} reported and {arr_pred.size} proxy labels')

    flows   = mfl.flows_from_labels(arr_true, arr_pred, ncat=len(l_lab), labels=cfg.labels)
    df_flow = flows.to_frame()
    report.emit(df_flow, cfg.out, 'flows', cfg.comments(), cfg.fmt, report.flows_decimals(df_flow))

    conf    = mfl.confusion_from_flows(flows)
    report.emit(report.matrix_frame(conf.matrix, l_lab), cfg.out, 'confusion', cfg.comments(), cfg.fmt)

    arr_prc = mfl.precision_per_predicted_class(flows)
    df_prc  = pnd.DataFrame({'category' : l_lab, 'precision_pct' : 100 * arr_prc})
    report.emit(df_prc, cfg.out, 'precision', cfg.comments(), cfg.fmt, {'precision_pct' : report.PERCENT_DECIMALS})

    return EXIT_OK
#------------------------------------------
def cmd_bias(cfg : RunConfig) -> int:
    '''
    Writes expected estimator and bias of each category, the header says whether the confusion is neutral
    '''
    conf, arr_n, arr_b = _read_inputs(cfg)
    rep = mth.bias_report(conf, arr_n, arr_b, tol=cfg.tolerance('neutral'), tol_form=cfg.tolerance('identity'))

    df  = pnd.DataFrame({'category' : list(cfg.labels), 'expected_beta' : rep.expected_beta, 'bias' : rep.bias})
    if rep.neutral_bias is not None:
        df['neutral_bias'] = rep.neutral_bias

    l_extra = [f'neutral: {rep.neutrality.passed}', f'neutrality_deviation: {rep.neutrality.deviation:.17g}']
    if not rep.neutrality.passed:
        log.warning(f'Neutrality check failed, largest deviation {rep.neutrality.deviation:.3e}')

    report.emit(df, cfg.out, 'bias', cfg.comments(l_extra), cfg.fmt)

    return EXIT_OK
#------------------------------------------
def cmd_shrinkage(cfg : RunConfig) -> int:
    '''
    Writes the spread of the effects before and after misclassification, the checks
    and the eigenvalues of the similarity transform
    '''
    conf, arr_n, arr_b = _read_inputs(cfg)
    rep = mth.shrinkage_report(
            conf, arr_n, arr_b,
            tol_neutral = cfg.tolerance('neutral'),
            tol_balance = cfg.tolerance('balance'),
            tol_jacobi  = cfg.tolerance('jacobi'))

    l_lab          = list(cfg.labels)
    df_sum, df_eig = _shrinkage_frames(rep, l_lab)
    report.emit(df_sum, cfg.out, 'shrinkage'  , cfg.comments(), cfg.fmt)
    report.emit(df_eig, cfg.out, 'eigenvalues', cfg.comments(), cfg.fmt)
    report.emit(report.matrix_frame(rep.similarity_matrix, l_lab), cfg.out, 'similarity', cfg.comments(), cfg.fmt)

    return EXIT_OK
#------------------------------------------
def cmd_simulate(cfg : RunConfig) -> int:
    '''
    Compares Monte Carlo moments of the proxy estimator, predicted counts and predicted signal mass
    with their expected values
    '''
    conf, arr_n, arr_b = _read_inputs(cfg)
    d_sim = cfg.simulate
    res   = mc_misclassification_oracle(
            conf, arr_n, arr_b,
            noise_sd  = float(d_sim['noise_sd']),
            replicates= int(d_sim['replicates']),
            seed      = cfg.seed,
            njobs     = int(d_sim['njobs']))

    arr_roe = mth.roe_expected_beta(conf, arr_n, arr_b)
    arr_cnt = mth.expected_counts(conf, arr_n)
    arr_mas = mth.expected_signal_mass(conf, arr_n, arr_b)

    df = pnd.DataFrame({
        'category'      : list(cfg.labels),
        'roe_expected'  : arr_roe,
        'mc_mean'       : res.mean,
        'mc_se'         : res.std_error,
        'expected_count': arr_cnt,
        'count_mean'    : res.count_mean,
        'count_se'      : res.count_se,
        'expected_mass' : arr_mas,
        'mass_mean'     : res.mass_mean,
        'mass_se'       : res.mass_se})

    nsig = cfg.tolerance('mc_se')
    for name, arr_exp, arr_mean, arr_se in [('counts', arr_cnt, res.count_mean, res.count_se), ('mass', arr_mas, res.mass_mean, res.mass_se)]:
        if numpy.any(numpy.abs(arr_mean - arr_exp) > nsig * arr_se + 1e-12 * numpy.abs(arr_exp)):
            log.warning(f'Monte Carlo {name} differ from their expectation by more than {nsig} standard errors')

    l_extra = [f'replicates: {res.nreplicate}', f'skipped: {res.nskipped}']
    report.emit(df, cfg.out, 'simulate', cfg.comments(l_extra), cfg.fmt)

    return EXIT_OK
#------------------------------------------
def _scenario(cfg : RunConfig) -> pop.ScenarioConfig:
    name     = cfg.inputs.get('scenario') or cfg.audit['scenario']
    scenario = pop.load_scenario(name)
    if cfg.seed is not None:
        scenario = scenario.with_updates({'seed' : cfg.seed})

    if scenario.races != cfg.races:
        raise ser.LabelMismatch(f'Scenario categories {scenario.labels} differ from run categories {cfg.labels}')

    return scenario
#------------------------------------------
def cmd_generate(cfg : RunConfig) -> int:
    '''
    Writes a synthetic population, its regions and the proxy tables consistent with it
    '''
    scenario = _scenario(cfg)
    popu     = pop.generate_population(scenario)
    popu.save(cfg.out, cfg.comments())

    return EXIT_OK
#------------------------------------------
def _audit_population(cfg : RunConfig) -> tuple[pop.Population, ProxyTables | None]:
    if cfg.inputs.get('population') is not None:
        popu = pop.load_population(cfg.inputs['population'], cfg.races)
    elif cfg.inputs.get('microdata') is not None:
        popu = pop.load_microdata(cfg.inputs['microdata'], cfg.races)
    else:
        return pop.generate_population(_scenario(cfg)), None

    if cfg.audit['proxy'] == 'reported':
        return popu, None

    return popu, _load_tables(cfg)
#------------------------------------------
def cmd_audit(cfg : RunConfig) -> int:
    '''
    Runs both experiments on a generated or ingested population, with proxy races from the
    BIFSG max-classification rule, or the reported races with proxy `reported`

    Writes exp1, exp2, cells, flows and shrinkage reports
    '''
    popu, tables = _audit_population(cfg)
    df_rec       = popu.records
    if tables is None and popu.tables is not None:
        tables = popu.tables.smoothed(cfg.smoothing)

    if cfg.audit['proxy'] == 'reported':
        arr_prx = df_rec['race'].to_numpy(dtype=int)
    else:
        df_post = inference.infer_batch(df_rec, tables, _policy(cfg))
        is_ok   = (df_post['mode'] != Mode.FAILED.value).to_numpy()
        if not is_ok.all():
            log.warning(f'Dropping {int((~is_ok).sum())} individuals without proxy race')

        df_rec  = df_rec[is_ok].reset_index(drop=True)
        arr_prx = df_post['argmax_index'].to_numpy(dtype=int)[is_ok]

    df_ses = df_rec.groupby('region', sort=True)[SES_NAMES].first().reset_index()
    result = run_audit(
            df_rec, arr_prx, cfg.races,
            df_ses    = df_ses,
            reference = cfg.races.index(cfg.reference),
            control   = cfg.controls,
            l_race    = cfg.audit['races'],
            intercept = cfg.audit['intercept'],
            tol       = cfg.tolerance('rank'))

    l_lab   = list(cfg.labels)
    l_extra = [f'observations: {result.exp1.nobs}']
    report.emit(result.exp1.to_frame(), cfg.out, 'exp1', cfg.comments(l_extra), cfg.fmt)
    report.emit(result.exp2.to_frame(), cfg.out, 'exp2', cfg.comments(l_extra), cfg.fmt)
    ser.write_table(result.cells, f'{cfg.out}/cells.csv', cfg.comments())

    df_flow = result.flows.to_frame()
    report.emit(df_flow, cfg.out, 'flows', cfg.comments(), cfg.fmt, report.flows_decimals(df_flow))

    df_sum, df_eig = _shrinkage_frames(result.shrinkage, l_lab)
    report.emit(df_sum, cfg.out, 'shrinkage'  , cfg.comments(), cfg.fmt)
    report.emit(df_eig, cfg.out, 'eigenvalues', cfg.comments(), cfg.fmt)

    return EXIT_OK
#------------------------------------------
COMMANDS = {
        'infer'    : cmd_infer,
        'classify' : cmd_classify,
        'confusion': cmd_confusion,
        'bias'     : cmd_bias,
        'shrinkage': cmd_shrinkage,
        'audit'    : cmd_audit,
        'simulate' : cmd_simulate,
        'generate' : cmd_generate}
#------------------------------------------
def run(cfg : RunConfig) -> int:
    '''
    Configures loggers, runs the command and maps its failures to exit codes
    '''
    LogStore.configure(cfg.logging)

    try:
        return COMMANDS[cfg.command](cfg)
    except VALIDATION_ERRORS + NUMERICAL_ERRORS as exc:
        code = exit_code(exc)
        log.error(f'{type(exc).__name__}: {exc}')

        return code
#------------------------------------------
