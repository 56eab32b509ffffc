'''
Script used to infer proxy races, tabulate their confusion with reported races, evaluate the
expected misclassification bias and run the audit experiments
'''
import argparse

from pra.logging.log_store import LogStore
from pra.cli               import commands
from pra.cli.run_config    import RunConfig, CONTROLS, PROXIES
from pra.io.report         import FORMATS
from pra.synth.population  import InvalidConfig

log = LogStore.add_logger('pra_scripts:audit:proxy_audit')
#---------------------------------
def _add_common(parser : argparse.ArgumentParser) -> None:
    parser.add_argument('--labels'   , type=str  , help='Comma separated race labels, in column order')
    parser.add_argument('--reference', type=str  , help='Reference race of the adjusted fits')
    parser.add_argument('--seed'     , type=int  , help='Seed, needed by stochastic commands')
    parser.add_argument('--tol'      , type=str  , help='Tolerance override, e.g. identity=1e-8', action='append', default=[])
    parser.add_argument('--controls' , type=str  , help='Control set of the adjusted fits', choices=CONTROLS)
    parser.add_argument('--smoothing', type=float, help='Additive smoothing of the proxy tables')
    parser.add_argument('--out'      , type=str  , help='Output directory')
    parser.add_argument('--format'   , type=str  , help='Report format', choices=FORMATS)
    parser.add_argument('--config'   , type=str  , help='Path to YAML config overriding the defaults')
    parser.add_argument('-l', '--loglvl', type=int, help='Log level', choices=[10, 20, 30, 40])
#---------------------------------
def _add_tables(parser : argparse.ArgumentParser) -> None:
    parser.add_argument('--surname', type=str, help='Path to surname table')
    parser.add_argument('--first'  , type=str, help='Path to first name table')
    parser.add_argument('--geo'    , type=str, help='Path to geography table')
#---------------------------------
def _add_theory(parser : argparse.ArgumentParser) -> None:
    parser.add_argument('--confusion', type=str, help='Path to confusion matrix', required=True)
    parser.add_argument('--counts'   , type=str, help='Path to class sizes'     , required=True)
    parser.add_argument('--beta'     , type=str, help='Path to group effects'   , required=True)
#---------------------------------
def _get_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Proxy race inference and misclassification audit')
    subpar = parser.add_subparsers(dest='command', required=True)

    par = subpar.add_parser('infer', help='BIFSG posteriors for individuals')
    _add_tables(par)
    par.add_argument('--input'      , type=str, help='Path to individuals, columns surname, first, region', required=True)
    par.add_argument('--no-bisg'    , action='store_true', help='Fail instead of using surname and region only')
    par.add_argument('--no-geo-only', action='store_true', help='Fail instead of using the region only')

    par = subpar.add_parser('classify', help='Max-classification of posteriors')
    par.add_argument('--input', type=str, help='Path to posteriors', required=True)

    par = subpar.add_parser('confusion', help='Confusion table of reported and proxy races')
    par.add_argument('--input'      , type=str, help='Path to file with reported races', required=True)
    par.add_argument('--predictions', type=str, help='Path to file with proxy races, by default the input')
    par.add_argument('--true-col'   , type=str, help='Column with reported races')
    par.add_argument('--pred-col'   , type=str, help='Column with proxy races')

    par = subpar.add_parser('bias', help='Expected proxy estimator and bias')
    _add_theory(par)

    par = subpar.add_parser('shrinkage', help='Spread of effects before and after misclassification')
    _add_theory(par)

    par = subpar.add_parser('simulate', help='Monte Carlo check of the expectation identities')
    _add_theory(par)
    par.add_argument('--noise'     , type=float, help='Standard deviation of the outcome noise')
    par.add_argument('--replicates', type=int  , help='Number of replicates')
    par.add_argument('--njobs'     , type=int  , help='Number of parallel jobs')

    par = subpar.add_parser('audit', help='Both audit experiments')
    _add_tables(par)
    par.add_argument('--scenario'  , type=str, help='Scenario YAML, path or relative to pra_data')
    par.add_argument('--population', type=str, help='Path to population.csv written by generate')
    par.add_argument('--microdata' , type=str, help='Path to individual level microdata')
    par.add_argument('--proxy'     , type=str, help='Proxy race used', choices=PROXIES)
    par.add_argument('--races'     , type=str, help='Comma separated races of the region level fits')
    par.add_argument('--intercept' , action='store_true', help='Add intercept to the residual sum regression')

    par = subpar.add_parser('generate', help='Synthetic population and proxy tables')
    par.add_argument('--scenario', type=str, help='Scenario YAML, path or relative to pra_data')

    for par in subpar.choices.values():
        _add_common(par)

    return parser
#---------------------------------
def _parse_tolerances(l_tol : list[str]) -> dict[str,float]:
    d_tol = {}
    for text in l_tol:
        if '=' not in text:
            raise InvalidConfig('tolerances', f'expected name=value, found {text}')

        name, value = text.split('=', 1)
        try:
            d_tol[name.strip()] = float(value)
        except ValueError as exc:
            raise InvalidConfig(f'tolerances.{name}', f'invalid value {value}') from exc

    return d_tol
#---------------------------------
def _drop_none(d_cfg : dict) -> dict:
    d_out = {}
    for key, val in d_cfg.items():
        if isinstance(val, dict):
            val = _drop_none(val)
            if len(val) == 0:
                continue

        if val is None:
            continue

        d_out[key] = val

    return d_out
#---------------------------------
def _split(text : str | None) -> list[str] | None:
    if text is None:
        return None

    return [ label.strip() for label in text.split(',') ]
#---------------------------------
def _get_flags(args : argparse.Namespace) -> dict:
    '''
    Returns mapping with the settings passed as flags, in the layout of the YAML config
    '''
    d_arg  = vars(args)
    d_flag = {
            'labels'    : _split(args.labels),
            'reference' : args.reference,
            'seed'      : args.seed,
            'controls'  : args.controls,
            'smoothing' : args.smoothing,
            'out'       : args.out,
            'format'    : args.format,
            'tolerances': _parse_tolerances(args.tol),
            'inputs'    : {
                'surname'    : d_arg.get('surname'),
                'first'      : d_arg.get('first'),
                'geo'        : d_arg.get('geo'),
                'confusion'  : d_arg.get('confusion'),
                'counts'     : d_arg.get('counts'),
                'beta'       : d_arg.get('beta'),
                'scenario'   : d_arg.get('scenario'),
                'population' : d_arg.get('population'),
                'microdata'  : d_arg.get('microdata'),
                'predictions': d_arg.get('predictions')},
            'infer'     : {
                'allow_bisg'    : False if d_arg.get('no_bisg')     else None,
                'allow_geo_only': False if d_arg.get('no_geo_only') else None},
            'confusion' : {
                'true_col' : d_arg.get('true_col'),
                'pred_col' : d_arg.get('pred_col')},
            'simulate'  : {
                'noise_sd'  : d_arg.get('noise'),
                'replicates': d_arg.get('replicates'),
                'njobs'     : d_arg.get('njobs')},
            'audit'     : {
                'proxy'     : d_arg.get('proxy'),
                'races'     : _split(d_arg.get('races')),
                'intercept' : True if d_arg.get('intercept') else None},
            }

    input_name = {'infer' : 'microdata', 'classify' : 'posteriors', 'confusion' : 'pairs'}.get(args.command)
    if input_name is not None:
        d_flag['inputs'][input_name] = args.input

    if args.loglvl is not None:
        d_flag['logging'] = {'default' : args.loglvl}

    return _drop_none(d_flag)
#---------------------------------
def main(argv : list[str] | None = None) -> int:
    '''
    Parses arguments, builds the run configuration and runs the command
    Returns exit code
    '''
    args = _get_parser().parse_args(argv)

    try:
        cfg = RunConfig.build(args.command, _get_flags(args), config_path=args.config)
    except (InvalidConfig, FileNotFoundError, ValueError) as exc:
        log.error(f'Invalid configuration: {exc}')
        return commands.EXIT_VALIDATION

    return commands.run(cfg)
#---------------------------------
if __name__ == '__main__':
    raise SystemExit(main())
