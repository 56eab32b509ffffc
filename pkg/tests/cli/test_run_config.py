'''
Module with tests for RunConfig
'''
import pytest
import yaml

from pra.logging.log_store import LogStore
from pra.cli.run_config    import RunConfig
from pra.synth.population  import InvalidConfig

log = LogStore.add_logger('pra:tests:test_run_config')
# ----------------------------------------------
@pytest.fixture(scope='module', autouse=True)
def _initialize():
    LogStore.set_level('pra:cli:run_config', 10)
# ----------------------------------------------
def _write_config(path : str, d_cfg : dict) -> str:
    with open(path, 'w', encoding='utf-8') as ofile:
        yaml.safe_dump(d_cfg, ofile)

    return path
# ----------------------------------------------
def test_defaults():
    '''
    Without flags the defaults are used
    '''
    cfg = RunConfig.build('bias')

    assert cfg.labels    == ('Asian', 'Black', 'Hispanic', 'Others', 'White')
    assert cfg.reference == 'White'
    assert cfg.seed is None
    assert cfg.fmt       == 'table'
    assert cfg.tolerance('identity') == pytest.approx(1e-9)
    assert cfg.races.index('White') == 4
# ----------------------------------------------
def test_precedence(tmp_path):
    '''
    Flags override the config file, which overrides the defaults
    '''
    path = _write_config(f'{tmp_path}/run.yaml', {'controls' : 'demo', 'smoothing' : 0.5, 'tolerances' : {'neutral' : 1e-6}})

    cfg = RunConfig.build('bias', {'smoothing' : 1.0}, config_path=path)

    assert cfg.controls  == 'demo'
    assert cfg.smoothing == 1.0
    assert cfg.tolerance('neutral')  == pytest.approx(1e-6)
    assert cfg.tolerance('identity') == pytest.approx(1e-9)
# ----------------------------------------------
@pytest.mark.parametrize('d_flag, field', [
    ({'reference' : 'Martian'}             , 'reference'),
    ({'labels'    : ['Black']}             , 'labels'),
    ({'labels'    : ['Black', 'Black']}    , 'labels'),
    ({'controls'  : 'all'}                 , 'controls'),
    ({'format'    : 'xml'}                 , 'format'),
    ({'smoothing' : -1}                    , 'smoothing'),
    ({'seed'      : 'abc'}                 , 'seed'),
    ({'tolerances': {'identity' : 0}}      , 'tolerances.identity'),
    ({'audit'     : {'proxy' : 'surname'}} , 'audit.proxy'),
    ({'colour'    : 'red'}                 , 'colour'),
])
def test_invalid(d_flag : dict, field : str):
    '''
    Invalid settings name the offending field
    '''
    with pytest.raises(InvalidConfig) as exc:
        RunConfig.build('bias', d_flag)

    assert exc.value.field == field
# ----------------------------------------------
@pytest.mark.parametrize('command', ['simulate', 'generate', 'audit'])
def test_seed_required(command : str):
    '''
    Stochastic commands need a seed
    '''
    with pytest.raises(InvalidConfig) as exc:
        RunConfig.build(command)

    assert exc.value.field == 'seed'

    cfg = RunConfig.build(command, {'seed' : 3})
    assert cfg.is_stochastic
# ----------------------------------------------
def test_audit_of_population_is_deterministic():
    '''
    Audits of a given population do not need a seed
    '''
    cfg = RunConfig.build('audit', {'inputs' : {'population' : 'population.csv'}})

    assert not cfg.is_stochastic
# ----------------------------------------------
def test_hash():
    '''
    The hash depends on the settings that change the outputs only
    '''
    cfg_1 = RunConfig.build('bias', {'out' : 'dir_1', 'logging' : {'default' : 10}})
    cfg_2 = RunConfig.build('bias', {'out' : 'dir_2'})
    cfg_3 = RunConfig.build('bias', {'out' : 'dir_1', 'smoothing' : 0.1})

    assert cfg_1.config_hash == cfg_2.config_hash
    assert cfg_1.config_hash != cfg_3.config_hash
    assert len(cfg_1.config_hash) == 64

    l_line = cfg_1.comments(['neutral: True'])
    assert l_line == ['seed: None', f'config_hash: {cfg_1.config_hash}', 'neutral: True']
# ----------------------------------------------
def test_missing_input():
    '''
    Inputs needed by a command and not given are configuration errors
    '''
    cfg = RunConfig.build('bias')

    with pytest.raises(InvalidConfig) as exc:
        cfg.input_path('confusion')

    assert exc.value.field == 'inputs.confusion'
# ----------------------------------------------
