'''
Module holding RunConfig, the resolved settings of one command line invocation
'''
from dataclasses import dataclass, asdict

from pra.logging.log_store import LogStore
from pra.generic           import utilities as gut
from pra.io.report         import FORMATS, header_lines
from pra.proxy.tables      import RaceCategorySet
from pra.synth.population  import InvalidConfig

log = LogStore.add_logger('pra:cli:run_config')

COMMANDS   = ['infer', 'classify', 'confusion', 'bias', 'shrinkage', 'audit', 'simulate', 'generate']
CONTROLS   = ['none', 'demo', 'demo+ses']
PROXIES    = ['bifsg', 'reported']
STOCHASTIC = ['simulate', 'generate']
# Not part of the hashed configuration, outputs do not depend on them
UNHASHED   = ['out', 'logging']
#------------------------------------------
@dataclass(frozen=True)
class RunConfig:
    '''
    Settings of a run: defaults.yaml, overriden by the --config file, overriden by the flags

    inputs: Name of input (e.g. surname, geo, microdata) -> path
    '''
    command    : str
    labels     : tuple[str, ...]
    reference  : str
    seed       : int | None
    controls   : str
    smoothing  : float
    fmt        : str
    out        : str
    inputs     : dict
    tolerances : dict
    infer      : dict
    confusion  : dict
    simulate   : dict
    audit      : dict
    logging    : dict
    #------------------------------------------
    @classmethod
    def build(cls, command : str, d_flag : dict | None = None, config_path : str | None = None) -> 'RunConfig':
        '''
        Takes subcommand, mapping with the flags that were passed and, optionally, path to YAML config
        Returns validated configuration
        '''
        cfg = gut.load_data_config('cli/defaults.yaml')
        if config_path is not None:
            cfg = gut.update_config(cfg, gut.load_config(config_path))

        if d_flag is not None:
            cfg = gut.update_config(cfg, d_flag)

        cfg = dict(cfg)
        cfg['fmt'] = cfg.pop('format')

        known   = set(cls.__dataclass_fields__) - {'command'}
        unknown = set(cfg) - known
        if len(unknown) > 0:
            raise InvalidConfig(sorted(unknown)[0], 'unknown field')

        cfg['labels'] = tuple(cfg['labels'])
        for name in ['inputs', 'logging']:
            cfg[name] = {} if cfg.get(name) is None else cfg[name]

        run_cfg = cls(command=command, **cfg)
        run_cfg.validate()
        log.debug(f'Running {command} with config hash {run_cfg.config_hash}')

        return run_cfg
    #------------------------------------------
    def validate(self) -> None:
        '''
        Raises InvalidConfig naming the first invalid field
        '''
        if self.command not in COMMANDS:
            raise InvalidConfig('command', f'expected one of {COMMANDS}, found {self.command}')

        try:
            races = self.races
        except ValueError as exc:
            raise InvalidConfig('labels', str(exc)) from exc

        if self.reference not in races.labels:
            raise InvalidConfig('reference', f'{self.reference} not in {races.labels}')

        if self.seed is not None and (not isinstance(self.seed, int) or isinstance(self.seed, bool)):
            raise InvalidConfig('seed', f'expected integer, found {self.seed}')

        if self.is_stochastic and self.seed is None:
            raise InvalidConfig('seed', f'required by {self.command}')

        if self.controls not in CONTROLS:
            raise InvalidConfig('controls', f'expected one of {CONTROLS}, found {self.controls}')

        if self.fmt not in FORMATS:
            raise InvalidConfig('format', f'expected one of {FORMATS}, found {self.fmt}')

        if not isinstance(self.smoothing, (int, float)) or self.smoothing < 0:
            raise InvalidConfig('smoothing', f'expected nonnegative number, found {self.smoothing}')

        for name, value in self.tolerances.items():
            if not isinstance(value, (int, float)) or value <= 0:
                raise InvalidConfig(f'tolerances.{name}', f'expected positive number, found {value}')

        if self.audit.get('proxy') not in PROXIES:
            raise InvalidConfig('audit.proxy', f'expected one of {PROXIES}, found {self.audit.get("proxy")}')

        if self.simulate['replicates'] < 1 or self.simulate['njobs'] == 0:
            raise InvalidConfig('simulate', f'invalid replicates or njobs: {self.simulate}')
    #------------------------------------------
    @property
    def races(self) -> RaceCategorySet:
        '''
        Race categories of the run, in column order
        '''
        return RaceCategorySet(labels=self.labels)
    #------------------------------------------
    @property
    def is_stochastic(self) -> bool:
        '''
        True for commands drawing random numbers: simulations, generation of populations
        and audits of generated populations
        '''
        if self.command in STOCHASTIC:
            return True

        if self.command != 'audit':
            return False

        return self.inputs.get('population') is None and self.inputs.get('microdata') is None
    #------------------------------------------
    def tolerance(self, name : str) -> float:
        '''
        Returns tolerance by name, e.g. identity
        '''
        if name not in self.tolerances:
            raise InvalidConfig(f'tolerances.{name}', 'missing')

        return float(self.tolerances[name])
    #------------------------------------------
    def input_path(self, name : str) -> str:
        '''
        Returns path of input, raises InvalidConfig if it was not given
        '''
        path = self.inputs.get(name)
        if path is None:
            raise InvalidConfig(f'inputs.{name}', f'needed by {self.command}')

        return path
    #------------------------------------------
    def to_dict(self) -> dict:
        '''
        Returns the settings that determine the outputs
        '''
        d_cfg = asdict(self)
        d_cfg['labels'] = list(self.labels)
        for name in UNHASHED:
            del d_cfg[name]

        return d_cfg
    #------------------------------------------
    @property
    def config_hash(self) -> str:
        '''
        SHA-256 of the settings that determine the outputs
        '''
        return gut.hash_object(self.to_dict())
    #------------------------------------------
    def comments(self, l_extra : list[str] | None = None) -> list[str]:
        '''
        Comment lines for the header of every report
        '''
        return header_lines(self.seed, self.config_hash, l_extra)
#------------------------------------------
