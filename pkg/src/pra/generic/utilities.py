'''
Module containing generic utility functions
'''
import os
import time
import json
import hashlib
import inspect

from typing              import Any, Callable
from functools           import wraps
from importlib.resources import files

import yaml

from pra.logging.log_store import LogStore

TIMER_ON=False

log = LogStore.add_logger('pra:generic:utilities')
# --------------------------------
def _get_module_name( fun : Callable) -> str:
    mod = inspect.getmodule(fun)
    if mod is None:
        raise ValueError(f'Cannot determine module name for function: {fun}')

    return mod.__name__
# --------------------------------
def timeit(f):
    '''
    Decorator used to time functions, it is turned off by default, can be turned on with:

    import pra.generic.utilities as gut

    gut.TIMER_ON=True
    '''
    @wraps(f)
    def wrap(*args, **kw):
        if not TIMER_ON:
            return f(*args, **kw)

        ts = time.time()
        result = f(*args, **kw)
        te = time.time()
        mod_nam = _get_module_name(f)
        fun_nam = f.__name__
        log.info(f'{mod_nam}.py:{fun_nam}; Time: {te-ts:.3f}s')

        return result
    return wrap
# --------------------------------
def load_data_config(name : str) -> dict:
    '''
    Takes path to YAML file, relative to the `pra_data` package, e.g. `synth/default.yaml`
    Returns dictionary with config
    '''
    cfg_path = files('pra_data').joinpath(name)
    cfg_path = str(cfg_path)

    return load_config(cfg_path)
# --------------------------------
def load_config(path : str) -> dict:
    '''
    Takes path to YAML file in the file system, returns dictionary
    '''
    if not os.path.isfile(path):
        raise FileNotFoundError(f'Cannot find config: {path}')

    with open(path, encoding='utf-8') as ifile:
        cfg = yaml.safe_load(ifile)

    if cfg is None:
        return {}

    if not isinstance(cfg, dict):
        raise ValueError(f'Config in {path} is not a mapping')

    log.debug(f'Loaded config: {path}')

    return cfg
# --------------------------------
def update_config(cfg : dict, d_over : dict) -> dict:
    '''
    Returns copy of cfg with entries in d_over merged recursively on top
    '''
    d_out = dict(cfg)
    for key, val in d_over.items():
        if isinstance(val, dict) and isinstance(d_out.get(key), dict):
            d_out[key] = update_config(d_out[key], val)
        else:
            d_out[key] = val

    return d_out
# --------------------------------
def hash_object(obj : Any) -> str:
    '''
    Returns SHA-256 hex digest of the JSON serialization, with sorted keys, of the object
    '''
    text = json.dumps(obj, sort_keys=True, default=str)
    hsh  = hashlib.sha256()
    hsh.update(text.encode('utf-8'))

    return hsh.hexdigest()
# --------------------------------
def make_parent(path : str) -> None:
    '''
    Makes directory that will hold file in path, if needed
    '''
    dir_name = os.path.dirname(path)
    if dir_name == '':
        return

    os.makedirs(dir_name, exist_ok=True)
# --------------------------------
