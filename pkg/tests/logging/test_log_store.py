'''
Unit test for LogStore class
'''

import logging
from dataclasses import dataclass

import pytest
from pra.logging.log_store import LogStore

# --------------------------------
@dataclass
class Data:
    '''
    Class used to store shared data
    '''
    l_backend = ['logging', 'logzero']
    l_level   = [10, 20, 30, 40, 50]
    l_name    = ['debug', 'info', 'warning', 'error', 'critical']
# --------------------------------
@pytest.fixture(autouse=True)
def _restore_default():
    level   = LogStore.log_level
    backend = LogStore.backend
    yield
    LogStore.log_level = level
    LogStore.backend   = backend
# --------------------------------
@pytest.mark.parametrize('backend', Data.l_backend)
def test_show(backend : str):
    '''
    Test for show_loggers
    '''
    LogStore.backend = backend

    name_war = f'show_warning_{backend}'
    name_def = f'show_default_{backend}'

    LogStore.set_level(name_war, logging.WARNING)

    LogStore.add_logger(name_war)
    LogStore.add_logger(name_def)

    LogStore.show_loggers()
# --------------------------------
@pytest.mark.parametrize('backend', Data.l_backend)
def test_messages(backend : str):
    '''
    Tests each level
    '''
    LogStore.backend = backend

    name = f'messages_{backend}'
    log = LogStore.add_logger(name)
    LogStore.set_level(name, 10)

    log.debug('debug')
    log.info('info')
    log.warning('warning')
    log.error('error')
    log.critical('critical')
# --------------------------------
@pytest.mark.parametrize('backend', Data.l_backend)
@pytest.mark.parametrize('level'  , Data.l_level)
def test_level(backend : str, level : int):
    '''
    Level set before the logger exists is applied when it is made
    '''
    LogStore.backend = backend

    name = f'level_{backend}_{level}'

    LogStore.set_level(name, level)
    log = LogStore.add_logger(name)

    assert log.level == level
# --------------------------------
@pytest.mark.parametrize('level', Data.l_name)
def test_level_by_name(level : str):
    '''
    Levels can be passed by name
    '''
    name = f'level_name_{level}'
    log  = LogStore.add_logger(name)
    LogStore.set_level(name, level)

    assert log.level == getattr(logging, level.upper())
# --------------------------------
def test_invalid_level():
    '''
    Unknown level names are rejected
    '''
    LogStore.add_logger('invalid_level')
    with pytest.raises(ValueError):
        LogStore.set_level('invalid_level', 'verbose')
# --------------------------------
def test_configure():
    '''
    Logging section of a config, the default applies to existing loggers
    '''
    log_1 = LogStore.add_logger('configure_1')
    log_2 = LogStore.add_logger('configure_2')

    LogStore.configure({'default' : 'warning', 'configure_2' : 'debug'})

    assert log_1.level == logging.WARNING
    assert log_2.level == logging.DEBUG

    LogStore.set_all_levels(logging.INFO)
# --------------------------------
def test_configure_none():
    '''
    Missing logging section leaves levels unchanged
    '''
    log = LogStore.add_logger('configure_none')
    LogStore.set_level('configure_none', 30)
    LogStore.configure(None)

    assert log.level == 30
# --------------------------------
def test_exists_ok_true():
    '''
    Tests exists_ok flag with value of True
    '''
    log_1  = LogStore.add_logger('exists_ok_true')
    log_2  = LogStore.add_logger('exists_ok_true', exists_ok=True)

    assert log_1 is log_2
# --------------------------------
def test_exists_ok_default():
    '''
    Tests exists_ok flag with default value
    '''
    LogStore.add_logger('exists_ok_default')
    with pytest.raises(ValueError):
        LogStore.add_logger('exists_ok_default')
