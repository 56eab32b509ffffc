'''
Module with tests for functions in generic/utilities.py
'''
from time import sleep

import pytest
import pra.generic.utilities as gut

# -------------------------
def test_timeit():
    '''
    Will test timer
    '''
    gut.TIMER_ON=True
    @gut.timeit
    def fun():
        sleep(1)
        return 3

    assert fun() == 3
    gut.TIMER_ON=False
# -------------------------
def test_load_data_config():
    '''
    Loads config shipped with the package
    '''
    cfg = gut.load_data_config('cli/defaults.yaml')

    assert cfg['labels'] == ['Asian', 'Black', 'Hispanic', 'Others', 'White']
    assert cfg['tolerances']['identity'] == pytest.approx(1e-9)
# -------------------------
def test_load_missing_config():
    '''
    Missing files raise
    '''
    with pytest.raises(FileNotFoundError):
        gut.load_config('/tmp/not_a_config_for_pra.yaml')
# -------------------------
def test_update_config():
    '''
    Nested entries are merged, the rest replaced
    '''
    cfg = {'a' : 1, 'b' : {'c' : 2, 'd' : 3}, 'e' : [1, 2]}
    out = gut.update_config(cfg, {'b' : {'c' : 5}, 'e' : [3]})

    assert out == {'a' : 1, 'b' : {'c' : 5, 'd' : 3}, 'e' : [3]}
    assert cfg['b']['c'] == 2
# -------------------------
def test_hash_object():
    '''
    Hash does not depend on key order
    '''
    hash_1 = gut.hash_object({'a' : 1, 'b' : [1, 2]})
    hash_2 = gut.hash_object({'b' : [1, 2], 'a' : 1})
    hash_3 = gut.hash_object({'b' : [1, 2], 'a' : 2})

    assert hash_1 == hash_2
    assert hash_1 != hash_3
    assert len(hash_1) == 64
# -------------------------
