'''
Module with tests for functions in io/report.py
'''
import os

import numpy
import pandas as pnd
import pytest

from pra.logging.log_store import LogStore
from pra.io                import report
from pra.io                import serialization as ser

log = LogStore.add_logger('pra:tests:test_report')
# ----------------------------------------------
@pytest.fixture(scope='module', autouse=True)
def _initialize():
    LogStore.set_level('pra:io:report', 10)
# ----------------------------------------------
def test_header_lines():
    '''
    Seed and hash come first
    '''
    l_line = report.header_lines(3, 'abc', ['neutral: True'])

    assert l_line == ['seed: 3', 'config_hash: abc', 'neutral: True']
# ----------------------------------------------
def test_format_table():
    '''
    Coefficients are shown with 3 decimals, percentages with the decimals requested
    '''
    df   = pnd.DataFrame({'category' : ['Black', 'White'], 'coefficient' : [2.65512, 1 / 3], 'pct' : [66.666, 20.04]})
    text = report.format_table(df, {'pct' : 1})

    assert '2.655' in text
    assert '0.333' in text
    assert '66.7'  in text
    assert '20.0'  in text
    assert '2.6551' not in text
# ----------------------------------------------
@pytest.mark.parametrize('fmt', ['table', 'csv'])
def test_emit(tmp_path, fmt : str):
    '''
    Delimited file always written, text table only for format table
    '''
    df     = pnd.DataFrame({'category' : ['Black', 'White'], 'bias' : [-0.2, 0.2]})
    l_path = report.emit(df, str(tmp_path), 'bias', ['seed: None', 'config_hash: abc'], fmt)

    assert os.path.isfile(f'{tmp_path}/bias.csv')
    assert os.path.isfile(f'{tmp_path}/bias.txt') == (fmt == 'table')
    assert len(l_path) == (2 if fmt == 'table' else 1)

    df_read = ser.read_table(f'{tmp_path}/bias.csv')
    assert ser.to_float(df_read, ['bias'])[:, 0].tolist() == [-0.2, 0.2]
# ----------------------------------------------
def test_emit_keeps_stdout_clean(tmp_path, capsys):
    '''
    The text table goes to the log and the .txt file, nothing is written to stdout
    '''
    df = pnd.DataFrame({'category' : ['Black', 'White'], 'bias' : [-0.2, 0.2]})
    report.emit(df, str(tmp_path), 'bias', [], 'table')

    assert capsys.readouterr().out == ''
# ----------------------------------------------
def test_invalid_format(tmp_path):
    '''
    Unknown formats are rejected
    '''
    with pytest.raises(ValueError):
        report.emit(pnd.DataFrame({'a' : [1]}), str(tmp_path), 'a', [], 'json')
# ----------------------------------------------
def test_matrix_frame():
    '''
    Matrix frame carries the labels in the corner column
    '''
    df = report.matrix_frame(numpy.eye(2), ['Black', 'White'])

    assert df.columns.tolist() == [ser.CORNER, 'Black', 'White']
    assert df[ser.CORNER].tolist() == ['Black', 'White']
# ----------------------------------------------
