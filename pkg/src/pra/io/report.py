'''
Module with functions emitting reports.

Every report is written as a delimited file with full precision. With the `table` format,
an aligned text rendering, rounded to 3 decimals for coefficients and 1 decimal for
percentages, is also written next to it and logged.
'''
import numpy
import pandas as pnd

from pra.logging.log_store import LogStore
from pra.io                import serialization as ser
from pra.generic.utilities import make_parent

log = LogStore.add_logger('pra:io:report')

FORMATS          = ['table', 'csv']
COEF_DECIMALS    = 3
PERCENT_DECIMALS = 1
#------------------------------------------
def header_lines(seed : int | None, config_hash : str, l_extra : list[str] | None = None) -> list[str]:
    '''
    Returns comment lines carried by every report, extra lines go after seed and hash
    '''
    l_line = [f'seed: {seed}', f'config_hash: {config_hash}']

    return l_line + list(l_extra or [])
#------------------------------------------
def _formatter(decimals : int):
    def _fmt(value) -> str:
        if isinstance(value, (bool, numpy.bool_)):
            return str(value)

        if isinstance(value, (int, numpy.integer)):
            return str(value)

        if value is None or (isinstance(value, float) and numpy.isnan(value)):
            return ''

        return f'{value:.{decimals}f}'

    return _fmt
#------------------------------------------
def format_table(df : pnd.DataFrame, d_decimal : dict[str,int] | None = None) -> str:
    '''
    Renders dataframe as aligned text

    d_decimal: Column -> number of decimals, float columns not listed get 3
    '''
    d_decimal = {} if d_decimal is None else d_decimal
    d_fmt     = {}
    for column in df.columns:
        if df[column].dtype == object and not df[column].map(lambda val : isinstance(val, float)).any():
            continue

        d_fmt[column] = _formatter(d_decimal.get(column, COEF_DECIMALS))

    return df.to_string(index=False, formatters=d_fmt, na_rep='')
#------------------------------------------
def emit(df         : pnd.DataFrame,
         out_dir    : str,
         name       : str,
         l_comment  : list[str],
         fmt        : str,
         d_decimal  : dict[str,int] | None = None) -> list[str]:
    '''
    Writes {out_dir}/{name}.csv and, with format `table`, {out_dir}/{name}.txt

    Returns paths written
    '''
    if fmt not in FORMATS:
        raise ValueError(f'Invalid format {fmt}, expected one of {FORMATS}')

    csv_path = f'{out_dir}/{name}.csv'
    ser.write_table(df, csv_path, l_comment)
    l_path   = [csv_path]
    if fmt == 'csv':
        return l_path

    text     = format_table(df, d_decimal)
    txt_path = f'{out_dir}/{name}.txt'
    make_parent(txt_path)
    with open(txt_path, 'w', encoding='utf-8') as ofile:
        for comment in l_comment:
            ofile.write(f'# {comment}\n')

        ofile.write(text + '\n')

    log.info(f'{name}:\n{text}')
    l_path.append(txt_path)
    log.debug(f'Wrote: {l_path}')

    return l_path
#------------------------------------------
def flows_decimals(df_flow : pnd.DataFrame) -> dict[str,int]:
    '''
    Decimals used when rendering the confusion table
    '''
    d_dec = { column : 0 for column in df_flow.columns }
    d_dec['Accuracy (%)'] = PERCENT_DECIMALS

    return d_dec
#------------------------------------------
def matrix_frame(mat : numpy.ndarray, l_label : list[str]) -> pnd.DataFrame:
    '''
    Square matrix as a frame with a label column, in the layout of ser.write_matrix
    '''
    df = pnd.DataFrame(numpy.asarray(mat, dtype=float), columns=l_label)
    df.insert(0, ser.CORNER, l_label)

    return df
