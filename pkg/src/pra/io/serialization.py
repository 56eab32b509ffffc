'''
Module with functions reading and writing the delimited text files used by the package.

All files are UTF-8, comma separated, with a header row. Lines starting with `#` are
comments (reports carry the seed and configuration hash there) and are skipped when reading.
Floats are written with 17 significant digits, so that reading back gives the same values.
'''
import io

import numpy
import pandas as pnd

from pra.logging.log_store  import LogStore
from pra.generic.utilities  import make_parent

log = LogStore.add_logger('pra:io:serialization')

FLOAT_FORMAT = '%.17g'
CORNER       = 'pred/true'
#------------------------------------------
class ParseError(Exception):
    '''
    Raised when a delimited file cannot be interpreted, carries the path and 1-based line number
    '''
    def __init__(self, path : str, line : int | None, message : str):
        self.path    = path
        self.line    = line
        self.message = message

        where = f'{path}' if line is None else f'{path}:{line}'
        super().__init__(f'{where}: {message}')
#------------------------------------------
class LabelMismatch(Exception):
    '''
    Raised when the category labels of a file do not match the labels declared for the run
    '''
#------------------------------------------
def read_table(path : str) -> pnd.DataFrame:
    '''
    Reads delimited file as a dataframe of strings

    The original (1-based) line number of each row is stored in `df.attrs['lines']`
    '''
    try:
        with open(path, encoding='utf-8') as ifile:
            l_raw = ifile.read().splitlines()
    except FileNotFoundError as exc:
        raise ParseError(path, None, 'file not found') from exc

    l_line = []
    l_text = []
    for iline, text in enumerate(l_raw, start=1):
        if text.strip() == '' or text.startswith('#'):
            continue

        l_line.append(iline)
        l_text.append(text)

    if len(l_text) == 0:
        raise ParseError(path, None, 'no header row found')

    try:
        df = pnd.read_csv(io.StringIO('\n'.join(l_text)), dtype=str, keep_default_na=False)
    except pnd.errors.ParserError as exc:
        raise ParseError(path, None, str(exc)) from exc

    df.columns       = [ name.strip() for name in df.columns ]
    df.attrs['lines']= numpy.array(l_line[1:], dtype=int)
    df.attrs['path'] = path

    log.debug(f'Read {len(df)} rows from {path}')

    return df
#------------------------------------------
def line_of(df : pnd.DataFrame, irow : int) -> int | None:
    '''
    Returns line number in original file of row with position irow
    '''
    arr_line = df.attrs.get('lines')
    if arr_line is None or irow >= len(arr_line):
        return None

    return int(arr_line[irow])
#------------------------------------------
def check_columns(df : pnd.DataFrame, l_expected : list[str]) -> None:
    '''
    Raises LabelMismatch if the columns of the dataframe are not exactly the expected ones, in order
    '''
    l_found = list(df.columns)
    if l_found == l_expected:
        return

    path = df.attrs.get('path', '<memory>')
    raise LabelMismatch(f'{path}: expected columns {l_expected}, found {l_found}')
#------------------------------------------
def require_columns(df : pnd.DataFrame, l_name : list[str]) -> None:
    '''
    Raises ParseError if any of the columns is missing
    '''
    l_missing = [ name for name in l_name if name not in df.columns ]
    if len(l_missing) == 0:
        return

    path = df.attrs.get('path', '<memory>')
    raise ParseError(path, 1, f'missing columns: {l_missing}')
#------------------------------------------
def _to_number(text : str) -> float:
    try:
        return float(text)
    except ValueError:
        return numpy.nan
#------------------------------------------
def to_float(df : pnd.DataFrame, l_column : list[str]) -> numpy.ndarray:
    '''
    Converts columns to a float matrix of shape (rows, columns), raising ParseError naming the first bad line
    '''
    path  = df.attrs.get('path', '<memory>')
    l_arr = []
    for column in l_column:
        arr = numpy.array([ _to_number(text) for text in df[column] ], dtype=float)
        arr_bad, = numpy.where(~numpy.isfinite(arr))
        if arr_bad.size > 0:
            irow = int(arr_bad[0])
            raise ParseError(path, line_of(df, irow), f'invalid number in column {column}: "{df[column].iloc[irow]}"')

        l_arr.append(arr)

    if len(l_arr) == 0:
        return numpy.zeros((len(df), 0))

    return numpy.column_stack(l_arr)
#------------------------------------------
def to_int(df : pnd.DataFrame, column : str) -> numpy.ndarray:
    '''
    Converts column to integer array, raising ParseError naming the first bad line
    '''
    arr = to_float(df, [column])[:, 0]
    arr_bad, = numpy.where(arr != numpy.round(arr))
    if arr_bad.size > 0:
        irow = int(arr_bad[0])
        path = df.attrs.get('path', '<memory>')
        raise ParseError(path, line_of(df, irow), f'non integer value in column {column}')

    return arr.astype(int)
#------------------------------------------
def write_table(df : pnd.DataFrame, path : str, l_comment : list[str] | None = None) -> None:
    '''
    Writes dataframe as delimited text, floats with 17 significant digits

    l_comment: Lines written before the header, each prefixed with `# `
    '''
    make_parent(path)

    text = df.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    with open(path, 'w', encoding='utf-8') as ofile:
        for comment in l_comment or []:
            ofile.write(f'# {comment}\n')

        ofile.write(text)

    log.debug(f'Saved: {path}')
#------------------------------------------
def write_matrix(path : str, mat : numpy.ndarray, l_label : list[str], l_comment : list[str] | None = None) -> None:
    '''
    Writes square matrix with labeled rows (predicted class) and columns (true class)
    '''
    mat = numpy.asarray(mat)
    df  = pnd.DataFrame(mat, columns=l_label)
    df.insert(0, CORNER, l_label)

    write_table(df, path, l_comment)
#------------------------------------------
def read_matrix(path : str, l_label : list[str]) -> numpy.ndarray:
    '''
    Reads square matrix written by write_matrix, checking row and column labels against l_label
    '''
    df = read_table(path)
    check_columns(df, [CORNER] + l_label)

    l_row = [ name.strip() for name in df[CORNER] ]
    if l_row != l_label:
        raise LabelMismatch(f'{path}: expected row labels {l_label}, found {l_row}')

    return to_float(df, l_label)
#------------------------------------------
def write_vector(path : str, arr_val : numpy.ndarray, l_label : list[str], column : str = 'value', l_comment : list[str] | None = None) -> None:
    '''
    Writes per category vector as `category,<column>` rows, in label order
    '''
    df = pnd.DataFrame({'category' : l_label, column : numpy.asarray(arr_val, dtype=float)})

    write_table(df, path, l_comment)
#------------------------------------------
def read_vector(path : str, l_label : list[str], column : str | None = None) -> numpy.ndarray:
    '''
    Reads per category vector written by write_vector, the categories must follow l_label.
    If column is None, the second column of the file is used
    '''
    df = read_table(path)
    require_columns(df, ['category'])
    if column is None:
        if len(df.columns) < 2:
            raise ParseError(path, 1, 'no value column found')

        column = df.columns[1]

    require_columns(df, [column])
    l_cat = [ name.strip() for name in df['category'] ]
    if l_cat != l_label:
        raise LabelMismatch(f'{path}: expected categories {l_label}, found {l_cat}')

    return to_float(df, [column])[:, 0]
#------------------------------------------
