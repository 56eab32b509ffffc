'''
Module holding the race category set and the surname, first name and geography tables
used to build proxy race posteriors
'''
from dataclasses import dataclass

import numpy
import pandas as pnd

from pra.logging.log_store import LogStore
from pra.io                import serialization as ser
from pra.io.serialization  import LabelMismatch

log = LogStore.add_logger('pra:proxy:tables')

ROW_SUM_TOL = 1e-9
#------------------------------------------
class TableError(Exception):
    '''
    Raised when a probability or count table is invalid, names the offending row
    '''
#------------------------------------------
def normalize_key(text : str) -> str:
    '''
    Case folds name and drops every non alphabetic character, an empty string means missing
    '''
    if not isinstance(text, str):
        return ''

    return ''.join(char for char in text.casefold() if char.isalpha())
#------------------------------------------
@dataclass(frozen=True)
class RaceCategorySet:
    '''
    Ordered race categories, the order defines the column order of every vector and file
    '''
    labels : tuple[str, ...]
    #------------------------------------------
    def __post_init__(self):
        labels = tuple(str(label) for label in self.labels)
        object.__setattr__(self, 'labels', labels)

        if len(labels) < 2:
            raise ValueError(f'Need at least two categories, found: {labels}')

        if len(set(labels)) != len(labels):
            raise ValueError(f'Category labels are not unique: {labels}')
    #------------------------------------------
    @classmethod
    def default(cls) -> 'RaceCategorySet':
        '''
        Returns categories in the order of the North Carolina confusion table
        '''
        return cls(labels=('Asian', 'Black', 'Hispanic', 'Others', 'White'))
    #------------------------------------------
    @property
    def size(self) -> int:
        '''
        Number of categories
        '''
        return len(self.labels)
    #------------------------------------------
    def index(self, label : str) -> int:
        '''
        Returns position of label, raises LabelMismatch if absent
        '''
        if label not in self.labels:
            raise LabelMismatch(f'Label {label} not found in {self.labels}')

        return self.labels.index(label)
    #------------------------------------------
    def columns(self, prefix : str = '', suffix : str = '') -> list[str]:
        '''
        Returns column names made from labels, e.g. p_Asian, Asian_count
        '''
        return [ f'{prefix}{label}{suffix}' for label in self.labels ]
    #------------------------------------------
    def check_columns(self, l_column : list[str], prefix : str = '', suffix : str = '') -> None:
        '''
        Raises LabelMismatch unless l_column is exactly the label columns, in order
        '''
        l_expected = self.columns(prefix=prefix, suffix=suffix)
        if list(l_column) != l_expected:
            raise LabelMismatch(f'Expected columns {l_expected}, found {list(l_column)}')
#------------------------------------------
def _where(irow : int, arr_line : numpy.ndarray | None) -> str:
    if arr_line is None:
        return f'row {irow}'

    return f'line {arr_line[irow]}'
#------------------------------------------
class _KeyedTable:
    '''
    Base of the tables, a matrix with one row per key and one column per race
    '''
    kind       = 'table'
    key_column = 'key'
    prefix     = ''
    suffix     = ''
    #------------------------------------------
    def __init__(self,
                 races    : RaceCategorySet,
                 l_key    : list[str],
                 mat      : numpy.ndarray,
                 arr_line : numpy.ndarray | None = None):
        mat = numpy.array(mat, dtype=float)
        if mat.ndim != 2 or mat.shape != (len(l_key), races.size):
            raise TableError(f'{self.kind}: expected shape ({len(l_key)}, {races.size}), found {mat.shape}')

        l_key = [ self._clean_key(key) for key in l_key ]

        self._races    = races
        self._arr_line = arr_line
        self._mat      = mat

        self._check_keys(l_key)
        self._check_values()

        self._index    = pnd.Index(l_key)
        self._mat.flags.writeable = False
    #------------------------------------------
    def _clean_key(self, key : str) -> str:
        return normalize_key(key)
    #------------------------------------------
    def _check_keys(self, l_key : list[str]) -> None:
        d_seen : dict[str,int] = {}
        for irow, key in enumerate(l_key):
            if key == '':
                raise TableError(f'{self.kind}, {_where(irow, self._arr_line)}: empty key')

            if key in d_seen:
                raise TableError(f'{self.kind}, {_where(irow, self._arr_line)}: duplicated key "{key}"')

            d_seen[key] = irow
    #------------------------------------------
    def _check_values(self) -> None:
        arr_bad, _ = numpy.where(~numpy.isfinite(self._mat) | (self._mat < 0))
        if arr_bad.size == 0:
            return

        irow = int(arr_bad[0])
        raise TableError(f'{self.kind}, {_where(irow, self._arr_line)}: entries must be finite and nonnegative')
    #------------------------------------------
    @property
    def races(self) -> RaceCategorySet:
        '''
        Race categories of the columns
        '''
        return self._races
    #------------------------------------------
    @property
    def keys(self) -> list[str]:
        '''
        Normalized keys, in row order
        '''
        return list(self._index)
    #------------------------------------------
    @property
    def matrix(self) -> numpy.ndarray:
        '''
        Read only matrix with one row per key
        '''
        return self._mat
    #------------------------------------------
    def __len__(self) -> int:
        return len(self._index)
    #------------------------------------------
    def __contains__(self, key : str) -> bool:
        return self._clean_key(key) in self._index
    #------------------------------------------
    def get(self, key : str) -> numpy.ndarray | None:
        '''
        Returns copy of the vector for key, None when the key does not resolve
        '''
        key = self._clean_key(key)
        if key == '' or key not in self._index:
            return None

        irow = self._index.get_loc(key)

        return self._mat[irow].copy()
    #------------------------------------------
    def indexer(self, l_key : list[str] | pnd.Series) -> numpy.ndarray:
        '''
        Returns row positions of keys, -1 for the ones that do not resolve
        '''
        l_key = [ self._clean_key(key) for key in l_key ]

        return self._index.get_indexer(l_key)
    #------------------------------------------
    def to_frame(self) -> pnd.DataFrame:
        '''
        Returns table in the layout of its delimited file
        '''
        df = pnd.DataFrame(self._mat, columns=self._races.columns(prefix=self.prefix, suffix=self.suffix))
        df.insert(0, self.key_column, self.keys)

        return df
    #------------------------------------------
    def save(self, path : str) -> None:
        '''
        Writes table as delimited text
        '''
        ser.write_table(self.to_frame(), path)
#------------------------------------------
class SurnameTable(_KeyedTable):
    '''
    Map from surname to P(race | surname)
    '''
    kind       = 'surname table'
    key_column = 'surname'
    prefix     = 'p_'
    #------------------------------------------
    def _check_values(self) -> None:
        super()._check_values()

        arr_sum = self._mat.sum(axis=1)
        arr_bad,= numpy.where(numpy.abs(arr_sum - 1) > ROW_SUM_TOL)
        if arr_bad.size == 0:
            return

        irow = int(arr_bad[0])
        raise TableError(f'{self.kind}, {_where(irow, self._arr_line)}: probabilities add up to {arr_sum[irow]}')
    #------------------------------------------
    def smoothed(self, eps : float) -> 'SurnameTable':
        '''
        Returns table with eps added to every entry and rows normalized again
        '''
        mat = self._mat + eps
        mat = mat / mat.sum(axis=1, keepdims=True)

        return SurnameTable(self._races, self.keys, mat)
#------------------------------------------
class FirstNameTable(_KeyedTable):
    '''
    Map from first name to P(first name | race), rows are not normalized
    '''
    kind       = 'first name table'
    key_column = 'first'
    prefix     = 'l_'
    #------------------------------------------
    def smoothed(self, eps : float) -> 'FirstNameTable':
        '''
        Returns table with eps added to every entry
        '''
        return FirstNameTable(self._races, self.keys, self._mat + eps)
#------------------------------------------
class GeoTable(_KeyedTable):
    '''
    Population counts per region and race, provides P(region | race) and P(race | region)
    '''
    kind       = 'geo table'
    key_column = 'region'
    suffix     = '_count'
    #------------------------------------------
    def _clean_key(self, key : str) -> str:
        if not isinstance(key, str):
            return str(key)

        return key.strip()
    #------------------------------------------
    def geo_given_race(self) -> numpy.ndarray:
        '''
        Returns matrix (regions x races) with P(region | race), columns add up to 1
        '''
        arr_tot = self._mat.sum(axis=0)
        arr_bad,= numpy.where(arr_tot <= 0)
        if arr_bad.size > 0:
            label = self._races.labels[int(arr_bad[0])]
            raise TableError(f'{self.kind}: race {label} has no population')

        return self._mat / arr_tot
    #------------------------------------------
    def race_given_geo(self) -> numpy.ndarray:
        '''
        Returns matrix (regions x races) with P(race | region), empty regions get rows of zeros
        '''
        arr_tot = self._mat.sum(axis=1, keepdims=True)
        mat     = numpy.zeros_like(self._mat)
        numpy.divide(self._mat, arr_tot, out=mat, where=arr_tot > 0)

        return mat
    #------------------------------------------
    def totals(self) -> numpy.ndarray:
        '''
        Returns population per race, summed over regions
        '''
        return self._mat.sum(axis=0)
    #------------------------------------------
    def smoothed(self, eps : float) -> 'GeoTable':
        '''
        Returns table with eps added to every count
        '''
        return GeoTable(self._races, self.keys, self._mat + eps)
#------------------------------------------
@dataclass(frozen=True)
class ProxyTables:
    '''
    The three tables needed by the proxy, sharing one category set
    '''
    surname   : SurnameTable
    firstname : FirstNameTable
    geo       : GeoTable
    #------------------------------------------
    def __post_init__(self):
        l_races = [self.surname.races, self.firstname.races, self.geo.races]
        if any(races != self.surname.races for races in l_races):
            raise LabelMismatch(f'Tables use different categories: {[ races.labels for races in l_races ]}')
    #------------------------------------------
    @property
    def races(self) -> RaceCategorySet:
        '''
        Categories shared by the tables
        '''
        return self.surname.races
    #------------------------------------------
    def smoothed(self, eps : float) -> 'ProxyTables':
        '''
        Returns tables with additive smoothing, eps = 0 returns the same tables
        '''
        if eps < 0:
            raise ValueError(f'Smoothing must be nonnegative, found: {eps}')

        if eps == 0:
            return self

        log.info(f'Smoothing tables with eps={eps}')

        return ProxyTables(
                surname  = self.surname.smoothed(eps),
                firstname= self.firstname.smoothed(eps),
                geo      = self.geo.smoothed(eps))
    #------------------------------------------
    def save(self, out_dir : str) -> None:
        '''
        Writes surname.csv, first.csv and geo.csv to out_dir
        '''
        self.surname.save(f'{out_dir}/surname.csv')
        self.firstname.save(f'{out_dir}/first.csv')
        self.geo.save(f'{out_dir}/geo.csv')
#------------------------------------------
def _load(path : str, races : RaceCategorySet, kind : type[_KeyedTable]):
    df = ser.read_table(path)
    ser.check_columns(df, [kind.key_column] + races.columns(prefix=kind.prefix, suffix=kind.suffix))

    l_val = races.columns(prefix=kind.prefix, suffix=kind.suffix)
    mat   = ser.to_float(df, l_val)
    l_key = df[kind.key_column].tolist()

    try:
        table = kind(races, l_key, mat, arr_line=df.attrs['lines'])
    except TableError as exc:
        raise TableError(f'{path}: {exc}') from exc

    log.debug(f'Loaded {kind.kind} with {len(table)} rows from {path}')

    return table
#------------------------------------------
def load_surname_table(path : str, races : RaceCategorySet) -> SurnameTable:
    '''
    Reads file with columns surname,p_<label>...
    '''
    return _load(path, races, SurnameTable)
#------------------------------------------
def load_firstname_table(path : str, races : RaceCategorySet) -> FirstNameTable:
    '''
    Reads file with columns first,l_<label>...
    '''
    return _load(path, races, FirstNameTable)
#------------------------------------------
def load_geo_table(path : str, races : RaceCategorySet) -> GeoTable:
    '''
    Reads file with columns region,<label>_count...
    '''
    return _load(path, races, GeoTable)
#------------------------------------------
def load_tables(surname : str, firstname : str, geo : str, races : RaceCategorySet) -> ProxyTables:
    '''
    Reads the three tables
    '''
    return ProxyTables(
            surname  = load_surname_table(surname, races),
            firstname= load_firstname_table(firstname, races),
            geo      = load_geo_table(geo, races))
#------------------------------------------
