'''
Module used to generate synthetic populations of insured individuals, with regions of
varying racial homogeneity and socioeconomic status, and the proxy tables consistent with them.
It also ingests microdata with the columns of the voter file matched to insurance premiums.
'''
import os
from dataclasses import dataclass, field, asdict

import numpy
import pandas as pnd

from pra.logging.log_store import LogStore
from pra.generic           import utilities as gut
from pra.io                import serialization as ser
from pra.proxy.tables      import RaceCategorySet, SurnameTable, FirstNameTable, GeoTable, ProxyTables, normalize_key
from pra.synth.records     import AGE_BANDS, GENDERS, SES_NAMES, RECORD_COLUMNS, PopulationRecord, records_from_frame

log = LogStore.add_logger('pra:synth:population')

SHARE_TOL   = 1e-9
FIRST_ZIP   = 27001
POOL_WIDTH  = 3
MAX_AGE     = 75
# --------------------------------
class InvalidConfig(Exception):
    '''
    Raised when a scenario is not valid, names the offending field
    '''
    def __init__(self, field_name : str, message : str):
        self.field   = field_name
        self.message = message
        super().__init__(f'{field_name}: {message}')
# --------------------------------
@dataclass(frozen=True)
class ScenarioConfig:
    '''
    Settings of a synthetic population, built from a mapping with `from_dict`

    homogeneity : Either {low, high}, sampled uniformly per region, or {values: [...]}, one value per region
    dominant    : Race label -> weight, fraction of regions dominated by each race
    ses         : baseline, slope, jitter (per SES variable) and tilt (per race) of the SES index
    names       : Pool sizes and sharpness, the probability of carrying a name specific to the race
    coverage    : Rate of surnames missing in tables (base, ppov_link, latent_link) and of first names (first_base)
    geo_fidelity: Weight of the true composition in the emitted geography table, the rest is the statewide one
    premium     : base, age (band -> effect), gender (M -> effect), ses (variable -> slope), latent, race_effect, beta, noise_sd
    '''
    labels       : tuple[str, ...]
    shares       : tuple[float, ...]
    nregion      : int
    region_size  : int
    seed         : int
    dominant     : dict = field(default_factory=dict)
    homogeneity  : dict = field(default_factory=lambda : {'low' : 0.0, 'high' : 0.0})
    ses          : dict = field(default_factory=dict)
    names        : dict = field(default_factory=dict)
    coverage     : dict = field(default_factory=dict)
    geo_fidelity : float = 1.0
    latent_sd    : float = 0.0
    premium      : dict = field(default_factory=dict)
    # --------------------------------
    @classmethod
    def from_dict(cls, cfg : dict) -> 'ScenarioConfig':
        '''
        Builds validated scenario from mapping, e.g. loaded from YAML
        '''
        for name in ['labels', 'shares', 'nregion', 'region_size', 'seed']:
            if cfg.get(name) is None:
                raise InvalidConfig(name, 'missing')

        known   = set(cls.__dataclass_fields__)
        unknown = set(cfg) - known
        if len(unknown) > 0:
            raise InvalidConfig(sorted(unknown)[0], 'unknown field')

        d_cfg = dict(cfg)
        d_cfg['labels'] = tuple(d_cfg['labels'])
        d_cfg['shares'] = tuple(float(val) for val in d_cfg['shares'])

        scenario = cls(**d_cfg)
        scenario.validate()

        return scenario
    # --------------------------------
    def to_dict(self) -> dict:
        '''
        Returns mapping that from_dict turns back into this scenario
        '''
        d_cfg = asdict(self)
        d_cfg['labels'] = list(self.labels)
        d_cfg['shares'] = list(self.shares)

        return d_cfg
    # --------------------------------
    def with_updates(self, d_over : dict) -> 'ScenarioConfig':
        '''
        Returns scenario with entries of d_over merged on top
        '''
        return ScenarioConfig.from_dict(gut.update_config(self.to_dict(), d_over))
    # --------------------------------
    @property
    def races(self) -> RaceCategorySet:
        '''
        Categories of the scenario
        '''
        return RaceCategorySet(labels=self.labels)
    # --------------------------------
    def _check_rate(self, name : str, value) -> None:
        if not isinstance(value, (int, float)) or not 0 <= value <= 1:
            raise InvalidConfig(name, f'expected value in [0, 1], found {value}')
    # --------------------------------
    def _check_labels(self, name : str, d_val : dict) -> None:
        if not isinstance(d_val, dict):
            raise InvalidConfig(name, 'expected a mapping')

        for label in d_val:
            if label not in self.labels:
                raise InvalidConfig(name, f'unknown race {label}')
    # --------------------------------
    def validate(self) -> None:
        '''
        Raises InvalidConfig naming the first invalid field
        '''
        try:
            _ = self.races
        except ValueError as exc:
            raise InvalidConfig('labels', str(exc)) from exc

        arr_share = numpy.array(self.shares)
        if arr_share.shape != (len(self.labels),):
            raise InvalidConfig('shares', f'expected {len(self.labels)} values')

        if numpy.any(arr_share <= 0) or abs(arr_share.sum() - 1) > SHARE_TOL:
            raise InvalidConfig('shares', 'must be positive and add up to 1')

        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise InvalidConfig('seed', f'expected integer, found {self.seed}')

        for name in ['nregion', 'region_size']:
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise InvalidConfig(name, f'expected positive integer, found {value}')

        self._check_labels('dominant', self.dominant)
        if any(weight < 0 for weight in self.dominant.values()):
            raise InvalidConfig('dominant', 'weights must be nonnegative')

        self._validate_homogeneity()
        self._validate_ses()

        for name in ['surname_sharpness', 'first_sharpness']:
            self._check_rate(f'names.{name}', self.names.get(name, 0.0))

        for name in ['surname_pool', 'first_pool', 'common_pool']:
            value = self.names.get(name, 10)
            if not isinstance(value, int) or not 1 <= value <= 26 ** POOL_WIDTH:
                raise InvalidConfig(f'names.{name}', f'invalid pool size {value}')

        for name in ['base', 'first_base']:
            self._check_rate(f'coverage.{name}', self.coverage.get(name, 0.0))

        self._check_rate('geo_fidelity', self.geo_fidelity)
        if self.latent_sd < 0:
            raise InvalidConfig('latent_sd', 'must be nonnegative')

        self._validate_premium()
    # --------------------------------
    def _validate_homogeneity(self) -> None:
        if 'values' in self.homogeneity:
            l_val = self.homogeneity['values']
            if len(l_val) != self.nregion:
                raise InvalidConfig('homogeneity', f'expected {self.nregion} values, found {len(l_val)}')

            for value in l_val:
                self._check_rate('homogeneity', value)

            return

        low  = self.homogeneity.get('low' , 0.0)
        high = self.homogeneity.get('high', 0.0)
        self._check_rate('homogeneity', low)
        self._check_rate('homogeneity', high)
        if low > high:
            raise InvalidConfig('homogeneity', f'low={low} above high={high}')

        if high > 0 and sum(self.dominant.values()) <= 0:
            raise InvalidConfig('dominant', 'homogeneous regions need at least one dominant race')
    # --------------------------------
    def _validate_ses(self) -> None:
        for section in ['baseline', 'slope', 'jitter']:
            d_val = self.ses.get(section, {})
            for name in d_val:
                if name not in SES_NAMES:
                    raise InvalidConfig(f'ses.{section}', f'unknown variable {name}')

        if any(value < 0 for value in self.ses.get('jitter', {}).values()):
            raise InvalidConfig('ses.jitter', 'must be nonnegative')

        self._check_labels('ses.tilt', self.ses.get('tilt', {}))
    # --------------------------------
    def _validate_premium(self) -> None:
        kind = self.premium.get('race_effect', 'direct')
        if kind not in ['direct', 'indirect']:
            raise InvalidConfig('premium.race_effect', f'expected direct or indirect, found {kind}')

        self._check_labels('premium.beta', self.premium.get('beta', {}))
        for band in self.premium.get('age', {}):
            if band not in AGE_BANDS:
                raise InvalidConfig('premium.age', f'unknown age band {band}')

        for gender in self.premium.get('gender', {}):
            if gender not in GENDERS:
                raise InvalidConfig('premium.gender', f'unknown gender {gender}')

        for name in self.premium.get('ses', {}):
            if name not in SES_NAMES:
                raise InvalidConfig('premium.ses', f'unknown variable {name}')

        if self.premium.get('noise_sd', 0.0) < 0:
            raise InvalidConfig('premium.noise_sd', 'must be nonnegative')
# --------------------------------
@dataclass
class Population:
    '''
    Generated or ingested population

    records : One row per individual, columns in RECORD_COLUMNS
    regions : One row per region, with composition, SES and unobserved factor
    tables  : Surname, first name and geography tables consistent with the records
    '''
    records : pnd.DataFrame
    regions : pnd.DataFrame
    tables  : ProxyTables | None
    races   : RaceCategorySet
    # --------------------------------
    def to_records(self) -> list[PopulationRecord]:
        '''
        Returns individuals as PopulationRecord objects
        '''
        return records_from_frame(self.records)
    # --------------------------------
    def save(self, out_dir : str, l_comment : list[str] | None = None) -> None:
        '''
        Writes population.csv, regions.csv and, if available, the tables to out_dir
        '''
        os.makedirs(out_dir, exist_ok=True)
        ser.write_table(self.records, f'{out_dir}/population.csv', l_comment)
        ser.write_table(self.regions, f'{out_dir}/regions.csv'   , l_comment)
        if self.tables is not None:
            self.tables.save(out_dir)

        log.info(f'Saved population with {len(self.records)} individuals to {out_dir}')
# --------------------------------
def load_scenario(name : str) -> ScenarioConfig:
    '''
    Takes path to YAML file, or path relative to pra_data, e.g. synth/default.yaml
    '''
    cfg = gut.load_config(name) if os.path.isfile(name) else gut.load_data_config(name)

    return ScenarioConfig.from_dict(cfg)
# --------------------------------
def _alpha(index : int) -> str:
    '''
    Encodes index in fixed width letters, aaa, aab...
    '''
    text = ''
    for _ in range(POOL_WIDTH):
        index, rem = divmod(index, 26)
        text       = chr(ord('a') + rem) + text

    return text
# --------------------------------
def _pool(prefix : str, size : int) -> numpy.ndarray:
    return numpy.array([ f'{prefix}{_alpha(index)}' for index in range(size) ], dtype=object)
# --------------------------------
def _dominant_races(cfg : ScenarioConfig, rng : numpy.random.Generator) -> numpy.ndarray:
    '''
    Assigns to each region the race it drifts towards, regions per race follow the weights
    (largest remainder rounding) in shuffled order
    '''
    if sum(cfg.dominant.values()) <= 0:
        return numpy.full(cfg.nregion, -1)

    l_label  = [ label for label in cfg.labels if cfg.dominant.get(label, 0) > 0 ]
    arr_wgt  = numpy.array([ cfg.dominant[label] for label in l_label ], dtype=float)
    arr_exp  = cfg.nregion * arr_wgt / arr_wgt.sum()
    arr_num  = numpy.floor(arr_exp).astype(int)
    arr_ord  = numpy.argsort(-(arr_exp - arr_num), kind='stable')
    arr_num[arr_ord[:cfg.nregion - arr_num.sum()]] += 1

    arr_dom  = numpy.repeat([ cfg.labels.index(label) for label in l_label ], arr_num)

    return rng.permutation(arr_dom)
# --------------------------------
def _homogeneity(cfg : ScenarioConfig, rng : numpy.random.Generator) -> numpy.ndarray:
    if 'values' in cfg.homogeneity:
        return numpy.array(cfg.homogeneity['values'], dtype=float)

    low  = cfg.homogeneity.get('low' , 0.0)
    high = cfg.homogeneity.get('high', 0.0)

    return rng.uniform(low, high, size=cfg.nregion)
# --------------------------------
def _regions(cfg : ScenarioConfig) -> pnd.DataFrame:
    '''
    Draws region level quantities: composition dial, SES, unobserved factor and rate of unmatched surnames
    '''
    rng      = numpy.random.default_rng([cfg.seed, 0])
    nlab     = len(cfg.labels)
    arr_pi   = numpy.array(cfg.shares)
    arr_dom  = _dominant_races(cfg, rng)
    arr_hom  = _homogeneity(cfg, rng)

    mat_tgt  = numpy.tile(arr_pi, (cfg.nregion, 1))
    is_dom   = arr_dom >= 0
    mat_tgt[is_dom] = numpy.eye(nlab)[arr_dom[is_dom]]
    mat_q    = (1 - arr_hom[:, numpy.newaxis]) * arr_pi + arr_hom[:, numpy.newaxis] * mat_tgt

    arr_tilt = numpy.array([ cfg.ses.get('tilt', {}).get(label, 0.0) for label in cfg.labels ])
    arr_ses  = (mat_q - arr_pi) @ arr_tilt

    df = pnd.DataFrame({'region' : [ f'{FIRST_ZIP + ireg:05d}' for ireg in range(cfg.nregion) ]})
    df['dominant']    = [ cfg.labels[idom] if idom >= 0 else '' for idom in arr_dom ]
    df['homogeneity'] = arr_hom
    for ilab, label in enumerate(cfg.labels):
        df[f'q_{label}'] = mat_q[:, ilab]

    df['ses_index'] = arr_ses
    for name in SES_NAMES:
        base   = cfg.ses.get('baseline', {}).get(name, 0.0)
        slope  = cfg.ses.get('slope'   , {}).get(name, 0.0)
        jitter = cfg.ses.get('jitter'  , {}).get(name, 0.0)
        arr    = base + slope * arr_ses + jitter * rng.standard_normal(cfg.nregion)
        if name in ['PPOV', 'PUNEMP']:
            arr = numpy.clip(arr, 0, 1)
        else:
            arr = numpy.clip(arr, 0, None)

        df[name] = arr

    df['latent'] = cfg.latent_sd * rng.standard_normal(cfg.nregion)

    ppov_0 = cfg.ses.get('baseline', {}).get('PPOV', 0.0)
    arr_u  = cfg.coverage.get('base', 0.0)
    arr_u  = arr_u + cfg.coverage.get('ppov_link'  , 0.0) * (df['PPOV'] - ppov_0)
    arr_u  = arr_u + cfg.coverage.get('latent_link', 0.0) * df['latent']
    df['unmatched_rate'] = numpy.clip(arr_u, 0, 1)

    return df
# --------------------------------
def _draw_names(cfg      : ScenarioConfig,
                arr_race : numpy.ndarray,
                rate     : float,
                rng      : numpy.random.Generator) -> tuple[numpy.ndarray, numpy.ndarray]:
    '''
    Draws surnames and first names for the members of one region
    '''
    d_name   = cfg.names
    nind     = arr_race.size
    l_lab    = [ normalize_key(label) for label in cfg.labels ]

    l_names  = []
    for kind, sharp, pool, miss in [('sur', d_name.get('surname_sharpness', 0.0), d_name.get('surname_pool', 10),                          rate),
                                    ('fst', d_name.get(  'first_sharpness', 0.0), d_name.get(  'first_pool', 10), cfg.coverage.get('first_base', 0.0))]:
        mat_own  = numpy.array([ _pool(f'{lab}{kind}', pool) for lab in l_lab ])
        arr_com  = _pool(f'com{kind}', d_name.get('common_pool', 10))
        arr_unk  = _pool(f'unk{kind}', d_name.get('common_pool', 10))

        is_own   = rng.random(nind) < sharp
        is_miss  = rng.random(nind) < miss
        arr_iown = rng.integers(0, pool        , size=nind)
        arr_icom = rng.integers(0, arr_com.size, size=nind)

        arr_key  = numpy.where(is_own, mat_own[arr_race, arr_iown], arr_com[arr_icom])
        arr_key  = numpy.where(is_miss, arr_unk[arr_icom], arr_key)
        l_names.append(arr_key)

    arr_sur, arr_fst = l_names
    # Unmatched surnames come with unmatched first names
    is_unk  = numpy.char.startswith(arr_sur.astype(str), 'unk')
    arr_fst = numpy.where(is_unk, numpy.char.replace(arr_sur.astype(str), 'unksur', 'unkfst').astype(object), arr_fst)

    return arr_sur, arr_fst
# --------------------------------
def _individuals(cfg : ScenarioConfig, df_reg : pnd.DataFrame) -> pnd.DataFrame:
    '''
    Draws members of each region, with a substream per region
    '''
    l_df  = []
    mat_q = df_reg[[ f'q_{label}' for label in cfg.labels ]].to_numpy()
    for ireg, row in enumerate(df_reg.itertuples(index=False)):
        rng      = numpy.random.default_rng([cfg.seed, 1, ireg])
        arr_cnt  = rng.multinomial(cfg.region_size, mat_q[ireg] / mat_q[ireg].sum())
        arr_race = numpy.repeat(numpy.arange(len(cfg.labels)), arr_cnt)

        arr_sur, arr_fst = _draw_names(cfg, arr_race, row.unmatched_rate, rng)

        df = pnd.DataFrame({
            'region'     : row.region,
            'surname'    : arr_sur,
            'first'      : arr_fst,
            'race'       : arr_race,
            'race_code'  : numpy.array(cfg.labels, dtype=object)[arr_race],
            'gender_code': numpy.array(GENDERS   , dtype=object)[rng.integers(0, len(GENDERS)  , size=arr_race.size)],
            'age_range'  : numpy.array(AGE_BANDS , dtype=object)[rng.integers(0, len(AGE_BANDS), size=arr_race.size)]})
        for name in SES_NAMES:
            df[name] = getattr(row, name)

        l_df.append(df)

    df = pnd.concat(l_df, ignore_index=True)
    df.insert(0, 'id', numpy.arange(len(df)))

    return df
# --------------------------------
def assign_premiums(df_rec : pnd.DataFrame, df_reg : pnd.DataFrame, cfg : ScenarioConfig) -> pnd.DataFrame:
    '''
    Returns copy of records with `average_premium`:

    base + age effect + gender effect + SES slopes x (SES - baseline) + latent slope x latent factor
         + race term + gaussian noise

    The race term is beta of the individual's race for `direct` and the region's racial
    composition averaged with beta for `indirect`, where race acts only through the region
    '''
    d_prm  = cfg.premium
    rng    = numpy.random.default_rng([cfg.seed, 2])
    df_rec = df_rec.copy()
    df_idx = df_reg.set_index('region')

    arr_prm = numpy.full(len(df_rec), float(d_prm.get('base', 0.0)))
    arr_prm = arr_prm + df_rec['age_range'  ].map(lambda band : d_prm.get('age'   , {}).get(band, 0.0)).to_numpy(dtype=float)
    arr_prm = arr_prm + df_rec['gender_code'].map(lambda gend : d_prm.get('gender', {}).get(gend, 0.0)).to_numpy(dtype=float)

    for name, slope in d_prm.get('ses', {}).items():
        base    = cfg.ses.get('baseline', {}).get(name, 0.0)
        arr_prm = arr_prm + slope * (df_rec[name].to_numpy(dtype=float) - base)

    arr_lat = df_idx.loc[df_rec['region'], 'latent'].to_numpy(dtype=float)
    arr_prm = arr_prm + d_prm.get('latent', 0.0) * arr_lat

    arr_beta = numpy.array([ d_prm.get('beta', {}).get(label, 0.0) for label in cfg.labels ])
    if d_prm.get('race_effect', 'direct') == 'direct':
        arr_prm = arr_prm + arr_beta[df_rec['race'].to_numpy()]
    else:
        mat_q   = df_idx.loc[df_rec['region'], [ f'q_{label}' for label in cfg.labels ]].to_numpy()
        arr_prm = arr_prm + mat_q @ arr_beta

    noise = d_prm.get('noise_sd', 0.0)
    if noise > 0:
        arr_prm = arr_prm + noise * rng.standard_normal(len(df_rec))

    df_rec['average_premium'] = arr_prm

    return df_rec
# --------------------------------
def _geo_table(cfg : ScenarioConfig, df_rec : pnd.DataFrame, df_reg : pnd.DataFrame) -> GeoTable:
    '''
    Counts per region and race, blended with the statewide composition when geo_fidelity < 1
    '''
    nlab    = len(cfg.labels)
    df_cnt  = pnd.crosstab(df_rec['region'], df_rec['race']).reindex(index=df_reg['region'].tolist(), columns=range(nlab), fill_value=0)
    mat_cnt = df_cnt.to_numpy(dtype=float)

    phi = cfg.geo_fidelity
    if phi < 1:
        arr_tot = mat_cnt.sum(axis=1, keepdims=True)
        arr_pi  = mat_cnt.sum(axis=0) / mat_cnt.sum()
        mat_cnt = (1 - phi) * arr_tot * arr_pi + phi * mat_cnt

    return GeoTable(cfg.races, df_reg['region'].tolist(), mat_cnt)
# --------------------------------
def _name_tables(cfg : ScenarioConfig, df_rec : pnd.DataFrame) -> tuple[SurnameTable, FirstNameTable]:
    '''
    Tables with the frequencies of the drawn names. Names of the common pool are pooled, so that they
    are uninformative beyond the composition of their holders. Unmatched names are left out
    '''
    nlab     = len(cfg.labels)
    arr_tot  = numpy.bincount(df_rec['race'].to_numpy(), minlength=nlab).astype(float)

    l_table  = []
    for column, prefix in [('surname', 'comsur'), ('first', 'comfst')]:
        df_key  = df_rec[[column, 'race']]
        df_key  = df_key[~df_key[column].str.startswith('unk')]
        is_com  = df_key[column].str.startswith(prefix)

        df_cnt  = pnd.crosstab(df_key[column], df_key['race']).reindex(columns=range(nlab), fill_value=0).sort_index()
        mat_cnt = df_cnt.to_numpy(dtype=float)
        arr_com = df_cnt.index.str.startswith(prefix)
        if arr_com.any():
            arr_pool = df_key.loc[is_com, 'race'].to_numpy()
            arr_pool = numpy.bincount(arr_pool, minlength=nlab).astype(float)
            mat_cnt[arr_com] = arr_pool / arr_com.sum()

        if column == 'surname':
            mat = mat_cnt / mat_cnt.sum(axis=1, keepdims=True)
            l_table.append(SurnameTable(cfg.races, df_cnt.index.tolist(), mat))
            continue

        mat = numpy.zeros_like(mat_cnt)
        numpy.divide(mat_cnt, arr_tot, out=mat, where=arr_tot > 0)
        l_table.append(FirstNameTable(cfg.races, df_cnt.index.tolist(), mat))

    return l_table[0], l_table[1]
# --------------------------------
@gut.timeit
def generate_population(cfg : ScenarioConfig) -> Population:
    '''
    Generates individuals, premiums and the proxy tables of a scenario
    '''
    log.info(f'Generating {cfg.nregion} regions with {cfg.region_size} individuals each, seed {cfg.seed}')

    df_reg = _regions(cfg)
    df_rec = _individuals(cfg, df_reg)
    df_rec = assign_premiums(df_rec, df_reg, cfg)
    df_rec = df_rec[RECORD_COLUMNS]

    nlab   = len(cfg.labels)
    df_cnt = pnd.crosstab(df_rec['region'], df_rec['race']).reindex(index=df_reg['region'].tolist(), columns=range(nlab), fill_value=0)
    for ilab, label in enumerate(cfg.labels):
        df_reg[f'{label}_count'] = df_cnt[ilab].to_numpy()

    geo          = _geo_table(cfg, df_rec, df_reg)
    sur, fst     = _name_tables(cfg, df_rec)
    tables       = ProxyTables(surname=sur, firstname=fst, geo=geo)

    return Population(records=df_rec, regions=df_reg, tables=tables, races=cfg.races)
# --------------------------------
def _age_band(age : int) -> str:
    if age < 25:
        return AGE_BANDS[0]

    if age >= MAX_AGE:
        return AGE_BANDS[-1]

    low = 25 + 5 * ((age - 25) // 5)

    return f'{low}-{low + 4}'
# --------------------------------
def _consolidate_race(race_code : str, ethnic_code : str) -> str:
    if ethnic_code == 'HL':
        return 'Hispanic'

    return {'A' : 'Asian', 'B' : 'Black', 'W' : 'White'}.get(race_code, 'Others')
# --------------------------------
def load_microdata(path : str, races : RaceCategorySet | None = None) -> Population:
    '''
    Reads individual level data with the columns of the voter file matched to premiums:

    zip_code, surname, first, race_code, ethnic_code, gender_code, age_at_year_end or age_range,
    average_premium, MEDFAMINC, PPOV, PUNEMP

    Drops individuals with undesignated race and ethnicity, undesignated gender and ages outside [18, 75].
    Returns population without tables
    '''
    races = RaceCategorySet.default() if races is None else races
    if races != RaceCategorySet.default():
        raise ser.LabelMismatch(f'Microdata categories are {RaceCategorySet.default().labels}, found {races.labels}')

    df = ser.read_table(path)
    ser.require_columns(df, ['zip_code', 'surname', 'first', 'race_code', 'ethnic_code', 'gender_code', 'average_premium'] + SES_NAMES)
    if 'age_range' not in df.columns and 'age_at_year_end' not in df.columns:
        ser.require_columns(df, ['age_at_year_end'])

    arr_prm = ser.to_float(df, ['average_premium'] + SES_NAMES)
    nraw    = len(df)

    df_out  = pnd.DataFrame({
        'region'     : df['zip_code'].str.strip().to_numpy(),
        'surname'    : df['surname'].to_numpy(),
        'first'      : df['first'].to_numpy(),
        'race_code'  : [ _consolidate_race(race.strip(), eth.strip()) for race, eth in zip(df['race_code'], df['ethnic_code']) ],
        'gender_code': df['gender_code'].str.strip().to_numpy()})

    is_undesignated = (df['race_code'].str.strip() == 'U') & df['ethnic_code'].str.strip().isin(['UN', 'U', ''])
    is_keep         = ~is_undesignated.to_numpy() & df_out['gender_code'].isin(GENDERS).to_numpy()

    if 'age_at_year_end' in df.columns:
        arr_age = ser.to_int(df, 'age_at_year_end')
        is_keep&= (arr_age >= 18) & (arr_age <= MAX_AGE)
        df_out['age_range'] = [ _age_band(age) for age in arr_age ]
    else:
        df_out['age_range'] = df['age_range'].str.strip().to_numpy()
        is_keep&= df_out['age_range'].isin(AGE_BANDS).to_numpy()

    df_out['average_premium'] = arr_prm[:, 0]
    for icol, name in enumerate(SES_NAMES):
        df_out[name] = arr_prm[:, icol + 1]

    df_out = df_out[is_keep].reset_index(drop=True)
    df_out['race'] = [ races.index(label) for label in df_out['race_code'] ]
    df_out.insert(0, 'id', numpy.arange(len(df_out)))
    df_out = df_out[RECORD_COLUMNS]

    log.info(f'Kept {len(df_out)}/{nraw} individuals from {path}')

    df_reg = df_out.groupby('region', sort=True)[SES_NAMES].first().reset_index()

    return Population(records=df_out, regions=df_reg, tables=None, races=races)
# --------------------------------
def load_population(path : str, races : RaceCategorySet) -> Population:
    '''
    Reads population.csv written by Population.save, regions.csv is read from the same directory when present
    '''
    df = ser.read_table(path)
    ser.require_columns(df, RECORD_COLUMNS)

    df_rec = df[RECORD_COLUMNS].copy()
    df_rec['id']   = ser.to_int(df, 'id')
    df_rec['race'] = ser.to_int(df, 'race')
    arr_val = ser.to_float(df, ['average_premium'] + SES_NAMES)
    for icol, name in enumerate(['average_premium'] + SES_NAMES):
        df_rec[name] = arr_val[:, icol]

    l_bad = sorted(set(df_rec['race_code']) - set(races.labels))
    if len(l_bad) > 0:
        raise ser.LabelMismatch(f'{path}: races {l_bad} not in {races.labels}')

    reg_path = f'{os.path.dirname(path)}/regions.csv'
    if os.path.isfile(reg_path):
        df_reg = ser.read_table(reg_path)
    else:
        df_reg = df_rec.groupby('region', sort=True)[SES_NAMES].first().reset_index()

    return Population(records=df_rec, regions=df_reg, tables=None, races=races)
# --------------------------------
