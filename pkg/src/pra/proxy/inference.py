'''
Module with the BISG and BIFSG posteriors, the fallback rules and the max-classification rule
'''
from enum        import Enum
from dataclasses import dataclass

import numpy
import pandas as pnd

from pra.logging.log_store import LogStore
from pra.proxy.tables      import ProxyTables, normalize_key
from pra.synth.records     import PopulationRecord

log = LogStore.add_logger('pra:proxy:inference')
#------------------------------------------
class ZeroEvidence(Exception):
    '''
    Raised when the evidence for every race is zero, or when the needed fallback is disabled
    '''
#------------------------------------------
class UnknownRegion(Exception):
    '''
    Raised when a region key is not found in the geography table
    '''
#------------------------------------------
class Mode(str, Enum):
    '''
    Information used to build a posterior
    '''
    BIFSG    = 'BIFSG'
    BISG     = 'BISG'
    GEO_ONLY = 'GEO_ONLY'
    FAILED   = 'FAILED'
#------------------------------------------
@dataclass(frozen=True)
class FallbackPolicy:
    '''
    Which reduced information posteriors can be used when names do not resolve
    '''
    allow_bisg     : bool = True
    allow_geo_only : bool = True
#------------------------------------------
@dataclass(frozen=True)
class ProxyPosterior:
    '''
    Posterior probabilities over races, with the information used and the max-classified race
    '''
    probs      : numpy.ndarray
    mode       : Mode
    argmax     : int
    tie_broken : bool
    #------------------------------------------
    @classmethod
    def from_probs(cls, probs : numpy.ndarray, mode : Mode) -> 'ProxyPosterior':
        '''
        Builds posterior from normalized probabilities, picking the argmax with the tie rule
        '''
        probs = numpy.array(probs, dtype=float)
        probs.flags.writeable = False
        arr_max, arr_tie = argmax_with_ties(probs[numpy.newaxis, :])

        return cls(probs=probs, mode=mode, argmax=int(arr_max[0]), tie_broken=bool(arr_tie[0]))
#------------------------------------------
def argmax_with_ties(mat : numpy.ndarray) -> tuple[numpy.ndarray, numpy.ndarray]:
    '''
    Takes matrix of posteriors, one row per individual
    Returns position of the maximum (lowest index among equal maxima) and flag for rows with tied maxima
    '''
    mat     = numpy.asarray(mat, dtype=float)
    arr_max = mat.max(axis=1, keepdims=True)
    is_max  = mat == arr_max

    return is_max.argmax(axis=1), is_max.sum(axis=1) > 1
#------------------------------------------
def _as_vector(arr : numpy.ndarray, size : int | None, name : str) -> numpy.ndarray:
    arr = numpy.asarray(arr, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f'{name} is not a vector')

    if size is not None and arr.size != size:
        raise ValueError(f'{name} has length {arr.size}, expected {size}')

    if numpy.any(arr < 0) or not numpy.all(numpy.isfinite(arr)):
        raise ValueError(f'{name} has negative or non finite entries')

    return arr
#------------------------------------------
def _normalize(prod : numpy.ndarray) -> numpy.ndarray:
    den = prod.sum()
    if den <= 0:
        raise ZeroEvidence('evidence is zero for every race')

    return prod / den
#------------------------------------------
def bisg_posterior(surname_probs : numpy.ndarray, geo_given_race : numpy.ndarray) -> ProxyPosterior:
    '''
    Combines P(race | surname) and P(region | race) into P(race | surname, region)
    '''
    arr_s = _as_vector(surname_probs ,       None, 'surname_probs')
    arr_g = _as_vector(geo_given_race, arr_s.size, 'geo_given_race')

    probs = _normalize(arr_s * arr_g)

    return ProxyPosterior.from_probs(probs, Mode.BISG)
#------------------------------------------
def bifsg_posterior(surname_probs        : numpy.ndarray,
                    firstname_likelihood : numpy.ndarray,
                    geo_given_race       : numpy.ndarray) -> ProxyPosterior:
    '''
    As bisg_posterior, with the likelihood P(first name | race) multiplied in
    '''
    arr_s = _as_vector(surname_probs       ,       None, 'surname_probs')
    arr_f = _as_vector(firstname_likelihood, arr_s.size, 'firstname_likelihood')
    arr_g = _as_vector(geo_given_race      , arr_s.size, 'geo_given_race')

    probs = _normalize(arr_s * arr_f * arr_g)

    return ProxyPosterior.from_probs(probs, Mode.BIFSG)
#------------------------------------------
def max_classify(posterior : ProxyPosterior) -> tuple[int, bool]:
    '''
    Returns index of most probable race and whether a tie was broken in favour of the lowest index
    '''
    arr_max, arr_tie = argmax_with_ties(posterior.probs[numpy.newaxis, :])

    return int(arr_max[0]), bool(arr_tie[0])
#------------------------------------------
def infer_individual(record : PopulationRecord, tables : ProxyTables, policy : FallbackPolicy | None = None) -> ProxyPosterior:
    '''
    Builds posterior with the most information available for this individual:

    BIFSG   : Surname and first name found in tables
    BISG    : Only surname found
    GEO_ONLY: Surname not found, posterior is the racial composition of the region
    '''
    policy = FallbackPolicy() if policy is None else policy
    region = str(record.region_key).strip()
    if region not in tables.geo:
        raise UnknownRegion(f'Region not found: "{record.region_key}"')

    mat_gr = tables.geo.geo_given_race()
    irow   = tables.geo.indexer([region])[0]
    arr_g  = mat_gr[irow]

    arr_s  = tables.surname.get(record.surname_key)
    arr_f  = tables.firstname.get(record.first_key)

    if arr_s is not None and arr_f is not None:
        return bifsg_posterior(arr_s, arr_f, arr_g)

    if arr_s is not None:
        if not policy.allow_bisg:
            raise ZeroEvidence('fallback disabled: first name not found')

        return bisg_posterior(arr_s, arr_g)

    if not policy.allow_geo_only:
        raise ZeroEvidence('fallback disabled: surname not found')

    probs = tables.geo.race_given_geo()[irow]

    return ProxyPosterior.from_probs(_normalize(probs), Mode.GEO_ONLY)
#------------------------------------------
def _rows(mat : numpy.ndarray, arr_idx : numpy.ndarray, has : numpy.ndarray) -> numpy.ndarray:
    out      = numpy.zeros((len(arr_idx), mat.shape[1]))
    out[has] = mat[arr_idx[has]]

    return out
#------------------------------------------
def infer_batch(df : pnd.DataFrame, tables : ProxyTables, policy : FallbackPolicy | None = None) -> pnd.DataFrame:
    '''
    Vectorized infer_individual

    df     : Frame with columns surname, first, region
    Returns: Frame with p_<label> columns, mode, argmax (label), argmax_index and tie_broken,
             rows with zero evidence, disabled fallback or unknown region have mode FAILED and NaN probabilities
    '''
    policy = FallbackPolicy() if policy is None else policy
    races  = tables.races
    nrow   = len(df)

    arr_surname = [ normalize_key(key) for key in df['surname'] ]
    arr_first   = [ normalize_key(key) for key in df['first'  ] ]
    arr_region  = [ str(key).strip()   for key in df['region' ] ]

    arr_is  = tables.surname.indexer(arr_surname)
    arr_if  = tables.firstname.indexer(arr_first)
    arr_ig  = tables.geo.indexer(arr_region)

    has_g   = arr_ig >= 0
    has_s   = arr_is >= 0
    has_f   = arr_if >= 0

    is_bifsg= has_g & has_s & has_f
    is_bisg = has_g & has_s & ~has_f
    is_geo  = has_g & ~has_s

    mat_gr  = tables.geo.geo_given_race()
    mat_rg  = tables.geo.race_given_geo()

    mat     = numpy.zeros((nrow, races.size))
    mat_g   = _rows(mat_gr                , arr_ig, has_g)
    mat_s   = _rows(tables.surname.matrix  , arr_is, has_s)
    mat_f   = _rows(tables.firstname.matrix, arr_if, has_f)

    mat[is_bifsg] = (mat_s * mat_f * mat_g)[is_bifsg]
    if policy.allow_bisg:
        mat[is_bisg] = (mat_s * mat_g)[is_bisg]

    if policy.allow_geo_only:
        mat[is_geo]  = _rows(mat_rg, arr_ig, has_g)[is_geo]

    arr_den = mat.sum(axis=1)
    is_ok   = arr_den > 0
    mat_pos = numpy.full((nrow, races.size), numpy.nan)
    mat_pos[is_ok] = mat[is_ok] / arr_den[is_ok, numpy.newaxis]

    arr_mode = numpy.full(nrow, Mode.FAILED.value, dtype=object)
    arr_mode[is_bifsg] = Mode.BIFSG.value
    arr_mode[is_bisg ] = Mode.BISG.value
    arr_mode[is_geo  ] = Mode.GEO_ONLY.value
    arr_mode[~is_ok  ] = Mode.FAILED.value

    arr_max = numpy.full(nrow, -1)
    arr_tie = numpy.zeros(nrow, dtype=bool)
    if is_ok.any():
        arr_max[is_ok], arr_tie[is_ok] = argmax_with_ties(mat_pos[is_ok])

    df_out = pnd.DataFrame(mat_pos, columns=races.columns(prefix='p_'), index=df.index)
    df_out['mode']        = arr_mode
    df_out['argmax']      = [ races.labels[imax] if imax >= 0 else '' for imax in arr_max ]
    df_out['argmax_index']= arr_max
    df_out['tie_broken']  = arr_tie

    nfail = int((~is_ok).sum())
    nunkn = int((~has_g).sum())
    log.debug(f'Modes: BIFSG={is_bifsg.sum()}, BISG={is_bisg.sum()}, GEO_ONLY={is_geo.sum()}')
    if nfail > 0:
        log.warning(f'Failed inference for {nfail} individuals, {nunkn} of them with unknown region')

    return df_out
#------------------------------------------
def failure_counts(df_post : pnd.DataFrame, df_in : pnd.DataFrame, tables : ProxyTables) -> tuple[int, int]:
    '''
    Takes output of infer_batch and its input
    Returns number of failed rows with unknown region and number with zero evidence
    '''
    is_fail = (df_post['mode'] == Mode.FAILED.value).to_numpy()
    arr_ig  = tables.geo.indexer([ str(key).strip() for key in df_in['region'] ])
    is_unkn = is_fail & (arr_ig < 0)

    return int(is_unkn.sum()), int(is_fail.sum() - is_unkn.sum())
#------------------------------------------
