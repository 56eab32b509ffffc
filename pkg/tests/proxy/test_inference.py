'''
Module with tests for the BISG and BIFSG posteriors and the max-classification rule
'''
import numpy
import pandas as pnd
import pytest

from pra.logging.log_store import LogStore
from pra.proxy             import inference as inf
from pra.proxy.tables      import GeoTable, ProxyTables
from pra.synth.records     import PopulationRecord
from pra.testing           import utilities as ut

log = LogStore.add_logger('pra:tests:test_inference')
# ----------------------------------------------
class Data:
    '''
    Class used to hold shared data
    '''
    tables = ut.toy_tables()
    ntrial = 200
# ----------------------------------------------
@pytest.fixture(scope='module', autouse=True)
def _initialize():
    LogStore.set_level('pra:proxy:inference', 10)
# ----------------------------------------------
def _record(surname : str, first : str, region : str) -> PopulationRecord:
    return PopulationRecord(
            id          = 0,
            true_race   = 0,
            surname_key = surname,
            first_key   = first,
            region_key  = region,
            age_band    = '25-29',
            gender      = 'F',
            premium     = 100.,
            ses         = (60000., 0.1, 0.05))
# ----------------------------------------------
@pytest.mark.parametrize('arr_s, arr_g, expected', [
    ([1.0, 0.0], [0.2, 0.4], [1.0, 0.0]),
    ([0.5, 0.5], [0.3, 0.3], [0.5, 0.5]),
    ([0.8, 0.2], [0.1, 0.3], [0.08 / 0.14, 0.06 / 0.14])])
def test_bisg(arr_s : list[float], arr_g : list[float], expected : list[float]):
    '''
    Posterior is the normalized product of P(race | surname) and P(region | race)
    '''
    post = inf.bisg_posterior(numpy.array(arr_s), numpy.array(arr_g))

    assert post.mode == inf.Mode.BISG
    assert numpy.allclose(post.probs, expected, rtol=0, atol=1e-12)
    assert abs(post.probs.sum() - 1) < 1e-9
# ----------------------------------------------
def test_bisg_example_argmax():
    '''
    Max-classification of the (0.5714, 0.4286) posterior
    '''
    post = inf.bisg_posterior(numpy.array([0.8, 0.2]), numpy.array([0.1, 0.3]))

    assert numpy.allclose(post.probs, [0.5714, 0.4286], atol=1e-4)
    assert inf.max_classify(post) == (0, False)
# ----------------------------------------------
def test_bifsg():
    '''
    First name likelihood enters multiplicatively
    '''
    post = inf.bifsg_posterior(numpy.array([0.5, 0.5]), numpy.array([0.9, 0.1]), numpy.array([0.5, 0.5]))

    assert post.mode == inf.Mode.BIFSG
    assert numpy.allclose(post.probs, [0.9, 0.1], rtol=0, atol=1e-12)
# ----------------------------------------------
def test_constant_first_name():
    '''
    A first name equally likely for every race does not change the posterior
    '''
    rng = numpy.random.default_rng(1)
    for _ in range(Data.ntrial):
        size  = int(rng.integers(2, 7))
        arr_s = rng.dirichlet(numpy.ones(size))
        arr_g = rng.uniform(0.01, 1, size=size)
        value = rng.uniform(1e-4, 1)

        bisg  = inf.bisg_posterior(arr_s, arr_g)
        bifsg = inf.bifsg_posterior(arr_s, numpy.full(size, value), arr_g)

        assert numpy.allclose(bisg.probs, bifsg.probs, rtol=0, atol=1e-12)
# ----------------------------------------------
def test_scale_and_permutation():
    '''
    Scaling P(region | race) does not change the posterior, permuting categories permutes it
    '''
    rng = numpy.random.default_rng(2)
    for _ in range(Data.ntrial):
        size  = int(rng.integers(2, 7))
        arr_s = rng.dirichlet(numpy.ones(size))
        arr_f = rng.uniform(0.001, 0.1, size=size)
        arr_g = rng.uniform(0.01, 1, size=size)
        perm  = rng.permutation(size)

        post  = inf.bifsg_posterior(arr_s, arr_f, arr_g)
        scal  = inf.bifsg_posterior(arr_s, arr_f, arr_g * rng.uniform(0.1, 100))
        perm_ = inf.bifsg_posterior(arr_s[perm], arr_f[perm], arr_g[perm])

        assert numpy.allclose(post.probs, scal.probs, rtol=0, atol=1e-12)
        assert numpy.allclose(post.probs[perm], perm_.probs, rtol=0, atol=1e-12)
        assert abs(post.probs.sum() - 1) < 1e-9
# ----------------------------------------------
def test_zero_evidence():
    '''
    No race with support raises ZeroEvidence
    '''
    with pytest.raises(inf.ZeroEvidence):
        inf.bifsg_posterior(numpy.array([1., 0.]), numpy.array([0., 1.]), numpy.array([0.5, 0.5]))

    with pytest.raises(inf.ZeroEvidence):
        inf.bisg_posterior(numpy.array([0., 0.]), numpy.array([0.5, 0.5]))
# ----------------------------------------------
def test_invalid_vectors():
    '''
    Vectors of different length or with negative entries are rejected
    '''
    with pytest.raises(ValueError):
        inf.bisg_posterior(numpy.array([0.5, 0.5]), numpy.array([0.5, 0.3, 0.2]))

    with pytest.raises(ValueError):
        inf.bisg_posterior(numpy.array([1.5, -0.5]), numpy.array([0.5, 0.5]))
# ----------------------------------------------
@pytest.mark.parametrize('probs, index, tie', [
    ([0.1, 0.7, 0.2], 1, False),
    ([0.5, 0.5]     , 0, True ),
    ([0.2, 0.4, 0.4], 1, True )])
def test_max_classify(probs : list[float], index : int, tie : bool):
    '''
    Most probable race, ties go to the lowest index
    '''
    post = inf.ProxyPosterior.from_probs(numpy.array(probs), inf.Mode.BISG)

    assert inf.max_classify(post) == (index, tie)
    assert post.argmax     == index
    assert post.tie_broken == tie
# ----------------------------------------------
def test_posterior_copies_input():
    '''
    Posterior does not share memory with its input
    '''
    arr  = numpy.array([0.3, 0.7])
    post = inf.ProxyPosterior.from_probs(arr, inf.Mode.BISG)
    arr[0] = 0.9

    assert post.probs[0] == 0.3
# ----------------------------------------------
def test_individual_modes():
    '''
    Most informative posterior available for each record
    '''
    tables = Data.tables
    mat_gr = tables.geo.geo_given_race()

    post = inf.infer_individual(_record('Washington', 'LaToya', '27002'), tables)
    full = inf.bifsg_posterior(tables.surname.get('washington'), tables.firstname.get('latoya'), mat_gr[1])
    assert post.mode == inf.Mode.BIFSG
    assert numpy.array_equal(post.probs, full.probs)

    post = inf.infer_individual(_record('Smith', 'Zebedee', '27001'), tables)
    assert post.mode == inf.Mode.BISG
    assert numpy.allclose(post.probs, [0.15 / (0.15 + 0.8 / 6), (0.8 / 6) / (0.15 + 0.8 / 6)])

    post = inf.infer_individual(_record('Nobody', 'Nobody', '27001'), tables)
    assert post.mode == inf.Mode.GEO_ONLY
    assert numpy.allclose(post.probs, [0.75, 0.25])
# ----------------------------------------------
def test_individual_unknown_region():
    '''
    Regions absent from the geography table are errors
    '''
    with pytest.raises(inf.UnknownRegion):
        inf.infer_individual(_record('Smith', 'James', '99999'), Data.tables)
# ----------------------------------------------
def test_individual_disabled_fallbacks():
    '''
    Disabled fallbacks raise ZeroEvidence
    '''
    policy = inf.FallbackPolicy(allow_bisg=False, allow_geo_only=False)
    with pytest.raises(inf.ZeroEvidence):
        inf.infer_individual(_record('Smith', 'Zebedee', '27001'), Data.tables, policy)

    with pytest.raises(inf.ZeroEvidence):
        inf.infer_individual(_record('Nobody', 'James', '27001'), Data.tables, policy)

    post = inf.infer_individual(_record('Smith', 'James', '27001'), Data.tables, policy)
    assert post.mode == inf.Mode.BIFSG
# ----------------------------------------------
def test_batch_matches_individual():
    '''
    Vectorized inference agrees with the record by record one
    '''
    df = pnd.DataFrame({
        'surname' : ['Smith', 'washington', 'Garcia', 'nobody', 'SMITH'],
        'first'   : ['James', 'latoya'    , 'zed'   , 'james' , ''     ],
        'region'  : ['27001', '27002'     , '27001' , '27002' , '27002']})

    df_post = inf.infer_batch(df, Data.tables)
    for irow, row in enumerate(df.itertuples(index=False)):
        post = inf.infer_individual(_record(row.surname, row.first, row.region), Data.tables)
        arr  = df_post[['p_Black', 'p_White']].to_numpy()[irow]

        assert df_post['mode'].iloc[irow] == post.mode.value
        assert numpy.allclose(arr, post.probs, rtol=0, atol=1e-15)
        assert df_post['argmax_index'].iloc[irow] == post.argmax
        assert df_post['tie_broken'].iloc[irow] == post.tie_broken
# ----------------------------------------------
def test_batch_failures():
    '''
    Unknown regions and disabled fallbacks give FAILED rows, counted by cause
    '''
    df = pnd.DataFrame({
        'surname' : ['Smith', 'nobody', 'smith'],
        'first'   : ['James', 'james' , 'james'],
        'region'  : ['27001', '27001' , '00000']})

    policy  = inf.FallbackPolicy(allow_geo_only=False)
    df_post = inf.infer_batch(df, Data.tables, policy)

    assert df_post['mode'].tolist() == ['BIFSG', 'FAILED', 'FAILED']
    assert df_post['p_Black'].isna().tolist() == [False, True, True]
    assert df_post['argmax'].tolist()[1:] == ['', '']
    assert inf.failure_counts(df_post, df, Data.tables) == (1, 1)
# ----------------------------------------------
def test_batch_empty():
    '''
    Empty input gives empty output with the expected columns
    '''
    df      = pnd.DataFrame({'surname' : [], 'first' : [], 'region' : []})
    df_post = inf.infer_batch(df, Data.tables)

    assert len(df_post) == 0
    assert df_post.columns.tolist() == ['p_Black', 'p_White', 'mode', 'argmax', 'argmax_index', 'tie_broken']
# ----------------------------------------------
def test_garcia_tie():
    '''
    Garcia with James in a region where both races are equally likely is a tie, broken towards Black
    '''
    races  = Data.tables.races
    tables = ProxyTables(
            surname  = Data.tables.surname,
            firstname= Data.tables.firstname,
            geo      = GeoTable(races, ['1'], numpy.array([[200., 300.]])))
    post   = inf.infer_individual(_record('Garcia', 'James', '1'), tables)

    assert post.probs[0] == post.probs[1]
    assert post.argmax == 0
    assert post.tie_broken
