'''
Module with tests for the algebra of regressions on misclassified categories
'''
import numpy
import pytest

from pra.logging.log_store import LogStore
from pra.misclass          import flows  as mfl
from pra.misclass          import theory as thr
from pra.testing           import utilities as ut

log = LogStore.add_logger('pra:tests:test_theory')
# ----------------------------------------------
class Data:
    '''
    Class used to hold shared data
    '''
    conf = numpy.array([[0.9, 0.1], [0.1, 0.9]])
    n    = numpy.array([100., 100.])
    beta = numpy.array([1., 3.])

    nmixing    = 500
    nreversible= 200
    nbalance   = 1000
# ----------------------------------------------
@pytest.fixture(scope='module', autouse=True)
def _initialize():
    LogStore.set_level('pra:misclass:theory', 10)
# ----------------------------------------------
def _swap_example() -> tuple[numpy.ndarray, numpy.ndarray]:
    '''
    100 members per class, the first 10 of each predicted as the other class
    '''
    arr_true = numpy.repeat([0, 1], 100)
    arr_pred = arr_true.copy()
    arr_pred[  0: 10] = 1
    arr_pred[100:110] = 0

    return arr_true, arr_pred
# ----------------------------------------------
def test_worked_example():
    '''
    Expected counts, signal mass, estimator and bias of the symmetric 2x2 example
    '''
    assert numpy.allclose(thr.expected_counts(Data.conf, Data.n), [100, 100])
    assert numpy.allclose(thr.expected_signal_mass(Data.conf, Data.n, Data.beta), [120, 280])
    assert numpy.allclose(thr.roe_expected_beta(Data.conf, Data.n, Data.beta), [1.2, 2.8], rtol=0, atol=1e-12)

    rep = thr.bias_report(Data.conf, Data.n, Data.beta)
    assert numpy.allclose(rep.bias, [-0.2, 0.2], rtol=0, atol=1e-12)
    assert rep.neutrality.passed
    assert numpy.allclose(rep.neutral_bias, [-0.2, 0.2], rtol=0, atol=1e-12)
    assert rep.form_gap < 1e-9
    assert numpy.allclose(thr.expected_bias(Data.conf, Data.n, Data.beta), rep.bias)
# ----------------------------------------------
def test_identity():
    '''
    A perfect classifier has no bias and does not shrink
    '''
    conf = numpy.eye(3)
    n    = numpy.array([10., 20., 30.])
    beta = numpy.array([1., -2., 4.])

    assert numpy.array_equal(thr.expected_counts(conf, n), n)
    assert numpy.array_equal(thr.expected_signal_mass(conf, n, beta), n * beta)
    assert numpy.allclose(thr.roe_expected_beta(conf, n, beta), beta, rtol=0, atol=1e-15)
    assert numpy.allclose(thr.expected_bias(conf, n, beta), 0, rtol=0, atol=1e-15)

    rep = thr.shrinkage_report(conf, n, beta)
    assert rep.ss_proxy == pytest.approx(rep.ss_true, rel=1e-12)
    assert rep.neutral and rep.reversible
    assert numpy.allclose(rep.eigenvalues, 1)
# ----------------------------------------------
def test_neutrality():
    '''
    Neutral when the expected class sizes are kept
    '''
    chk = thr.check_neutrality(numpy.eye(2), Data.n)
    assert chk.passed and chk.deviation == 0

    assert thr.check_neutrality(Data.conf, Data.n).passed

    chk = thr.check_neutrality(numpy.array([[1.0, 0.5], [0.0, 0.5]]), Data.n)
    assert not chk.passed
    assert chk.deviation == pytest.approx(50)
# ----------------------------------------------
def test_not_neutral_report():
    '''
    Without neutrality the neutral form of the bias is not evaluated
    '''
    rep = thr.bias_report(numpy.array([[1.0, 0.5], [0.0, 0.5]]), Data.n, Data.beta)

    assert not rep.neutrality.passed
    assert rep.neutral_bias is None
    assert rep.form_gap     is None
    assert numpy.allclose(rep.expected_beta, [(100 + 150) / 150, 3.0])
# ----------------------------------------------
def test_detailed_balance():
    '''
    Balance holds for the symmetric example and fails when the flows differ
    '''
    chk = thr.check_detailed_balance(Data.conf, Data.n)
    assert chk.passed and chk.symmetric

    conf = numpy.array([[0.9, 0.3], [0.1, 0.7]])
    chk  = thr.check_detailed_balance(conf, numpy.array([100., 300.]))
    assert not chk.passed
    assert not chk.symmetric
    assert chk.violation == pytest.approx(80)
# ----------------------------------------------
def test_shrinkage_example():
    '''
    Spread of the example goes from 200 to 128, M has eigenvalues 1 and 0.8
    '''
    rep = thr.shrinkage_report(Data.conf, Data.n, Data.beta)

    assert rep.ss_true  == pytest.approx(200)
    assert rep.ss_proxy == pytest.approx(128)
    assert rep.shrinks
    assert rep.spectrum_ok
    assert numpy.allclose(rep.eigenvalues, [1.0, 0.8], rtol=0, atol=1e-12)
    assert numpy.allclose(rep.similarity_matrix, Data.conf)
# ----------------------------------------------
def test_shrinkage_not_reversible():
    '''
    Eigenvalues are only computed for reversible confusions
    '''
    conf = numpy.array([[0.9, 0.3], [0.1, 0.7]])
    rep  = thr.shrinkage_report(conf, numpy.array([100., 300.]), Data.beta)

    assert not rep.reversible
    assert rep.eigenvalues is None
    assert rep.spectrum_ok is None
# ----------------------------------------------
def test_group_effects():
    '''
    Centered signal adds up to zero
    '''
    eff = thr.GroupEffects(beta=numpy.array([1., 3., -2.]), n=numpy.array([10., 30., 60.]))

    assert eff.beta_bar == pytest.approx((10 + 90 - 120) / 100)
    assert eff.centered.sum() == pytest.approx(0, abs=1e-12)

    with pytest.raises(thr.DimensionMismatch):
        thr.GroupEffects(beta=numpy.ones(2), n=numpy.ones(3))
# ----------------------------------------------
def test_errors():
    '''
    Sizes must match, expected classes must be populated
    '''
    with pytest.raises(thr.DimensionMismatch):
        thr.expected_counts(Data.conf, numpy.ones(3))

    with pytest.raises(mfl.NotColumnStochastic):
        thr.expected_counts(numpy.array([[0.5, 0.5], [0.6, 0.5]]), Data.n)

    conf = numpy.array([[1.0, 1.0], [0.0, 0.0]])
    with pytest.raises(thr.EmptyExpectedClass):
        thr.roe_expected_beta(conf, Data.n, Data.beta)

    with pytest.raises(mfl.EmptyTrueClass):
        thr.shrinkage_report(Data.conf, numpy.array([100., 0.]), Data.beta)
# ----------------------------------------------
def test_decomposition_no_misclassification():
    '''
    Same labels, no bias and no noise
    '''
    rng    = numpy.random.default_rng(3)
    labels = numpy.repeat([0, 1, 2], 20)
    dec    = thr.decompose_proxy_estimator(labels, labels, rng.normal(size=60))

    assert numpy.allclose(dec.bias_term , 0, rtol=0, atol=1e-12)
    assert numpy.allclose(dec.noise_term, 0, rtol=0, atol=1e-12)
# ----------------------------------------------
def test_decomposition_swap_example():
    '''
    Ten swaps each way with noiseless outcome moves the estimates to (1.2, 2.8)
    '''
    arr_true, arr_pred = _swap_example()
    dec = thr.decompose_proxy_estimator(arr_true, arr_pred, Data.beta[arr_true])

    assert numpy.allclose(dec.systematic_component, [1.2, 2.8], rtol=0, atol=1e-12)
    assert numpy.allclose(dec.bias_term , [0.2, -0.2], rtol=0, atol=1e-12)
    assert numpy.allclose(dec.noise_term, 0, rtol=0, atol=1e-12)

    rng = numpy.random.default_rng(5)
    y   = Data.beta[arr_true] + rng.normal(0, 2, size=arr_true.size)
    dec = thr.decompose_proxy_estimator(arr_true, arr_pred, y)
    assert numpy.allclose(dec.beta_proxy, dec.beta_true + dec.bias_term + dec.noise_term, rtol=0, atol=1e-9)
# ----------------------------------------------
def test_mixture_swap_example():
    '''
    Mixture of effects for the swap example and for identity flows
    '''
    arr_true, arr_pred = _swap_example()
    flows = mfl.flows_from_labels(arr_true, arr_pred)

    arr_mix, arr_bias = thr.mixture_coefficients(flows, Data.beta)
    assert numpy.allclose(arr_mix , [1.2, 2.8], rtol=0, atol=1e-12)
    assert numpy.allclose(arr_bias, [0.2, -0.2], rtol=0, atol=1e-12)

    flows = mfl.FlowCounts(matrix=numpy.diag([3, 4]))
    arr_mix, _ = thr.mixture_coefficients(flows, Data.beta)
    assert numpy.allclose(arr_mix, Data.beta, rtol=0, atol=1e-15)

    flows = mfl.FlowCounts(matrix=numpy.array([[3, 4], [0, 0]]))
    with pytest.raises(mfl.EmptyPredictedClass):
        thr.mixture_coefficients(flows, Data.beta)
# ----------------------------------------------
def test_mixing_identities():
    '''
    On random labelings, the systematic component is the mixture of the true estimates
    and the predicted counts times the mixture equal the flows applied to the effects
    '''
    rng = numpy.random.default_rng(11)
    for _ in range(Data.nmixing):
        size     = int(rng.integers(2, 6))
        arr_true, arr_pred = ut.random_labels(size, rng)
        y        = rng.normal(0, 3, size=arr_true.size) + arr_true

        dec      = thr.decompose_proxy_estimator(arr_true, arr_pred, y, ncat=size)
        flows    = mfl.flows_from_labels(arr_true, arr_pred, ncat=size)
        arr_mix, arr_bias = thr.mixture_coefficients(flows, dec.beta_true)

        arr_lhs  = flows.predicted_counts * dec.systematic_component
        arr_rhs  = flows.matrix @ dec.beta_true
        assert numpy.allclose(arr_lhs, arr_rhs, rtol=0, atol=1e-9 * max(1.0, numpy.abs(arr_rhs).max()))
        assert numpy.allclose(arr_mix, dec.systematic_component, rtol=0, atol=1e-9)
        assert numpy.allclose(arr_bias, dec.bias_term, rtol=0, atol=1e-9)
        assert numpy.allclose(dec.beta_proxy, dec.beta_true + dec.bias_term + dec.noise_term, rtol=0, atol=1e-9)
# ----------------------------------------------
def test_neutral_form_agrees():
    '''
    For neutral confusions both forms of the bias agree
    '''
    rng = numpy.random.default_rng(13)
    for _ in range(Data.nreversible):
        size = int(rng.integers(2, 7))
        conf, n, beta = ut.random_reversible_instance(size, rng)
        rep  = thr.bias_report(conf, n, beta)

        assert rep.neutrality.passed
        assert numpy.allclose(rep.bias, rep.neutral_bias, rtol=0, atol=1e-9)
# ----------------------------------------------
def test_shrinkage_reversible():
    '''
    Neutral and reversible confusions shrink the spread of the effects and have spectrum in [-1, 1]
    '''
    rng = numpy.random.default_rng(17)
    for _ in range(Data.nreversible):
        size = int(rng.integers(2, 7))
        conf, n, beta = ut.random_reversible_instance(size, rng)
        rep  = thr.shrinkage_report(conf, n, beta)

        assert rep.neutral
        assert rep.reversible
        assert rep.shrinks
        assert rep.spectrum_ok
# ----------------------------------------------
def test_balance_agrees_with_symmetry():
    '''
    Detailed balance holds exactly when the similarity transform is symmetric
    '''
    rng = numpy.random.default_rng(19)
    nbalanced = 0
    for itrial in range(Data.nbalance):
        size = int(rng.integers(2, 7))
        if itrial % 2 == 0:
            conf, n, _ = ut.random_reversible_instance(size, rng)
        else:
            conf = ut.random_confusion(size, rng)
            n    = rng.uniform(10, 1000, size=size)

        chk = thr.check_detailed_balance(conf, n)
        assert chk.passed == chk.symmetric
        nbalanced += chk.passed

    assert nbalanced >= Data.nbalance // 2
# ----------------------------------------------
@pytest.mark.parametrize('gap, passed', [(5e-6, True), (2e-5, False)])
def test_balance_agrees_with_symmetry_unequal_sizes(gap : float, passed : bool):
    '''
    Classes of very different sizes, flows differing by a gap close to the tolerance
    '''
    n    = numpy.array([1., 10_000.])
    c_01 = (0.5 + gap) / n[1]
    conf = numpy.array([[0.5, c_01], [0.5, 1 - c_01]])

    chk  = thr.check_detailed_balance(conf, n)

    assert chk.violation == pytest.approx(gap, rel=1e-6)
    assert chk.passed    == passed
    assert chk.symmetric == passed
# ----------------------------------------------
@pytest.mark.parametrize('x_variance, error_variance, beta, expected', [
    (1.0, 0.0, 2.0, 2.0),
    (1.0, 1.0, 2.0, 1.0),
    (2.0, 0.5, 0.0, 0.0),
    (3.0, 1.0, 4.0, 3.0)])
def test_classical_attenuation(x_variance : float, error_variance : float, beta : float, expected : float):
    '''
    Scalar regressor measured with noise, slope is scaled by the reliability ratio
    '''
    value = thr.classical_attenuation_baseline(x_variance, error_variance, beta)

    assert value == pytest.approx(expected, abs=1e-12)
# ----------------------------------------------
def test_classical_attenuation_matrix():
    '''
    Expected estimator and bias add up to the true effects
    '''
    xtx   = numpy.array([[4.0, 1.0], [1.0, 3.0]])
    sigma = numpy.array([[1.0, 0.0], [0.0, 2.0]])
    beta  = numpy.array([1.0, -2.0])

    arr_exp, arr_bias = thr.classical_attenuation_matrix(xtx, sigma, beta)

    assert numpy.allclose(arr_exp + arr_bias, beta)
    assert numpy.allclose((xtx + sigma) @ arr_exp, xtx @ beta)

    with pytest.raises(ValueError):
        thr.classical_attenuation_baseline(0.0, 1.0, 1.0)

    with pytest.raises(thr.DimensionMismatch):
        thr.classical_attenuation_matrix(xtx, sigma, numpy.ones(3))
