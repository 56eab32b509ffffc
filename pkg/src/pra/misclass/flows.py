'''
Module with flow counts between true and predicted classes and the confusion matrix built from them

Convention used everywhere: rows are predicted classes j, columns are true classes k,
i.e. flows[j][k] = n_{k->j} and C[j][k] = Pr(pred j | true k)
'''
from dataclasses         import dataclass
from importlib.resources import files

import numpy
import pandas as pnd

from pra.logging.log_store import LogStore
from pra.io                import serialization as ser
from pra.proxy.tables      import RaceCategorySet

log = LogStore.add_logger('pra:misclass:flows')

STOCHASTIC_TOL = 1e-9
#------------------------------------------
class LengthMismatch(Exception):
    '''
    Raised when true and predicted labels have different lengths
    '''
#------------------------------------------
class EmptyTrueClass(Exception):
    '''
    Raised when a true class has no members
    '''
#------------------------------------------
class EmptyPredictedClass(Exception):
    '''
    Raised when no observation is predicted into some class
    '''
#------------------------------------------
class NotColumnStochastic(Exception):
    '''
    Raised when a confusion matrix has negative entries or columns not adding up to one
    '''
#------------------------------------------
@dataclass(frozen=True)
class FlowCounts:
    '''
    Square matrix of counts, entry [j][k] is the number of members of true class k predicted as j
    '''
    matrix : numpy.ndarray
    labels : tuple[str, ...] | None = None
    #------------------------------------------
    def __post_init__(self):
        mat = numpy.array(self.matrix)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f'Flows must be a square matrix, found shape {mat.shape}')

        if numpy.any(mat < 0) or not numpy.all(mat == numpy.round(mat)):
            raise ValueError('Flows must be nonnegative integers')

        mat = mat.astype(numpy.int64)
        mat.flags.writeable = False
        object.__setattr__(self, 'matrix', mat)

        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != mat.shape[0]:
                raise ValueError(f'Got {len(labels)} labels for {mat.shape[0]} classes')

            object.__setattr__(self, 'labels', labels)
    #------------------------------------------
    @property
    def size(self) -> int:
        '''
        Number of classes
        '''
        return self.matrix.shape[0]
    #------------------------------------------
    @property
    def true_counts(self) -> numpy.ndarray:
        '''
        n_k, column sums
        '''
        return self.matrix.sum(axis=0)
    #------------------------------------------
    @property
    def predicted_counts(self) -> numpy.ndarray:
        '''
        Predicted counts, row sums
        '''
        return self.matrix.sum(axis=1)
    #------------------------------------------
    @property
    def out_flows(self) -> numpy.ndarray:
        '''
        Members of each true class sent elsewhere
        '''
        return self.true_counts - numpy.diag(self.matrix)
    #------------------------------------------
    @property
    def in_flows(self) -> numpy.ndarray:
        '''
        Members of other classes predicted into each class
        '''
        return self.predicted_counts - numpy.diag(self.matrix)
    #------------------------------------------
    def class_labels(self) -> list[str]:
        '''
        Labels, or the class indices as strings if there are no labels
        '''
        if self.labels is None:
            return [ str(icls) for icls in range(self.size) ]

        return list(self.labels)
    #------------------------------------------
    def to_frame(self) -> pnd.DataFrame:
        '''
        Returns flows in the layout of a published confusion table:
        prediction rows, reference columns, row sums, precision per row and a row of column sums
        '''
        l_lab = self.class_labels()
        df    = pnd.DataFrame(self.matrix, columns=l_lab)
        df.insert(0, ser.CORNER, l_lab)
        df['Row sum'] = self.predicted_counts

        arr_prec = numpy.full(self.size, numpy.nan)
        arr_pred = self.predicted_counts
        numpy.divide(numpy.diag(self.matrix), arr_pred, out=arr_prec, where=arr_pred > 0)
        df['Accuracy (%)'] = 100 * arr_prec

        df_sum = pnd.DataFrame([['Column sum'] + list(self.true_counts) + [int(self.matrix.sum()), numpy.nan]], columns=df.columns)

        return pnd.concat([df, df_sum], ignore_index=True)
#------------------------------------------
@dataclass(frozen=True)
class ConfusionMatrix:
    '''
    Column stochastic matrix, entry [j][k] is the probability that a member of class k is predicted as j
    '''
    matrix : numpy.ndarray
    flows  : FlowCounts | None = None
    tol    : float             = STOCHASTIC_TOL
    #------------------------------------------
    def __post_init__(self):
        mat = numpy.array(self.matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f'Confusion matrix must be square, found shape {mat.shape}')

        if numpy.any(mat < 0) or not numpy.all(numpy.isfinite(mat)):
            raise NotColumnStochastic('Confusion matrix has negative or non finite entries')

        arr_sum = mat.sum(axis=0)
        arr_dev = numpy.abs(arr_sum - 1)
        if numpy.any(arr_dev > self.tol):
            icol = int(numpy.argmax(arr_dev))
            raise NotColumnStochastic(f'Column {icol} adds up to {arr_sum[icol]}')

        mat.flags.writeable = False
        object.__setattr__(self, 'matrix', mat)
    #------------------------------------------
    @property
    def size(self) -> int:
        '''
        Number of classes
        '''
        return self.matrix.shape[0]
    #------------------------------------------
    @classmethod
    def identity(cls, size : int) -> 'ConfusionMatrix':
        '''
        Confusion matrix of a perfect classifier
        '''
        return cls(matrix=numpy.eye(size))
#------------------------------------------
def flows_from_labels(true_labels : numpy.ndarray,
                      pred_labels : numpy.ndarray,
                      ncat        : int | None             = None,
                      labels      : tuple[str, ...] | None = None) -> FlowCounts:
    '''
    Cross tabulates true and predicted category indices
    '''
    arr_true = numpy.asarray(true_labels, dtype=int)
    arr_pred = numpy.asarray(pred_labels, dtype=int)
    if arr_true.shape != arr_pred.shape:
        raise LengthMismatch(f'Got {arr_true.size} true and {arr_pred.size} predicted labels')

    if ncat is None:
        ncat = len(labels) if labels is not None else int(max(arr_true.max(initial=-1), arr_pred.max(initial=-1))) + 1

    for arr in [arr_true, arr_pred]:
        if arr.size > 0 and (arr.min() < 0 or arr.max() >= ncat):
            raise ValueError(f'Labels outside [0, {ncat})')

    arr_cell = numpy.bincount(arr_pred * ncat + arr_true, minlength=ncat * ncat)
    mat      = arr_cell.reshape(ncat, ncat)

    return FlowCounts(matrix=mat, labels=labels)
#------------------------------------------
def labels_from_flows(flows : FlowCounts) -> tuple[numpy.ndarray, numpy.ndarray]:
    '''
    Expands flows into one (true, predicted) pair per observation, ordered by predicted then true class
    '''
    ncat     = flows.size
    arr_cell = flows.matrix.ravel()
    arr_pred = numpy.repeat(numpy.repeat(numpy.arange(ncat), ncat), arr_cell)
    arr_true = numpy.repeat(numpy.tile(  numpy.arange(ncat), ncat), arr_cell)

    return arr_true, arr_pred
#------------------------------------------
def confusion_from_flows(flows : FlowCounts) -> ConfusionMatrix:
    '''
    Divides each column of the flows by the size of the true class
    '''
    arr_true = flows.true_counts
    arr_bad, = numpy.where(arr_true == 0)
    if arr_bad.size > 0:
        raise EmptyTrueClass(f'True classes without members: {flows.class_labels()[int(arr_bad[0])]}')

    return ConfusionMatrix(matrix=flows.matrix / arr_true, flows=flows)
#------------------------------------------
def precision_per_predicted_class(flows : FlowCounts) -> numpy.ndarray:
    '''
    Returns fraction of correct predictions among the members predicted into each class
    '''
    arr_pred = flows.predicted_counts
    arr_bad, = numpy.where(arr_pred == 0)
    if arr_bad.size > 0:
        raise EmptyPredictedClass(f'No observation predicted as: {flows.class_labels()[int(arr_bad[0])]}')

    return numpy.diag(flows.matrix) / arr_pred
#------------------------------------------
def published_flows() -> FlowCounts:
    '''
    Returns flows between max-classified BIFSG proxy and self reported race for the
    North Carolina voter file matched to insurance premiums
    '''
    races = RaceCategorySet.default()
    path  = str(files('pra_data').joinpath('misclass/nc_confusion.csv'))
    mat   = ser.read_matrix(path, list(races.labels))

    return FlowCounts(matrix=mat, labels=races.labels)
#------------------------------------------
