class NRepError(Exception):
    '''
    Base nrepshell error
    '''
    pass


class MeshError(NRepError):
    '''
    Invalid grid or opening layout
    '''
    pass


class ModelError(NRepError):
    '''
    Inconsistent shell model data: material, thickness, array shapes
    '''
    pass


class DimensionError(NRepError):
    '''
    Array dimensions do not match the network or the model
    '''
    pass


class EvaluationError(NRepError):
    '''
    Base class for failures of a structural evaluation.

    The optimiser backtracks on this class only, so everything that
    a bad design can produce must inherit from it.
    '''
    pass


class SingularGeometryError(EvaluationError):
    '''
    The mid-surface metric degenerates at a quadrature point
    '''
    def __init__(self, msg, count=1):
        super(SingularGeometryError, self).__init__(msg)
        self.count = count


class SingularSystemError(EvaluationError):
    '''
    The reduced stiffness matrix can not be factorised.

    `modes` holds the number of rigid body modes not removed by
    the supports, zero when the system is singular for another
    reason.
    '''
    def __init__(self, msg, modes=0):
        super(SingularSystemError, self).__init__(msg)
        self.modes = modes


class NetworkError(NRepError):
    '''
    Invalid network layout, activation or serialised data
    '''
    pass


class FitDivergenceError(NetworkError):
    '''
    The training loss became non-finite.

    Incapsulates the loss trace for the following analysis
    '''
    def __init__(self, msg, losses=None):
        super(FitDivergenceError, self).__init__(msg)
        self.losses = list(losses or [])


class OptimizationError(NRepError):
    '''
    The optimiser could not proceed; `history` is the partial record
    '''
    def __init__(self, msg, history=None):
        super(OptimizationError, self).__init__(msg)
        self.history = history


class LatticeError(NRepError):
    '''
    Lattice generation or coupling failed
    '''
    pass


class ConfigError(NRepError):
    '''
    Run configuration rejected by the schema
    '''
    def __init__(self, msg, key=None):
        if key is not None:
            msg = '%s: %s' % (key, msg)
        super(ConfigError, self).__init__(msg)
        self.key = key


class FitToleranceError(NetworkError):
    '''
    The initial fit stayed above the MSE tolerance after all the
    training rounds
    '''
    def __init__(self, msg, mse=None, tolerance=None):
        super(FitToleranceError, self).__init__(msg)
        self.mse = mse
        self.tolerance = tolerance
