##
#
# Shape optimisation of Kirchhoff-Love thin shells with neural
# parametric representations.
#
import logging
from nrepshell.exceptions import (NRepError,
                                  MeshError,
                                  ModelError,
                                  DimensionError,
                                  EvaluationError,
                                  SingularGeometryError,
                                  SingularSystemError,
                                  NetworkError,
                                  FitDivergenceError,
                                  FitToleranceError,
                                  OptimizationError,
                                  LatticeError,
                                  ConfigError)
from nrepshell.geometry import ParametricMesh
from nrepshell.shell import (Load,
                             ShellModel,
                             GlobalSystem)
from nrepshell.nrep import (ActivationSpec,
                            MLPNetwork,
                            TrainingConfig)
from nrepshell.sensitivity import ShapeEvaluator
from nrepshell.optimizer import (OptProblem,
                                 OptHistory)
from nrepshell.bench import ExperimentSpec
from nrepshell.lattice import LatticeSkinGeometry


log = logging.getLogger(__name__)
# the library stays silent unless the application configures logging
log.addHandler(logging.NullHandler())

# reexport exceptions
exceptions = [NRepError,
              MeshError,
              ModelError,
              DimensionError,
              EvaluationError,
              SingularGeometryError,
              SingularSystemError,
              NetworkError,
              FitDivergenceError,
              FitToleranceError,
              OptimizationError,
              LatticeError,
              ConfigError]

# reexport classes
classes = [ParametricMesh,
           Load,
           ShellModel,
           GlobalSystem,
           ActivationSpec,
           MLPNetwork,
           TrainingConfig,
           ShapeEvaluator,
           OptProblem,
           OptHistory,
           ExperimentSpec,
           LatticeSkinGeometry]

__all__ = []
__all__.extend([x.__name__ for x in exceptions])
__all__.extend([x.__name__ for x in classes])
