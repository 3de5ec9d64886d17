'''
Runtime knobs shared by the whole library.

Set them directly, the CLI does the same::

    from nrepshell import config
    config.threads = 4
    config.deterministic = True
'''
import os

# element kernels are evaluated in chunks of that many elements,
# chunks go to a thread pool when threads > 1
threads = int(os.environ.get('NREPSHELL_THREADS', 1))
chunk_size = 256

# with deterministic reduction chunk results are summed in element
# order, otherwise in completion order
deterministic = False

# polynomial degree integrated exactly by the element quadrature;
# 5 means 3x3 Gauss points
quadrature_order = 5

# relative residual |Ku - f| / |f| above which the solver complains
residual_tolerance = 1e-10
