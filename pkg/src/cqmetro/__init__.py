"""Counter-diabatic critical quantum metrology at desk scale.

Landau-Zener and Schrieffer-Wolff quantum Rabi models, time-dependent
propagation with optional counter-diabatic driving, and quantum Fisher
information estimators with their precision bounds.
"""
from .num_core import *  # noqa: F401,F403
from .quantum_ops import *  # noqa: F401,F403
from .dynamics import *  # noqa: F401,F403
from .model_lz import *  # noqa: F401,F403
from .model_qrm import *  # noqa: F401,F403
from .metrology import *  # noqa: F401,F403

__version__ = "0.1.0"
