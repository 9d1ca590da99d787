"""Classical and quantum noncompact SU(2,1) spin on the coadjoint orbit CP(1,1)."""
from .errors import NcspinError
from .liealg import build_generators, structure_constants

__all__ = ["NcspinError", "build_generators", "structure_constants"]
__version__ = "0.1.0"
