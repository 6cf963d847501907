from importlib.metadata import version
__version__ = version("berezin_lab")

from . import linalg
from . import algebra
from . import grassmann
from . import covariance
from . import genfunc
from . import lattice
from . import utils
