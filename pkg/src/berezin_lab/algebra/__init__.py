from . import selfdual
from . import fock