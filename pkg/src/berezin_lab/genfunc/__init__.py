from . import trace
from . import feynman_kac
from . import moment