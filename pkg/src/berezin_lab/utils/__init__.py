from . import report