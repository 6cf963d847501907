from . import algebra
from . import circle
from . import gaussian