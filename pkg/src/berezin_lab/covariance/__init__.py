from . import covariance
from . import bounds