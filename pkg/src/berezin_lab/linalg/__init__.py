from . import numkernel