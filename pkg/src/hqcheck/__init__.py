"""Exact verifier for bilinear forms graphs H_q(D, N-D) over GF(q).

Everything spectral is carried by arbitrary-precision rationals; everything
combinatorial is counted from the graph itself and compared against closed
forms with zero tolerance.
"""

__version__ = "0.1.0"

from .params import GraphParams, param_bundle
from .gf import MatVertex

__all__ = ["GraphParams", "MatVertex", "param_bundle", "__version__"]
