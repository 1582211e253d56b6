"""Truncated operator theory on the Hardy and Bergman spaces: Toeplitz
matrices, model spaces, de Branges-Rovnyak and sub-Bergman range spaces."""

from .hardy import (AnalyticPoly, BoundaryGrid, CauchyKernel, backward_shift,
                    boundary_samples, cauchy_kernel, evaluate, inner_product_h2, poly)
from .symbols import (BlaschkeProduct, OuterPoly, TrigPoly, blaschke_taylor,
                      divide_by_inner, fejer_riesz, pythagorean_mate)
from .debranges import PythagoreanPair, hb_embed

__version__ = "0.1.0"
