#!/usr/bin/env python3
"""Round-trip error of gaussian(1,1) on U(1) as a function of the spectral window.

The transform decays like exp(-lambda^2 / 4), so the inverse computed from the
window |lambda| <= L misses a tail of relative size about erfc(L / 2).  The
table below separates that truncation from the quadrature error.
"""

import math
import warnings

import numpy as np

from hgelfand.core import gaussian
from hgelfand.invariant import ActionDescriptor, generator_system
from hgelfand.spectrum import SpectrumModel
from hgelfand.transform import QuadratureConfig, TruncationWarning, gelfand_forward, gelfand_inverse

act = ActionDescriptor.parse("un:1")
gs = generator_system(act)
f = gaussian(act)
t = np.linspace(-3, 3, 25)
r = np.linspace(0, 3, 25)
T, R = np.meshgrid(t, r, indexing="ij")
want = f.profile(T, R)

print(f"{'L':>5s} {'xi_cut':>7s} {'n_lambda':>8s} {'sup error':>10s} {'erfc(L/2)':>10s}")
for L, xi_cut, nl in ((4, None, 64), (4, 300.0, 64), (6, 300.0, 64), (8, 300.0, 96), (11, 300.0, 96)):
    model = SpectrumModel(gs, 32, (-float(L), float(L)), xi_cut=xi_cut)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        inv = gelfand_inverse(gelfand_forward(f, model, QuadratureConfig(n_lambda=nl)), warn=False)
    err = float(np.max(np.abs(inv.profile(T, R) - want)))
    print(f"{L:5d} {str(xi_cut):>7s} {nl:8d} {err:10.3e} {math.erfc(L / 2):10.3e}")
