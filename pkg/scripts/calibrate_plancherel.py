#!/usr/bin/env python3
"""Measure the inversion constant with the Gaussian delta test and compare it
with the frozen value (2 pi)^-(n+1)."""

from hgelfand.invariant import ActionDescriptor
from hgelfand.transform import calibrate_plancherel, plancherel_constant

print(f"{'group':6s} {'measured':>22s} {'frozen':>22s} {'rel. diff':>10s}")
for tag in ("un:1", "un:2", "un:3", "tn:1", "tn:2", "tn:3"):
    act = ActionDescriptor.parse(tag)
    c = calibrate_plancherel(act)
    ref = plancherel_constant(act.n)
    print(f"{tag:6s} {c:22.16e} {ref:22.16e} {abs(c / ref - 1):10.2e}")
