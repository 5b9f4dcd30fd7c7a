"""loadreduce: singular-perturbation order reduction for composite-load dynamics.

Reduces the WECC composite load model's dynamic components (three-phase
induction motors A/B/C and the DER_A aggregate inverter model) to their slow
subsystems via quasi-steady-state substitution, with an optional
boundary-layer correction and computable accuracy bounds, and ships the
stiff/non-stiff integrators and the comparison harness used to measure the
accuracy/speedup trade-off.
"""

__version__ = "0.1.0"
