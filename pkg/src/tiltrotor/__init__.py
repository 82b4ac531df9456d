"""Simulation and sizing toolkit for a ducted tilt-rotor quadrotor.

Subpackages cover the linear-systems core (:mod:`tiltrotor.linsys`),
vehicle component models (:mod:`tiltrotor.vehicle`), PID synthesis by
pole placement (:mod:`tiltrotor.tuning`), closed-loop flight scenarios
(:mod:`tiltrotor.scenarios`), hover and cruise performance analysis
(:mod:`tiltrotor.performance`), JSON configuration (:mod:`tiltrotor.config`),
delimited/figure reporting (:mod:`tiltrotor.report`), and the ``tiltsim``
command line front end (:mod:`tiltrotor.cli`).
"""

__version__ = "0.1.0"
