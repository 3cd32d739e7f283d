"""Reduced-order simulator of bladed disk and shaft systems with blade faults.

Modules
-------
sections   cross-section properties and the exponential crack profile
elements   12-DOF beam element matrices
loads      centrifugal and aerodynamic blade loads
assembly   rotating global assembly, boundary conditions, Rayleigh damping
solver     Newmark time marching, modal analysis, blade-off and impact events
signals    radial displacement, spectra and spectrograms
config     scenario files and parameter sweeps
cli        command-line entry points
"""

__version__ = "0.1.0"
