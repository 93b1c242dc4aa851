"""Desk-scale laboratory for Ginzburg-Landau vortex dynamics under
convective forcing: semi-implicit PDE integration, defect tracking,
renormalized-energy machinery, the effective vortex ODE, and the
diagnostics that tie them together."""

__version__ = "0.1.0"
