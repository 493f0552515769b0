"""
From device geometry to coupling rates
======================================

A silicon ring with a quantum dot on its surface is described by a handful of
lab numbers: the resonance wavelength, the intrinsic quality factor, the mode
volume and the dot's dipole moment. Everything the transport and emission
models need follows from these.
"""

from chiralsim import params as pm

resonator, emitter = pm.nominal_design()
p = pm.resolve(resonator, emitter, d=-0.99)

# The vacuum field at the dot sets the coupling strength g = d E0 / hbar.
e0 = pm.zero_point_field(p.omega_c, resonator.mode_volume)
print(f"zero-point field E0      = {e0:.4g} V/m")

# All rates are stored in rad/s; ``to_ghz`` divides by 2 pi and 1e9.
print(f"coupling g / 2pi         = {pm.to_ghz(p.g):.4g} GHz")
print(f"ring loss kappa_i / 2pi  = {pm.to_ghz(p.kappa_i):.4g} GHz")
print(f"dot decay gamma_q / 2pi  = {pm.to_ghz(p.gamma_q) * 1e3:.4g} MHz")

# Dividing every rate by kappa_i gives the dimensionless system used for the
# transport figures: g is about 1.39 and critical coupling means kappa_ex = 1.
scaled = p.scaled(p.kappa_i)
print(f"g / kappa_i              = {scaled.g:.4g}")
print(f"gamma_q / kappa_i        = {scaled.gamma_q:.3g}")

# The coupling is strong compared with the loss channels individually, but not
# compared with the total ring decay kappa_i + kappa_ex.
print(f"g / (kappa_i + kappa_ex) = {scaled.g / scaled.kappa:.3f}")
