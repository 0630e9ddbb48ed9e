"""Physical constants (CODATA via scipy) and unit helpers."""
from scipy import constants as _c

HBAR = _c.hbar
E_CHARGE = _c.e
EPS0 = _c.epsilon_0
MU0 = _c.mu_0
C = _c.c
EV = _c.electron_volt
A0 = _c.physical_constants["Bohr radius"][0]

#: squared atomic unit of dipole moment, (e a0)^2 in C^2 m^2
AU_DIPOLE2 = (E_CHARGE * A0) ** 2
#: atomic unit of polarizability, 4 pi eps0 a0^3 in C^2 m^2 / J
AU_POLARIZABILITY = 4 * _c.pi * EPS0 * A0 ** 3
#: angular frequency (rad/s) per wavenumber in cm^-1
RAD_PER_S_PER_INV_CM = 2 * _c.pi * C * 100.0

#: default Fermi velocity c/300
V_FERMI = C / 300.0
#: AB-bilayer interlayer hopping energy, J
GAMMA_HOP = 0.4 * EV
#: AB-bilayer interlayer distance, m
D_LAYER = 3.3e-10

#: Drude parameters for gold, rad/s
GOLD_OMEGA_P = 1.37e16
GOLD_GAMMA = 4.12e13
