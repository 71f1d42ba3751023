"""Physical constants used for unit conversion at the command line.

Planck mass from CODATA 2018, solar mass from the IAU 2015 nominal value.
Internally all black hole bookkeeping is in Planck units; only the command
line converts from solar masses.
"""

PLANCK_MASS_KG = 2.176434e-8
SOLAR_MASS_KG = 1.98892e30
SOLAR_MASS_IN_PLANCK_UNITS = SOLAR_MASS_KG / PLANCK_MASS_KG
