"""Physical constants (CODATA 2018), SI units."""

# Exact by SI definition
SPEED_OF_LIGHT = 299792458.0            # m/s
PLANCK = 6.62607015e-34                 # J*s
ELEMENTARY_CHARGE = 1.602176634e-19     # C

# Derived / measured, >= 10 significant digits
HBAR = 1.054571817646156e-34            # J*s, h / 2pi
VACUUM_PERMITTIVITY = 8.8541878128e-12  # F/m
BOHR_MAGNETON = 9.2740100783e-24        # J/T
BOHR_RADIUS = 5.29177210903e-11         # m

# Atomic unit of electric dipole moment, e * a0
DIPOLE_ATOMIC_UNIT = ELEMENTARY_CHARGE * BOHR_RADIUS  # C*m
