"""Physical constants registry.

Every derived number in the toolkit traces back to the values below, so
they live in one place and can be printed with ``nvcavity constants``.
CODATA values are taken from :mod:`scipy.constants`.
"""

from scipy import constants as _sc

EPSILON_0 = _sc.epsilon_0  # vacuum permittivity [F/m]
MU_0 = _sc.mu_0  # vacuum permeability [H/m]
PLANCK_H = _sc.h  # Planck constant [J s]
HBAR = _sc.hbar  # reduced Planck constant [J s]
BOHR_MAGNETON = _sc.physical_constants["Bohr magneton"][0]  # [J/T]

# NV defaults; both are overridable through SpinSpecies.
NV_ZERO_FIELD_SPLITTING_HZ = 2.87e9  # D/h [Hz]
NV_G_FACTOR = 2.0028  # electron g-factor of the NV ground state

# Diamond carbon site density, for ppm -> m^-3 conversion of defect densities.
CARBON_SITE_DENSITY_M3 = 1.76e29  # [m^-3] (= 1.76e23 cm^-3)

# Default spin transition matrix element |<+-1|Sx|0>| for a spin-1 triplet.
SPIN_MATRIX_ELEMENT = 2.0**-0.5


def registry() -> list[dict]:
    """All constants as (name, value, unit, description) records."""
    return [
        {"name": "epsilon_0", "value": EPSILON_0, "unit": "F/m",
         "description": "vacuum permittivity"},
        {"name": "mu_0", "value": MU_0, "unit": "H/m",
         "description": "vacuum permeability"},
        {"name": "planck_h", "value": PLANCK_H, "unit": "J s",
         "description": "Planck constant"},
        {"name": "hbar", "value": HBAR, "unit": "J s",
         "description": "reduced Planck constant"},
        {"name": "bohr_magneton", "value": BOHR_MAGNETON, "unit": "J/T",
         "description": "Bohr magneton"},
        {"name": "nv_zero_field_splitting", "value": NV_ZERO_FIELD_SPLITTING_HZ,
         "unit": "Hz", "description": "NV ground-state zero-field splitting D/h"},
        {"name": "nv_g_factor", "value": NV_G_FACTOR, "unit": "1",
         "description": "NV electron g-factor"},
        {"name": "carbon_site_density", "value": CARBON_SITE_DENSITY_M3,
         "unit": "m^-3", "description": "carbon site density of diamond"},
        {"name": "spin_matrix_element", "value": SPIN_MATRIX_ELEMENT, "unit": "1",
         "description": "spin-1 transition matrix element |<+-1|Sx|0>|"},
    ]
