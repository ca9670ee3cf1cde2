"""Physical constants and unit conversions.

Energies are carried in eV and simulated time in fs throughout the package;
lab-frame pulse durations are a separate quantity in seconds.
"""

# Reduced Planck constant in the eV/fs unit system.
HBAR_EV_FS = 0.6582119569

# Bohr radius in nanometers (dipoles are quoted in e*a0).
BOHR_RADIUS_NM = 0.052917721

V_PER_M_TO_V_PER_NM = 1e-9


def dipole_field_coupling_ev(mu_e_a0: float, field_v_per_m: float) -> float:
    """Coupling energy (eV) of a dipole mu (e*a0) in a field E (V/m)."""
    return mu_e_a0 * BOHR_RADIUS_NM * field_v_per_m * V_PER_M_TO_V_PER_NM
