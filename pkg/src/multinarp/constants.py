"""Unit conventions shared by every module.

Internal units: energies in meV, times in ps, angular frequencies in
rad/ps.  An energy E (meV) corresponds to the angular frequency
E / HBAR_MEV_PS (rad/ps).  This is the only place the conversion
constants live.
"""

HBAR_MEV_PS = 0.6582119       # meV ps
KB_MEV_PER_K = 0.08617333     # meV / K


def mev_to_radps(energy_mev):
    """Angular frequency (rad/ps) of an energy given in meV."""
    return energy_mev / HBAR_MEV_PS


def radps_to_mev(omega_radps):
    """Energy (meV) of an angular frequency given in rad/ps."""
    return omega_radps * HBAR_MEV_PS
