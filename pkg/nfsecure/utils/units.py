import numpy as np


def dbm_to_watts(dbm):
    """P(W) = 10^((dBm - 30) / 10). Scalars stay Python floats."""
    if np.ndim(dbm):
        return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)
    return 10.0 ** ((float(dbm) - 30.0) / 10.0)


def watts_to_dbm(watts):
    if np.ndim(watts):
        return 10.0 * np.log10(np.asarray(watts, dtype=float)) + 30.0
    return 10.0 * np.log10(float(watts)) + 30.0
