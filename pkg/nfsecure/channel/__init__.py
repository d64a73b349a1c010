from .geometry import (  # noqa: F401
    AntennaLayout,
    MovingRegion,
    ReceiverGeometry,
    cartesian_to_polar,
    lattice_layout,
    polar_to_cartesian,
    receiver_positions,
)
from .propagation import (  # noqa: F401
    ChannelMatrix,
    channel_column,
    channel_columns,
    far_field_channel,
    fresnel_distance,
    near_field_channel,
    nfrv,
    path_gain,
    rayleigh_distance,
    wavenumber,
)
