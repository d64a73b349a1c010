from .rates import (  # noqa: F401
    BeamformerSet,
    RatePair,
    achievable_rate,
    log_det_gram,
    secrecy_rate,
)
from .wmmse import (  # noqa: F401
    WmmseResult,
    WmmseState,
    bisect_mu,
    block_auxiliaries,
    initial_beamformer,
    mse_matrix,
    secrecy_bits,
    secrecy_nats,
    solve_w_given_mu,
    update_receive_filter,
    update_weights,
    wmmse_fully_digital,
    wmmse_objective,
)
from .hybrid import (  # noqa: F401
    HybridResult,
    MoIterate,
    MoResult,
    euclidean_gradient_f2,
    f2_value,
    hybrid_factorize,
    initial_analog,
    ls_digital,
    mo_analog,
    polak_ribiere,
    retract,
    riemannian_gradient,
    transport,
)
