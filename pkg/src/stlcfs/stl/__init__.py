from stlcfs.stl.robustness import (
    MuChain,
    RobustnessTrace,
    build_mu_chain,
    rho_exact,
    rho_window,
    smooth_chain,
    smooth_max,
    smooth_max_coeffs,
    window_robustness_exact,
)

__all__ = [
    "MuChain",
    "RobustnessTrace",
    "build_mu_chain",
    "rho_exact",
    "rho_window",
    "smooth_chain",
    "smooth_max",
    "smooth_max_coeffs",
    "window_robustness_exact",
]
