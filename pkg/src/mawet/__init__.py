"""Movable-antenna wireless energy transfer: geometry, line-of-sight
channels, max-min power allocation, swarm placement search, and the
experiment harness."""

from .channel import (ChannelMatrix, ChannelParams, Precoder,
                      SPEED_OF_LIGHT, channel_coefficient, channel_matrix,
                      radiation_profile, received_power,
                      wavelength_from_freq)
from .experiments import (ExperimentConfig, ExperimentRecord,
                          make_deployment, mean_power,
                          nearfield_probability, read_results, run_instance,
                          sweep, write_results)
from .geometry import (AntennaLayout, Deployment, InfeasibleLayoutError,
                       Region, UmaParams, aperture_diameter,
                       fixed_ula_positions, fixed_ura_positions, grid_shape,
                       is_near_field, project_to_region, rayleigh_distance,
                       sample_deployment, spacing_violations, uma_delta_max,
                       uma_positions, uma_ref_interval)
from .precoder import (PowerAllocation, SdpSolution, SdpSolverError,
                       gaussian_randomization, grid_oracle,
                       single_device_power, solve_maxmin_sdp)
from .sgpso import (FitnessConfig, ImaCodec, PsoParams, SwarmState,
                    UmaCodec, inertia_weight, make_codec, run_sgpso)

__version__ = "0.1.0"
