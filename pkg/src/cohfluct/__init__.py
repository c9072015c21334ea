"""Fluctuating coherence of pure states under incoherent operations with a battery."""

from .battery import (Battery, TruncatedGaussian, UniformWindow, coherence_quantum,
                      level_coherence, log_multiplicity, new_battery, shift_alpha,
                      uniformity_epsilon)
from .coupling import (EXACT, FLOOR, ConditionResiduals, Coupling, Distribution,
                       canonical_coupling, condition_residuals, explicit_coupling,
                       feasibility_lp, marginal_w, mix, random_valid_coupling)
from .errors import (CohFluctError, ConditionViolation, DegeneracyError, GridError,
                     InconclusiveError, MajorisationError, PreconditionError, SizeCapError,
                     ValidationError, WraparoundError)
from .majorisation import (Bistochastic, PermutationMixture, apply_transport, birkhoff,
                           dual, hlp_transport, is_majorised)
from .oracle import full_label_oracle
from .protocol import (BlockTransition, CollapsedState, ReverseCoupling, WindowSpec,
                       build_joint_states, build_transition, forward_protocol, make_window,
                       overlap_to_ideal, reverse_protocol, verify_transport, window_battery)
from .states import (DiagonalState, c_rel_pure, diagonal_rank, max_coherent, renyi_entropy,
                     shannon_entropy)
from .theorems import (TheoremReport, crooks, entropy_vs_majorisation, integral_ft,
                       jarzynski, renyi_catalytic, second_law, tail_bound, third_law)

__version__ = "0.1.0"
