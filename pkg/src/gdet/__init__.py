"""Exact term counts of group determinants, restricted-partition
cardinalities, and Wolstenholme prime classification."""

from .groups import (FiniteGroup, catalog_order16, direct_product,
                     make_cyclic, make_dihedral, make_presented,
                     make_quaternion, resolve_group, validate)
from .sparsepoly import (EXACT, CoefficientMode, MemoryBudgetExceeded,
                         SparsePoly, poly_add, poly_mul, poly_pow)
from .detengine import (det_circulant_character, det_subset_dp,
                        group_determinant, group_matrix, term_count_power)
from .partitions import (card_lambda, enumerate_lambda,
                         prime_power_congruence_report)
from .wolstenholme import (central_binom_mod, classify_prime, harmonic_mod,
                           is_prime, n_theta_via_identity, scan_range)

__version__ = "1.0.0"
