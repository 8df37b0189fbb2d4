"""Loop O(n) configurations, exact enumeration and Metropolis sampling."""
from .config import (GibbsSpec, LoopConfig, LoopDecomposition, decompose, empty, face_flip,
                     hexagon, log_weight, union, validate, vertex_degrees, weight)
from .exact import GibbsTable, enumerate_gibbs, face_set_code, state_from_code
from .mcmc import FlipTables, MetropolisChain, metropolis_chain, sample_codes
from .observables import (annulus_loop_indicator, annulus_edges, loops_around,
                          ray_edge_mask, rsw_estimate, x_critical)
