"""Site percolation, exact measures, FKG certificates and spanning trees."""
from .configs import BondConfig, ExactMeasure, Partition, SiteConfig, SpanningForest
from .fkg import (check_dominated_by_complement, check_positive_association,
                  increasing_events, is_increasing)
from .sampling import (bernoulli_batch, bernoulli_law, bernoulli_sites, clusters,
                       divide_and_color, divide_and_color_law, monotone_coupling,
                       site_law_from_samples)
from .ust import (all_spanning_trees, spanning_tree_count, trifurcation_bound_check,
                  trifurcations, vertex_boundary, wilson_ust)
