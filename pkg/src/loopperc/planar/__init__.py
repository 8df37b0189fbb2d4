"""Planar graphs, lattice patches and cut-sets."""
from .graph import (CutSet, Graph, PlanarGraph, combinatorial_ball, cut_set,
                    euler_characteristic, trace_faces)
from .lattice import (DIRECTIONS, DOWN, UP, Domain, HexPatch, annulus, ball_faces,
                      build_hex_patch, domain_ball, edge_endpoints, edge_key,
                      face_corners, face_edges, face_neighbors, loop_edges,
                      ray_crossings, surrounds, triangle_faces, triangular_ball,
                      triangular_graph, triangular_rhombus)
