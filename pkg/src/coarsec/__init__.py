"""Desk-scale coarse topology on finite windows.

Entourage schedules stand in for coarse structures; the four filtration
flavors (Vietoris-Rips or Cech, simplicial complexes or simplicial sets) are
built per stage, and essential-connectivity certificates record, per stage,
the least later stage whose inclusion kills components and homology in every
inspected degree.
"""

from ._version import __version__
from .coarse import (BornologousReport, Entourage, EntourageSchedule, GroundSet, PointMap,
                     RetractReport, check_bornologous, check_close, check_coarse_retract,
                     compose_entourages, normalize_entourage, same_pairs)
from .complexes import (CECH, VIETORIS_RIPS, SandwichReport, SimplicialComplex,
                        SubsetFamilyFlavor, TruncatedSimplicialSet, build_cech_complex,
                        build_simpset, build_vr_complex, check_sandwich)
from .subdivision import (CloseMapsReport, ContiguityReport, EdgePathFilling, SimplicialMap,
                          SubdividedComplex, SubdividedDisk, boundary_simplex,
                          check_contiguous, combine_close_maps, fill_edge_path,
                          half_gap_certifies_contiguity, iterated_least_vertex_map,
                          iterated_subdivision, least_vertex_map, perturb_filling,
                          simpliciality_witness, standard_simplex, subdivide, subdivide_map,
                          subdivided_disk, sup_displacement)
from .homology import (ChainComplexRep, Coefficients, ComparisonReport, FillReport,
                       HomologyMap, Inclusion, IntegerHomology, Pi0Report, Z, Z2,
                       chain_complex, compute_betti, generating_loops, induced_homology_map,
                       pi0_induced_map, pi1_bounded_fill, simpset_complex_comparison)
from .certify import (ConnectivityCertificate, FlavorComparison, RetractTransferReport,
                      StageVerdict, certify_essential_connectivity, compare_flavors,
                      retract_transfer_experiment, stage_betti_table)
from .spaces import (GroupSpec, MetricWindow, bounded, build_word_ball, geometric_series,
                     grid, load_distance_matrix, make_synthetic, restrict_window, size_cap,
                     threshold_entourage, threshold_schedule)
from . import errors

__all__ = [name for name in dir() if not name.startswith("_")]
