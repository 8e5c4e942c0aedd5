"""Continuity-preserving weighted frames, canonicalizations, and
group-averaging projections for point clouds under permutation, rotation,
reflection, and translation actions, with continuity diagnostics and a small
classification experiment."""

from .cloud import (CloudError, as_cloud, cloud_from_dict, cloud_to_dict,
                    has_distinct_columns, load_cloud, save_cloud)
from .groups import (FullGroup, GroupError, Orthogonal, Permutation, Rotation,
                     RotSpan, SnPartition, Translation, Trivial, act, compose,
                     element_from_dict, element_to_dict, elements_equal,
                     identity_element, inverse, numerical_rank, rotation_2d,
                     stabilizer)
from .linalg import (LinalgError, gram_delta, gram_schmidt_rotation,
                     haar_orthogonal, haar_rotation, psd_sqrt, unit_direction)
from .canon import (CANON_METHODS, CanonError, best_rotation_onto, canon_lex,
                    canon_norm_axis, canon_od_gram, canon_so2_phase,
                    canon_sod, canon_sort, canon_translation)
from .frames import (FrameError, WeightedFrame, adversarial_unseparated,
                     argsort_cardinality_bound, frame_argsort_exact_d2,
                     frame_argsort_mc, frame_from_dict, frame_od,
                     frame_separated, frame_so2, frame_so2_stable,
                     frame_so3_stable, frame_sod, frame_to_dict,
                     is_a_separated, make_frame, merge_atoms, pushforward,
                     ramp_weight, reynolds_frame, separated_collection,
                     sn_frame_lower_bound)
from .project import (ProjectError, average_over_stabilizer,
                      project_canonical, project_equivariant,
                      project_invariant, reynolds_invariant, stable_fn_o3,
                      stable_fn_so2, stable_fn_so3, stabilizer_quadrature)
from .diagnostics import (DiagnosticReport, DiagnosticsError, ProbeSchedule,
                          check_weak_equivariance, find_discontinuity,
                          measure_distance, probe_frame_continuity,
                          probe_operator_continuity)
from .harness import (HarnessError, Mlp, StrokeDataset, Symmetrizer,
                      check_ordering, dataset_to_csv, evaluate,
                      mean_accuracies, run_experiment, save_results,
                      summarize_results, synth_dataset, train)

__all__ = [name for name in dir() if not name.startswith("_")]
