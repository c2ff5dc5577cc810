"""Center-direction field toolkit.

Encodes point annotations into dense center-direction fields, provides the
matching loss kernels with verified gradients, generates reproducible
synthetic scenes, localizes centers with a hand-crafted multi-scale filter
bank, and evaluates counting/localization with assignment-based matching.
"""

__version__ = "0.1.0"

from .assignment import AssignmentError, hungarian_assign
from .fields import (DirectionField, FieldError, PointSet, ScoreMap, WeightMap,
                     decode_angle, encode_direction_field, nearest_center,
                     weight_map)
from .fileio import (FormatError, export_pgm, read_direction_field, read_field,
                     read_points_csv, read_score_map, write_field,
                     write_points_csv)
from .localizer import (Detection, LocalizerConfig, edge_kernel, find_peaks,
                        handcrafted_response)
from .losses import (FocalParams, LossInstance, LossResult,
                     finite_difference_check, focal_loss, localization_l1_loss,
                     localization_target, random_instance, regression_loss)
from .metrics import (MatchResult, MetricsReport, count_errors,
                      evaluate_detections, image_metrics, match_at_tau,
                      threshold_sweep)
from .synth import (SynthConfig, SynthScene, add_gaussian_noise, add_occlusions,
                    apply_occlusion_mask, generate_scene, occlusion_noise_mask)
