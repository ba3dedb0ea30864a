"""Exact certification of parabolic cone-angle data and numerical
construction of the matching spherical metric on the sphere."""

from .errors import (AngleOutOfRange, ConemetError, EvaluationAtPole,
                     FlagContainedInLine, FlagDegenerate,
                     InconsistentDegree, InvalidConfiguration,
                     InvalidSubbundle, NoConvergence, NotUnitarizable,
                     ParityMismatch, ParseError, PathTooClose,
                     QuadratureNotConverged, SingularConstraintSystem,
                     StencilTooCloseToPole, ToleranceNotMet)
from .exact import (Automorphism, BundleModel, Classification,
                    ConeConfiguration, FlagLine, LineSubbundle,
                    ParabolicWeights, canonical_flag, check_angle_stability,
                    check_gauss_bonnet, classify_line_subbundle,
                    is_parabolically_stable, line_parabolic_degree,
                    max_destabilizing_degree, normalize_flag,
                    parabolic_degree_total, splitting_type_from_invariants,
                    tangency_count, weights_from_angles)
from .gaussian import QI
from .metric import (DevelopedFrame, Developer, MetricSample,
                     VerificationReport, area_estimate, cone_angle_estimate,
                     conformal_factor, curvature_check, develop,
                     gauss_bonnet_area, metric_grid,
                     path_independence_residual, transversality_check,
                     verify_metric)
from .schwarzian import (MonodromyRep, SchwarzianData, TransportPath,
                         build_path, constraint_residuals, loop_path,
                         monodromy_generators, q_coefficient,
                         residue_degree_check, solve_accessory_constraints,
                         transport)
from .unitarize import (HermitianForm, UnitarityCertificate, defect_at,
                        gauge_to_unitary, minimize_over_h,
                        solve_unitarizing_parameters, unitarity_defect)

__version__ = "0.1.0"
