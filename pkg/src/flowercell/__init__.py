"""Conditioned Poisson-Voronoi and Crofton zero-cells around a convex body.

Deterministic geometry (support functions, Voronoi flowers, Steiner
points), seeded simulation of the conditioned point/line processes, and
closed-form limit laws with a Monte Carlo verification harness.
"""

from .cell import (CellMetrics, ZeroCell, cell_metrics, crofton_zero_cell,
                   flower_area_defect, support_point, vertex_cloud,
                   voronoi_zero_cell)
from .errors import (DomainError, ExperimentError, FlowercellError,
                     NumericError, UnboundedCellError, UnsupportedKindError,
                     ValidationError)
from .geometry import (Angle, ConvexBody, body_area, body_from_json,
                       body_perimeter, body_to_json, boundary_point,
                       curvature_radius, flower_area, flower_area_general,
                       flower_membership, flower_rest, hausdorff_support,
                       polygon_flower_area, square_body, steiner_point,
                       support_function, translate)
from .harness import (CheckResult, ExperimentConfig, ExperimentResult,
                      run_experiment, run_experiment_full)
from .increment import (IncrementQuery, edge_frame_point,
                        increment_area_exact,
                        increment_area_polygon_asymptotic,
                        increment_area_smooth_asymptotic)
from .laws import (GAMMA_2_3, NUCLEUS_COORD_VARIANCE, BodyClass, Functional,
                   LawSpec, Model, Rate, TheoremConstant, all_constants,
                   density_f_i, density_f_s, density_g_i, intensity_sigma_i,
                   intensity_sigma_s, sigma_s_marginal, steiner_limit_density,
                   theorem_constant)
from .render import render_svg, save_report_figure
from .report import EstimatorReport, Welford, export
from .sampling import (LineSample, PointSample, domain_exclusion,
                       extend_line_sample, extend_sample, flower_exclusion,
                       sample_conditioned_lines, sample_conditioned_points,
                       sample_nucleus, stream_generator, thin_sample)
from .shape import (AntiorthotomicCurve, FillerArc, FlowerDecomposition,
                    StarlikeDomain, antiorthotomic, domain_from_json,
                    domain_limit_constants, invert, is_voronoi_flower,
                    limit_shape_check, maximal_flower)

__version__ = "0.1.0"
