"""Willmore flow of level sets by heat diffusion, rescaling and redistancing."""
from .curvature import (COEFFS, CurvatureMethod, OrderSelectionCoefficients,
                        curvature_diffusion_order1, curvature_diffusion_order2,
                        curvature_direct, curvature_l2_error, mean_curvature)
from .errors import (ConfigError, DegenerateCurvature, DegenerateGradient,
                     DegenerateInterface, GeoflowError, NoInterface, SingularSystem,
                     SolverDiverged)
from .flow import (DiagnosticsRecord, FlowConfig, adaptive_dt, constrained_step, run,
                   willmore_energy, willmore_step, willmore_step_2d, willmore_step_3d)
from .grid import (Grid, LevelSet, enclosed_volume, grad_norm, gradient, integrate,
                   interface_area, interface_mean, laplacian, smoothed_delta,
                   smoothed_heaviside)
from .heat import LinearSolveParams, Scheme, diffuse, diffuse_pair
from .io import extract_contour2d, write_contours, write_snapshot, write_timeseries
from .redistance import redistance, redistance_closest_point
from .rescale import (RescaleReport, apply_rescale, area_shift, rescale, rescale_combined,
                      volume_shift)
from .shapes import (axes_for_reduced_volume, levelset_ellipse, levelset_ellipsoid,
                     reduced_volume, sdf_ball, sdf_circle, sdf_plane, sdf_sphere,
                     sdf_torus, torus_radii_from_VA)

__version__ = "0.1.0"
