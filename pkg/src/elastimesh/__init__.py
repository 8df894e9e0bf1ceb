"""Structured quad mesh generation for 2D domains.

Meshes come from either transfinite interpolation of the four boundary
curves or a small elasticity-constrained neural map trained against them,
followed by an exact boundary projection.  Quality metrics, file exports
and a configuration-driven CLI round out the toolkit.
"""

from ._threads import apply_thread_cap as _apply_thread_cap

_apply_thread_cap()

from .autodiff import HyperDual, Tape, Var, backprop, evaluate_jet
from .errors import (DegenerateCellError, DegenerateGeometryError,
                     DomainEvaluationError, ElastimeshError, GeometryError,
                     InvalidArgumentError, MeshIOError, NumericError,
                     ParseError, TrainingDivergedError)
from .geometry import (BoundaryCurve, DomainSpec, analytic_curve,
                       check_corner_compatibility, fit_boundary_curve,
                       polyline_curve, read_points_csv, sample_curve,
                       segment_curve)
from .hardbc import apply_hard_bc
from .meshcore import (CompGrid, QualityReport, StructuredMesh, cell_areas,
                       export_csv, export_vtk, import_mesh_csv,
                       included_angles, quality_report, uniform_comp_grid)
from .network import PinnModel, augment, forward, init_model, load_model, save_model
from .pde import (GOVERNING_EQUATIONS, LameConstants, SecondOrderJet,
                  hyperbolic_residual, laplace_residual,
                  monge_ampere_residual, navier_lame_residual)
from .presets import PRESETS, make_domain
from .tfi import tfi_generate
from .training import (AdamState, BoundaryWeights, CollocationSet, LossBreakdown,
                       PROFILES, TrainConfig, adam_step, collocation_points,
                       compute_loss, generate_mesh, lr_at_epoch, train)

__version__ = "0.1.0"
