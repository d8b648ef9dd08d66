"""SDN traffic monitoring on a two-layer graph: a virtual monitor layer
aggregates switch byte counters, a graph-wavelet pyramid shrinks it further,
and congestion is detected and localized from the coarse spectral views.
"""

from ._accel import active_backend, available_backends
from .graphs import (GraphSignal, InterlayerCoupling, LayerGraph,
                     MultilayerNetwork, build_layer, build_multilayer,
                     layer_from_adjacency, load_topology, project,
                     save_topology)
from .monitor import (AnomalyReport, DetectionResult, MonitorAssignment,
                      aggregate, build_monitor_layer, calibrate_threshold,
                      detect, detect_on_pyramid, localize, monitor_fan_in,
                      reduction_report)
from .pipeline import RunConfig, load_config, run_pipeline
from .pyramid import (Pyramid, PyramidLevel, build_pyramid, coarsen_once,
                      kron_reduce, pyramid_filter_bank, pyramid_kernel_pair,
                      pyramid_level_sizes, select_vertices)
from .sgwt import (ChebyshevApprox, SpectralKernel, WaveletCoefficients,
                   WaveletFilterBank, chebyshev_fit, design_filter_bank,
                   frame_bounds, sgwt_chebyshev, sgwt_exact)
from .simulate import (CongestionEvent, LeafSpineSpec, TelemetryRecord,
                       TrafficScenario, gen_leaf_spine, ingest_telemetry,
                       load_scenario, save_scenario, simulate_traffic)
from .spectral import (EigenBasis, Laplacian, Spectrum, eigendecompose, gft,
                       high_frequency_ratio, igft, laplacian)

__version__ = "0.1.0"
