"""Translation-invariant binary-image operators as computational graphs.

Core pieces: an interval algebra over subsets of a finite window
(`lattice`), bit-parallel binary images with the elementary morphological
operators (`image`), validated operator graphs with window/basis
propagation (`graph`), layered architectures over a parameter lattice
(`arch`), greedy and stochastic lattice descent trainers (`train`), and a
synthetic corpus plus PBM I/O (`data`).
"""

from .errors import (
    ConfigError,
    DataFormatError,
    GridParseError,
    InvalidGraphError,
    WindowCapExceeded,
)
from .grid import ORIGIN, PixelSet, Point, parse_grid, render_grid
from .lattice import (
    BooleanFn,
    Interval,
    IntervalCollection,
    Window,
    boolean_to_collection,
    collection_complement,
    collection_inf,
    collection_sup,
    collection_to_boolean,
    dual_boolean,
    interval_contains,
    interval_neighbors,
    maximal_intervals,
    rewindow,
    set_neighbors,
)
from .image import (
    BinaryImage,
    StructElem,
    apply_boolean_fn,
    asf_layer,
    closing,
    complement,
    dilate,
    erode,
    inf_generating,
    opening,
    sup_generating,
    translate,
)
from .graph import (
    MCGraph,
    basis_of,
    build_supgen_from_basis,
    evaluate,
    kernel_by_enumeration,
    validate,
    window_of,
)
from .arch import (
    ArchitectureSpec,
    LayerSpec,
    ParamVector,
    compile,
    deserialize_params,
    init_params,
    param_neighbors,
    sample_neighbors,
    serialize_params,
)
from .train import (
    SamplePair,
    TrainConfig,
    TrainReport,
    lda_train,
    loss_absolute,
    loss_iou,
    mean_loss,
    slda_train,
)
from .data import (
    CorpusSpec,
    add_noise,
    boundary_target,
    gen_corpus,
    load_pairs,
    read_pbm,
    write_pbm,
)

__version__ = "0.1.0"
