"""Sparse code multiple access at desk scale.

Codebook construction from a signature matrix, uplink encoding and channel
simulation, message-passing multiuser detection (sum-product, max-log, and
an exact enumeration oracle), and a Monte-Carlo BER/FER harness with an
orthogonal-access baseline.
"""

from .codebook import (
    CodebookSet,
    base_vector,
    build_codebook,
    build_codebook_set,
    export_codebooks,
    import_codebooks,
    interleave_even_dimensions,
    rotate_dimensions,
    unique_decodability,
    user_operator,
)
from .decoder import (
    BlockDecodeResult,
    DecodeResult,
    DecoderConfig,
    LikelihoodTables,
    build_likelihood_tables,
    decode_frames,
    generic_reference_beliefs,
    map_oracle_decode,
    maxlog_decode,
    spa_decode,
    system_index,
)
from .errors import (
    ConfigInvalid,
    DimensionMismatch,
    EdgeNotFound,
    EmptyMatrix,
    InvalidM,
    LatinAssignmentInfeasible,
    LengthMismatch,
    NonUniformWeights,
    ScheduleInfeasible,
    ScmaError,
    StateSpaceTooLarge,
    ZeroBelief,
    ZeroNoiseVariance,
)
from .harness import (
    BerRecord,
    SimConfig,
    emit_results,
    frame_rng,
    load_records,
    oma_baseline,
    parse_ebn0_grid,
    run_sweep,
)
from .repetition import hard_decode, soft_llr
from .signature import (
    FactorGraph,
    SignatureParams,
    factor_graph,
    latin_phase_assignment,
    load_signature,
    mapping_matrices,
    validate_signature,
)
from .spa import (
    GenericFactorGraph,
    LocalFunction,
    MessageState,
    SpaResult,
    brute_force_marginals,
    fn_to_vn_update,
    run_spa,
    vn_to_fn_update,
)
from .transceiver import (
    ReceivedVector,
    TransmitFrame,
    bits_to_index,
    draw_channel,
    ebn0_db_to_n0,
    encode,
    index_to_bits,
    transmit,
)

__version__ = "0.1.0"
