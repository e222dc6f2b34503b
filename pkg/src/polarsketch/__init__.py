"""Universal polar source coding and deterministic sparse sketching over Z_a."""

from .errors import (
    FormatError,
    IndeterminateSpectrumError,
    InfeasibleError,
    PolarError,
    ResourceLimitError,
    UnsupportedAlphabetError,
)
from .measures import (
    Dist,
    OrderWitness,
    Spectrum,
    as_dist,
    binary_dist_with_entropy,
    circular_convolve,
    dft,
    dom_region_grid,
    dominates_c,
    dominates_cp,
    dominates_d,
    entropy,
    eta,
    eta_bar,
    eta_ternary_closed_form,
    idft,
    is_infinitely_divisible,
    make_spike,
    p_c_ball,
    p_cp_spa,
    point_mass,
    uniform,
)
from .polar import (
    ORACLE_CAP,
    ScMessage,
    SymbolBlock,
    exact_joint_conditionals,
    exact_joint_law,
    polar_inverse,
    polar_transform,
    sc_conditional,
)
from .storage import (
    Provenance,
    StorageSet,
    estimate_conditional_entropies_mc,
    is_nested,
    load_pset,
    save_pset,
    storage_set_bec,
    storage_set_exact,
    storage_set_mc,
    union_storage,
)
from .codec import (
    CompressedBlock,
    MismatchReport,
    ModelSet,
    decode_block,
    encode_block,
    estimate_mismatch_error,
    polar_dec,
    polar_dec_adapt,
    universal_compress,
    universal_decompress,
)
from .sketch import (
    BrutResult,
    SketchSpec,
    brut_univ_sketching,
    build_sketch_spec,
    load_sketch_spec,
    measurement_count_formula,
    recover,
    save_sketch_spec,
    sketch,
)
from .compound import (
    CounterexampleReport,
    SynthEntropyTree,
    compound_lower_bound,
    compound_upper_bound_bec,
    counterexample_report,
    synthesized_entropies,
)
from .estimators import PolarSketcher, UniversalBinaryCompressor

__version__ = "0.1.0"

__all__ = [
    "BrutResult", "CompressedBlock", "CounterexampleReport", "Dist", "FormatError",
    "IndeterminateSpectrumError", "InfeasibleError", "MismatchReport", "ModelSet",
    "ORACLE_CAP", "OrderWitness", "PolarError", "PolarSketcher", "Provenance",
    "ResourceLimitError", "ScMessage", "SketchSpec", "Spectrum", "StorageSet",
    "SymbolBlock", "SynthEntropyTree", "UniversalBinaryCompressor",
    "UnsupportedAlphabetError", "as_dist", "binary_dist_with_entropy",
    "brut_univ_sketching", "build_sketch_spec", "circular_convolve",
    "compound_lower_bound", "compound_upper_bound_bec", "counterexample_report",
    "decode_block", "dft", "dom_region_grid", "dominates_c", "dominates_cp",
    "dominates_d", "encode_block", "entropy", "estimate_conditional_entropies_mc",
    "estimate_mismatch_error", "eta", "eta_bar", "eta_ternary_closed_form",
    "exact_joint_conditionals", "exact_joint_law", "idft", "is_infinitely_divisible",
    "is_nested", "load_pset", "load_sketch_spec", "make_spike",
    "measurement_count_formula", "p_c_ball", "p_cp_spa", "point_mass", "polar_dec",
    "polar_dec_adapt", "polar_inverse", "polar_transform", "recover",
    "save_pset", "save_sketch_spec", "sc_conditional", "sketch",
    "storage_set_bec", "storage_set_exact", "storage_set_mc", "synthesized_entropies",
    "uniform", "union_storage", "universal_compress", "universal_decompress",
]
