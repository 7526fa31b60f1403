"""Constrained text composition by Metropolis-Hastings sampling.

Fixed-length token sequences are sampled from the energy distribution a
masked-conditional model induces, with poetic constraints (pins, lipograms,
suffix rhymes, surface filters) compiled to per-position vocabulary masks
enforced in logit space.
"""

from .constraints import (
    Constraint,
    ConstraintSet,
    Lipogram,
    Pin,
    PositionMasks,
    SuffixRhyme,
    SurfacePredicate,
    apply_mask,
    compile_masks,
    parse_constraint_spec,
    render_constraint_spec,
    satisfies,
)
from .errors import VersecraftError
from .providers import (
    MaskedModelProvider,
    TabularModel,
    exact_conditional,
    load_tabular_model,
    pseudo_loglik_energy,
)
from .sampler import (
    ALL_MASK,
    ChainState,
    Emission,
    SamplerConfig,
    StepRecord,
    acceptance_probability,
    exact_target_distribution,
    init_chain,
    propose,
    run,
    step,
    total_variation,
)
from .vocabulary import (
    Token,
    TokenSequence,
    Vocabulary,
    build_vocabulary,
    detokenize,
    load_vocabulary,
    token_letters,
    tokenize,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_MASK",
    "ChainState",
    "Constraint",
    "ConstraintSet",
    "Emission",
    "Lipogram",
    "MaskedModelProvider",
    "Pin",
    "PositionMasks",
    "SamplerConfig",
    "StepRecord",
    "SuffixRhyme",
    "SurfacePredicate",
    "TabularModel",
    "Token",
    "TokenSequence",
    "VersecraftError",
    "Vocabulary",
    "acceptance_probability",
    "apply_mask",
    "build_vocabulary",
    "compile_masks",
    "detokenize",
    "exact_conditional",
    "exact_target_distribution",
    "init_chain",
    "load_tabular_model",
    "load_vocabulary",
    "parse_constraint_spec",
    "propose",
    "pseudo_loglik_energy",
    "render_constraint_spec",
    "run",
    "satisfies",
    "step",
    "token_letters",
    "tokenize",
    "total_variation",
]
