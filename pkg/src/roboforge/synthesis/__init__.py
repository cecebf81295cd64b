"""Dataset synthesis pipeline: generate, ground, review, augment, build."""

from .augment import AugmentationError, augment_instruction, augmentation_matches
from .dataset import (
    AUGMENTED,
    ORIGINAL,
    ROW_FIELDS,
    DatasetPair,
    assemble_pairs,
    build_dataset,
    load_pairs,
)
from .generate import (
    InstructionRecord,
    generate_instructions,
    parse_instruction_lines,
    policy_violations,
)
from .grounding import (
    AUTO_ACCEPTED,
    FAILED,
    NEEDS_REVIEW,
    REVIEWED_ACCEPTED,
    GroundingResult,
    ReviewQueueError,
    export_review_queue,
    ground_all,
    ground_instruction,
    import_review_resolutions,
    parse_verdict,
    summarize_trajectory,
)
from .profiles import COMPLEX, EVAL, SIMPLE, TRAIN, PromptProfile, default_profiles

__all__ = [
    "AUGMENTED",
    "AUTO_ACCEPTED",
    "AugmentationError",
    "COMPLEX",
    "DatasetPair",
    "EVAL",
    "FAILED",
    "GroundingResult",
    "InstructionRecord",
    "NEEDS_REVIEW",
    "ORIGINAL",
    "PromptProfile",
    "REVIEWED_ACCEPTED",
    "ROW_FIELDS",
    "ReviewQueueError",
    "SIMPLE",
    "TRAIN",
    "assemble_pairs",
    "augment_instruction",
    "augmentation_matches",
    "build_dataset",
    "default_profiles",
    "export_review_queue",
    "generate_instructions",
    "ground_all",
    "ground_instruction",
    "import_review_resolutions",
    "load_pairs",
    "parse_instruction_lines",
    "parse_verdict",
    "policy_violations",
    "summarize_trajectory",
]
