from .datasets import (
    DedupConfig,
    UnknownProblem,
    active_select,
    build_preference_pairs,
    clean_dataset,
    debias,
    dedup,
    dedup_indices,
    jaccard,
    label_solutions,
    ngram_set,
)
from .io import (
    dataset_manifest,
    read_dataset,
    read_jsonl,
    read_pairs,
    read_problems,
    read_solutions,
    write_dataset,
    write_jsonl,
    write_pairs,
    write_problems,
    write_solutions,
)
from .losses import DiscriminativeLosses, discriminative_losses, dpo_loss, sigmoid
from .rounds import (
    IdentityTrainer,
    ReplacementTrainer,
    RoundReport,
    TrainerStub,
    Trainers,
    iterate_round,
    sample_candidates,
)

__all__ = [
    "DedupConfig",
    "DiscriminativeLosses",
    "IdentityTrainer",
    "ReplacementTrainer",
    "RoundReport",
    "TrainerStub",
    "Trainers",
    "UnknownProblem",
    "active_select",
    "build_preference_pairs",
    "clean_dataset",
    "dataset_manifest",
    "debias",
    "dedup",
    "dedup_indices",
    "discriminative_losses",
    "dpo_loss",
    "iterate_round",
    "jaccard",
    "label_solutions",
    "ngram_set",
    "read_dataset",
    "read_jsonl",
    "read_pairs",
    "read_problems",
    "read_solutions",
    "sample_candidates",
    "sigmoid",
    "write_dataset",
    "write_jsonl",
    "write_pairs",
    "write_problems",
    "write_solutions",
]
