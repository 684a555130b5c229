"""Event recommendation for offline ephemeral social networks by latent network fusion."""

__version__ = "0.1.0"

from .records import (  # noqa: E402
    CleansingConfig,
    ConfigError,
    DataError,
    EncounterRecord,
    EventDescriptor,
    ParticipationRecord,
    PresenceInterval,
)
from .latent import RelationThresholds  # noqa: E402
from .lnf import LbpParams, exact_marginals, infer_all_contexts, run_lbp  # noqa: E402

__all__ = [
    "CleansingConfig",
    "ConfigError",
    "DataError",
    "EncounterRecord",
    "EventDescriptor",
    "LbpParams",
    "ParticipationRecord",
    "PresenceInterval",
    "RelationThresholds",
    "exact_marginals",
    "infer_all_contexts",
    "run_lbp",
]
