"""Plain record types shared by every stage of the pipeline."""
from __future__ import annotations

from dataclasses import dataclass, field


class ConfigError(ValueError):
    """Invalid configuration or schedule (CLI exit code 2)."""


class DataError(ValueError):
    """Input data inconsistent with the schedule or the record contracts (CLI exit code 3)."""


@dataclass(frozen=True)
class EventDescriptor:
    """A prescheduled event held in one room during one session slot."""

    id: str
    session_id: str
    zone_id: str
    start: float
    end: float
    contexts: tuple[str, ...] = ()

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass(frozen=True, order=True)
class PresenceInterval:
    user_id: str
    zone_id: str
    start: float
    end: float


@dataclass(frozen=True, order=True)
class ParticipationRecord:
    user_id: str
    event_id: str
    duration: float


@dataclass(frozen=True, order=True)
class EncounterRecord:
    user_a: str
    user_b: str
    duration: float
    start: float = 0.0

    @classmethod
    def make(cls, a: str, b: str, duration: float, start: float = 0.0) -> "EncounterRecord":
        """Build a record with the pair put in canonical (sorted) order."""
        if a == b:
            raise DataError(f"encounter of user {a!r} with itself")
        if b < a:
            a, b = b, a
        return cls(a, b, float(duration), float(start))


@dataclass(frozen=True)
class CleansingConfig:
    """Cleansing floors; defaults are the three-minute / three-record rules."""

    min_participation_duration: float = 180.0
    min_participation_count: int = 3
    min_encounter_duration: float = 180.0

    def __post_init__(self):
        for name in ("min_participation_duration", "min_participation_count", "min_encounter_duration"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0")


@dataclass
class CleansingReport:
    """Counters filled in by the ingest stages; serialized as the cleansing report."""

    rows_read: int = 0
    rows_rejected: int = 0
    records_dropped_short: int = 0
    encounters_dropped_short: int = 0
    users_dropped_sparse: int = 0
    rejected_rows: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "rows_rejected": self.rows_rejected,
            "records_dropped_short": self.records_dropped_short,
            "encounters_dropped_short": self.encounters_dropped_short,
            "users_dropped_sparse": self.users_dropped_sparse,
        }
