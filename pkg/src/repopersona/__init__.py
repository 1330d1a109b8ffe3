"""Generate editable user personas from a repository and map issues to them."""

from .model import (
    AnalyticsSummary,
    AvatarRef,
    IssuePersonaMapping,
    IssueRecord,
    Persona,
    PersonaAssociation,
    RepositoryRef,
    ResourceCorpus,
    ResourceDocument,
    band_of,
    validate_persona,
)

__all__ = [
    "AnalyticsSummary",
    "AvatarRef",
    "IssuePersonaMapping",
    "IssueRecord",
    "Persona",
    "PersonaAssociation",
    "RepositoryRef",
    "ResourceCorpus",
    "ResourceDocument",
    "band_of",
    "validate_persona",
]

__version__ = "0.1.0"
