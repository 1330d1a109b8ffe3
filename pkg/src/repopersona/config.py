"""Tunable knobs with their shipped defaults."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Config:
    # corpus assembly
    per_document_chars: int = 40_000
    corpus_total_chars: int = 150_000
    max_plan_links: int = 5
    fetch_fanout: int = 4

    # providers
    provider_max_concurrent: int = 4
    provider_retries: int = 1
    mapping_fanout: int = 4
    price_per_input_token: float = 2.5e-6
    price_per_output_token: float = 1.0e-5

    # generation-job progress bands: stage -> (enter %, complete %)
    stage_bands: dict[str, tuple[int, int]] = field(
        default_factory=lambda: {
            "queued": (0, 0),
            "fetch_readme": (0, 15),
            "external_docs": (15, 45),
            "analyze_domain": (45, 75),
            "generate_personas": (75, 100),
        }
    )

    # polling
    poll_interval_s: float = 1.0
