"""Canonical placeholder values pinned by the golden prompt files.

tools/make_golden_prompts.py imports this module; changing any value here
requires regenerating tests/fixtures/golden.
"""

CANONICAL_CONTEXTS: dict[str, dict[str, object]] = {
    "link_discovery": {
        "owner_repo": "octo/example",
        "readme_text": "# Example\n\nA sample tool. User guide: https://example.org/guide\n",
    },
    "user_insights": {
        "owner_repo": "octo/example",
        "corpus_text": "=== readme: README.md ===\n# Example\n\nA sample tool.",
    },
    "domain_analysis": {
        "repository_content": "=== readme: README.md ===\n# Example\n\nA sample tool.",
    },
    "persona_generation": {
        "persona_count": 4,
        "domain_analysis_json": '{"domain_summary": "A sample tool for examples."}',
    },
    "headshot": {
        "gender_hint": "a person",
        "age": 34,
        "occupation": "Freelance Music Composer",
        "expression": "Warm, confident",
        "clothing_style": "business casual attire",
        "setting": "Bright home office backdrop",
        "photography_style": "Soft natural light",
    },
    "merge": {
        "persona_count": 2,
        "persona_descriptions": (
            "Name: Persona One\nAge: 30\nOccupation: Example Role\n\n"
            "Name: Persona Two\nAge: 40\nOccupation: Other Role"
        ),
    },
    "issue_mapping": {
        "issue_block": "Title: Example issue\nBody: Something broke.\nLabels: bug",
        "personas_json": '[{"id": "p-1", "name": "Persona One"}]',
    },
}
