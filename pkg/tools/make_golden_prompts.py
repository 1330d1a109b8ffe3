#!/usr/bin/env python3
"""Write the golden rendered-prompt files the template-fidelity tests pin.

The canonical placeholder values here are frozen; changing them invalidates
tests/fixtures/golden. Tests re-render with the same values and require
byte equality.
"""

from __future__ import annotations

import sys
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO_ROOT / "src"))

from repopersona.prompts import render_prompt  # noqa: E402
from repopersona.templates import STAGES  # noqa: E402

GOLDEN = REPO_ROOT / "tests" / "fixtures" / "golden"

sys.path.insert(0, str(REPO_ROOT / "tests"))
from golden_contexts import CANONICAL_CONTEXTS  # noqa: E402


def main() -> None:
    GOLDEN.mkdir(parents=True, exist_ok=True)
    for stage in STAGES:
        bundle = render_prompt(stage, CANONICAL_CONTEXTS[stage])
        text = f"=== SYSTEM ===\n{bundle.system_text}\n=== USER ===\n{bundle.user_text}\n"
        (GOLDEN / f"prompt_{stage}.txt").write_text(text, encoding="utf-8")
        print(f"wrote prompt_{stage}.txt")


if __name__ == "__main__":
    main()
