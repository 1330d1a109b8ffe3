"""Avatar assignment: one image-provider call, or a deterministic URL."""

from __future__ import annotations

from .errors import ProviderError
from .model import AvatarRef, Persona
from .prompts import headshot_context, render_prompt
from .providers import Completer, ImageProvider
from .util import slugify

# Style family is a pure function of experience level so the same persona
# always resolves to the same art direction.
_STYLE_BY_LEVEL = {
    "beginner": "adventurer",
    "intermediate": "avataaars",
    "advanced": "notionists",
    "expert": "personas",
}


def parameterized_avatar(persona: Persona) -> AvatarRef:
    """Deterministic avatar URL derived from name and experience level."""
    seed_inputs = {"name": persona.name, "experience_level": persona.experience_level}
    style = _STYLE_BY_LEVEL.get(persona.experience_level, "avataaars")
    locator = f"https://api.dicebear.com/7.x/{style}/svg?seed={slugify(persona.name)}"
    return AvatarRef(kind="parameterized_url", locator=locator, seed_inputs=seed_inputs)


def assign_avatar(
    persona: Persona,
    mode: str,
    *,
    completer: Completer | None = None,
    image_provider: ImageProvider | None = None,
    job_id: str | None = None,
) -> tuple[AvatarRef, list[str]]:
    """Produce an avatar for the persona.

    ``generated_image`` performs exactly one image call; any failure falls
    back to the parameterized URL and is reported as a warning, never raised.
    """
    if mode == "parameterized_url":
        return parameterized_avatar(persona), []
    if mode != "generated_image":
        raise ProviderError(f"unknown avatar mode {mode!r}")
    if completer is None or image_provider is None:
        return parameterized_avatar(persona), [
            f"no image provider configured; used parameterized avatar for {persona.name}"
        ]
    context = headshot_context(persona)
    bundle = render_prompt("headshot", context)
    try:
        locator = completer.generate_image(image_provider, bundle.user_text, job_id=job_id)
    except ProviderError as exc:
        return parameterized_avatar(persona), [
            f"image generation failed for {persona.name}: {exc}"
        ]
    return AvatarRef(kind="generated_image", locator=locator, seed_inputs=context), []
