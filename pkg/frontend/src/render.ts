/** String-template rendering helpers shared by all screens. */

import type { AvatarRef, ConfidenceBand, PersonaBadge } from './types.js';

export function escapeHtml(value: unknown): string {
  return String(value)
    .replaceAll('&', '&amp;')
    .replaceAll('<', '&lt;')
    .replaceAll('>', '&gt;')
    .replaceAll('"', '&quot;')
    .replaceAll("'", '&#39;');
}

/** Tagged template that escapes every interpolation. */
export function html(strings: TemplateStringsArray, ...values: unknown[]): string {
  let out = '';
  strings.forEach((chunk, i) => {
    out += chunk;
    if (i < values.length) {
      const value = values[i];
      out += Array.isArray(value) ? value.join('') : escapeHtml(value);
    }
  });
  return out;
}

/** Pre-escaped fragment, usable inside html`` interpolations. */
export function raw(fragment: string): string[] {
  return [fragment];
}

/**
 * CSS class for a confidence band. The band string always comes from the
 * backend response; the UI never derives bands from scores itself.
 */
export function bandClass(band: ConfidenceBand): string {
  return `band band-${band}`;
}

export function badgeHtml(badge: PersonaBadge): string {
  return html`<span class="${raw(bandClass(badge.band))}" data-persona="${badge.persona_id}"
    >${badge.name} ${badge.percent}%
    <button class="why" data-why="${badge.persona_id}" title="${badge.rationale}">why?</button>
  </span>`;
}

export function avatarHtml(avatar: AvatarRef | null, name: string): string {
  if (!avatar) return html`<div class="avatar avatar-empty">${initials(name)}</div>`;
  // lazy-load; a broken generated image falls back to the initials block
  return html`<img
    class="avatar"
    loading="lazy"
    src="${avatar.locator}"
    alt="${name}"
    onerror="this.outerHTML='<div class=&quot;avatar avatar-empty&quot;>${initials(name)}</div>'"
  />`;
}

export function initials(name: string): string {
  return name
    .split(/\s+/)
    .filter(Boolean)
    .slice(0, 2)
    .map((part) => part[0]?.toUpperCase() ?? '')
    .join('');
}

export function percentLabel(rate: number): string {
  return `${Math.round(rate * 100)}%`;
}
