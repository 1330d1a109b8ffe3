/** Personas screen: searchable grid, mapping status panel, tabbed edit dialog. */

import type { Api } from '../api.js';
import { html, raw } from '../render.js';
import type { Persona } from '../types.js';
import { personaCardHtml } from './review.js';

export interface MappingStatus {
  total: number;
  unmapped: number;
  mapped: number;
}

export class PersonasController {
  personas: Persona[] = [];
  query = '';
  status: MappingStatus = { total: 0, unmapped: 0, mapped: 0 };

  constructor(
    private readonly api: Api,
    private readonly repoId: string,
  ) {}

  async load(): Promise<void> {
    const [personas, repo] = await Promise.all([
      this.api.personas(this.repoId),
      this.api.repo(this.repoId),
    ]);
    this.personas = personas;
    if (repo.mapping_status) this.status = repo.mapping_status;
  }

  visible(): Persona[] {
    const needle = this.query.trim().toLowerCase();
    if (!needle) return this.personas;
    return this.personas.filter((p) =>
      [p.name, p.occupation, p.tagline, p.location]
        .join(' ')
        .toLowerCase()
        .includes(needle),
    );
  }
}

export type EditTab = 'basic' | 'goals';

/** Field grouping for the tabbed edit dialog. */
export const EDIT_TABS: Record<EditTab, string[]> = {
  basic: ['name', 'age', 'occupation', 'location', 'quote', 'tagline', 'background'],
  goals: ['goals', 'pain_points'],
};

export function editDialogHtml(persona: Persona, tab: EditTab): string {
  const basic = html`<fieldset class="tab-basic" ${raw(tab === 'basic' ? '' : 'hidden')}>
    <label>Name <input name="name" value="${persona.name}" /></label>
    <label>Age <input name="age" type="number" value="${persona.age}" /></label>
    <label>Occupation <input name="occupation" value="${persona.occupation}" /></label>
    <label>Location <input name="location" value="${persona.location}" /></label>
    <label>Quote <textarea name="quote">${persona.quote}</textarea></label>
    <label>Tagline <input name="tagline" value="${persona.tagline}" /></label>
    <label>Background <textarea name="background">${persona.background}</textarea></label>
  </fieldset>`;
  const lists = html`<fieldset class="tab-goals" ${raw(tab === 'goals' ? '' : 'hidden')}>
    <h4>Goals</h4>
    <ul class="editable" data-field="goals">
      ${raw(
        persona.goals
          .map(
            (goal, i) =>
              html`<li><input value="${goal}" data-index="${i}" /><button data-del="${i}">×</button></li>`,
          )
          .join(''),
      )}
    </ul>
    <button data-add="goals">Add goal</button>
    <h4>Pain Points</h4>
    <ul class="editable" data-field="pain_points">
      ${raw(
        persona.pain_points
          .map(
            (pain, i) =>
              html`<li><input value="${pain}" data-index="${i}" /><button data-del="${i}">×</button></li>`,
          )
          .join(''),
      )}
    </ul>
    <button data-add="pain_points">Add pain point</button>
  </fieldset>`;
  return html`<dialog class="edit-dialog" open data-persona="${persona.id}">
    <nav class="tabs">
      <button data-tab="basic" class="${raw(tab === 'basic' ? 'active' : '')}">Basic Info</button>
      <button data-tab="goals" class="${raw(tab === 'goals' ? 'active' : '')}">
        Goals &amp; Pain Points
      </button>
    </nav>
    ${raw(basic)}${raw(lists)}
    <footer><button data-cancel>Cancel</button><button data-save>Save</button></footer>
  </dialog>`;
}

export function statusPanelHtml(status: MappingStatus): string {
  return html`<aside class="mapping-status">
    <span>${status.total} total issues</span>
    <span>${status.unmapped} unmapped</span>
    <span>${status.mapped} mapped</span>
  </aside>`;
}

export function personasScreenHtml(controller: PersonasController): string {
  const cards = controller.visible().map(personaCardHtml).join('');
  return html`<section class="personas">
    <header class="toolbar">
      <button data-action="add-custom">Create Custom Persona</button>
      <button data-action="generate">Generate AI Personas</button>
      <button data-action="merge">Merge Personas</button>
      <input type="search" placeholder="Search personas" value="${controller.query}" />
    </header>
    ${raw(statusPanelHtml(controller.status))}
    <div class="grid">${raw(cards)}</div>
  </section>`;
}
