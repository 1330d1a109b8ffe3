/** Review screen: inspect generated personas, edit, merge, regenerate, save. */

import { ApiError, type Api } from '../api.js';
import { avatarHtml, html, raw } from '../render.js';
import type { Persona } from '../types.js';

export interface EditDraft {
  personaId: string;
  version: number;
  fields: Record<string, unknown>;
}

/** Drives the persona review/refine flow; UI-framework free and testable. */
export class ReviewController {
  personas: Persona[] = [];
  editing: EditDraft | null = null;
  lastError: string | null = null;

  constructor(
    private readonly api: Api,
    private readonly repoId: string,
    /** Destructive actions call this first; wire to window.confirm in the browser. */
    private readonly confirmAction: (message: string) => boolean = () => true,
  ) {}

  async load(): Promise<Persona[]> {
    this.personas = await this.api.personas(this.repoId);
    return this.personas;
  }

  persona(id: string): Persona | undefined {
    return this.personas.find((p) => p.id === id);
  }

  openEdit(personaId: string): EditDraft {
    const persona = this.persona(personaId);
    if (!persona) throw new Error(`unknown persona ${personaId}`);
    this.editing = { personaId, version: persona.version ?? 0, fields: {} };
    return this.editing;
  }

  changeField(field: string, value: unknown): void {
    if (!this.editing) throw new Error('no edit in progress');
    this.editing.fields[field] = value;
  }

  /**
   * Save the open edit optimistically; a version conflict (409) rolls the
   * local state back to the server's truth and surfaces the error.
   */
  async saveEdit(): Promise<Persona | null> {
    if (!this.editing) throw new Error('no edit in progress');
    const draft = this.editing;
    const index = this.personas.findIndex((p) => p.id === draft.personaId);
    const before = this.personas[index];
    const optimistic = { ...before, ...draft.fields, edited: true } as Persona;
    this.personas[index] = optimistic;
    try {
      const saved = await this.api.updatePersona(draft.personaId, {
        ...draft.fields,
        version: draft.version,
      });
      this.personas[index] = saved;
      this.editing = null;
      this.lastError = null;
      return saved;
    } catch (error) {
      this.personas[index] = before; // roll back the optimistic update
      if (error instanceof ApiError && error.status === 409) {
        this.lastError = 'This persona changed elsewhere; reloaded the latest version.';
        await this.load();
        return null;
      }
      this.lastError = error instanceof Error ? error.message : String(error);
      throw error;
    }
  }

  async remove(personaId: string): Promise<boolean> {
    if (!this.confirmAction('Remove this persona? Its issue associations will be hidden.')) {
      return false;
    }
    await this.api.deletePersona(personaId);
    await this.load();
    return true;
  }

  async merge(ids: string[], guidance: string | null): Promise<Persona | null> {
    if (ids.length < 2) {
      this.lastError = 'Select at least two personas to merge.';
      return null;
    }
    if (!this.confirmAction(`Merge ${ids.length} personas into one? Sources will be archived.`)) {
      return null;
    }
    const merged = await this.api.mergePersonas(ids, guidance);
    await this.load();
    return merged;
  }

  async regenerateAll(count: number): Promise<string | null> {
    if (
      !this.confirmAction(
        'Regenerate all AI personas? Manually created, merged, and edited personas are kept.',
      )
    ) {
      return null;
    }
    const { job_id } = await this.api.generatePersonas(this.repoId, count, 'regenerate');
    return job_id;
  }

  async generateMore(count: number): Promise<string> {
    const { job_id } = await this.api.generatePersonas(this.repoId, count, 'additional');
    return job_id;
  }

  /** Saving the reviewed set hands off to issue sync + mapping. */
  async saveAndContinue(): Promise<string> {
    const { job_id } = await this.api.syncIssues(this.repoId, {
      mode: 'all_new',
      auto_map: true,
    });
    return job_id;
  }
}

export function provenanceTag(persona: Persona): string {
  if (persona.provenance === 'manual') return 'Manual';
  if (persona.provenance === 'merged') return 'Merged';
  return 'AI';
}

export function personaCardHtml(persona: Persona): string {
  return html`<article class="persona-card" data-id="${persona.id}">
    <span class="tag tag-${persona.provenance}">${provenanceTag(persona)}</span>
    ${raw(avatarHtml(persona.avatar, persona.name))}
    <h3>${persona.name}</h3>
    <p class="demographics">${persona.occupation} — ${persona.age}, ${persona.location}</p>
    <blockquote>${persona.quote}</blockquote>
    <p class="background">${persona.background}</p>
    <h4>Goals &amp; Motivations</h4>
    <ul>
      ${raw(persona.goals.map((goal) => html`<li>${goal}</li>`).join(''))}
    </ul>
    <h4>Pain Points &amp; Frustrations</h4>
    <ul>
      ${raw(persona.pain_points.map((pain) => html`<li>${pain}</li>`).join(''))}
    </ul>
    <footer>
      <button data-edit="${persona.id}">Edit</button>
      <button data-remove="${persona.id}">Remove</button>
      <label><input type="checkbox" data-select="${persona.id}" /> select for merge</label>
    </footer>
  </article>`;
}

export function reviewScreenHtml(controller: ReviewController): string {
  const cards = controller.personas.map(personaCardHtml).join('');
  return html`<section class="review">
    <header class="toolbar">
      <button data-action="merge">Merge Personas</button>
      <button data-action="add-custom">Add Custom Persona</button>
      <button data-action="regenerate">Regenerate All</button>
      <button data-action="save" class="primary">
        Save ${controller.personas.length} Personas and Continue
      </button>
    </header>
    ${raw(cards)}
  </section>`;
}
