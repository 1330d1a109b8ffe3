/** Issues screen: GitHub/Persona views, filters, why-popovers, map dialog. */

import type { Api } from '../api.js';
import { badgeHtml, bandClass, html, raw } from '../render.js';
import { RequestSequencer } from '../seq.js';
import type { IssueDetail, IssueListPayload, IssueRow } from '../types.js';

export interface IssueFilters {
  state?: 'open' | 'closed';
  confidence_band?: 'high' | 'medium' | 'low' | 'unmatched';
  persona_id?: string;
}

export class IssuesController {
  view: 'github' | 'persona' = 'github';
  filters: IssueFilters = {};
  payload: IssueListPayload | null = null;
  detail: IssueDetail | null = null;
  lastError: string | null = null;
  private readonly sequencer = new RequestSequencer();

  constructor(
    private readonly api: Api,
    private readonly repoId: string,
    private readonly confirmAction: (message: string) => boolean = () => true,
  ) {}

  async load(): Promise<void> {
    const fresh = this.sequencer.begin();
    const payload = await this.api.issues(this.repoId, this.view, this.filters);
    if (!fresh()) return; // a newer request superseded this one
    this.payload = payload;
  }

  async toggleView(view: 'github' | 'persona'): Promise<void> {
    this.view = view;
    await this.load();
  }

  async applyFilters(filters: IssueFilters): Promise<void> {
    this.filters = filters;
    await this.load();
  }

  async openDetail(number: number): Promise<IssueDetail> {
    this.detail = await this.api.issueDetail(this.repoId, number);
    return this.detail;
  }

  async submitAssociations(add: string[], remove: string[]): Promise<void> {
    if (!this.detail) throw new Error('no issue open');
    if (remove.length > 0) {
      const ok = this.confirmAction(
        `Remove ${remove.length} association(s)? The AI suggestion stays recorded but hidden.`,
      );
      if (!ok) return;
    }
    await this.api.overrideAssociations(
      this.repoId,
      this.detail.issue.number,
      add,
      remove,
    );
    await this.openDetail(this.detail.issue.number);
    await this.load();
  }

  async sync(mode: 'all_new' | 'by_ids' | 'by_labels' | 'by_date_range', extra: object = {}): Promise<string> {
    const { job_id } = await this.api.syncIssues(this.repoId, {
      mode,
      auto_map: true,
      ...extra,
    });
    return job_id;
  }
}

export function issueRowHtml(row: IssueRow): string {
  const badges = row.badges.map(badgeHtml).join('');
  return html`<li class="issue-row ${raw(bandClass(row.band))}" data-number="${row.number}">
    <span class="state state-${row.state}">${row.state}</span>
    <a href="#issue/${row.number}">#${row.number} ${row.title}</a>
    <span class="badges">${raw(badges)}</span>
  </li>`;
}

export function githubViewHtml(payload: IssueListPayload): string {
  const rows = (payload.issues ?? []).map(issueRowHtml).join('');
  return html`<ul class="issues github-view">
    ${raw(rows)}
  </ul>`;
}

export function personaViewHtml(payload: IssueListPayload): string {
  const groups = (payload.groups ?? [])
    .map(
      (group) => html`<section class="persona-group" data-persona="${group.persona.id}">
        <h3>${group.persona.name} (${group.persona.occupation}) — ${group.count} issues</h3>
        <ul>
          ${raw(group.issues.map(issueRowHtml).join(''))}
        </ul>
      </section>`,
    )
    .join('');
  const unmatched = payload.unmatched_issues ?? [];
  const tail = unmatched.length
    ? html`<section class="persona-group unmatched">
        <h3>Unmatched — ${unmatched.length} issues</h3>
        <ul>
          ${raw(unmatched.map(issueRowHtml).join(''))}
        </ul>
      </section>`
    : '';
  return html`<div class="issues persona-view">${raw(groups)}${raw(tail)}</div>`;
}

export interface MapDialogRow {
  personaId: string;
  name: string;
  occupation: string;
  checked: boolean;
  /** Visible origin label; AI suggestions are explicitly called out. */
  label: 'AI Suggested' | 'Manually added' | '';
}

/**
 * Rows for the Manage Persona Associations dialog: every repository persona,
 * with currently associated ones checked and AI suggestions clearly labeled.
 */
export function mapDialogRows(detail: IssueDetail): MapDialogRow[] {
  const originById = new Map(detail.personas.map((card) => [card.persona.id, card.origin]));
  return detail.all_personas.map((persona) => {
    const origin = originById.get(persona.id);
    return {
      personaId: persona.id,
      name: persona.name,
      occupation: persona.occupation,
      checked: origin !== undefined,
      label:
        origin === 'ai_suggested' ? 'AI Suggested' : origin === 'manual' ? 'Manually added' : '',
    };
  });
}

/** Diff the dialog's checkbox state against the currently visible set. */
export function associationChanges(
  rows: MapDialogRow[],
  selected: Set<string>,
): { add: string[]; remove: string[] } {
  const add: string[] = [];
  const remove: string[] = [];
  for (const row of rows) {
    const wanted = selected.has(row.personaId);
    if (wanted && !row.checked) add.push(row.personaId);
    if (!wanted && row.checked) remove.push(row.personaId);
  }
  return { add, remove };
}

export function mapDialogHtml(rows: MapDialogRow[]): string {
  const items = rows
    .map(
      (row) => html`<label class="map-row" data-persona="${row.personaId}">
        <input type="checkbox" value="${row.personaId}" ${raw(row.checked ? 'checked' : '')} />
        ${row.name} — ${row.occupation}
        ${raw(row.label ? html`<em class="origin">${row.label}</em>` : '')}
      </label>`,
    )
    .join('');
  return html`<dialog class="map-dialog" open>
    <h3>Manage Persona Associations</h3>
    ${raw(items)}
    <footer><button data-cancel>Cancel</button><button data-save>Save Associations</button></footer>
  </dialog>`;
}

export function issueDetailHtml(detail: IssueDetail): string {
  const cards = detail.personas
    .map(
      (card) => html`<article class="assoc-card ${raw(bandClass(card.band))}">
        <h4>${card.persona.name} — ${card.persona.occupation}</h4>
        <span class="confidence">${card.percent}% ${card.band}</span>
        <p class="why-match"><strong>Why this match?</strong> ${card.rationale}</p>
        <blockquote>${card.persona.quote}</blockquote>
        <details>
          <summary>View Details</summary>
          <h5>Goals</h5>
          <ul>
            ${raw(card.persona.goals.map((goal) => html`<li>${goal}</li>`).join(''))}
          </ul>
          <h5>Pain Points</h5>
          <ul>
            ${raw(card.persona.pain_points.map((pain) => html`<li>${pain}</li>`).join(''))}
          </ul>
        </details>
      </article>`,
    )
    .join('');
  return html`<section class="issue-detail">
    <h2>#${detail.issue.number} ${detail.issue.title}</h2>
    <div class="issue-body">${detail.issue.body}</div>
    <aside class="associated">
      <header><h3>Associated Personas</h3><button data-map>Map</button></header>
      ${raw(cards)}
    </aside>
  </section>`;
}
