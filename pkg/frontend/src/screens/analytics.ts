/** Analytics screen: four metric cards plus the two distribution charts. */

import type { Api } from '../api.js';
import { html, percentLabel, raw } from '../render.js';
import type { AnalyticsSummary, Persona } from '../types.js';

export class AnalyticsController {
  summary: AnalyticsSummary | null = null;
  personaNames = new Map<string, string>();

  constructor(
    private readonly api: Api,
    private readonly repoId: string,
  ) {}

  async load(): Promise<AnalyticsSummary> {
    const [summary, personas] = await Promise.all([
      this.api.analytics(this.repoId),
      this.api.personas(this.repoId),
    ]);
    this.summary = summary;
    this.personaNames = new Map(personas.map((p: Persona) => [p.id, p.name]));
    return summary;
  }
}

export function metricCardsHtml(summary: AnalyticsSummary): string {
  // coverage_rate is rendered as delivered by the backend, never recomputed
  const cards: Array<[string, string]> = [
    ['Total Issues', String(summary.total_issues)],
    ['Active Personas', String(summary.active_personas)],
    ['Coverage Rate', percentLabel(summary.coverage_rate)],
    ['Repository Stars', summary.repo_stars.toLocaleString('en-US')],
  ];
  const rendered = cards
    .map(
      ([label, value]) => html`<div class="metric-card">
        <span class="value">${value}</span><span class="label">${label}</span>
      </div>`,
    )
    .join('');
  return html`<div class="metrics">${raw(rendered)}</div>`;
}

export function labelDistributionHtml(summary: AnalyticsSummary): string {
  const entries = Object.entries(summary.label_distribution).sort((a, b) => b[1] - a[1]);
  const total = entries.reduce((acc, [, count]) => acc + count, 0) || 1;
  const rows = entries
    .map(
      ([label, count]) => html`<li>
        <span class="swatch" data-label="${label}"></span>
        ${label}: ${count} (${Math.round((count / total) * 100)}%)
      </li>`,
    )
    .join('');
  return html`<section class="chart label-distribution">
    <h3>Label Distribution</h3>
    <ul>
      ${raw(rows)}
    </ul>
  </section>`;
}

export function personaCoverageHtml(
  summary: AnalyticsSummary,
  names: Map<string, string>,
): string {
  const entries = Object.entries(summary.persona_coverage).sort((a, b) => b[1] - a[1]);
  const max = Math.max(1, ...entries.map(([, count]) => count));
  const bars = entries
    .map(([personaId, count]) => {
      const name = names.get(personaId) ?? personaId;
      const width = Math.round((count / max) * 100);
      return html`<li>
        <span class="name">${name}</span>
        <span class="bar" style="width: ${width}%"></span>
        <span class="count">${count}</span>
      </li>`;
    })
    .join('');
  return html`<section class="chart persona-coverage">
    <h3>Persona Coverage</h3>
    <ul>
      ${raw(bars)}
    </ul>
  </section>`;
}

export function analyticsScreenHtml(controller: AnalyticsController): string {
  if (!controller.summary) return html`<p class="loading">Loading analytics…</p>`;
  return html`<section class="analytics">
    ${raw(metricCardsHtml(controller.summary))}
    ${raw(labelDistributionHtml(controller.summary))}
    ${raw(personaCoverageHtml(controller.summary, controller.personaNames))}
  </section>`;
}
