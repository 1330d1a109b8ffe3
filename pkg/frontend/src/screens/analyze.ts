/** Analyze screen: repository input, generation options, staged progress. */

import type { Api } from '../api.js';
import { html, raw } from '../render.js';
import { JobPoller, ProgressView, initialProgress } from '../polling.js';

export const STAGE_LABELS: Record<string, string> = {
  queued: 'Queued',
  fetch_readme: 'Fetch README',
  external_docs: 'External Docs',
  analyze_domain: 'Analyze Domain',
  generate_personas: 'Generate Personas',
  done: 'Done',
  failed: 'Failed',
};

export interface AnalyzeForm {
  url: string;
  personaCount: number;
  externalUrls: string[];
  additionalContext: string;
}

export function validateForm(form: AnalyzeForm): string | null {
  if (!/^https?:\/\/.+\/.+/.test(form.url.trim())) {
    return 'Enter a repository URL like https://github.com/owner/name';
  }
  if (!Number.isInteger(form.personaCount) || form.personaCount < 1 || form.personaCount > 10) {
    return 'Persona count must be between 1 and 10';
  }
  return null;
}

export class AnalyzeController {
  progress: ProgressView = initialProgress;
  repoId: string | null = null;
  jobId: string | null = null;
  private poller: JobPoller | null = null;

  constructor(
    private readonly api: Api,
    private readonly onProgress: (view: ProgressView) => void = () => undefined,
  ) {}

  async start(form: AnalyzeForm): Promise<string> {
    const problem = validateForm(form);
    if (problem) throw new Error(problem);
    const submitted = await this.api.analyze({
      url: form.url.trim(),
      persona_count: form.personaCount,
      external_urls: form.externalUrls.filter(Boolean),
      additional_context: form.additionalContext,
    });
    this.repoId = submitted.repo_id;
    this.jobId = submitted.job_id;
    this.progress = initialProgress;
    this.poller = new JobPoller(this.api, submitted.job_id, (view) => {
      this.progress = view;
      this.onProgress(view);
    });
    this.poller.start();
    return submitted.job_id;
  }

  stop(): void {
    this.poller?.stop();
  }
}

export function progressHtml(view: ProgressView): string {
  const stages = ['fetch_readme', 'external_docs', 'analyze_domain', 'generate_personas'];
  const items = stages
    .map((stage) => {
      const reached =
        stages.indexOf(stage) <= stages.indexOf(view.stage) || view.stage === 'done';
      return html`<li class="${raw(reached ? 'stage reached' : 'stage')}">
        ${STAGE_LABELS[stage]}
      </li>`;
    })
    .join('');
  return html`<div class="progress" data-stage="${view.stage}">
    <div class="bar" style="width: ${view.percent}%"></div>
    <span class="percent">${view.percent}%</span>
    <ol class="stages">
      ${raw(items)}
    </ol>
    ${raw(view.error ? html`<p class="error">${view.error}</p>` : '')}
  </div>`;
}

export function analyzeFormHtml(): string {
  return html`<form class="analyze">
    <label>Repository URL <input name="url" placeholder="https://github.com/owner/name" /></label>
    <label>Number of personas
      <input name="personaCount" type="number" min="1" max="10" value="4" />
    </label>
    <label>External documentation URLs (one per line)
      <textarea name="externalUrls"></textarea>
    </label>
    <label>Additional context about your users
      <textarea name="additionalContext"></textarea>
    </label>
    <button type="submit" class="primary">Start Persona Analysis</button>
  </form>`;
}
