/** Browser entry point: hash routing between the five screens. */

import { ApiClient } from './api.js';
import { html, raw } from './render.js';
import { AnalyzeController, analyzeFormHtml, progressHtml } from './screens/analyze.js';
import { AnalyticsController, analyticsScreenHtml } from './screens/analytics.js';
import {
  IssuesController,
  associationChanges,
  githubViewHtml,
  issueDetailHtml,
  mapDialogHtml,
  mapDialogRows,
  personaViewHtml,
} from './screens/issues.js';
import { PersonasController, personasScreenHtml } from './screens/personas.js';
import { ReviewController, reviewScreenHtml } from './screens/review.js';

const api = new ApiClient('');
const root = document.getElementById('app') as HTMLElement;

function toast(message: string): void {
  const node = document.createElement('div');
  node.className = 'toast';
  node.textContent = message;
  document.body.appendChild(node);
  setTimeout(() => node.remove(), 4000);
}

async function currentRepoId(): Promise<string | null> {
  const repos = await api.repos();
  return repos.length ? repos[repos.length - 1].id : null;
}

function navHtml(active: string): string {
  const links: Array<[string, string]> = [
    ['#analyze', 'Analyze'],
    ['#review', 'Review'],
    ['#personas', 'Personas'],
    ['#issues', 'Issues'],
    ['#analytics', 'Analytics'],
  ];
  const items = links
    .map(
      ([href, label]) =>
        html`<a href="${href}" class="${raw(href === active ? 'active' : '')}">${label}</a>`,
    )
    .join('');
  return html`<nav class="top">${raw(items)}</nav>`;
}

async function renderAnalyze(): Promise<void> {
  root.innerHTML = navHtml('#analyze') + analyzeFormHtml() + '<div id="progress"></div>';
  const progressHost = document.getElementById('progress') as HTMLElement;
  const controller = new AnalyzeController(api, (view) => {
    progressHost.innerHTML = progressHtml(view);
    if (view.terminal && !view.error) location.hash = '#review';
    if (view.error) toast(view.error);
  });
  root.querySelector('form.analyze')?.addEventListener('submit', (event) => {
    event.preventDefault();
    const form = event.target as HTMLFormElement;
    const data = new FormData(form);
    controller
      .start({
        url: String(data.get('url') ?? ''),
        personaCount: Number(data.get('personaCount') ?? 4),
        externalUrls: String(data.get('externalUrls') ?? '')
          .split('\n')
          .map((line) => line.trim())
          .filter(Boolean),
        additionalContext: String(data.get('additionalContext') ?? ''),
      })
      .catch((error) => toast(String(error)));
  });
}

async function renderReview(): Promise<void> {
  const repoId = await currentRepoId();
  if (!repoId) {
    location.hash = '#analyze';
    return;
  }
  const controller = new ReviewController(api, repoId, (message) => window.confirm(message));
  await controller.load();
  root.innerHTML = navHtml('#review') + reviewScreenHtml(controller);

  root.querySelectorAll<HTMLButtonElement>('[data-remove]').forEach((button) =>
    button.addEventListener('click', () => {
      controller
        .remove(button.dataset.remove as string)
        .then((removed) => {
          if (removed) return renderReview();
        })
        .catch((error) => toast(String(error)));
    }),
  );
  root.querySelectorAll<HTMLButtonElement>('[data-edit]').forEach((button) =>
    button.addEventListener('click', () => {
      const id = button.dataset.edit as string;
      controller.openEdit(id);
      const quote = window.prompt('Representative quote:', controller.persona(id)?.quote ?? '');
      if (quote === null) return;
      controller.changeField('quote', quote);
      controller
        .saveEdit()
        .then(() => renderReview())
        .catch((error) => toast(String(error)));
    }),
  );
  root.querySelector('[data-action="merge"]')?.addEventListener('click', () => {
    const ids = Array.from(
      root.querySelectorAll<HTMLInputElement>('[data-select]:checked'),
    ).map((box) => box.dataset.select as string);
    const guidance = window.prompt('Optional guidance for the merged persona:') || null;
    controller
      .merge(ids, guidance)
      .then((merged) => {
        if (merged) toast(`Merged into ${merged.name}`);
        if (controller.lastError) toast(controller.lastError);
        return renderReview();
      })
      .catch((error) => toast(String(error)));
  });
  root.querySelector('[data-action="regenerate"]')?.addEventListener('click', () => {
    controller
      .regenerateAll(controller.personas.length || 4)
      .then((jobId) => jobId && toast(`Regenerating (job ${jobId})`))
      .catch((error) => toast(String(error)));
  });
  root.querySelector('[data-action="save"]')?.addEventListener('click', () => {
    controller
      .saveAndContinue()
      .then((jobId) => {
        toast(`Personas saved; mapping issues in the background (job ${jobId})`);
        location.hash = '#issues';
      })
      .catch((error) => toast(String(error)));
  });
}

async function renderPersonas(): Promise<void> {
  const repoId = await currentRepoId();
  if (!repoId) {
    location.hash = '#analyze';
    return;
  }
  const controller = new PersonasController(api, repoId);
  await controller.load();
  root.innerHTML = navHtml('#personas') + personasScreenHtml(controller);
  root.querySelector('input[type="search"]')?.addEventListener('input', (event) => {
    controller.query = (event.target as HTMLInputElement).value;
    const grid = root.querySelector('.grid');
    if (grid) grid.innerHTML = personasScreenHtml(controller);
  });
}

async function renderIssues(): Promise<void> {
  const repoId = await currentRepoId();
  if (!repoId) {
    location.hash = '#analyze';
    return;
  }
  const controller = new IssuesController(api, repoId, (message) => window.confirm(message));
  await controller.load();
  const body =
    controller.view === 'github'
      ? githubViewHtml(controller.payload ?? { view: 'github', issues: [] })
      : personaViewHtml(controller.payload ?? { view: 'persona', groups: [] });
  root.innerHTML =
    navHtml('#issues') +
    html`<header class="toolbar">
      <button data-view="github">GitHub View</button>
      <button data-view="persona">Persona View</button>
      <button data-sync>Sync More Issues from GitHub</button>
    </header>` +
    body +
    '<div id="detail"></div>';

  root.querySelectorAll<HTMLButtonElement>('[data-view]').forEach((button) =>
    button.addEventListener('click', () => {
      controller
        .toggleView(button.dataset.view as 'github' | 'persona')
        .then(() => renderIssues())
        .catch((error) => toast(String(error)));
    }),
  );
  root.querySelector('[data-sync]')?.addEventListener('click', () => {
    controller
      .sync('all_new')
      .then((jobId) => toast(`Syncing (job ${jobId}); new issues map automatically`))
      .catch((error) => toast(String(error)));
  });
  root.querySelectorAll<HTMLAnchorElement>('.issue-row a').forEach((anchor) =>
    anchor.addEventListener('click', (event) => {
      event.preventDefault();
      const number = Number(anchor.closest('.issue-row')?.getAttribute('data-number'));
      controller
        .openDetail(number)
        .then((detail) => {
          const host = document.getElementById('detail') as HTMLElement;
          host.innerHTML = issueDetailHtml(detail);
          host.querySelector('[data-map]')?.addEventListener('click', () => {
            const rows = mapDialogRows(detail);
            host.insertAdjacentHTML('beforeend', mapDialogHtml(rows));
            const dialog = host.querySelector('dialog.map-dialog') as HTMLDialogElement;
            dialog.querySelector('[data-cancel]')?.addEventListener('click', () => dialog.remove());
            dialog.querySelector('[data-save]')?.addEventListener('click', () => {
              const selected = new Set(
                Array.from(
                  dialog.querySelectorAll<HTMLInputElement>('input[type="checkbox"]:checked'),
                ).map((box) => box.value),
              );
              const { add, remove } = associationChanges(rows, selected);
              controller
                .submitAssociations(add, remove)
                .then(() => {
                  dialog.remove();
                  return renderIssues();
                })
                .catch((error) => toast(String(error)));
            });
          });
        })
        .catch((error) => toast(String(error)));
    }),
  );
}

async function renderAnalytics(): Promise<void> {
  const repoId = await currentRepoId();
  if (!repoId) {
    location.hash = '#analyze';
    return;
  }
  const controller = new AnalyticsController(api, repoId);
  await controller.load();
  root.innerHTML = navHtml('#analytics') + analyticsScreenHtml(controller);
}

const routes: Record<string, () => Promise<void>> = {
  '#analyze': renderAnalyze,
  '#review': renderReview,
  '#personas': renderPersonas,
  '#issues': renderIssues,
  '#analytics': renderAnalytics,
};

function route(): void {
  const handler = routes[location.hash] ?? renderAnalyze;
  handler().catch((error) => toast(String(error)));
}

window.addEventListener('hashchange', route);
route();
