/** Thin typed client for the backend HTTP API; the UI's only data source. */

import type {
  AnalyticsSummary,
  IssueDetail,
  IssueListPayload,
  JobSnapshot,
  Persona,
  RepoSummary,
} from './types.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface AnalyzeRequest {
  url: string;
  persona_count: number;
  external_urls: string[];
  additional_context: string;
}

export interface SyncRequestBody {
  mode: 'all_new' | 'by_ids' | 'by_labels' | 'by_date_range';
  ids?: number[];
  labels?: string[];
  since?: string | null;
  until?: string | null;
  limit?: number;
  auto_map?: boolean;
}


/** The surface controllers depend on; ApiClient is the HTTP implementation. */
export interface Api {
  analyze(body: AnalyzeRequest): Promise<{ repo_id: string; job_id: string }>;
  repos(): Promise<RepoSummary[]>;
  repo(repoId: string): Promise<RepoSummary>;
  job(jobId: string): Promise<JobSnapshot>;
  personas(repoId: string, includeArchived?: boolean): Promise<Persona[]>;
  updatePersona(personaId: string, patch: Record<string, unknown>): Promise<Persona>;
  deletePersona(personaId: string): Promise<void>;
  mergePersonas(ids: string[], guidance: string | null): Promise<Persona>;
  generatePersonas(
    repoId: string,
    count: number,
    mode: 'additional' | 'regenerate',
  ): Promise<{ job_id: string }>;
  issues(
    repoId: string,
    view: 'github' | 'persona',
    filters?: { state?: string; confidence_band?: string; persona_id?: string },
  ): Promise<IssueListPayload>;
  issueDetail(repoId: string, number: number): Promise<IssueDetail>;
  overrideAssociations(
    repoId: string,
    number: number,
    add: string[],
    remove: string[],
  ): Promise<unknown>;
  syncIssues(repoId: string, body: SyncRequestBody): Promise<{ job_id: string }>;
  analytics(repoId: string): Promise<AnalyticsSummary>;
}

export class ApiClient implements Api {
  constructor(
    private readonly base: string = '',
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(this.base + path, {
      method,
      headers: body === undefined ? {} : { 'Content-Type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const payload = (await response.json()) as { detail?: string };
        if (payload.detail) detail = payload.detail;
      } catch {
        /* body was not JSON; keep the status text */
      }
      throw new ApiError(response.status, detail);
    }
    if (response.status === 204) return undefined as T;
    return (await response.json()) as T;
  }

  analyze(body: AnalyzeRequest): Promise<{ repo_id: string; job_id: string }> {
    return this.request('POST', '/repos', body);
  }

  repos(): Promise<RepoSummary[]> {
    return this.request('GET', '/repos');
  }

  repo(repoId: string): Promise<RepoSummary> {
    return this.request('GET', `/repos/${repoId}`);
  }

  job(jobId: string): Promise<JobSnapshot> {
    return this.request('GET', `/jobs/${jobId}`);
  }

  personas(repoId: string, includeArchived = false): Promise<Persona[]> {
    const query = includeArchived ? '?include_archived=true' : '';
    return this.request('GET', `/repos/${repoId}/personas${query}`);
  }

  updatePersona(personaId: string, patch: Record<string, unknown>): Promise<Persona> {
    return this.request('PUT', `/personas/${personaId}`, patch);
  }

  deletePersona(personaId: string): Promise<void> {
    return this.request('DELETE', `/personas/${personaId}`);
  }

  mergePersonas(ids: string[], guidance: string | null): Promise<Persona> {
    return this.request('POST', '/personas/merge', { ids, guidance });
  }

  generatePersonas(
    repoId: string,
    count: number,
    mode: 'additional' | 'regenerate',
  ): Promise<{ job_id: string }> {
    return this.request('POST', `/repos/${repoId}/personas/generate`, { count, mode });
  }

  issues(
    repoId: string,
    view: 'github' | 'persona',
    filters: { state?: string; confidence_band?: string; persona_id?: string } = {},
  ): Promise<IssueListPayload> {
    const params = new URLSearchParams({ view });
    for (const [key, value] of Object.entries(filters)) {
      if (value) params.set(key, value);
    }
    return this.request('GET', `/repos/${repoId}/issues?${params.toString()}`);
  }

  issueDetail(repoId: string, number: number): Promise<IssueDetail> {
    return this.request('GET', `/repos/${repoId}/issues/${number}`);
  }

  overrideAssociations(
    repoId: string,
    number: number,
    add: string[],
    remove: string[],
  ): Promise<unknown> {
    return this.request('PUT', `/repos/${repoId}/issues/${number}/associations`, { add, remove });
  }

  syncIssues(repoId: string, body: SyncRequestBody): Promise<{ job_id: string }> {
    return this.request('POST', `/repos/${repoId}/issues/sync`, body);
  }

  analytics(repoId: string): Promise<AnalyticsSummary> {
    return this.request('GET', `/repos/${repoId}/analytics`);
  }
}
