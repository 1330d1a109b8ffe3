import { describe, expect, it } from 'vitest';

import { ApiClient, ApiError } from '../src/api.js';

interface Recorded {
  url: string;
  method: string;
  body: unknown;
}

function clientWith(
  status: number,
  payload: unknown,
): { client: ApiClient; calls: Recorded[] } {
  const calls: Recorded[] = [];
  const fetchImpl = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({
      url,
      method: init?.method ?? 'GET',
      body: init?.body ? JSON.parse(String(init.body)) : undefined,
    });
    return new Response(JSON.stringify(payload), {
      status,
      headers: { 'Content-Type': 'application/json' },
    });
  };
  return { client: new ApiClient('', fetchImpl), calls };
}

describe('ApiClient route contract', () => {
  it('POST /repos carries the analyze payload', async () => {
    const { client, calls } = clientWith(202, { repo_id: 'r-1', job_id: 'j-1' });
    await client.analyze({
      url: 'https://github.com/octo/example',
      persona_count: 4,
      external_urls: ['https://example.org/docs'],
      additional_context: 'teachers',
    });
    expect(calls[0]).toEqual({
      url: '/repos',
      method: 'POST',
      body: {
        url: 'https://github.com/octo/example',
        persona_count: 4,
        external_urls: ['https://example.org/docs'],
        additional_context: 'teachers',
      },
    });
  });

  it('GET /jobs/{id} polls the dedicated status endpoint', async () => {
    const { client, calls } = clientWith(200, { stage: 'done', percent: 100 });
    await client.job('j-9');
    expect(calls[0].url).toBe('/jobs/j-9');
    expect(calls[0].method).toBe('GET');
  });

  it('PUT /personas/{id} sends the patch with the version', async () => {
    const { client, calls } = clientWith(200, {});
    await client.updatePersona('p-1', { quote: 'new', version: 3 });
    expect(calls[0]).toMatchObject({
      url: '/personas/p-1',
      method: 'PUT',
      body: { quote: 'new', version: 3 },
    });
  });

  it('issue listing builds the documented query parameters', async () => {
    const { client, calls } = clientWith(200, { view: 'github', issues: [] });
    await client.issues('r-1', 'persona', {
      state: 'open',
      confidence_band: 'high',
      persona_id: 'p-2',
    });
    const url = new URL(calls[0].url, 'http://x');
    expect(url.pathname).toBe('/repos/r-1/issues');
    expect(Object.fromEntries(url.searchParams)).toEqual({
      view: 'persona',
      state: 'open',
      confidence_band: 'high',
      persona_id: 'p-2',
    });
  });

  it('PUT associations and POST sync hit the repo-scoped routes', async () => {
    const { client, calls } = clientWith(200, {});
    await client.overrideAssociations('r-1', 55, ['p-a'], ['p-b']);
    await client.syncIssues('r-1', { mode: 'by_ids', ids: [30, 103], auto_map: true });
    expect(calls[0]).toMatchObject({
      url: '/repos/r-1/issues/55/associations',
      method: 'PUT',
      body: { add: ['p-a'], remove: ['p-b'] },
    });
    expect(calls[1]).toMatchObject({
      url: '/repos/r-1/issues/sync',
      method: 'POST',
      body: { mode: 'by_ids', ids: [30, 103], auto_map: true },
    });
  });

  it('GET /repos/{id}/analytics returns the summary as-is', async () => {
    const summary = {
      total_issues: 10,
      active_personas: 5,
      coverage_rate: 1.0,
      repo_stars: 114473,
      label_distribution: { bug: 4 },
      persona_coverage: { 'p-1': 10 },
    };
    const { client, calls } = clientWith(200, summary);
    const received = await client.analytics('r-1');
    expect(calls[0].url).toBe('/repos/r-1/analytics');
    expect(received).toEqual(summary);
  });

  it('surfaces backend error details as ApiError with the status', async () => {
    const { client } = clientWith(409, { error: 'StaleVersion', detail: 'expected version 2' });
    await expect(client.updatePersona('p-1', { version: 1 })).rejects.toMatchObject({
      status: 409,
      detail: 'expected version 2',
    });
    const { client: notFound } = clientWith(404, { detail: 'persona p-x not found' });
    await expect(notFound.deletePersona('p-x')).rejects.toBeInstanceOf(ApiError);
  });
});
