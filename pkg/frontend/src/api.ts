/** Thin typed client for the challenge-set service; the only data path. */

import type {
  EditResponse,
  EmbeddingPayload,
  GlobalSummary,
  PreviewPayload,
  SentencePage,
  SetDetail,
  SetSummary,
} from './types';
import { FilterState, toQueryParams } from './state';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class VersionConflictError extends ApiError {
  constructor(message: string) {
    super(409, message);
  }
}

function encodeQuery(params: Record<string, string>): string {
  const pairs = Object.entries(params).map(
    ([k, v]) => `${encodeURIComponent(k)}=${encodeURIComponent(v)}`,
  );
  return pairs.length > 0 ? `?${pairs.join('&')}` : '';
}

export class ApiClient {
  constructor(
    private base = '',
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchFn(this.base + path);
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return (await response.json()) as T;
  }

  listSets(): Promise<SetSummary[]> {
    return this.getJson('/api/sets');
  }

  summary(): Promise<GlobalSummary> {
    return this.getJson('/api/summary');
  }

  setDetail(setId: string): Promise<SetDetail> {
    return this.getJson(`/api/sets/${encodeURIComponent(setId)}`);
  }

  preview(setId: string): Promise<PreviewPayload> {
    return this.getJson(`/api/sets/${encodeURIComponent(setId)}/preview`);
  }

  embedding(setId: string): Promise<EmbeddingPayload> {
    return this.getJson(`/api/sets/${encodeURIComponent(setId)}/embedding`);
  }

  sentences(
    setId: string,
    filters: FilterState,
    page = 1,
    pageSize = 100,
  ): Promise<SentencePage> {
    const params = {
      ...toQueryParams(filters),
      page: String(page),
      page_size: String(pageSize),
    };
    return this.getJson(`/api/sets/${encodeURIComponent(setId)}/sentences${encodeQuery(params)}`);
  }

  async edit(
    setId: string,
    body: { op: 'remove' | 'unremove' | 'rename'; version: number; ids?: string[]; name?: string },
  ): Promise<EditResponse> {
    const response = await this.fetchFn(`${this.base}/api/sets/${encodeURIComponent(setId)}/edits`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
    if (response.status === 409) {
      throw new VersionConflictError(await response.text());
    }
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return (await response.json()) as EditResponse;
  }

  /** Download of the filtered rows; returns the JSONL text and row count. */
  async exportSet(setId: string, filters: FilterState): Promise<{ text: string; rows: number }> {
    const response = await this.fetchFn(`${this.base}/api/sets/${encodeURIComponent(setId)}/export`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ filters: toQueryParams(filters) }),
    });
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    const text = await response.text();
    const header = response.headers.get('X-Row-Count');
    const rows = header !== null ? Number(header) : text.split('\n').filter((ln) => ln).length;
    return { text, rows };
  }
}
