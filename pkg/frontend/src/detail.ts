/** Detail View controller: brushes and clicks become filter chips, the
 * sentence list always reflects the active chips, and edits go through the
 * versioned endpoint with optimistic state rolled back on conflict.
 */

import { ApiClient, VersionConflictError } from './api';
import {
  Chip,
  FilterState,
  SpotlightKind,
  chips,
  emptyFilters,
  removeChip,
  toggleKeyword,
  toggleSource,
} from './state';
import type { SentenceItem, SetDetail, SetMetricsPayload } from './types';

export const PAGE_SIZE = 100;

export interface HeaderCounts {
  logCount: number;
  trainCount: number;
  trainRatio: number | null;
  meanChrf: number | null;
  meanFamiliarity: number | null;
}

function headerFromMetrics(m: SetMetricsPayload): HeaderCounts {
  return {
    logCount: m.log_count,
    trainCount: m.train_count,
    trainRatio: m.train_ratio,
    meanChrf: m.mean_chrf,
    meanFamiliarity: m.mean_familiarity,
  };
}

export class DetailController {
  filters: FilterState = emptyFilters();
  spotlight: SpotlightKind = 'keywords';
  editMode = false;
  name: string;
  version: number;
  header: HeaderCounts;
  conflict = false;

  constructor(
    private api: ApiClient,
    public readonly setId: string,
    detail: SetDetail,
  ) {
    this.name = detail.name;
    this.version = detail.version;
    this.header = headerFromMetrics(detail.metrics);
  }

  activeChips(): Chip[] {
    return chips(this.filters);
  }

  dropChip(key: string): void {
    this.filters = removeChip(this.filters, key);
  }

  clearFilters(): void {
    this.filters = emptyFilters();
  }

  switchSpotlight(kind: SpotlightKind): void {
    this.spotlight = kind;
  }

  brushTimeline(from: string | null, to: string | null): void {
    this.filters = { ...this.filters, timeFrom: from, timeTo: to };
  }

  brushChrf(min: number | null, max: number | null): void {
    this.filters = { ...this.filters, chrfMin: min, chrfMax: max };
  }

  brushFamiliarity(min: number | null, max: number | null): void {
    this.filters = { ...this.filters, faMin: min, faMax: max };
  }

  clickKeyword(term: string): void {
    this.filters = toggleKeyword(this.filters, term);
  }

  clickSource(source: string): void {
    this.filters = toggleSource(this.filters, source);
  }

  clickOverlap(otherSetId: string): void {
    this.filters = {
      ...this.filters,
      overlapSet: this.filters.overlapSet === otherSetId ? null : otherSetId,
    };
  }

  search(q: string): void {
    this.filters = { ...this.filters, query: q === '' ? null : q };
  }

  /** The sentence list is always the API result for the active chips. */
  loadSentences(page = 1): ReturnType<ApiClient['sentences']> {
    return this.api.sentences(this.setId, this.filters, page, PAGE_SIZE);
  }

  async loadAllSentences(): Promise<SentenceItem[]> {
    const items: SentenceItem[] = [];
    for (let page = 1; ; page += 1) {
      const chunk = await this.api.sentences(this.setId, this.filters, page, PAGE_SIZE);
      items.push(...chunk.items);
      if (items.length >= chunk.total || chunk.items.length === 0) {
        return items;
      }
    }
  }

  /** Remove one sentence; header counts update from the recomputed metrics. */
  async removeSentence(recordId: string): Promise<void> {
    try {
      const response = await this.api.edit(this.setId, {
        op: 'remove',
        ids: [recordId],
        version: this.version,
      });
      this.version = response.version;
      this.header = headerFromMetrics(response.metrics);
      this.conflict = false;
    } catch (error) {
      if (error instanceof VersionConflictError) {
        this.conflict = true; // caller should reload the detail payload
        return;
      }
      throw error;
    }
  }

  async undoRemove(recordId: string): Promise<void> {
    const response = await this.api.edit(this.setId, {
      op: 'unremove',
      ids: [recordId],
      version: this.version,
    });
    this.version = response.version;
    this.header = headerFromMetrics(response.metrics);
  }

  async rename(name: string): Promise<void> {
    const response = await this.api.edit(this.setId, {
      op: 'rename',
      name,
      version: this.version,
    });
    this.version = response.version;
    this.name = response.name;
  }

  /** Export downloads exactly the rows matching the active chips. */
  exportFiltered(): Promise<{ text: string; rows: number }> {
    return this.api.exportSet(this.setId, this.filters);
  }
}
