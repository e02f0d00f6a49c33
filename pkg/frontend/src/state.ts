/** Filter state shared by the Filter Bar, the spotlights, and the API client.
 *
 * Invariant: the chips rendered in the Filter Bar are derived from the same
 * state object that produces the query parameters, so what the user sees is
 * exactly what the server filters on.
 */

export type KwMode = 'or' | 'and';

export interface FilterState {
  timeFrom: string | null; // RFC 3339 UTC
  timeTo: string | null;
  keywords: string[];
  kwMode: KwMode;
  chrfMin: number | null;
  chrfMax: number | null;
  faMin: number | null;
  faMax: number | null;
  provenance: string[];
  query: string | null;
  overlapSet: string | null;
}

export interface Chip {
  key: string; // which part of the state this chip clears
  label: string;
}

export type SpotlightKind =
  | 'keywords'
  | 'embedding'
  | 'chrf'
  | 'familiarity'
  | 'source'
  | 'overlap';

export const SPOTLIGHTS: SpotlightKind[] = [
  'keywords', 'embedding', 'chrf', 'familiarity', 'source', 'overlap',
];

export function emptyFilters(): FilterState {
  return {
    timeFrom: null,
    timeTo: null,
    keywords: [],
    kwMode: 'or',
    chrfMin: null,
    chrfMax: null,
    faMin: null,
    faMax: null,
    provenance: [],
    query: null,
    overlapSet: null,
  };
}

export function isEmpty(f: FilterState): boolean {
  return chips(f).length === 0;
}

/** Query parameters exactly as the sentences/export endpoints expect them. */
export function toQueryParams(f: FilterState): Record<string, string> {
  const params: Record<string, string> = {};
  if (f.timeFrom !== null) params.time_from = f.timeFrom;
  if (f.timeTo !== null) params.time_to = f.timeTo;
  if (f.keywords.length > 0) {
    params.keywords = f.keywords.join(',');
    if (f.kwMode !== 'or') params.kw_mode = f.kwMode;
  }
  if (f.chrfMin !== null) params.chrf_min = String(f.chrfMin);
  if (f.chrfMax !== null) params.chrf_max = String(f.chrfMax);
  if (f.faMin !== null) params.fa_min = String(f.faMin);
  if (f.faMax !== null) params.fa_max = String(f.faMax);
  if (f.provenance.length > 0) params.provenance = f.provenance.join(',');
  if (f.query !== null && f.query !== '') params.q = f.query;
  if (f.overlapSet !== null) params.overlap_set = f.overlapSet;
  return params;
}

/** One chip per active filter, in a stable display order. */
export function chips(f: FilterState): Chip[] {
  const out: Chip[] = [];
  if (f.timeFrom !== null || f.timeTo !== null) {
    out.push({ key: 'time', label: `Time ${f.timeFrom ?? '…'} → ${f.timeTo ?? '…'}` });
  }
  for (const kw of f.keywords) {
    out.push({ key: `keyword:${kw}`, label: `Keyword ${kw}` });
  }
  if (f.chrfMin !== null || f.chrfMax !== null) {
    out.push({ key: 'chrf', label: `ChrF [${f.chrfMin ?? 0}, ${f.chrfMax ?? 1}]` });
  }
  if (f.faMin !== null || f.faMax !== null) {
    out.push({ key: 'fa', label: `Familiarity [${f.faMin ?? '…'}, ${f.faMax ?? '…'}]` });
  }
  for (const src of f.provenance) {
    out.push({ key: `source:${src}`, label: `Source ${src}` });
  }
  if (f.query !== null && f.query !== '') {
    out.push({ key: 'query', label: `Search "${f.query}"` });
  }
  if (f.overlapSet !== null) {
    out.push({ key: 'overlap', label: `Overlap ${f.overlapSet}` });
  }
  return out;
}

/** Removing a chip clears exactly the state that produced it. */
export function removeChip(f: FilterState, key: string): FilterState {
  const next = { ...f, keywords: [...f.keywords], provenance: [...f.provenance] };
  if (key === 'time') {
    next.timeFrom = null;
    next.timeTo = null;
  } else if (key === 'chrf') {
    next.chrfMin = null;
    next.chrfMax = null;
  } else if (key === 'fa') {
    next.faMin = null;
    next.faMax = null;
  } else if (key === 'query') {
    next.query = null;
  } else if (key === 'overlap') {
    next.overlapSet = null;
  } else if (key.startsWith('keyword:')) {
    next.keywords = next.keywords.filter((kw) => kw !== key.slice('keyword:'.length));
  } else if (key.startsWith('source:')) {
    next.provenance = next.provenance.filter((s) => s !== key.slice('source:'.length));
  }
  return next;
}

export function toggleKeyword(f: FilterState, term: string): FilterState {
  const next = { ...f, keywords: [...f.keywords] };
  if (next.keywords.includes(term)) {
    next.keywords = next.keywords.filter((kw) => kw !== term);
  } else {
    next.keywords.push(term);
  }
  return next;
}

export function toggleSource(f: FilterState, source: string): FilterState {
  const next = { ...f, provenance: [...f.provenance] };
  if (next.provenance.includes(source)) {
    next.provenance = next.provenance.filter((s) => s !== source);
  } else {
    next.provenance.push(source);
  }
  return next;
}
