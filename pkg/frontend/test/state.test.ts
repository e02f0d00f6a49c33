import { describe, expect, it } from 'vitest';

import type { FilterState } from '../src/state';
import {
  chips,
  emptyFilters,
  isEmpty,
  removeChip,
  toQueryParams,
  toggleKeyword,
  toggleSource,
} from '../src/state';

describe('filter bar parity', () => {
  it('an empty state sends no parameters and shows no chips', () => {
    const f = emptyFilters();
    expect(toQueryParams(f)).toEqual({});
    expect(chips(f)).toEqual([]);
    expect(isEmpty(f)).toBe(true);
  });

  it('every active filter shows a chip and maps to exactly one parameter group', () => {
    let f = emptyFilters();
    f = { ...f, chrfMin: 0, chrfMax: 0.7 };
    f = toggleKeyword(f, 'fever');
    f = toggleKeyword(f, 'chills');
    f = toggleSource(f, 'chat-app');
    f = { ...f, query: 'headache', overlapSet: 'ut-number',
          timeFrom: '2021-07-01T00:00:00Z', timeTo: '2021-08-01T00:00:00Z',
          faMin: -9, faMax: -2 };
    const params = toQueryParams(f);
    expect(params).toEqual({
      time_from: '2021-07-01T00:00:00Z',
      time_to: '2021-08-01T00:00:00Z',
      keywords: 'fever,chills',
      chrf_min: '0',
      chrf_max: '0.7',
      fa_min: '-9',
      fa_max: '-2',
      provenance: 'chat-app',
      q: 'headache',
      overlap_set: 'ut-number',
    });
    const shown = chips(f);
    expect(shown.map((c) => c.key).sort()).toEqual([
      'chrf', 'fa', 'keyword:chills', 'keyword:fever', 'overlap',
      'query', 'source:chat-app', 'time',
    ]);
  });

  it('kw_mode is sent only when AND is selected', () => {
    let f = toggleKeyword(emptyFilters(), 'fever');
    expect(toQueryParams(f)).toEqual({ keywords: 'fever' });
    f = { ...f, kwMode: 'and' };
    expect(toQueryParams(f)).toEqual({ keywords: 'fever', kw_mode: 'and' });
  });

  it('removing a chip clears exactly its parameters', () => {
    let f: FilterState = { ...emptyFilters(), chrfMax: 0.7, query: 'abc' };
    f = toggleKeyword(f, 'fever');
    f = removeChip(f, 'chrf');
    expect(toQueryParams(f)).toEqual({ keywords: 'fever', q: 'abc' });
    f = removeChip(f, 'keyword:fever');
    expect(toQueryParams(f)).toEqual({ q: 'abc' });
  });

  it('removing all chips restores the unfiltered state', () => {
    let f: FilterState = { ...emptyFilters(), chrfMax: 0.7, faMin: -5, query: 'x',
              timeFrom: '2021-07-01T00:00:00Z', timeTo: null, overlapSet: 'tp-000' };
    f = toggleKeyword(f, 'fever');
    f = toggleSource(f, 'mail');
    for (const chip of chips(f)) {
      f = removeChip(f, chip.key);
    }
    expect(isEmpty(f)).toBe(true);
    expect(toQueryParams(f)).toEqual({});
  });

  it('keyword and source clicks toggle', () => {
    let f = toggleKeyword(emptyFilters(), 'fever');
    f = toggleKeyword(f, 'fever');
    expect(f.keywords).toEqual([]);
    f = toggleSource(f, 'mail');
    f = toggleSource(f, 'mail');
    expect(f.provenance).toEqual([]);
  });
});
