import { beforeEach, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api';
import { DetailController } from '../src/detail';
import type { SetDetail } from '../src/types';
import { applyFilters, fakeFetch, makeFixture, FakeData } from './fakeService';

let data: FakeData;
let api: ApiClient;
let requests: string[];

async function controllerFor(setId: string): Promise<DetailController> {
  const detail = (await api.setDetail(setId)) as SetDetail;
  return new DetailController(api, setId, detail);
}

beforeEach(() => {
  data = makeFixture();
  const fake = fakeFetch(data);
  api = new ApiClient('', fake.fetchFn);
  requests = fake.requests;
});

describe('detail view parity', () => {
  it('brushing the ChrF spotlight to [0, 0.7] lists exactly the API result for chrf_max=0.7', async () => {
    const ctl = await controllerFor('ut-number');
    ctl.brushChrf(0, 0.7);
    const items = await ctl.loadAllSentences();

    const sent = requests.find((u) => u.includes('/sentences') && u.includes('chrf_max'));
    expect(sent).toBeDefined();
    const params = new URL(sent!, 'http://fake').searchParams;
    expect(params.get('chrf_max')).toBe('0.7');
    expect(params.get('chrf_min')).toBe('0');

    const set = data.sets.find((s) => s.set_id === 'ut-number')!;
    const expected = applyFilters(
      data, set, new URLSearchParams({ chrf_min: '0', chrf_max: '0.7' }),
    );
    expect(items.map((i) => i.id)).toEqual(expected.map((r) => r.id));
    expect(items.some((i) => i.origin === 'log')).toBe(true); // logs unaffected by chrf bounds
    for (const item of items) {
      if (item.origin === 'train') expect(item.chrf!).toBeLessThanOrEqual(0.7);
    }
  });

  it('removing one sentence updates the header counts from recomputed metrics', async () => {
    const ctl = await controllerFor('tp-000');
    const before = ctl.header.logCount + ctl.header.trainCount;
    const victim = (await ctl.loadSentences(1)).items[0].id;
    await ctl.removeSentence(victim);
    expect(ctl.conflict).toBe(false);
    expect(ctl.header.logCount + ctl.header.trainCount).toBe(before - 1);
    expect(ctl.version).toBe(2);
    const everything = await ctl.loadAllSentences();
    expect(everything.map((i) => i.id)).not.toContain(victim);
  });

  it('a stale edit flags a conflict instead of mutating', async () => {
    const ctl = await controllerFor('tp-000');
    const other = await controllerFor('tp-000');
    const victim = (await ctl.loadSentences(1)).items[0].id;
    await ctl.removeSentence(victim);
    const second = (await other.loadSentences(1)).items.find((i) => i.id !== victim)!.id;
    await other.removeSentence(second); // other still holds version 1
    expect(other.conflict).toBe(true);
    const set = data.sets.find((s) => s.set_id === 'tp-000')!;
    expect(set.removed_ids.has(second)).toBe(false);
  });

  it('undo restores the pre-edit header counts', async () => {
    const ctl = await controllerFor('tp-000');
    const before = { ...ctl.header };
    const victim = (await ctl.loadSentences(1)).items[0].id;
    await ctl.removeSentence(victim);
    await ctl.undoRemove(victim);
    expect(ctl.header).toEqual(before);
  });

  it('export downloads exactly the filtered rows', async () => {
    const ctl = await controllerFor('tp-000');
    ctl.brushFamiliarity(-8, null);
    ctl.clickKeyword('fever');
    const listed = await ctl.loadAllSentences();
    const { text, rows } = await ctl.exportFiltered();
    const exported = text.split('\n').filter((ln) => ln !== '').map((ln) => JSON.parse(ln));
    expect(rows).toBe(listed.length);
    expect(exported.map((r) => r.id)).toEqual(listed.map((i) => i.id));
    expect(exported.every((r) => r.set === ctl.name)).toBe(true);
  });

  it('removing every chip restores the unfiltered set', async () => {
    const ctl = await controllerFor('tp-000');
    ctl.brushChrf(0, 0.5);
    ctl.clickKeyword('fever');
    ctl.search('high');
    for (const chip of ctl.activeChips()) {
      ctl.dropChip(chip.key);
    }
    expect(ctl.activeChips()).toEqual([]);
    const items = await ctl.loadAllSentences();
    const set = data.sets.find((s) => s.set_id === 'tp-000')!;
    expect(items.map((i) => i.id)).toEqual(
      set.member_ids.filter((m) => !set.removed_ids.has(m)),
    );
  });

  it('timeline brush, source and overlap clicks become filter parameters', async () => {
    const ctl = await controllerFor('tp-000');
    ctl.brushTimeline('2021-08-01T00:00:00Z', '2021-09-30T23:59:59Z');
    ctl.clickSource('chat-app');
    ctl.clickOverlap('ut-number');
    const items = await ctl.loadAllSentences();
    const set = data.sets.find((s) => s.set_id === 'tp-000')!;
    const expected = applyFilters(data, set, new URLSearchParams({
      time_from: '2021-08-01T00:00:00Z',
      time_to: '2021-09-30T23:59:59Z',
      provenance: 'chat-app',
      overlap_set: 'ut-number',
    }));
    expect(items.map((i) => i.id)).toEqual(expected.map((r) => r.id));
    expect(ctl.activeChips().map((c) => c.key)).toEqual(
      expect.arrayContaining(['time', 'source:chat-app', 'overlap']),
    );
  });

  it('rename round-trips through the API', async () => {
    const ctl = await controllerFor('ut-number');
    await ctl.rename('numbers to review');
    expect(ctl.name).toBe('numbers to review');
    const detail = await api.setDetail('ut-number');
    expect(detail.name).toBe('numbers to review');
  });
});
