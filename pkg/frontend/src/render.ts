/** DOM rendering for the browser shell. View logic lives in table/detail/state;
 * this layer only turns their outputs into elements and wires events back.
 */

import { ApiClient } from './api';
import { DetailController } from './detail';
import { SPOTLIGHTS, SpotlightKind } from './state';
import {
  COLUMNS,
  SortState,
  countBarWidth,
  histogramBars,
  keywordDarkness,
  nextSort,
  ratioGlyphPath,
  sortRows,
} from './table';
import type { PreviewPayload, SentenceItem, SetDetail, SetSummary } from './types';

const SVG_NS = 'http://www.w3.org/2000/svg';

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function svgHistogram(histogram: number[] | null, cls: string): SVGSVGElement {
  const svg = document.createElementNS(SVG_NS, 'svg');
  svg.setAttribute('width', '80');
  svg.setAttribute('height', '20');
  svg.setAttribute('class', `spark ${cls}`);
  if (histogram) {
    for (const bar of histogramBars(histogram, 80, 20)) {
      const rect = document.createElementNS(SVG_NS, 'rect');
      rect.setAttribute('x', bar.x.toFixed(2));
      rect.setAttribute('y', bar.y.toFixed(2));
      rect.setAttribute('width', Math.max(0.5, bar.width - 0.5).toFixed(2));
      rect.setAttribute('height', bar.height.toFixed(2));
      svg.appendChild(rect);
    }
  }
  return svg;
}

function svgRatioGlyph(ratio: number | null): SVGSVGElement {
  const svg = document.createElementNS(SVG_NS, 'svg');
  svg.setAttribute('width', '28');
  svg.setAttribute('height', '14');
  svg.setAttribute('class', 'ratio-glyph');
  if (ratio !== null) {
    const back = document.createElementNS(SVG_NS, 'path');
    back.setAttribute('d', ratioGlyphPath(1, 14));
    back.setAttribute('class', 'ratio-back');
    const front = document.createElementNS(SVG_NS, 'path');
    front.setAttribute('d', ratioGlyphPath(ratio, 14));
    front.setAttribute('class', 'ratio-front');
    svg.append(back, front);
  }
  return svg;
}

function countBar(count: number, maxCount: number, cls: string): HTMLElement {
  const wrap = el('div', 'count-cell');
  const bar = el('div', `count-bar ${cls}`);
  bar.style.width = `${countBarWidth(count, maxCount, 70).toFixed(1)}px`;
  wrap.append(el('span', 'count-num', String(count)), bar);
  return wrap;
}

function fmt(value: number | null, digits = 3): string {
  return value === null ? '–' : value.toFixed(digits);
}

export class App {
  private sets: SetSummary[] = [];
  private sort: SortState | null = null;
  private openPreview: string | null = null;
  private detail: DetailController | null = null;

  constructor(private api: ApiClient, private root: HTMLElement) {}

  async start(): Promise<void> {
    try {
      this.sets = await this.api.listSets();
    } catch (error) {
      this.root.replaceChildren(
        el('div', 'banner error', `API unavailable: ${(error as Error).message}`),
      );
      return;
    }
    this.renderTable();
  }

  // --- Table View ---------------------------------------------------------

  private renderTable(): void {
    this.detail = null;
    const container = el('div', 'table-view');
    if (this.sets.length === 0) {
      container.appendChild(el('div', 'banner', 'No challenge sets in this store.'));
      this.root.replaceChildren(container);
      return;
    }
    const table = el('table', 'sets');
    const head = el('tr');
    for (const spec of COLUMNS) {
      const th = el('th', undefined, spec.header);
      const button = el('button', 'sort-btn', this.sortIndicator(spec.column));
      button.addEventListener('click', () => {
        this.sort = nextSort(this.sort, spec.column);
        this.renderTable();
      });
      th.appendChild(button);
      head.appendChild(th);
    }
    table.appendChild(head);

    const rows = sortRows(this.sets, this.sort);
    const maxLog = Math.max(1, ...rows.map((r) => r.log_count));
    const maxTrain = Math.max(1, ...rows.map((r) => r.train_count));
    for (const row of rows) {
      const tr = el('tr', `set-row kind-${row.kind}`);
      const nameCell = el('td', 'set-name');
      const nameButton = el('button', 'name-btn', row.name);
      nameButton.addEventListener('click', () => this.togglePreview(row.set_id, tr, table));
      const openButton = el('button', 'open-btn', 'detail');
      openButton.addEventListener('click', () => this.openDetail(row.set_id));
      nameCell.append(nameButton, openButton);
      tr.appendChild(nameCell);

      const logCell = el('td');
      logCell.appendChild(countBar(row.log_count, maxLog, 'log'));
      tr.appendChild(logCell);

      const faCell = el('td');
      faCell.append(el('span', 'metric', fmt(row.mean_familiarity)),
                    svgHistogram(row.familiarity_histogram, 'log'));
      tr.appendChild(faCell);

      const trainCell = el('td');
      trainCell.appendChild(countBar(row.train_count, maxTrain, 'train'));
      tr.appendChild(trainCell);

      const chrfCell = el('td');
      chrfCell.append(el('span', 'metric', fmt(row.mean_chrf)),
                      svgHistogram(row.chrf_histogram, 'train'));
      tr.appendChild(chrfCell);

      const ratioCell = el('td');
      ratioCell.append(el('span', 'metric', fmt(row.train_ratio, 2)),
                       svgRatioGlyph(row.train_ratio));
      tr.appendChild(ratioCell);

      table.appendChild(tr);
    }
    container.appendChild(table);
    this.root.replaceChildren(container);
  }

  private sortIndicator(column: string): string {
    if (this.sort === null || this.sort.column !== column) return '⇅';
    return this.sort.direction === 'asc' ? '↑' : '↓';
  }

  private async togglePreview(setId: string, row: HTMLTableRowElement, table: HTMLTableElement): Promise<void> {
    table.querySelectorAll('.preview-row').forEach((node) => node.remove());
    if (this.openPreview === setId) {
      this.openPreview = null;
      return;
    }
    this.openPreview = setId;
    const preview = await this.api.preview(setId);
    const tr = el('tr', 'preview-row');
    const td = el('td');
    td.colSpan = COLUMNS.length;
    td.appendChild(renderPreview(preview));
    tr.appendChild(td);
    row.after(tr);
  }

  // --- Detail View ----------------------------------------------------------

  private async openDetail(setId: string): Promise<void> {
    const detail = await this.api.setDetail(setId);
    this.detail = new DetailController(this.api, setId, detail);
    await this.renderDetail(detail);
  }

  private async renderDetail(detail: SetDetail): Promise<void> {
    const ctl = this.detail;
    if (ctl === null) return;
    const view = el('div', 'detail-view');

    const header = el('div', 'detail-header');
    const back = el('button', 'back-btn', '← all sets');
    back.addEventListener('click', () => this.renderTable());
    const title = el('input', 'set-title') as HTMLInputElement;
    title.value = ctl.name;
    title.addEventListener('change', async () => {
      await ctl.rename(title.value);
      title.value = ctl.name;
    });
    const counts = el('span', 'header-counts',
      `logs ${ctl.header.logCount} · train ${ctl.header.trainCount}` +
      ` · ChrF ${fmt(ctl.header.meanChrf)} · FA ${fmt(ctl.header.meanFamiliarity)}` +
      ` · ratio ${fmt(ctl.header.trainRatio, 2)}`);
    header.append(back, title, counts);
    view.appendChild(header);

    const filterBar = el('div', 'filter-bar');
    for (const chip of ctl.activeChips()) {
      const chipEl = el('button', 'chip', `${chip.label} ✕`);
      chipEl.addEventListener('click', async () => {
        ctl.dropChip(chip.key);
        await this.renderDetail(detail);
      });
      filterBar.appendChild(chipEl);
    }
    view.appendChild(filterBar);

    const timeline = el('div', 'timeline');
    const days = Object.entries(detail.metrics.timeline);
    const peak = Math.max(1, ...days.map(([, v]) => v));
    for (const [day, value] of days) {
      const bar = el('div', 'timeline-bar');
      bar.style.height = `${(value / peak) * 40}px`;
      bar.title = `${day}: ${value}`;
      bar.addEventListener('click', async () => {
        ctl.brushTimeline(`${day}T00:00:00Z`, `${day}T23:59:59Z`);
        await this.renderDetail(detail);
      });
      timeline.appendChild(bar);
    }
    view.appendChild(timeline);

    const thumbs = el('div', 'thumbnails');
    for (const kind of SPOTLIGHTS) {
      const thumb = el('button', `thumb${ctl.spotlight === kind ? ' active' : ''}`, kind);
      thumb.addEventListener('click', async () => {
        ctl.switchSpotlight(kind);
        await this.renderDetail(detail);
      });
      thumbs.appendChild(thumb);
    }
    view.appendChild(thumbs);
    view.appendChild(await this.renderSpotlight(ctl.spotlight, detail));

    const listWrap = el('div', 'sentence-list');
    const tools = el('div', 'list-tools');
    const search = el('input', 'search') as HTMLInputElement;
    search.placeholder = 'search text';
    search.value = ctl.filters.query ?? '';
    search.addEventListener('change', async () => {
      ctl.search(search.value);
      await this.renderDetail(detail);
    });
    const editToggle = el('button', 'edit-btn', ctl.editMode ? 'done' : 'edit');
    editToggle.addEventListener('click', async () => {
      ctl.editMode = !ctl.editMode;
      await this.renderDetail(detail);
    });
    const exportButton = el('button', 'export-btn', 'export');
    exportButton.addEventListener('click', async () => {
      const { text } = await ctl.exportFiltered();
      const blob = new Blob([text], { type: 'application/x-ndjson' });
      const link = el('a') as HTMLAnchorElement;
      link.href = URL.createObjectURL(blob);
      link.download = `${ctl.name}.jsonl`;
      link.click();
      URL.revokeObjectURL(link.href);
    });
    tools.append(search, editToggle, exportButton);
    listWrap.appendChild(tools);

    const page = await ctl.loadSentences(1);
    listWrap.appendChild(el('div', 'list-total', `${page.total} sentences`));
    const scroller = el('div', 'list-scroll');
    for (const item of page.items) {
      scroller.appendChild(this.renderSentence(item, detail));
    }
    // page size 100 with infinite scroll
    let loaded = page.items.length;
    let nextPage = 2;
    let loading = false;
    scroller.addEventListener('scroll', async () => {
      const nearBottom =
        scroller.scrollTop + scroller.clientHeight >= scroller.scrollHeight - 40;
      if (!nearBottom || loading || loaded >= page.total) return;
      loading = true;
      const more = await ctl.loadSentences(nextPage);
      nextPage += 1;
      loaded += more.items.length;
      for (const item of more.items) {
        scroller.appendChild(this.renderSentence(item, detail));
      }
      loading = false;
    });
    listWrap.appendChild(scroller);
    if (ctl.conflict) {
      listWrap.prepend(el('div', 'banner error',
        'This set changed elsewhere; reload to continue editing.'));
    }
    view.appendChild(listWrap);
    this.root.replaceChildren(view);
  }

  private renderSentence(item: SentenceItem, detail: SetDetail): HTMLElement {
    const ctl = this.detail!;
    const node = el('div', `sentence origin-${item.origin}`);
    const text = el('button', 'sentence-src', item.source);
    const translation = el('div', 'sentence-trans hidden', item.translation);
    text.addEventListener('click', () => translation.classList.toggle('hidden'));
    node.append(text, translation);
    if (ctl.editMode) {
      const remove = el('button', 'remove-btn', '✕');
      remove.addEventListener('click', async () => {
        await ctl.removeSentence(item.id);
        await this.renderDetail(detail);
      });
      node.appendChild(remove);
    }
    return node;
  }

  private async renderSpotlight(kind: SpotlightKind, detail: SetDetail): Promise<HTMLElement> {
    const ctl = this.detail!;
    const box = el('div', `spotlight spotlight-${kind}`);
    if (kind === 'keywords') {
      const maxScore = Math.max(1e-9, ...detail.keywords.map(([, s]) => s));
      for (const [term, score] of detail.keywords) {
        const cell = el('button', 'keyword', term);
        cell.style.opacity = keywordDarkness(score, maxScore).toFixed(2);
        if (ctl.filters.keywords.includes(term)) cell.classList.add('active');
        cell.addEventListener('click', async () => {
          ctl.clickKeyword(term);
          await this.renderDetail(detail);
        });
        box.appendChild(cell);
      }
    } else if (kind === 'embedding') {
      box.appendChild(await this.renderEmbedding(detail.set_id));
    } else if (kind === 'chrf' || kind === 'familiarity') {
      const hist = kind === 'chrf'
        ? detail.metrics.chrf_histogram
        : detail.metrics.familiarity_histogram;
      const [lo, hi] = kind === 'chrf' ? [0, 1] : detail.metrics.familiarity_range;
      const width = 300;
      const svg = svgHistogram(hist, kind === 'chrf' ? 'train' : 'log');
      svg.setAttribute('width', String(width));
      svg.setAttribute('height', '60');
      svg.replaceChildren();
      for (const bar of histogramBars(hist, width, 60)) {
        const rect = document.createElementNS(SVG_NS, 'rect');
        rect.setAttribute('x', bar.x.toFixed(1));
        rect.setAttribute('y', bar.y.toFixed(1));
        rect.setAttribute('width', Math.max(1, bar.width - 1).toFixed(1));
        rect.setAttribute('height', bar.height.toFixed(1));
        const binLo = lo + (hi - lo) * (histogramBars(hist, width, 60).indexOf(bar) / hist.length);
        rect.addEventListener('click', async () => {
          if (kind === 'chrf') ctl.brushChrf(0, binLo + (hi - lo) / hist.length);
          else ctl.brushFamiliarity(lo, binLo + (hi - lo) / hist.length);
          await this.renderDetail(detail);
        });
        svg.appendChild(rect);
      }
      box.appendChild(svg);
    } else if (kind === 'source') {
      for (const [source, count] of Object.entries(detail.metrics.source_counts)) {
        const row = el('button', 'bar-row', `${source} (${count})`);
        if (ctl.filters.provenance.includes(source)) row.classList.add('active');
        row.addEventListener('click', async () => {
          ctl.clickSource(source);
          await this.renderDetail(detail);
        });
        box.appendChild(row);
      }
    } else {
      for (const [otherId, shared] of Object.entries(detail.metrics.overlap_counts)) {
        const row = el('button', 'bar-row', `${otherId} (${shared} shared)`);
        if (ctl.filters.overlapSet === otherId) row.classList.add('active');
        row.addEventListener('click', async () => {
          ctl.clickOverlap(otherId);
          await this.renderDetail(detail);
        });
        box.appendChild(row);
      }
    }
    return box;
  }

  private async renderEmbedding(setId: string): Promise<SVGSVGElement> {
    const payload = await this.api.embedding(setId);
    const svg = document.createElementNS(SVG_NS, 'svg');
    svg.setAttribute('viewBox', '0 0 400 400');
    svg.setAttribute('class', 'embedding');
    // wheel-zoom around the cursor by shrinking the viewBox
    svg.addEventListener('wheel', (event) => {
      event.preventDefault();
      const [vx, vy, vw, vh] = (svg.getAttribute('viewBox') ?? '0 0 400 400')
        .split(' ')
        .map(Number);
      const factor = event.deltaY < 0 ? 0.85 : 1 / 0.85;
      const bounds = svg.getBoundingClientRect();
      const fx = (event.clientX - bounds.left) / Math.max(1, bounds.width);
      const fy = (event.clientY - bounds.top) / Math.max(1, bounds.height);
      const nw = Math.min(400, vw * factor);
      const nh = Math.min(400, vh * factor);
      const nx = Math.max(0, Math.min(400 - nw, vx + (vw - nw) * fx));
      const ny = Math.max(0, Math.min(400 - nh, vy + (vh - nh) * fy));
      svg.setAttribute('viewBox', `${nx} ${ny} ${nw} ${nh}`);
    });
    const xs = payload.points.map((p) => p.x);
    const ys = payload.points.map((p) => p.y);
    for (const level of [...payload.contours.train, ...payload.contours.log]) {
      for (const line of level.polylines) {
        xs.push(...line.map(([x]) => x));
        ys.push(...line.map(([, y]) => y));
      }
    }
    const minX = Math.min(...xs);
    const maxX = Math.max(...xs);
    const minY = Math.min(...ys);
    const maxY = Math.max(...ys);
    const sx = (x: number) => ((x - minX) / Math.max(1e-9, maxX - minX)) * 380 + 10;
    const sy = (y: number) => 390 - ((y - minY) / Math.max(1e-9, maxY - minY)) * 380;
    for (const which of ['train', 'log'] as const) {
      for (const level of payload.contours[which]) {
        for (const line of level.polylines) {
          const path = document.createElementNS(SVG_NS, 'path');
          const d = line.map(([x, y], i) => `${i === 0 ? 'M' : 'L'} ${sx(x).toFixed(1)} ${sy(y).toFixed(1)}`).join(' ');
          path.setAttribute('d', d);
          path.setAttribute('class', `contour contour-${which}`);
          svg.appendChild(path);
        }
      }
    }
    for (const point of payload.points) {
      const circle = document.createElementNS(SVG_NS, 'circle');
      circle.setAttribute('cx', sx(point.x).toFixed(1));
      circle.setAttribute('cy', sy(point.y).toFixed(1));
      circle.setAttribute('r', '2');
      circle.setAttribute('class', `dot dot-${point.origin}`);
      const tip = document.createElementNS(SVG_NS, 'title');
      tip.textContent = `${point.source} \u2192 ${point.translation}`;
      circle.appendChild(tip);
      svg.appendChild(circle);
    }
    return svg;
  }
}

export function renderPreview(preview: PreviewPayload): HTMLElement {
  const box = el('div', 'preview');
  const sentences = el('div', 'preview-sentences');
  for (const sentence of preview.sentences) {
    const node = el('div', `sentence origin-${sentence.origin}`);
    const src = el('button', 'sentence-src', sentence.source);
    const trans = el('div', 'sentence-trans hidden', sentence.translation);
    src.addEventListener('click', () => trans.classList.toggle('hidden'));
    node.append(src, trans);
    sentences.appendChild(node);
  }
  const keywords = el('div', 'preview-keywords');
  const maxScore = Math.max(1e-9, ...preview.keywords.map(([, s]) => s));
  for (const [term, score] of preview.keywords) {
    const cell = el('span', 'keyword', term);
    cell.style.opacity = keywordDarkness(score, maxScore).toFixed(2);
    keywords.appendChild(cell);
  }
  box.append(sentences, keywords);
  return box;
}
