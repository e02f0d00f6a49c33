/** Table View model: column definitions, sorting, and sparkline geometry. */

import type { SetSummary } from './types';

export type SortColumn =
  | 'name'
  | 'log_count'
  | 'mean_familiarity'
  | 'train_count'
  | 'mean_chrf'
  | 'train_ratio';

export type SortDirection = 'asc' | 'desc';

export interface SortState {
  column: SortColumn;
  direction: SortDirection;
}

export interface ColumnSpec {
  column: SortColumn;
  header: string;
}

export const COLUMNS: ColumnSpec[] = [
  { column: 'name', header: 'Challenge Set' },
  { column: 'log_count', header: 'Log Count' },
  { column: 'mean_familiarity', header: 'Familiarity' },
  { column: 'train_count', header: 'Train Count' },
  { column: 'mean_chrf', header: 'ChrF' },
  { column: 'train_ratio', header: 'Train Ratio' },
];

/** Clicking a header toggles direction on the same column, else sorts asc. */
export function nextSort(current: SortState | null, column: SortColumn): SortState {
  if (current !== null && current.column === column) {
    return { column, direction: current.direction === 'asc' ? 'desc' : 'asc' };
  }
  return { column, direction: 'asc' };
}

/**
 * Stable sort of the set summaries by one column. Missing metrics (null) sink
 * to the bottom regardless of direction; ties keep the server order, so the
 * result is exactly the API payload reordered by the displayed metric.
 */
export function sortRows(rows: SetSummary[], sort: SortState | null): SetSummary[] {
  if (sort === null) return [...rows];
  const sign = sort.direction === 'asc' ? 1 : -1;
  return [...rows]
    .map((row, index) => ({ row, index }))
    .sort((a, b) => {
      const va = a.row[sort.column];
      const vb = b.row[sort.column];
      if (va === null && vb === null) return a.index - b.index;
      if (va === null) return 1;
      if (vb === null) return -1;
      if (va < vb) return -sign;
      if (va > vb) return sign;
      return a.index - b.index;
    })
    .map((entry) => entry.row);
}

// --- sparkline geometry (pure, rendered as SVG elsewhere) -----------------

export interface Bar {
  x: number;
  y: number;
  width: number;
  height: number;
}

/** Histogram bins as bar rectangles inside a w x h box. */
export function histogramBars(histogram: number[], width: number, height: number): Bar[] {
  const peak = Math.max(1, ...histogram);
  const barWidth = width / histogram.length;
  return histogram.map((count, i) => {
    const h = (count / peak) * height;
    return { x: i * barWidth, y: height - h, width: barWidth, height: h };
  });
}

/** In-line count bar scaled against the largest count in the table. */
export function countBarWidth(count: number, maxCount: number, width: number): number {
  if (maxCount <= 0) return 0;
  return (count / maxCount) * width;
}

/** SVG path for the filled part of the semicircle train-ratio glyph. */
export function ratioGlyphPath(ratio: number, radius: number): string {
  const clamped = Math.max(0, Math.min(1, ratio));
  const angle = Math.PI * clamped;
  const x = radius - radius * Math.cos(angle);
  const y = radius - radius * Math.sin(angle);
  const largeArc = clamped > 0.5 ? 1 : 0;
  return `M 0 ${radius} A ${radius} ${radius} 0 ${largeArc} 1 ${x.toFixed(4)} ${y.toFixed(4)} L ${radius} ${radius} Z`;
}

/** Background darkness for a keyword cell, proportional to its score. */
export function keywordDarkness(score: number, maxScore: number): number {
  if (maxScore <= 0) return 0;
  return Math.max(0.05, Math.min(1, score / maxScore));
}
