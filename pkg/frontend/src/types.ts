/** Payload types mirroring the challenge-set service JSON API. */

export interface SetSummary {
  set_id: string;
  name: string;
  kind: 'unit-test' | 'topic';
  version: number;
  log_count: number;
  train_count: number;
  train_ratio: number | null;
  mean_chrf: number | null;
  mean_familiarity: number | null;
  chrf_histogram: number[] | null;
  familiarity_histogram: number[] | null;
}

export interface SetMetricsPayload {
  log_count: number;
  train_count: number;
  train_ratio: number | null;
  mean_chrf: number | null;
  chrf_histogram: number[];
  mean_familiarity: number | null;
  familiarity_histogram: number[];
  familiarity_range: [number, number];
  source_counts: Record<string, number>;
  overlap_counts: Record<string, number>;
  timeline: Record<string, number>;
}

export interface SetDetail extends SetSummary {
  metrics: SetMetricsPayload;
  keywords: [string, number][];
  member_count: number;
  removed_count: number;
}

export interface SentenceItem {
  id: string;
  origin: 'train' | 'log';
  source: string;
  translation: string;
  reference: string | null;
  timestamp: string | null;
  provenance: string;
  chrf: number | null;
  familiarity: number | null;
  failed_rules: string[];
  topic_id: number | null;
}

export interface SentencePage {
  total: number;
  page: number;
  page_size: number;
  items: SentenceItem[];
}

export interface PreviewSentence {
  id: string;
  origin: 'train' | 'log';
  source: string;
  translation: string;
}

export interface PreviewPayload {
  set_id: string;
  sentences: PreviewSentence[];
  keywords: [string, number][];
}

export interface ContourLevel {
  level: number;
  polylines: [number, number][][];
}

export interface EmbeddingPayload {
  set_id: string;
  points: {
    id: string;
    x: number;
    y: number;
    origin: 'train' | 'log';
    source: string;
    translation: string;
  }[];
  contours: { train: ContourLevel[]; log: ContourLevel[] };
}

export interface EditResponse {
  set_id: string;
  version: number;
  metrics: SetMetricsPayload;
  name: string;
}

export interface SummaryDistribution {
  count: number;
  min: number | null;
  max: number | null;
  mean: number | null;
  histogram: number[];
  range: [number, number];
}

export interface GlobalSummary {
  n_train: number;
  n_log: number;
  n_sets: number;
  chrf: SummaryDistribution;
  familiarity: SummaryDistribution;
}
