export interface StatusView {
  iteration: number;
  counts: { undecided: number; pareto: number; discarded: number };
  sampled: number;
  grid_size: number;
  converged: boolean;
  suggestions: number[];
  last_report_digest: string | null;
}

export type Classification = "undecided" | "pareto_optimal" | "discarded";

export interface PointView {
  id: number;
  c_pvp10: number;
  c_pvp40: number;
  c_pvp360: number;
  spin_speed: number;
  dilution: number;
  sampled: boolean;
  classification: Classification;
  predicted_hardness: number | null;
  predicted_inverse_elasticity: number | null;
  region_width: number | null;
}

export interface Suggestion {
  id: number;
  c_pvp10: number;
  c_pvp40: number;
  c_pvp360: number;
  spin_speed: number;
  dilution: number;
}

export interface EmbeddingRecord {
  id: number;
  x: number;
  y: number;
}

export interface ReportStatement {
  quantifier: string;
  qualifier: string | null;
  summarizer: [string, string][];
  truth: number;
}

export interface ReportView {
  statements: ReportStatement[];
  markdown: string;
}

export interface LogEntry {
  event: string;
  iteration: number;
  point_id?: number;
  counts?: { undecided: number; pareto: number; discarded: number };
  suggestions?: number[];
}
