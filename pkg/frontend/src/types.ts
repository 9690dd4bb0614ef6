/** Wire and client-side types shared across the console. */

export type Label = "Relevant" | "Not Relevant" | "Can't Decide";

export const LABELS: Label[] = ["Relevant", "Not Relevant", "Can't Decide"];

/** Label hues: Relevant blue, Not Relevant red, Can't Decide gray. */
export const LABEL_COLORS: Record<Label, string> = {
  "Relevant": "#4a90d9",
  "Not Relevant": "#d9534f",
  "Can't Decide": "#9aa0a6",
};

/** Probability triple in fixed order (Relevant, Not Relevant, Can't Decide). */
export type Probs = [number, number, number];

export interface TableRow {
  id: string;
  timestamp: number; // arrival time, ms epoch
  text: string;
  label: Label | null; // null until the first prediction arrives
  probs: Probs | null;
  userModified: boolean; // pinned: re-predictions never overwrite these
}

export interface ModelKey {
  user_id: string;
  classifier_id: string;
}

export interface WireLabel {
  id: string;
  label: Label;
  probs: Probs;
}

export interface GetLabelsResponse {
  labels: WireLabel[];
  n_trained: number;
  estimated_f1: number;
}

export interface UpdateLabelsResponse {
  status: string;
  n_trained: number;
  estimated_f1: number;
  train_seconds: number;
}

export interface StreamItem {
  id: string;
  text: string;
  timestamp?: number;
}
