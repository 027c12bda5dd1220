// Pure view-model mapping from API payloads. Values are rendered with
// String(...) on the parsed JSON numbers so the display is byte-faithful
// to what the server sent.

import type { Fit, HistoryRow, Snapshot, Suggestion } from "./api.js";

export interface GridView {
  components: string[];
  rows: { faulty: string[]; marks: boolean[]; label: string }[];
  remaining: number;
  step: number;
  outcome: string | null;
}

export interface CardView {
  kind: "control" | "probe";
  title: string;
  detail: string;
  expected: string;
  variables: string[]; // the variables the operator is asked to read
  policy: string;
}

export interface ChartView {
  points: { k: number; n: number }[];
  curve: { x: number; y: number }[] | null;
  fitLabel: string | null;
  maxN: number;
  maxK: number;
}

export function formatNumber(value: number | null): string {
  return value === null ? "-" : String(value);
}

export function gridView(snapshot: Snapshot): GridView {
  const rows = snapshot.hypotheses.map((h) => ({
    faulty: h.faulty,
    marks: h.marks,
    label: h.faulty.length ? h.faulty.join(" ") : "(all healthy)",
  }));
  if (rows.length !== snapshot.remaining) {
    throw new Error(`grid rows ${rows.length} != remaining ${snapshot.remaining}`);
  }
  for (const row of rows) {
    if (row.marks.length !== snapshot.components.length) {
      throw new Error("hypothesis marks do not align with the component list");
    }
  }
  return {
    components: snapshot.components,
    rows,
    remaining: snapshot.remaining,
    step: snapshot.step,
    outcome: snapshot.outcome,
  };
}

export function cardView(suggestion: Suggestion, policy: string): CardView {
  if (suggestion.kind === "probe") {
    const probe = suggestion.probe ?? "?";
    return {
      kind: "probe",
      title: `measure ${probe}`,
      detail: `probe internal signal ${probe}`,
      expected: formatNumber(suggestion.expected_remaining),
      variables: suggestion.probe ? [suggestion.probe] : [],
      policy,
    };
  }
  const control = suggestion.control ?? {};
  const assigns = Object.keys(control)
    .sort()
    .map((k) => `${k}=${control[k]}`);
  return {
    kind: "control",
    title: assigns.length ? `apply ${assigns.join(" ")}` : "apply (no controls)",
    detail: suggestion.rationale,
    expected: formatNumber(suggestion.expected_remaining),
    variables: [],
    policy,
  };
}

export function chartView(history: HistoryRow[], fit: Fit | null): ChartView {
  const points = history.map((row) => ({ k: row.k, n: row.remaining }));
  const maxK = Math.max(1, ...points.map((p) => p.k));
  const maxN = Math.max(1, ...points.map((p) => p.n));
  let curve: { x: number; y: number }[] | null = null;
  let fitLabel: string | null = null;
  if (fit) {
    curve = [];
    for (let x = 0; x <= maxK + 1e-9; x += 0.1) {
      curve.push({ x, y: fit.n0 * Math.pow(fit.rate, x) + fit.n_inf });
    }
    fitLabel = `N(k) = ${fit.n0.toFixed(2)} * ${fit.rate.toFixed(3)}^k + ${fit.n_inf.toFixed(2)}  (R2 ${fit.r_squared.toFixed(3)})`;
  }
  return { points, curve, fitLabel, maxN, maxK };
}

// Tri-state observation entry: unread variables are simply not submitted.
export type TriState = "0" | "1" | "unread";

export function observationFromEntries(entries: Record<string, TriState>): Record<string, number> {
  const out: Record<string, number> = {};
  for (const [name, state] of Object.entries(entries)) {
    if (state === "0") out[name] = 0;
    else if (state === "1") out[name] = 1;
  }
  return out;
}

export function validateEntries(
  entries: Record<string, TriState>,
  known: Set<string>,
): string | null {
  for (const name of Object.keys(entries)) {
    if (!known.has(name)) return `unknown variable ${name}`;
  }
  return null;
}
