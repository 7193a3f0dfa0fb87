/**
 * View models for the evaluations screen.
 *
 * Everything here is a pure function of the EvaluationReport the API
 * returned; no number is recomputed client-side. Cells carry both the raw
 * value and the display text so tests can assert they agree.
 */

import { formatCell, heatColor } from "./format.js";
import type { Cell, ConfusionDoc, EvaluationReport, PerCodeRow } from "./types.js";

export interface MatrixCell {
  value: Cell;
  text: string;
  color: string;
  /** set on missing cells; surfaced as a tooltip */
  note?: string;
}

export interface MatrixView {
  title: string;
  members: string[];
  rows: MatrixCell[][];
}

const NO_OVERLAP = "no jointly labeled items for this pair";

export function matrixView(
  title: string,
  members: string[],
  values: Cell[][],
  coverage: number[][],
): MatrixView {
  const rows = values.map((row, i) =>
    row.map((value, j) => {
      const covered = (coverage[i]?.[j] ?? 0) > 0;
      if (value === null || !covered) {
        return { value: null, text: formatCell(null), color: heatColor(null), note: NO_OVERLAP };
      }
      return { value, text: formatCell(value), color: heatColor(value) };
    }),
  );
  return { title, members, rows };
}

export interface PerCodeView {
  member: string;
  rows: (PerCodeRow & { precisionText: string; recallText: string })[];
}

export function perCodeViews(report: EvaluationReport): PerCodeView[] {
  const perCode = report.per_code ?? {};
  return Object.keys(perCode)
    .sort()
    .map((member) => ({
      member,
      rows: (perCode[member] ?? []).map((row) => ({
        ...row,
        precisionText: formatCell(row.precision),
        recallText: formatCell(row.recall),
      })),
    }));
}

export interface EvaluationView {
  runsetId: string;
  name: string;
  targetField: string;
  reference: string | null;
  members: string[];
  labeledItems: { member: string; count: number }[];
  agreement: MatrixView;
  kappa: MatrixView;
  perCode: PerCodeView[];
  confusionMembers: string[];
}

export function evaluationView(report: EvaluationReport): EvaluationView {
  return {
    runsetId: report.runset_id,
    name: report.name,
    targetField: report.target_field,
    reference: report.reference,
    members: report.members,
    labeledItems: report.members.map((member) => ({
      member,
      count: report.labeled_items[member] ?? 0,
    })),
    agreement: matrixView("observed agreement", report.members, report.agreement, report.coverage),
    kappa: matrixView("cohen kappa", report.members, report.kappa, report.coverage),
    perCode: perCodeViews(report),
    confusionMembers: Object.keys(report.confusion ?? {}).sort(),
  };
}

export function confusionFor(report: EvaluationReport, member: string): ConfusionDoc | null {
  return report.confusion?.[member] ?? null;
}

/** Relative URL of the CSV export for a download link. */
export function csvHref(runsetId: string, file?: string): string {
  const suffix = file ? `?file=${encodeURIComponent(file)}` : "";
  return `/api/runsets/${encodeURIComponent(runsetId)}/evaluation.csv${suffix}`;
}
