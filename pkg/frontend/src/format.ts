/**
 * Number and cell formatting shared by every view.
 *
 * Matrix cells show exactly three decimals so what the researcher reads
 * equals the API value at that precision; absent values (a pair with no
 * jointly labeled items) render as an em dash, never as 0.
 */

export const MISSING = "—";

export function formatCell(v: number | null): string {
  if (v === null) return MISSING;
  return v.toFixed(3);
}

export function formatCount(n: number): string {
  return String(n);
}

/** Background for heat tables: deep red at -1 through white at 0 to deep
 * green at 1. Missing cells get no color at all. */
export function heatColor(v: number | null): string {
  if (v === null) return "transparent";
  const clamped = Math.max(-1, Math.min(1, v));
  const strength = Math.round(Math.abs(clamped) * 40); // 0..40% mix
  return clamped >= 0
    ? `color-mix(in srgb, #1a7f37 ${strength}%, white)`
    : `color-mix(in srgb, #b42318 ${strength}%, white)`;
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/** Compact one-line rendering of a label document for chips. */
export function compactDocument(doc: Record<string, unknown>): string {
  return Object.entries(doc)
    .map(([k, v]) => `${k}=${typeof v === "string" ? v : JSON.stringify(v)}`)
    .join(" ");
}
