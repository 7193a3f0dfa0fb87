/**
 * HTML-string renderers for every view. No framework; each function maps a
 * view model to markup, and app.ts swaps it into the page. All dynamic text
 * passes through escapeHtml.
 */

import type { ChatRow } from "./chatview.js";
import type { DeidReview } from "./deid.js";
import type { EvaluationView, MatrixView, PerCodeView } from "./evaluations.js";
import { csvHref } from "./evaluations.js";
import { escapeHtml, formatCount } from "./format.js";
import type { SchemaProblem, Violation } from "./schema.js";
import type { ConfusionDoc, PromptVersionDoc, RunDoc, SessionDoc } from "./types.js";

const esc = escapeHtml;

export function renderStatusChip(status: string): string {
  return `<span class="chip status-${esc(status)}" data-status="${esc(status)}">${esc(status)}</span>`;
}

// -- evaluations ---------------------------------------------------------------

export function renderMatrix(view: MatrixView): string {
  const head = view.members.map((m) => `<th scope="col">${esc(m)}</th>`).join("");
  const body = view.rows
    .map((row, i) => {
      const cells = row
        .map((cell) => {
          const title = cell.note ? ` title="${esc(cell.note)}"` : "";
          return `<td class="cell" style="background:${cell.color}"${title}>${esc(cell.text)}</td>`;
        })
        .join("");
      return `<tr><th scope="row">${esc(view.members[i] ?? "")}</th>${cells}</tr>`;
    })
    .join("");
  return (
    `<table class="heat"><caption>${esc(view.title)}</caption>` +
    `<thead><tr><th></th>${head}</tr></thead><tbody>${body}</tbody></table>`
  );
}

export function renderPerCode(views: PerCodeView[]): string {
  if (views.length === 0) return "";
  const rows = views
    .flatMap((v) =>
      v.rows.map(
        (r) =>
          `<tr><td>${esc(v.member)}</td><td>${esc(r.code)}</td>` +
          `<td>${r.precisionText}</td><td>${r.recallText}</td>` +
          `<td>${formatCount(r.support)}</td></tr>`,
      ),
    )
    .join("");
  return (
    `<table class="percode"><caption>per-code precision and recall vs reference</caption>` +
    `<thead><tr><th>member</th><th>code</th><th>precision</th><th>recall</th><th>support</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}

export function renderConfusion(member: string, confusion: ConfusionDoc): string {
  const head = confusion.codes.map((c) => `<th scope="col">${esc(c)}</th>`).join("");
  const body = confusion.counts
    .map((row, i) => {
      const cells = row.map((n) => `<td>${formatCount(n)}</td>`).join("");
      return `<tr><th scope="row">${esc(confusion.codes[i] ?? "")}</th>${cells}</tr>`;
    })
    .join("");
  return (
    `<table class="confusion"><caption>confusion: ${esc(member)} (rows = reference)</caption>` +
    `<thead><tr><th></th>${head}</tr></thead><tbody>${body}</tbody></table>`
  );
}

export function renderEvaluation(view: EvaluationView): string {
  const coverage = view.labeledItems
    .map((x) => `<li>${esc(x.member)}: ${formatCount(x.count)} labeled items</li>`)
    .join("");
  return (
    `<section class="evaluation">` +
    `<h2>${esc(view.name)} <small>target field: ${esc(view.targetField)}</small></h2>` +
    `<ul class="coverage">${coverage}</ul>` +
    renderMatrix(view.agreement) +
    renderMatrix(view.kappa) +
    renderPerCode(view.perCode) +
    `<p><a class="csv" href="${esc(csvHref(view.runsetId))}" download>download CSV</a></p>` +
    `</section>`
  );
}

// -- chat view -------------------------------------------------------------------

export function renderChatRows(rows: ChatRow[]): string {
  const body = rows
    .map((row) => {
      const chips = row.chips
        .map((chip) =>
          chip.document
            ? `<span class="chip label" data-source="${esc(chip.source)}">${esc(chip.text)}</span>`
            : `<span class="chip empty" data-source="${esc(chip.source)}"></span>`,
        )
        .join("");
      const ts = row.timestamp ? `<time>${esc(row.timestamp)}</time>` : "";
      return (
        `<div class="utterance" data-index="${row.index}">` +
        `<div class="meta"><b>${esc(row.speaker)}</b>${ts}</div>` +
        `<div class="text">${esc(row.text)}</div>` +
        `<div class="chips">${chips}</div></div>`
      );
    })
    .join("");
  return `<div class="chatview">${body}</div>`;
}

// -- de-identification review ------------------------------------------------------

export function renderDeidReview(review: DeidReview): string {
  if (!review.session) return `<p class="empty">no session loaded</p>`;
  if (review.needsMasking) {
    return (
      `<div class="deid">${renderStatusChip(review.status)}` +
      `<p class="hint">this transcript is raw; run masking before review</p></div>`
    );
  }
  const warnings = review.warnings
    .map((w) => `<li>${esc(w.category)} at ${esc(w.location)}</li>`)
    .join("");
  const banner = review.warnings.length
    ? `<div class="banner warn"><b>possible residual identifiers</b><ul>${warnings}</ul></div>`
    : `<div class="banner ok">no residual identifiers detected</div>`;
  const approveAttr = review.canApprove ? "" : " disabled";
  const rejectAttr = review.canReject ? "" : " disabled";
  return (
    `<div class="deid">${renderStatusChip(review.status)}${banner}` +
    `<button id="deid-approve"${approveAttr}>approve</button>` +
    `<button id="deid-reject"${rejectAttr}>reject</button></div>`
  );
}

// -- runs ----------------------------------------------------------------------------

export function renderRun(doc: RunDoc, displayed?: { succeeded: number; failed_items: number; total_items: number }): string {
  const counts = displayed ?? doc.counts;
  const done = counts.succeeded + counts.failed_items;
  return (
    `<div class="run" data-run="${esc(doc.id)}">` +
    `<b>${esc(doc.id)}</b> ${renderStatusChip(doc.state)} ` +
    `<span class="progress">${done}/${counts.total_items} items, ` +
    `${counts.failed_items} failed</span> <span class="model">${esc(doc.model_id)}</span></div>`
  );
}

// -- prompts ----------------------------------------------------------------------------

export function renderVersionList(versions: PromptVersionDoc[]): string {
  const items = versions
    .map((v) => {
      const frozen = v.frozen ? ` <span class="chip frozen">frozen</span>` : "";
      return (
        `<li data-version="${v.version}">v${v.version}${frozen} ` +
        `<small>${esc(v.created_at)}</small></li>`
      );
    })
    .join("");
  return `<ol class="versions">${items}</ol>`;
}

export function renderProblems(problems: (Violation | SchemaProblem)[]): string {
  if (problems.length === 0) return "";
  const items = problems
    .map((p) => `<li data-path="${esc(p.path)}">${esc(p.path || "(document)")}: ${esc(p.message)}</li>`)
    .join("");
  return `<ul class="problems">${items}</ul>`;
}

// -- sessions -----------------------------------------------------------------------------

export function renderSessionList(sessions: SessionDoc[]): string {
  const items = sessions
    .map(
      (s) =>
        `<li data-session="${esc(s.id)}"><a href="#/sessions/${esc(s.id)}">${esc(s.title)}</a> ` +
        `${renderStatusChip(s.deid_status)} <small>${s.utterances.length} utterances</small></li>`,
    )
    .join("");
  return `<ul class="sessions">${items}</ul>`;
}
