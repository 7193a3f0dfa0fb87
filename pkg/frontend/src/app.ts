/**
 * Dashboard entry point: hash routing plus DOM wiring.
 *
 * All state lives in the models (deid.ts, prompts.ts, labeling.ts,
 * polling.ts); this file only routes, renders and attaches handlers.
 * Configure via window.SANDPIPER = { baseUrl, token } before loading, or
 * localStorage keys sandpiper.baseUrl / sandpiper.token.
 */

import { ApiClient, ApiFailure } from "./api.js";
import { chatRows } from "./chatview.js";
import { DeidReview } from "./deid.js";
import { evaluationView } from "./evaluations.js";
import { escapeHtml } from "./format.js";
import { LabelingPanel, safeToRefresh } from "./labeling.js";
import { RunMonitor } from "./polling.js";
import { PromptEditor } from "./prompts.js";
import {
  renderChatRows,
  renderDeidReview,
  renderEvaluation,
  renderProblems,
  renderRun,
  renderSessionList,
  renderVersionList,
} from "./render.js";
import type { PromptDoc, SessionDoc } from "./types.js";

declare global {
  interface Window {
    SANDPIPER?: { baseUrl?: string; token?: string };
  }
}

function clientFromConfig(): ApiClient {
  const cfg = window.SANDPIPER ?? {};
  return new ApiClient({
    baseUrl: cfg.baseUrl ?? localStorage.getItem("sandpiper.baseUrl") ?? "",
    token: cfg.token ?? localStorage.getItem("sandpiper.token") ?? "",
  });
}

const api = clientFromConfig();
const main = () => document.getElementById("main") as HTMLElement;

let activePanel: LabelingPanel | null = null;
let activeMonitor: RunMonitor | null = null;

function showError(err: unknown): void {
  const message =
    err instanceof ApiFailure ? `${err.code}: ${err.message}` : String(err);
  const box = document.createElement("div");
  box.className = "banner error";
  box.textContent = message;
  main().prepend(box);
}

// -- views ---------------------------------------------------------------

async function viewSessions(): Promise<void> {
  const sessions = await api.listSessions();
  main().innerHTML = `<h2>sessions</h2>` + renderSessionList(sessions as SessionDoc[]);
}

async function viewSession(id: string): Promise<void> {
  const review = new DeidReview(api);
  await review.load(id);
  const view = await api.chatView(id);
  main().innerHTML =
    `<h2>${escapeHtml(view.title)}</h2>` +
    `<div id="deid-box">${renderDeidReview(review)}</div>` +
    `<div id="chat-box">${renderChatRows(chatRows(view))}</div>` +
    `<div id="panel-box"></div>`;

  document.getElementById("deid-approve")?.addEventListener("click", async () => {
    try {
      await review.approve();
      const box = document.getElementById("deid-box");
      if (box) box.innerHTML = renderDeidReview(review);
    } catch (err) {
      showError(err);
    }
  });
  document.getElementById("deid-reject")?.addEventListener("click", async () => {
    try {
      await review.reject();
      const box = document.getElementById("deid-box");
      if (box) box.innerHTML = renderDeidReview(review);
    } catch (err) {
      showError(err);
    }
  });

  for (const el of main().querySelectorAll<HTMLElement>(".utterance")) {
    el.addEventListener("click", () => openLabelingPanel(id, Number(el.dataset.index)));
  }
}

async function openLabelingPanel(sessionId: string, index: number): Promise<void> {
  const prompts = (await api.listPrompts()) as PromptDoc[];
  const latest = prompts[0]?.versions[prompts[0].versions.length - 1];
  if (!prompts[0] || !latest) {
    showError("create a prompt first; the panel needs its schema");
    return;
  }
  const coder = localStorage.getItem("sandpiper.coder") ?? "me";
  activePanel = new LabelingPanel(api, latest.schema, {
    sessionId,
    utteranceIndex: index,
    coderId: coder,
    promptId: prompts[0].id,
    promptVersion: latest.version,
  });

  const fields = latest.schema.fields
    .map(
      (f) =>
        `<label>${escapeHtml(f.name)} <input data-field="${escapeHtml(f.name)}" ` +
        `placeholder="${escapeHtml(f.type)}"></label>`,
    )
    .join("");
  const box = document.getElementById("panel-box");
  if (!box) return;
  box.innerHTML =
    `<div class="panel"><h3>label utterance ${index} as ${escapeHtml(coder)}</h3>` +
    `${fields}<div id="panel-problems"></div><button id="panel-save">save</button></div>`;

  for (const input of box.querySelectorAll<HTMLInputElement>("input[data-field]")) {
    input.addEventListener("input", () => {
      activePanel?.edit(input.dataset.field ?? "", input.value);
      const problems = document.getElementById("panel-problems");
      if (problems && activePanel) problems.innerHTML = renderProblems(activePanel.problems());
    });
  }
  document.getElementById("panel-save")?.addEventListener("click", async () => {
    if (!activePanel) return;
    try {
      const result = await activePanel.submit();
      const problems = document.getElementById("panel-problems");
      if (!result.ok) {
        if (problems) problems.innerHTML = renderProblems(result.problems);
        return;
      }
      activePanel = null;
      await viewSession(sessionId); // re-render with the new chip
    } catch (err) {
      showError(err);
    }
  });
}

async function viewPrompt(id: string): Promise<void> {
  const editor = new PromptEditor(api);
  await editor.load(id);
  main().innerHTML =
    `<h2>prompt ${escapeHtml(id)}</h2>` +
    renderVersionList(editor.versions) +
    `<p class="hint">saved versions are immutable; editing creates the next version</p>`;
}

async function viewRuns(): Promise<void> {
  const runs = await api.listRuns();
  main().innerHTML = `<h2>runs</h2>` + runs.map((r) => renderRun(r)).join("");
  activeMonitor?.stop();
  const active = runs.find((r) => r.state === "queued" || r.state === "running");
  if (active) {
    activeMonitor = new RunMonitor(api, active.id, {
      onUpdate: (doc, displayed) => {
        if (!safeToRefresh(activePanel)) return; // never clobber label edits
        const el = document.querySelector(`[data-run="${CSS.escape(doc.id)}"]`);
        if (el) el.outerHTML = renderRun(doc, displayed);
      },
    });
    activeMonitor.start();
  }
}

async function viewRunset(id: string): Promise<void> {
  const report = await api.evaluation(id);
  main().innerHTML = renderEvaluation(evaluationView(report));
}

// -- router -----------------------------------------------------------------

async function route(): Promise<void> {
  activeMonitor?.stop();
  const hash = location.hash.replace(/^#\/?/, "");
  const [head, id] = hash.split("/");
  try {
    if (head === "sessions" && id) await viewSession(id);
    else if (head === "prompts" && id) await viewPrompt(id);
    else if (head === "runs") await viewRuns();
    else if (head === "runsets" && id) await viewRunset(id);
    else await viewSessions();
  } catch (err) {
    main().innerHTML = "";
    showError(err);
  }
}

window.addEventListener("hashchange", () => void route());
window.addEventListener("DOMContentLoaded", () => void route());
