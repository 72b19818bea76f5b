/**
 * Pure HTML renderers for extraction results and errors.
 *
 * Every rendered value is taken verbatim from the result payload (or the
 * input text it indexes into); nothing is synthesized. Overlapping or nested
 * entity spans render as stacked highlights: the text is cut at every span
 * boundary and each segment carries all labels covering it.
 */
import {
  ClassificationOutcome,
  ExtractionResult,
  SpanValue,
  StructureInstance,
} from "./api.js";
import { UiError } from "./state.js";

export function escapeHtml(raw: string): string {
  return raw
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function formatScore(score: number): string {
  return score.toFixed(2);
}

interface FlatSpan {
  label: string;
  span: SpanValue;
}

export function renderHighlights(
  text: string,
  entities: Record<string, SpanValue[]>,
): string {
  const flat: FlatSpan[] = [];
  for (const [label, spans] of Object.entries(entities)) {
    for (const span of spans) {
      flat.push({ label, span });
    }
  }
  if (flat.length === 0) {
    return `<p class="text-plain">${escapeHtml(text)}</p><p class="muted">no entity matches</p>`;
  }

  const cuts = new Set<number>([0, text.length]);
  for (const { span } of flat) {
    cuts.add(span.start);
    cuts.add(span.end);
  }
  const points = [...cuts].sort((a, b) => a - b);

  let html = '<p class="text-annotated">';
  for (let i = 0; i + 1 < points.length; i++) {
    const a = points[i]!;
    const b = points[i + 1]!;
    if (a >= b) continue;
    const covering = flat.filter(({ span }) => span.start <= a && b <= span.end);
    const starting = flat.filter(({ span }) => span.start === a);
    const piece = escapeHtml(text.slice(a, b));
    if (covering.length === 0) {
      html += piece;
      continue;
    }
    const labels = covering.map(({ label }) => label);
    const badges = starting
      .map(
        ({ label, span }) =>
          `<sup class="badge" data-label="${escapeHtml(label)}">${escapeHtml(label)} ${formatScore(span.score)}</sup>`,
      )
      .join("");
    html += `<mark class="hl depth-${Math.min(covering.length, 4)}" data-labels="${escapeHtml(labels.join(","))}">${badges}${piece}</mark>`;
  }
  html += "</p>";
  return html;
}

export function renderClassifications(
  classifications: Record<string, ClassificationOutcome>,
): string {
  let html = "";
  for (const [task, outcome] of Object.entries(classifications)) {
    html += `<section class="cls-task"><h3>${escapeHtml(task)}</h3>`;
    html += '<div class="chips">';
    if (outcome.labels.length === 0) {
      html += '<span class="muted">no label above threshold</span>';
    }
    for (const label of outcome.labels) {
      html += `<span class="chip chosen">${escapeHtml(label)}</span>`;
    }
    html += "</div><div class=\"bars\">";
    for (const [label, p] of Object.entries(outcome.probabilities)) {
      const pct = Math.round(p * 1000) / 10;
      html +=
        `<div class="bar-row"><span class="bar-label">${escapeHtml(label)}</span>` +
        `<div class="bar"><div class="bar-fill" style="width:${pct}%"></div></div>` +
        `<span class="bar-value">${pct.toFixed(1)}%</span></div>`;
    }
    html += "</div></section>";
  }
  return html;
}

function fieldCell(value: SpanValue | SpanValue[]): string {
  const values = Array.isArray(value) ? value : [value];
  return values
    .map(
      (v) =>
        `<span class="field-value" title="chars ${v.start}-${v.end}">${escapeHtml(v.text)}` +
        ` <span class="score">${formatScore(v.score)}</span></span>`,
    )
    .join(" ");
}

export function renderStructures(
  structures: Record<string, StructureInstance[]>,
): string {
  let html = "";
  for (const [name, instances] of Object.entries(structures)) {
    html += `<section class="structure"><h3>${escapeHtml(name)}</h3>`;
    if (instances.length === 0) {
      html += '<p class="muted">no instances found</p></section>';
      continue;
    }
    const fieldNames: string[] = [];
    for (const instance of instances) {
      for (const field of Object.keys(instance)) {
        if (!fieldNames.includes(field)) {
          fieldNames.push(field);
        }
      }
    }
    html += '<table class="instances"><thead><tr><th>#</th>';
    for (const field of fieldNames) {
      html += `<th>${escapeHtml(field)}</th>`;
    }
    html += "</tr></thead><tbody>";
    instances.forEach((instance, i) => {
      html += `<tr class="instance-row"><td>${i + 1}</td>`;
      for (const field of fieldNames) {
        const value = instance[field];
        html += `<td>${value === undefined ? '<span class="muted">—</span>' : fieldCell(value)}</td>`;
      }
      html += "</tr>";
    });
    html += "</tbody></table></section>";
  }
  return html;
}

export function renderResult(text: string, result: ExtractionResult): string {
  let html = "";
  if (result.entities !== undefined) {
    html += `<section class="pane"><h2>Entities</h2>${renderHighlights(text, result.entities)}</section>`;
  }
  if (result.classifications !== undefined) {
    html += `<section class="pane"><h2>Classification</h2>${renderClassifications(result.classifications)}</section>`;
  }
  if (result.structures !== undefined) {
    html += `<section class="pane"><h2>Structures</h2>${renderStructures(result.structures)}</section>`;
  }
  return html || '<p class="muted">the result contains no task sections</p>';
}

export function renderError(error: UiError): string {
  if (error.kind === "client") {
    const items = error.errors
      .map(
        (e) =>
          `<li><code class="err-path">${escapeHtml(e.path || "schema")}</code> ${escapeHtml(e.message)}</li>`,
      )
      .join("");
    return `<div class="banner error client-error"><strong>Fix the schema before submitting:</strong><ul>${items}</ul></div>`;
  }
  if (error.kind === "api") {
    const items = error.violations
      .map(
        (v) =>
          `<li><code class="err-path">${escapeHtml(v.path || "schema")}</code> ${escapeHtml(v.message)}</li>`,
      )
      .join("");
    const hint =
      error.status === 422
        ? '<p class="hint">The composed prompt does not fit the model context: shorten the text or remove schema elements.</p>'
        : "";
    return (
      `<div class="banner error api-error" data-status="${error.status}">` +
      `<strong>${escapeHtml(error.error)} (${error.status})</strong> ` +
      `${escapeHtml(error.message)}${items ? `<ul>${items}</ul>` : ""}${hint}</div>`
    );
  }
  return (
    '<div class="banner error network-error retryable">' +
    `<strong>Request failed:</strong> ${escapeHtml(error.message)} ` +
    "<em>Check that the service is running, then submit again.</em></div>"
  );
}
