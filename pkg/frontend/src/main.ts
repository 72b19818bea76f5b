/** DOM wiring: tabs, schema editors, submit flow and result panes. */
import { ExtractClient } from "./api.js";
import { renderError, renderResult } from "./render.js";
import { PlaygroundStore } from "./state.js";
import { TabId } from "./schema.js";

const TABS: Array<{ id: TabId; title: string }> = [
  { id: "entities", title: "Entities" },
  { id: "classification", title: "Classification" },
  { id: "structures", title: "Structures" },
  { id: "all", title: "All tasks" },
];

const store = new PlaygroundStore(new ExtractClient(""));

// Seed the editors with a ready-to-run example of each capability.
store.state.tab = "structures";
store.state.text = "iPhone costs $999. Galaxy is $899.";
store.state.draft.entities = [
  { label: "person", description: "" },
  { label: "product", description: "" },
];
store.state.draft.classifications = [
  {
    task: "sentiment",
    labels: [
      { label: "positive", description: "" },
      { label: "negative", description: "" },
      { label: "neutral", description: "" },
    ],
    multiLabel: false,
    threshold: 0.5,
  },
];
store.state.draft.structures = [{ name: "product", fields: ["name", "price"] }];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function entityEditor(): string {
  const rows = store.state.draft.entities
    .map(
      (e, i) => `
      <div class="row" data-kind="entity" data-index="${i}">
        <input class="grow" data-bind="entities.${i}.label" placeholder="entity type, e.g. person" value="${escapeAttr(e.label)}">
        <input class="grow2" data-bind="entities.${i}.description" placeholder="optional description" value="${escapeAttr(e.description)}">
        <button type="button" data-action="remove-entity" data-index="${i}">✕</button>
      </div>`,
    )
    .join("");
  return `<h2>Entity types</h2>${rows}
    <button type="button" data-action="add-entity">+ add entity type</button>`;
}

function classificationEditor(): string {
  const tasks = store.state.draft.classifications
    .map((c, i) => {
      const labels = c.labels
        .map(
          (lab, j) => `
          <div class="row">
            <input class="grow" data-bind="classifications.${i}.labels.${j}.label" placeholder="label" value="${escapeAttr(lab.label)}">
            <input class="grow2" data-bind="classifications.${i}.labels.${j}.description" placeholder="optional description" value="${escapeAttr(lab.description)}">
            <button type="button" data-action="remove-label" data-index="${i}" data-label-index="${j}">✕</button>
          </div>`,
        )
        .join("");
      return `
      <fieldset data-kind="classification" data-index="${i}">
        <div class="row">
          <input class="grow" data-bind="classifications.${i}.task" placeholder="task name, e.g. sentiment" value="${escapeAttr(c.task)}">
          <label><input type="checkbox" data-bind="classifications.${i}.multiLabel" ${c.multiLabel ? "checked" : ""}> multi-label</label>
          <label>threshold <input type="number" min="0" max="1" step="0.05" data-bind="classifications.${i}.threshold" value="${c.threshold}"></label>
          <button type="button" data-action="remove-classification" data-index="${i}">✕ task</button>
        </div>
        ${labels}
        <button type="button" data-action="add-label" data-index="${i}">+ add label</button>
      </fieldset>`;
    })
    .join("");
  return `<h2>Classification tasks</h2>${tasks}
    <button type="button" data-action="add-classification">+ add task</button>`;
}

function structureEditor(): string {
  const structures = store.state.draft.structures
    .map((s, i) => {
      const fields = s.fields
        .map(
          (f, j) => `
          <div class="row">
            <input class="grow2 mono" data-bind="structures.${i}.fields.${j}" placeholder="field DSL, e.g. price::str::amount paid" value="${escapeAttr(f)}">
            <button type="button" data-action="remove-field" data-index="${i}" data-field-index="${j}">✕</button>
          </div>`,
        )
        .join("");
      return `
      <fieldset data-kind="structure" data-index="${i}">
        <div class="row">
          <input class="grow" data-bind="structures.${i}.name" placeholder="structure name, e.g. product" value="${escapeAttr(s.name)}">
          <button type="button" data-action="remove-structure" data-index="${i}">✕ structure</button>
        </div>
        ${fields}
        <button type="button" data-action="add-field" data-index="${i}">+ add field</button>
      </fieldset>`;
    })
    .join("");
  return `<h2>Structures</h2>${structures}
    <button type="button" data-action="add-structure">+ add structure</button>`;
}

function escapeAttr(raw: string): string {
  return raw.replace(/&/g, "&amp;").replace(/"/g, "&quot;").replace(/</g, "&lt;");
}

function renderEditors(): void {
  const tab = store.state.tab;
  let html = "";
  if (tab === "entities" || tab === "all") html += entityEditor();
  if (tab === "classification" || tab === "all") html += classificationEditor();
  if (tab === "structures" || tab === "all") html += structureEditor();
  el("editors").innerHTML = html;
}

function renderTabs(): void {
  el("tabs").innerHTML = TABS.map(
    (t) =>
      `<button type="button" class="tab ${t.id === store.state.tab ? "active" : ""}" data-tab="${t.id}">${t.title}</button>`,
  ).join("");
}

function renderOutput(): void {
  const { result, error, text, inFlight } = store.state;
  const submit = el<HTMLButtonElement>("submit");
  submit.disabled = inFlight;
  submit.textContent = inFlight ? "extracting…" : "Extract";
  const pane = el("output");
  if (error) {
    pane.innerHTML = renderError(error);
  } else if (result) {
    pane.innerHTML = renderResult(text, result);
  } else {
    pane.innerHTML = '<p class="muted">submit a schema to see results</p>';
  }
}

function applyBinding(target: HTMLInputElement): void {
  const path = target.dataset.bind;
  if (!path) return;
  const parts = path.split(".");
  let node: any = store.state.draft;
  for (const part of parts.slice(0, -1)) {
    node = node[/^\d+$/.test(part) ? Number(part) : part];
  }
  const leaf = parts[parts.length - 1]!;
  const key = /^\d+$/.test(leaf) ? Number(leaf) : leaf;
  if (target.type === "checkbox") {
    node[key] = target.checked;
  } else if (target.type === "number") {
    node[key] = Number(target.value);
  } else {
    node[key] = target.value;
  }
}

function handleAction(action: string, dataset: DOMStringMap): void {
  const draft = store.state.draft;
  const i = Number(dataset.index ?? -1);
  switch (action) {
    case "add-entity":
      draft.entities.push({ label: "", description: "" });
      break;
    case "remove-entity":
      draft.entities.splice(i, 1);
      break;
    case "add-classification":
      draft.classifications.push({
        task: "",
        labels: [
          { label: "", description: "" },
          { label: "", description: "" },
        ],
        multiLabel: false,
        threshold: 0.5,
      });
      break;
    case "remove-classification":
      draft.classifications.splice(i, 1);
      break;
    case "add-label":
      draft.classifications[i]?.labels.push({ label: "", description: "" });
      break;
    case "remove-label":
      draft.classifications[i]?.labels.splice(Number(dataset.labelIndex), 1);
      break;
    case "add-structure":
      draft.structures.push({ name: "", fields: [""] });
      break;
    case "remove-structure":
      draft.structures.splice(i, 1);
      break;
    case "add-field":
      draft.structures[i]?.fields.push("");
      break;
    case "remove-field":
      draft.structures[i]?.fields.splice(Number(dataset.fieldIndex), 1);
      break;
    default:
      return;
  }
  renderEditors();
}

function init(): void {
  renderTabs();
  renderEditors();
  renderOutput();
  el<HTMLTextAreaElement>("text").value = store.state.text;

  el("tabs").addEventListener("click", (ev) => {
    const target = (ev.target as HTMLElement).closest<HTMLElement>("[data-tab]");
    if (!target) return;
    store.state.tab = target.dataset.tab as TabId;
    renderTabs();
    renderEditors();
  });

  el("editors").addEventListener("input", (ev) => {
    applyBinding(ev.target as HTMLInputElement);
  });
  el("editors").addEventListener("click", (ev) => {
    const target = (ev.target as HTMLElement).closest<HTMLElement>("[data-action]");
    if (target?.dataset.action) {
      handleAction(target.dataset.action, target.dataset);
    }
  });

  el<HTMLTextAreaElement>("text").addEventListener("input", (ev) => {
    store.state.text = (ev.target as HTMLTextAreaElement).value;
  });

  el("submit").addEventListener("click", () => {
    void store.submit();
  });

  store.subscribe(renderOutput);

  new ExtractClient("")
    .health()
    .then((h) => {
      el("health").textContent = `model ${h.model_id.slice(0, 12)} ready`;
    })
    .catch(() => {
      el("health").textContent = "service unreachable";
    });
}

document.addEventListener("DOMContentLoaded", init);
