/**
 * Schema drafts (what the editors hold) and their serialization to the
 * service's schema JSON document. Field DSL strings are validated
 * client-side with the same grammar the server applies, so malformed fields
 * never leave the browser.
 */
import { DslError, parseFieldDsl } from "./dsl.js";

export interface EntityDraft {
  label: string;
  description: string;
}

export interface LabelDraft {
  label: string;
  description: string;
}

export interface ClassificationDraft {
  task: string;
  labels: LabelDraft[];
  multiLabel: boolean;
  threshold: number;
}

export interface StructureDraft {
  name: string;
  fields: string[]; // DSL strings
}

export interface SchemaDraft {
  entities: EntityDraft[];
  classifications: ClassificationDraft[];
  structures: StructureDraft[];
}

export type TabId = "entities" | "classification" | "structures" | "all";

export interface DraftError {
  path: string;
  message: string;
}

export type BuildOutcome =
  | { ok: true; doc: Record<string, unknown> }
  | { ok: false; errors: DraftError[] };

export function emptyDraft(): SchemaDraft {
  return { entities: [], classifications: [], structures: [] };
}

/** Serialize the draft to a schema document, honoring the active tab. */
export function buildSchemaDoc(draft: SchemaDraft, tab: TabId): BuildOutcome {
  const errors: DraftError[] = [];
  const doc: Record<string, unknown> = { version: 1 };

  const wantEntities = tab === "entities" || tab === "all";
  const wantClassifications = tab === "classification" || tab === "all";
  const wantStructures = tab === "structures" || tab === "all";

  const entities = draft.entities.filter((e) => e.label.trim());
  if (wantEntities && entities.length > 0) {
    const map: Record<string, string | null> = {};
    entities.forEach((e, i) => {
      const label = e.label.trim();
      if (label in map) {
        errors.push({ path: `entities[${i}]`, message: `duplicate entity label '${label}'` });
      }
      map[label] = e.description.trim() || null;
    });
    doc.entities = map;
  }

  const classifications = draft.classifications.filter((c) => c.task.trim());
  if (wantClassifications && classifications.length > 0) {
    doc.classifications = classifications.map((c, i) => {
      const labels: Record<string, string | null> = {};
      for (const lab of c.labels) {
        if (lab.label.trim()) {
          labels[lab.label.trim()] = lab.description.trim() || null;
        }
      }
      if (Object.keys(labels).length < 2) {
        errors.push({
          path: `classifications[${i}]`,
          message: "a classification task needs at least two labels",
        });
      }
      if (!(c.threshold >= 0 && c.threshold <= 1)) {
        errors.push({
          path: `classifications[${i}]`,
          message: "threshold must be between 0 and 1",
        });
      }
      return {
        task: c.task.trim(),
        labels,
        multi_label: c.multiLabel,
        threshold: c.threshold,
      };
    });
  }

  const structures = draft.structures.filter((s) => s.name.trim());
  if (wantStructures && structures.length > 0) {
    doc.structures = structures.map((s, i) => {
      const fields = s.fields.map((f) => f.trim()).filter((f) => f);
      if (fields.length === 0) {
        errors.push({ path: `structures[${i}]`, message: "a structure needs at least one field" });
      }
      fields.forEach((f, j) => {
        try {
          parseFieldDsl(f);
        } catch (e) {
          if (e instanceof DslError) {
            errors.push({ path: `structures[${i}].fields[${j}]`, message: `${e.kind}: ${e.message}` });
          } else {
            throw e;
          }
        }
      });
      return { name: s.name.trim(), fields };
    });
  }

  if (!("entities" in doc) && !("classifications" in doc) && !("structures" in doc)) {
    errors.push({ path: "", message: "the schema declares no task on this tab" });
  }

  if (errors.length > 0) {
    return { ok: false, errors };
  }
  return { ok: true, doc };
}
