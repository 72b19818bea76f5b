/**
 * Playground view state and the submit flow.
 *
 * Exactly one request is in flight at a time: resubmitting aborts the
 * previous request, and responses that arrive for a superseded request id
 * are discarded even if the server ignored the abort.
 */
import { ApiError, ExtractClient, ExtractionResult, Violation } from "./api.js";
import { BuildOutcome, DraftError, SchemaDraft, TabId, buildSchemaDoc, emptyDraft } from "./schema.js";

export type UiError =
  | { kind: "client"; errors: DraftError[] }
  | { kind: "api"; status: number; error: string; message: string; violations: Violation[] }
  | { kind: "network"; message: string };

export interface ViewState {
  draft: SchemaDraft;
  tab: TabId;
  text: string;
  result: ExtractionResult | null;
  error: UiError | null;
  inFlight: boolean;
}

export class PlaygroundStore {
  readonly state: ViewState;
  private seq = 0;
  private controller: AbortController | null = null;
  private listeners: Array<() => void> = [];

  constructor(private readonly client: ExtractClient) {
    this.state = {
      draft: emptyDraft(),
      tab: "entities",
      text: "",
      result: null,
      error: null,
      inFlight: false,
    };
  }

  subscribe(listener: () => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) {
      listener();
    }
  }

  update(mutate: (state: ViewState) => void): void {
    mutate(this.state);
    this.emit();
  }

  buildDoc(): BuildOutcome {
    return buildSchemaDoc(this.state.draft, this.state.tab);
  }

  async submit(): Promise<void> {
    const built = this.buildDoc();
    if (!built.ok) {
      this.state.error = { kind: "client", errors: built.errors };
      this.state.result = null;
      this.emit();
      return;
    }

    const id = ++this.seq;
    this.controller?.abort();
    const controller = new AbortController();
    this.controller = controller;
    this.state.inFlight = true;
    this.state.error = null;
    this.emit();

    try {
      const result = await this.client.extract(
        built.doc,
        this.state.text,
        undefined,
        controller.signal,
      );
      if (id !== this.seq) {
        return; // stale response: a newer request superseded this one
      }
      this.state.result = result;
      this.state.error = null;
    } catch (e) {
      if (id !== this.seq) {
        return; // stale failure (incl. our own abort): discard silently
      }
      if (e instanceof ApiError) {
        this.state.error = {
          kind: "api",
          status: e.status,
          error: e.kind,
          message: e.message,
          violations: e.violations,
        };
      } else if ((e as Error | null)?.name === "AbortError") {
        return;
      } else {
        this.state.error = { kind: "network", message: String(e) };
      }
      this.state.result = null;
    } finally {
      if (id === this.seq) {
        this.state.inFlight = false;
        this.emit();
      }
    }
  }
}
