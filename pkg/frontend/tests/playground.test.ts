/**
 * Contract tests against a stub server replaying recorded /extract fixtures
 * captured from the real service with the overfit desk model.
 */
import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { ApiError, ExtractClient, ExtractionResult, SpanValue } from "../src/api.js";
import { renderError, renderHighlights, renderResult, renderStructures } from "../src/render.js";
import { PlaygroundStore } from "../src/state.js";

interface Fixture {
  status: number;
  body: any;
}

function loadFixture(name: string): Fixture {
  return JSON.parse(
    readFileSync(new URL(`./fixtures/${name}.json`, import.meta.url), "utf-8"),
  );
}

function stubClient(fixture: Fixture): ExtractClient {
  const fetchFn = async () =>
    new Response(JSON.stringify(fixture.body), {
      status: fixture.status,
      headers: { "content-type": "application/json" },
    });
  return new ExtractClient("", fetchFn);
}

const WORKED_TEXT = "iPhone costs $999. Galaxy is $899.";

describe("worked example via stub server", () => {
  it("renders two structure instance rows with the recorded values", async () => {
    const fixture = loadFixture("extract_product");
    const store = new PlaygroundStore(stubClient(fixture));
    store.state.tab = "structures";
    store.state.text = WORKED_TEXT;
    store.state.draft.structures = [{ name: "product", fields: ["name", "price"] }];

    await store.submit();
    expect(store.state.error).toBeNull();
    const html = renderResult(store.state.text, store.state.result!);

    expect(html.match(/class="instance-row"/g)).toHaveLength(2);
    for (const value of ["iPhone", "$999", "Galaxy", "$899"]) {
      expect(html).toContain(value);
    }
  });

  it("never invents span values: every rendered text is in the payload", async () => {
    const fixture = loadFixture("extract_product");
    const result = fixture.body as ExtractionResult;
    const html = renderStructures(result.structures!);
    const rendered = [...html.matchAll(/<span class="field-value"[^>]*>([^<]*)</g)].map(
      (m) => m[1]!.trim(),
    );
    const payloadTexts = new Set<string>();
    for (const instances of Object.values(result.structures!)) {
      for (const instance of instances) {
        for (const value of Object.values(instance)) {
          for (const v of Array.isArray(value) ? value : [value]) {
            payloadTexts.add(v.text);
          }
        }
      }
    }
    expect(rendered.length).toBeGreaterThan(0);
    for (const text of rendered) {
      expect(payloadTexts.has(text)).toBe(true);
    }
  });
});

describe("schema error via stub server", () => {
  it("surfaces a 400 as an inline error with violation paths", async () => {
    const fixture = loadFixture("extract_schema_error");
    const store = new PlaygroundStore(stubClient(fixture));
    store.state.tab = "classification";
    store.state.text = "x";
    store.state.draft.classifications = [
      {
        task: "sentiment",
        labels: [
          { label: "a", description: "" },
          { label: "b", description: "" },
        ],
        multiLabel: false,
        threshold: 0.5,
      },
      {
        task: "sentiment",
        labels: [
          { label: "x", description: "" },
          { label: "y", description: "" },
        ],
        multiLabel: false,
        threshold: 0.5,
      },
    ];

    await store.submit();
    expect(store.state.result).toBeNull();
    expect(store.state.error?.kind).toBe("api");
    const html = renderError(store.state.error!);
    expect(html).toContain("SchemaInvalid");
    expect(html).toContain("data-status=\"400\"");
    expect(html).toContain("duplicate task name");
  });

  it("gives an actionable hint on context overflow", () => {
    const html = renderError({
      kind: "api",
      status: 422,
      error: "ContextOverflow",
      message: "sequence needs 700 tokens but the limit is 512",
      violations: [],
    });
    expect(html).toContain("shorten the text");
  });

  it("marks network failures as retryable", () => {
    const html = renderError({ kind: "network", message: "fetch failed" });
    expect(html).toContain("retryable");
    expect(html).toContain("submit again");
  });
});

describe("composed fixture", () => {
  it("renders entity badges and classification bars from one response", async () => {
    const fixture = loadFixture("extract_composed");
    const store = new PlaygroundStore(stubClient(fixture));
    store.state.tab = "all";
    store.state.text = "Steve Jobs loved the iPhone";
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

    await store.submit();
    const html = renderResult(store.state.text, store.state.result!);
    expect(html).toContain("Steve Jobs");
    expect(html).toContain('class="chip chosen"');
    expect(html).toContain("positive");
    expect(html).toContain("bar-fill");
  });
});

describe("overlapping spans", () => {
  it("stacks overlapping highlights so both stay visible", () => {
    const text = "Steve Jobs loved it";
    const entities: Record<string, SpanValue[]> = {
      person: [{ text: "Steve Jobs", start: 0, end: 10, score: 0.99 }],
      founder: [{ text: "Jobs loved", start: 6, end: 16, score: 0.8 }],
    };
    const html = renderHighlights(text, entities);
    expect(html).toContain('data-labels="person,founder"'); // shared segment
    expect(html).toContain("person 0.99");
    expect(html).toContain("founder 0.80");
    const withoutBadges = html.replace(/<sup class="badge"[^>]*>[^<]*<\/sup>/g, "");
    const flat = withoutBadges.replace(/<[^>]+>/g, "");
    expect(flat).toBe("Steve Jobs loved it"); // source text preserved verbatim
  });

  it("escapes markup in the input text", () => {
    const html = renderHighlights("<script>alert(1)</script>", {});
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
  });
});
