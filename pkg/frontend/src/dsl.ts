/**
 * Field DSL parser, mirroring the server grammar exactly.
 *
 *   field_name::type::description          type = "str" | "list"
 *   field_name::[opt1|opt2|...]::type      bracketed segment = choice list
 *
 * Type and choice segments may appear in either order between the name and
 * the description; everything after the last recognized segment is the
 * description, verbatim. The shared golden vectors in
 * ../../tests/data/dsl_golden.json pin this module to the server parser.
 */

export type FieldKind = "str" | "list";

export interface FieldSpec {
  name: string;
  kind: FieldKind;
  description: string | null;
  choices: string[] | null;
}

export type DslErrorKind =
  | "EmptyName"
  | "InvalidName"
  | "UnknownTypeToken"
  | "MalformedChoices";

export class DslError extends Error {
  constructor(readonly kind: DslErrorKind, message: string) {
    super(message);
    this.name = "DslError";
  }
}

const NAME_FORBIDDEN = ["(", ")", "[", "]", "|"];

function isChoiceSegment(seg: string): boolean {
  return seg.length >= 2 && seg.startsWith("[") && seg.endsWith("]");
}

function parseChoices(seg: string): string[] {
  const options = seg
    .slice(1, -1)
    .split("|")
    .map((opt) => opt.trim());
  if (options.length < 2) {
    throw new DslError("MalformedChoices", `choice list ${seg} needs at least two options`);
  }
  if (options.some((opt) => !opt)) {
    throw new DslError("MalformedChoices", `choice list ${seg} contains an empty option`);
  }
  if (new Set(options).size !== options.length) {
    throw new DslError("MalformedChoices", `choice list ${seg} contains duplicate options`);
  }
  return options;
}

export function parseFieldDsl(spec: string): FieldSpec {
  const segments = spec.split("::");
  const name = (segments[0] ?? "").trim();
  if (!name) {
    throw new DslError("EmptyName", `field spec ${JSON.stringify(spec)} has no name`);
  }
  for (const ch of NAME_FORBIDDEN) {
    if (name.includes(ch)) {
      throw new DslError("InvalidName", `field name ${name} contains reserved character ${ch}`);
    }
  }
  if (name.endsWith(":")) {
    throw new DslError("InvalidName", `field name ${name} may not end with ':'`);
  }

  let kind: FieldKind | null = null;
  let choices: string[] | null = null;
  let description: string | null = null;

  let i = 1;
  while (i < segments.length) {
    const seg = (segments[i] ?? "").trim();
    if (isChoiceSegment(seg) && choices === null) {
      choices = parseChoices(seg);
    } else if ((seg === "str" || seg === "list") && kind === null) {
      kind = seg;
    } else {
      for (const later of segments.slice(i + 1)) {
        const l = later.trim();
        if (
          (isChoiceSegment(l) && choices === null) ||
          ((l === "str" || l === "list") && kind === null)
        ) {
          throw new DslError(
            "UnknownTypeToken",
            `segment ${seg} is neither a type, a choice list nor a trailing description`,
          );
        }
      }
      description = segments.slice(i).join("::").trim() || null;
      break;
    }
    i += 1;
  }

  return { name, kind: kind ?? "str", description, choices };
}

export function renderFieldDsl(f: FieldSpec): string {
  const parts = [f.name];
  if (f.choices !== null) {
    parts.push("[" + f.choices.join("|") + "]");
  }
  parts.push(f.kind);
  if (f.description !== null) {
    parts.push(f.description);
  }
  return parts.join("::");
}
