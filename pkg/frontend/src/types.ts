export type Rating = "blocker" | "bad" | "neutral" | "good";
export type GradeValue = "A" | "B" | "C" | "D" | "E" | "Ungraded";

export const RATING_ORDER: Rating[] = ["blocker", "bad", "neutral", "good"];

export const RATING_COLORS: Record<Rating, string> = {
  blocker: "red",
  bad: "yellow",
  neutral: "grey",
  good: "green",
};

export interface Evidence {
  segment_index: number;
  text: string;
  probability: number;
  match_id: string;
  // present on served labels, derived locally for freshly analyzed ones
  probability_percent?: number;
  feedback?: { up: number; down: number };
}

export interface CaseEntry {
  case_id: string;
  title: string;
  rating: Rating;
  evidence: Evidence[];
}

export interface LabelDocument {
  service: { id: string; name?: string };
  grade: GradeValue;
  generated_at: string;
  groups: Record<Rating, CaseEntry[]>;
}

export class SchemaError extends Error {
  constructor(public problems: string[]) {
    super(`label document failed validation: ${problems.join("; ")}`);
  }
}

const GRADES = new Set(["A", "B", "C", "D", "E", "Ungraded"]);

/** Structural validation mirroring the server's published label schema.
 *  Anything invalid raises; the UI never partially renders a bad payload. */
export function validateLabel(payload: unknown): LabelDocument {
  const problems: string[] = [];
  const doc = payload as LabelDocument;
  if (typeof payload !== "object" || payload === null) {
    throw new SchemaError(["payload is not an object"]);
  }
  if (typeof doc.service !== "object" || doc.service === null || typeof doc.service.id !== "string") {
    problems.push("service.id missing");
  }
  if (!GRADES.has(doc.grade as string)) {
    problems.push(`grade ${JSON.stringify(doc.grade)} invalid`);
  }
  if (typeof doc.generated_at !== "string") {
    problems.push("generated_at missing");
  }
  if (typeof doc.groups !== "object" || doc.groups === null) {
    problems.push("groups missing");
  } else {
    for (const rating of RATING_ORDER) {
      const group = doc.groups[rating];
      if (!Array.isArray(group)) {
        problems.push(`groups.${rating} missing`);
        continue;
      }
      group.forEach((entry, i) => {
        if (typeof entry.case_id !== "string" || typeof entry.title !== "string") {
          problems.push(`groups.${rating}[${i}] malformed`);
        }
        if (!Array.isArray(entry.evidence)) {
          problems.push(`groups.${rating}[${i}].evidence missing`);
          return;
        }
        entry.evidence.forEach((ev, j) => {
          if (
            typeof ev.match_id !== "string" ||
            typeof ev.text !== "string" ||
            typeof ev.probability !== "number" ||
            ev.probability < 0 ||
            ev.probability > 1 ||
            typeof ev.segment_index !== "number"
          ) {
            problems.push(`groups.${rating}[${i}].evidence[${j}] malformed`);
          }
        });
      });
    }
  }
  if (problems.length > 0) {
    throw new SchemaError(problems);
  }
  return doc;
}

export function formatPercent(probability: number): string {
  return `${Math.round(probability * 100)}%`;
}
