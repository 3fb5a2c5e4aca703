import { LabelDocument } from "../src/types.js";

export function gradeELabel(): LabelDocument {
  return {
    service: { id: "yt", name: "VideoSite" },
    grade: "E",
    generated_at: "2025-01-01T00:00:00Z",
    groups: {
      blocker: [
        {
          case_id: "c-sold",
          title: "Your address book is sold to data brokers",
          rating: "blocker",
          evidence: [
            {
              segment_index: 4,
              text: "We may share your contacts with partners.",
              probability: 0.87,
              probability_percent: 87,
              match_id: "m-blocker-1",
              feedback: { up: 2, down: 0 },
            },
          ],
        },
      ],
      bad: [],
      neutral: [],
      good: [
        {
          case_id: "c-good",
          title: "Two-factor authentication is available",
          rating: "good",
          evidence: [
            {
              segment_index: 9,
              text: "Enable 2FA from the settings page.",
              probability: 0.61,
              probability_percent: 61,
              match_id: "m-good-1",
              feedback: { up: 0, down: 0 },
            },
            {
              segment_index: 2,
              text: "Security keys are supported.",
              probability: 0.55,
              probability_percent: 55,
              match_id: "m-good-2",
              feedback: { up: 0, down: 1 },
            },
          ],
        },
      ],
    },
  };
}

export function ungradedLabel(): LabelDocument {
  return {
    service: { id: "quiet" },
    grade: "Ungraded",
    generated_at: "2025-01-01T00:00:00Z",
    groups: { blocker: [], bad: [], neutral: [], good: [] },
  };
}

export function okJson(payload: unknown): Response {
  return new Response(JSON.stringify(payload), {
    status: 200,
    headers: { "Content-Type": "application/json" },
  });
}

export function errorJson(status: number, detail: string): Response {
  return new Response(JSON.stringify({ error: "err", detail }), { status });
}
