import { LabelDocument, validateLabel } from "./types.js";
import { Vote } from "./state.js";

declare global {
  interface Window {
    POLICYLABEL_API_BASE?: string;
  }
}

function apiBase(): string {
  return (typeof window !== "undefined" && window.POLICYLABEL_API_BASE) || "";
}

const CLIENT_ID_KEY = "policylabel.client_id";

/** Anonymous, browser-local identity; no accounts. */
export function clientId(): string {
  let id = localStorage.getItem(CLIENT_ID_KEY);
  if (!id) {
    id =
      typeof crypto !== "undefined" && "randomUUID" in crypto
        ? crypto.randomUUID()
        : `c-${Date.now()}-${Math.random().toString(36).slice(2)}`;
    localStorage.setItem(CLIENT_ID_KEY, id);
  }
  return id;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`${status}: ${detail}`);
  }
}

async function jsonOrError(response: Response): Promise<unknown> {
  const payload = await response.json().catch(() => ({}));
  if (!response.ok) {
    const detail =
      (payload as { detail?: string }).detail ?? response.statusText;
    throw new ApiError(response.status, detail);
  }
  return payload;
}

export async function getLabel(serviceId: string): Promise<LabelDocument> {
  const response = await fetch(
    `${apiBase()}/api/services/${encodeURIComponent(serviceId)}/label`,
  );
  return validateLabel(await jsonOrError(response));
}

export type AnalyzeResult =
  | { kind: "label"; label: LabelDocument }
  | { kind: "job"; jobId: string };

export async function analyze(text: string): Promise<AnalyzeResult> {
  const response = await fetch(`${apiBase()}/api/analyze`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ text }),
  });
  const payload = (await jsonOrError(response)) as { job_id?: string };
  if (payload.job_id) {
    return { kind: "job", jobId: payload.job_id };
  }
  return { kind: "label", label: validateLabel(payload) };
}

export interface JobStatus {
  job_id: string;
  status: "pending" | "running" | "done" | "failed";
  result: unknown;
  detail: string | null;
}

export async function jobStatus(jobId: string): Promise<JobStatus> {
  const response = await fetch(
    `${apiBase()}/api/jobs/${encodeURIComponent(jobId)}`,
  );
  return (await jsonOrError(response)) as JobStatus;
}

export async function pollJob(
  jobId: string,
  intervalMs = 500,
  maxAttempts = 240,
): Promise<LabelDocument> {
  for (let attempt = 0; attempt < maxAttempts; attempt += 1) {
    const status = await jobStatus(jobId);
    if (status.status === "done") {
      return validateLabel(status.result);
    }
    if (status.status === "failed") {
      throw new ApiError(500, status.detail ?? "analysis failed");
    }
    await new Promise((resolve) => setTimeout(resolve, intervalMs));
  }
  throw new ApiError(504, "analysis did not finish in time");
}

export async function postFeedback(matchId: string, vote: Vote): Promise<void> {
  const response = await fetch(`${apiBase()}/api/feedback`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ match_id: matchId, vote, client_id: clientId() }),
  });
  await jsonOrError(response);
}
