import { analyze, getLabel, pollJob, postFeedback } from "./api.js";
import { renderErrorBanner, renderLabel } from "./render.js";
import {
  ViewState,
  Vote,
  applyVote,
  initialState,
  rollbackVote,
  toggleCase,
} from "./state.js";
import { LabelDocument, SchemaError, validateLabel } from "./types.js";

/** Wires one label document to a container: expand/contract plus optimistic
 * feedback with rollback. The document is immutable; only view state moves. */
export class LabelApp {
  state: ViewState = initialState();

  constructor(
    private container: HTMLElement,
    private doc: LabelDocument,
  ) {
    this.render();
  }

  static fromPayload(container: HTMLElement, payload: unknown): LabelApp | null {
    let doc: LabelDocument;
    try {
      doc = validateLabel(payload);
    } catch (error) {
      const message =
        error instanceof SchemaError
          ? `This label cannot be displayed: ${error.problems[0]}`
          : "This label cannot be displayed.";
      renderErrorBanner(container, message);
      return null;
    }
    return new LabelApp(container, doc);
  }

  render(): void {
    renderLabel(this.container, this.doc, this.state, {
      onToggle: (caseId) => this.toggle(caseId),
      onVote: (matchId, vote) => void this.vote(matchId, vote),
    });
  }

  toggle(caseId: string): void {
    this.state = toggleCase(this.state, caseId);
    this.render();
  }

  async vote(matchId: string, vote: Vote): Promise<void> {
    const previous = this.state.votes.get(matchId);
    this.state = applyVote(this.state, matchId, vote);
    this.render();
    try {
      await postFeedback(matchId, vote);
    } catch {
      this.state = rollbackVote(
        this.state,
        matchId,
        previous,
        "Your vote could not be saved; please try again.",
      );
      this.render();
    }
  }
}

/** Paste-a-policy entry point: posts the text, polls when the server hands
 * back a job, then swaps in the rendered label. */
export class AnalyzeForm {
  readonly form: HTMLFormElement;
  readonly textarea: HTMLTextAreaElement;
  readonly submit: HTMLButtonElement;
  readonly status: HTMLElement;

  constructor(
    container: HTMLElement,
    private output: HTMLElement,
  ) {
    this.form = document.createElement("form");
    this.form.className = "analyze-form";
    this.textarea = document.createElement("textarea");
    this.textarea.placeholder = "Paste a privacy policy…";
    this.textarea.rows = 12;
    this.submit = document.createElement("button");
    this.submit.type = "submit";
    this.submit.textContent = "Analyze";
    this.submit.disabled = true;
    this.status = document.createElement("p");
    this.status.className = "analyze-status";

    this.textarea.addEventListener("input", () => {
      this.submit.disabled = this.textarea.value.trim() === "";
    });
    this.form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.run();
    });

    this.form.append(this.textarea, this.submit, this.status);
    container.appendChild(this.form);
  }

  async run(): Promise<void> {
    const text = this.textarea.value;
    if (!text.trim()) {
      return;
    }
    this.submit.disabled = true;
    this.status.textContent = "Analyzing…";
    try {
      const result = await analyze(text);
      const label =
        result.kind === "label"
          ? result.label
          : await this.poll(result.jobId);
      this.status.textContent = "";
      new LabelApp(this.output, label);
    } catch (error) {
      this.status.textContent =
        error instanceof Error ? error.message : "Analysis failed.";
    } finally {
      this.submit.disabled = this.textarea.value.trim() === "";
    }
  }

  private async poll(jobId: string): Promise<LabelDocument> {
    this.status.textContent = "Analyzing… this policy is long, hang tight.";
    this.form.classList.add("polling");
    try {
      return await pollJob(jobId);
    } finally {
      this.form.classList.remove("polling");
    }
  }
}

export async function boot(root: HTMLElement): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const serviceId = params.get("service");
  if (serviceId) {
    try {
      const label = await getLabel(serviceId);
      new LabelApp(root, label);
    } catch (error) {
      renderErrorBanner(
        root,
        error instanceof Error ? error.message : "Could not load the label.",
      );
    }
    return;
  }
  const output = document.createElement("div");
  output.id = "label-output";
  new AnalyzeForm(root, output);
  root.appendChild(output);
}
