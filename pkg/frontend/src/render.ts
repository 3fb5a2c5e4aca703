import {
  CaseEntry,
  Evidence,
  LabelDocument,
  RATING_COLORS,
  RATING_ORDER,
  Rating,
  formatPercent,
} from "./types.js";
import { ViewState, Vote } from "./state.js";

export interface Handlers {
  onToggle: (caseId: string) => void;
  onVote: (matchId: string, vote: Vote) => void;
}

const RATING_HEADINGS: Record<Rating, string> = {
  blocker: "Blockers",
  bad: "Bad practices",
  neutral: "Neutral practices",
  good: "Good practices",
};

/** Render the three-level label into `container`.
 *
 * The view is a pure function of (document, view state): rendering replaces
 * the container's children wholesale, and the document is never mutated —
 * probabilities and grades are displayed exactly as served. */
export function renderLabel(
  container: HTMLElement,
  doc: LabelDocument,
  state: ViewState,
  handlers: Handlers,
): void {
  container.replaceChildren();
  container.appendChild(renderHeader(doc));
  if (state.notice) {
    const notice = el("div", "notice");
    notice.setAttribute("role", "alert");
    notice.textContent = state.notice;
    container.appendChild(notice);
  }

  const identified = RATING_ORDER.reduce(
    (n, rating) => n + doc.groups[rating].length,
    0,
  );
  if (identified === 0) {
    const empty = el("p", "empty-state");
    empty.textContent =
      "No data practices were identified in this policy, so no grade is assigned.";
    container.appendChild(empty);
    return;
  }

  for (const rating of RATING_ORDER) {
    const entries = doc.groups[rating];
    if (entries.length === 0) {
      continue;
    }
    container.appendChild(renderGroup(rating, entries, state, handlers));
  }
}

export function renderErrorBanner(container: HTMLElement, message: string): void {
  container.replaceChildren();
  const banner = el("div", "error-banner");
  banner.setAttribute("role", "alert");
  banner.textContent = message;
  container.appendChild(banner);
}

function renderHeader(doc: LabelDocument): HTMLElement {
  const header = el("header", "label-header");
  const name = el("h1", "service-name");
  name.textContent = doc.service.name ?? doc.service.id;
  header.appendChild(name);
  if (doc.grade !== "Ungraded") {
    const badge = el("div", `grade-badge grade-${doc.grade.toLowerCase()}`);
    badge.textContent = doc.grade;
    badge.setAttribute("aria-label", `privacy grade ${doc.grade}`);
    header.appendChild(badge);
  }
  return header;
}

function renderGroup(
  rating: Rating,
  entries: CaseEntry[],
  state: ViewState,
  handlers: Handlers,
): HTMLElement {
  const section = el("section", `rating-group group-${rating}`);
  section.dataset.rating = rating;
  section.style.setProperty("--group-color", RATING_COLORS[rating]);
  const heading = el("h2", "group-heading");
  heading.textContent = `${RATING_HEADINGS[rating]} (${entries.length})`;
  section.appendChild(heading);
  const list = el("ul", "case-list");
  for (const entry of entries) {
    list.appendChild(renderCase(entry, state, handlers));
  }
  section.appendChild(list);
  return section;
}

function renderCase(
  entry: CaseEntry,
  state: ViewState,
  handlers: Handlers,
): HTMLElement {
  const item = el("li", "case-entry");
  item.dataset.caseId = entry.case_id;

  const expanded = state.expanded.has(entry.case_id);
  const toggle = document.createElement("button");
  toggle.className = "case-toggle";
  toggle.type = "button";
  toggle.setAttribute("aria-expanded", String(expanded));
  toggle.textContent = `${expanded ? "▾" : "▸"} ${entry.title}`;
  const activate = () => handlers.onToggle(entry.case_id);
  toggle.addEventListener("click", activate);
  toggle.addEventListener("keydown", (event) => {
    if (event.key === "Enter" || event.key === " ") {
      event.preventDefault();
      activate();
    }
  });
  item.appendChild(toggle);

  if (expanded) {
    const evidence = el("ul", "evidence-list");
    for (const ev of entry.evidence) {
      evidence.appendChild(renderEvidence(ev, state, handlers));
    }
    item.appendChild(evidence);
  }
  return item;
}

function renderEvidence(
  ev: Evidence,
  state: ViewState,
  handlers: Handlers,
): HTMLElement {
  const item = el("li", "evidence-item");
  item.dataset.matchId = ev.match_id;

  const probability = el("span", "evidence-probability");
  probability.textContent = formatPercent(ev.probability);
  item.appendChild(probability);

  const quote = el("blockquote", "evidence-text");
  quote.textContent = ev.text;
  item.appendChild(quote);

  const controls = el("span", "feedback-controls");
  const localVote = state.votes.get(ev.match_id);
  for (const vote of ["up", "down"] as Vote[]) {
    const button = document.createElement("button");
    button.type = "button";
    button.className = `vote vote-${vote}${localVote === vote ? " active" : ""}`;
    button.setAttribute("aria-pressed", String(localVote === vote));
    const count = ev.feedback ? ev.feedback[vote] : 0;
    button.setAttribute(
      "aria-label",
      `${vote === "up" ? "agree" : "disagree"} with this match`,
    );
    button.textContent = `${vote === "up" ? "👍" : "👎"} ${count}`;
    button.addEventListener("click", () => handlers.onVote(ev.match_id, vote));
    controls.appendChild(button);
  }
  item.appendChild(controls);
  return item;
}

function el(tag: string, className: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  return node;
}
