import { beforeEach, describe, expect, it } from "vitest";

import { LabelApp } from "../src/app.js";
import { gradeELabel } from "./fixtures.js";

let container: HTMLElement;

function toggleButton(caseId: string): HTMLButtonElement {
  const entry = container.querySelector(`[data-case-id="${caseId}"]`)!;
  return entry.querySelector(".case-toggle") as HTMLButtonElement;
}

beforeEach(() => {
  document.body.innerHTML = '<div id="app"></div>';
  container = document.getElementById("app")!;
});

describe("expand/contract", () => {
  it("is an involution: expand then contract restores the initial DOM", () => {
    new LabelApp(container, gradeELabel());
    const initial = container.innerHTML;
    toggleButton("c-good").click();
    expect(container.innerHTML).not.toBe(initial);
    expect(
      container.querySelectorAll('[data-case-id="c-good"] .evidence-item'),
    ).toHaveLength(2);
    toggleButton("c-good").click();
    expect(container.innerHTML).toBe(initial);
  });

  it("expanding one case leaves the others collapsed", () => {
    new LabelApp(container, gradeELabel());
    toggleButton("c-sold").click();
    expect(
      container.querySelectorAll('[data-case-id="c-sold"] .evidence-item'),
    ).toHaveLength(1);
    expect(
      container.querySelectorAll('[data-case-id="c-good"] .evidence-item'),
    ).toHaveLength(0);
    expect(toggleButton("c-sold").getAttribute("aria-expanded")).toBe("true");
    expect(toggleButton("c-good").getAttribute("aria-expanded")).toBe("false");
  });

  it("keyboard activation is equivalent to click", () => {
    new LabelApp(container, gradeELabel());
    const before = container.innerHTML;
    toggleButton("c-good").dispatchEvent(
      new KeyboardEvent("keydown", { key: "Enter", bubbles: true }),
    );
    const afterKeyboard = container.innerHTML;
    expect(afterKeyboard).not.toBe(before);

    // reset and compare against a click-driven expansion
    document.body.innerHTML = '<div id="app"></div>';
    container = document.getElementById("app")!;
    new LabelApp(container, gradeELabel());
    toggleButton("c-good").click();
    expect(container.innerHTML).toBe(afterKeyboard);
  });

  it("expand state never alters the document data", () => {
    const doc = gradeELabel();
    const snapshot = JSON.stringify(doc);
    const app = new LabelApp(container, doc);
    toggleButton("c-good").click();
    toggleButton("c-sold").click();
    app.toggle("c-good");
    expect(JSON.stringify(doc)).toBe(snapshot);
  });
});
