// @vitest-environment jsdom
import { describe, expect, it } from "vitest";

import type { AskResponse } from "../src/api.js";
import { AskModal, HintBanner } from "../src/askModal.js";

describe("AskModal", () => {
  it("posts act without a question", () => {
    const root = document.createElement("div");
    const modal = new AskModal(root);
    const choices: AskResponse[] = [];
    modal.show((r) => choices.push(r));
    root.querySelector<HTMLButtonElement>('[data-choice="act"]')!.click();
    expect(choices).toEqual([{ ask: { choice: "act" } }]);
    expect(root.classList.contains("visible")).toBe(false);
  });

  it("requires a question before asking", () => {
    const root = document.createElement("div");
    const modal = new AskModal(root);
    const choices: AskResponse[] = [];
    modal.show((r) => choices.push(r));
    const askButton = root.querySelector<HTMLButtonElement>('[data-choice="ask"]')!;
    askButton.click();
    expect(choices).toEqual([]); // empty question: nothing posted
    root.querySelector("textarea")!.value = "what is the boss weak to?";
    askButton.click();
    expect(choices).toEqual([
      { ask: { choice: "ask", question: "what is the boss weak to?" } },
    ]);
  });
});

describe("HintBanner", () => {
  it("pins hint text until cleared", () => {
    const root = document.createElement("div");
    const banner = new HintBanner(root);
    expect(root.classList.contains("visible")).toBe(false);
    banner.set("focus the lightning sentinel first");
    expect(root.textContent).toContain("focus the lightning sentinel first");
    expect(root.classList.contains("visible")).toBe(true);
    banner.clear();
    expect(root.classList.contains("visible")).toBe(false);
  });
});
