// @vitest-environment jsdom
import { describe, expect, it } from "vitest";

import type { DecisionRequest, TaResponse } from "../src/api.js";
import { TaPanel, moveOptions, targetLabel, tripleFor } from "../src/taPanel.js";

const request = (mask: number[][]): DecisionRequest => ({
  type: "decision",
  regime: "ta",
  episode: { exchange: 1, episode_index: 1, task_id: 1 },
  observation: {
    allies: [{ id: "striker" }, { id: "herald" }, { id: "saboteur" }, { id: "warden" }],
    enemies: [{ id: "w0_rimefang" }],
  },
  decision: { actor: "striker", slot: 0, is_interrupt: false },
  mask,
});

describe("moveOptions", () => {
  it("lists only moves present in the mask", () => {
    const options = moveOptions([
      [0, 0, 4],
      [0, 2, 4],
    ]);
    expect(options.map((o) => o.m)).toEqual([0, 2]);
  });

  it("select-all appears only when the mask offers it", () => {
    const withAll = moveOptions([[3, 2, 9]]);
    expect(withAll[0]?.targets).toEqual([9]);
    const single = moveOptions([[0, 0, 4]]);
    expect(single[0]?.targets).toEqual([4]);
  });
});

describe("tripleFor", () => {
  it("returns the exact mask triple", () => {
    expect(tripleFor([[2, 1, 5]], 1, 5)).toEqual([2, 1, 5]);
    expect(tripleFor([[2, 1, 5]], 0, 5)).toBeNull();
  });
});

describe("targetLabel", () => {
  it("maps indexes to entity names", () => {
    const req = request([[0, 0, 4]]);
    expect(targetLabel(0, req)).toContain("striker");
    expect(targetLabel(4, req)).toContain("w0_rimefang");
    expect(targetLabel(9, req)).toBe("Select all");
  });
});

describe("TaPanel DOM", () => {
  it("gates move buttons by the mask and submits the chosen triple", () => {
    const root = document.createElement("div");
    const submitted: TaResponse[] = [];
    const panel = new TaPanel(root, (r) => submitted.push(r));

    panel.render(request([
      [0, 0, 4],
      [0, 1, 4],
    ]));
    const moveButtons = [...root.querySelectorAll<HTMLButtonElement>("[data-move]")];
    expect(moveButtons.map((b) => b.dataset.move)).toEqual(["0", "1"]);
    // no ultimate button without a mask entry for it
    expect(root.querySelector('[data-move="2"]')).toBeNull();

    const skill = root.querySelector<HTMLButtonElement>('[data-move="1"]')!;
    skill.click();
    const target = root.querySelector<HTMLButtonElement>('[data-target="4"]')!;
    target.click();
    expect(submitted).toEqual([{ ta: [0, 1, 4] }]);
  });

  it("shows the off-turn offer heading", () => {
    const root = document.createElement("div");
    const panel = new TaPanel(root, () => {});
    const req = request([[3, 2, 9], [3, 3, 3]]);
    req.decision = { actor: "warden", slot: 3, is_interrupt: true };
    panel.render(req);
    expect(root.textContent).toContain("Off-turn ultimate offer: warden");
  });
});
