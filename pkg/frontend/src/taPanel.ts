// Tool-assisted control panel: move buttons gated by the legal mask and a
// target picker using the triple index mapping (0-3 teammates, 4-8 enemies,
// 9 select-all). Anything not in the mask is unselectable.

import type { DecisionRequest, TaResponse } from "./api.js";

export const MOVE_LABELS: Record<number, string> = {
  0: "Basic Attack",
  1: "Skill",
  2: "Release Ultimate",
  3: "Hold Ultimate",
};

export function targetLabel(t: number, request: DecisionRequest): string {
  if (t === 9) return "Select all";
  const obs = request.observation as {
    allies?: { id: string }[];
    enemies?: { id: string }[];
  };
  if (t <= 3) {
    const ally = obs.allies?.[t];
    return ally ? `${t}: ${ally.id}` : `${t}: (empty slot)`;
  }
  const enemy = obs.enemies?.[t - 4];
  return enemy ? `${t}: ${enemy.id}` : `${t}: (no enemy)`;
}

export interface MoveOption {
  m: number;
  label: string;
  targets: number[];
}

/** Moves and their legal targets, straight from the mask. */
export function moveOptions(mask: number[][]): MoveOption[] {
  const byMove = new Map<number, number[]>();
  for (const triple of mask) {
    const [, m, t] = triple;
    if (m === undefined || t === undefined) continue;
    if (!byMove.has(m)) byMove.set(m, []);
    byMove.get(m)!.push(t);
  }
  return [0, 1, 2, 3]
    .filter((m) => byMove.has(m))
    .map((m) => ({ m, label: MOVE_LABELS[m] ?? `move ${m}`, targets: byMove.get(m)! }));
}

export function tripleFor(mask: number[][], m: number, t: number): number[] | null {
  for (const triple of mask) {
    if (triple[1] === m && triple[2] === t) return [...triple];
  }
  return null;
}

export class TaPanel {
  private root: HTMLElement;
  private onSubmit: (response: TaResponse) => void;
  private selectedMove: number | null = null;

  constructor(root: HTMLElement, onSubmit: (response: TaResponse) => void) {
    this.root = root;
    this.onSubmit = onSubmit;
  }

  render(request: DecisionRequest): void {
    this.root.innerHTML = "";
    const mask = request.mask ?? [];
    const decision = request.decision;

    const heading = document.createElement("div");
    heading.className = "ta-actor";
    heading.textContent = decision
      ? decision.is_interrupt
        ? `Off-turn ultimate offer: ${decision.actor}`
        : `Acting: ${decision.actor}`
      : "Acting";
    this.root.appendChild(heading);

    const options = moveOptions(mask);
    const moveRow = document.createElement("div");
    moveRow.className = "ta-moves";
    const targetRow = document.createElement("div");
    targetRow.className = "ta-targets";

    const renderTargets = (option: MoveOption) => {
      targetRow.innerHTML = "";
      for (const t of option.targets) {
        const btn = document.createElement("button");
        btn.textContent = targetLabel(t, request);
        btn.dataset.target = String(t);
        btn.addEventListener("click", () => {
          const triple = tripleFor(mask, option.m, t);
          if (triple) this.onSubmit({ ta: triple });
        });
        targetRow.appendChild(btn);
      }
    };

    for (const option of options) {
      const btn = document.createElement("button");
      btn.textContent = option.label;
      btn.dataset.move = String(option.m);
      btn.addEventListener("click", () => {
        this.selectedMove = option.m;
        renderTargets(option);
      });
      moveRow.appendChild(btn);
    }

    this.root.appendChild(moveRow);
    this.root.appendChild(targetRow);
    if (options.length > 0) {
      this.selectedMove = options[0]!.m;
      renderTargets(options[0]!);
    }
  }
}
