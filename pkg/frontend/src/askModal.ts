// Pre-battle ask-or-act modal and the persistent hint banner.

import type { AskResponse } from "./api.js";

export class AskModal {
  private root: HTMLElement;

  constructor(root: HTMLElement) {
    this.root = root;
  }

  show(onChoice: (response: AskResponse) => void): void {
    this.root.innerHTML = "";
    this.root.classList.add("visible");

    const box = document.createElement("div");
    box.className = "ask-box";

    const title = document.createElement("div");
    title.className = "ask-title";
    title.textContent = "Ask for guidance, or act?";

    const question = document.createElement("textarea");
    question.placeholder = "One question (used only if you ask)";
    question.rows = 2;

    const buttons = document.createElement("div");
    const act = document.createElement("button");
    act.textContent = "Act";
    act.dataset.choice = "act";
    act.addEventListener("click", () => {
      this.hide();
      onChoice({ ask: { choice: "act" } });
    });
    const ask = document.createElement("button");
    ask.textContent = "Ask";
    ask.dataset.choice = "ask";
    ask.addEventListener("click", () => {
      const text = question.value.trim();
      if (!text) {
        question.focus();
        return;
      }
      this.hide();
      onChoice({ ask: { choice: "ask", question: text } });
    });
    buttons.append(act, ask);

    box.append(title, question, buttons);
    this.root.appendChild(box);
  }

  hide(): void {
    this.root.classList.remove("visible");
    this.root.innerHTML = "";
  }
}

export class HintBanner {
  private root: HTMLElement;

  constructor(root: HTMLElement) {
    this.root = root;
    this.clear();
  }

  /** Pins the hint for the rest of the episode. */
  set(text: string): void {
    this.root.textContent = `Hint: ${text}`;
    this.root.classList.add("visible");
  }

  clear(): void {
    this.root.textContent = "";
    this.root.classList.remove("visible");
  }

  get text(): string {
    return this.root.textContent ?? "";
  }
}
