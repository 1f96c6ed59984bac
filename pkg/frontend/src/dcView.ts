// Pointing-regime view: shows the server-rendered frame (no client-side
// re-rendering) and reports clicks in logical 1920x1080 coordinates no
// matter how the image is scaled on screen. Space/Enter confirm, Escape
// cancels, matching the on-screen buttons.

import type { DcResponse } from "./api.js";
import { unscaleClick } from "./coords.js";

export class DcView {
  private root: HTMLElement;
  private img: HTMLImageElement;
  private onPrimitive: (response: DcResponse) => void;
  private keyHandler: (ev: KeyboardEvent) => void;

  constructor(root: HTMLElement, onPrimitive: (response: DcResponse) => void) {
    this.root = root;
    this.onPrimitive = onPrimitive;

    this.img = document.createElement("img");
    this.img.className = "dc-frame";
    this.img.alt = "battle frame";
    this.img.draggable = false;
    this.img.addEventListener("click", (ev) => this.handleClick(ev));

    const controls = document.createElement("div");
    controls.className = "dc-controls";
    const confirm = document.createElement("button");
    confirm.textContent = "Confirm (Space)";
    confirm.addEventListener("click", () =>
      this.onPrimitive({ dc: { kind: "keypress", key: "confirm" } }),
    );
    const cancel = document.createElement("button");
    cancel.textContent = "Cancel / Hold (Esc)";
    cancel.addEventListener("click", () =>
      this.onPrimitive({ dc: { kind: "keypress", key: "cancel" } }),
    );
    controls.append(confirm, cancel);

    this.root.innerHTML = "";
    this.root.append(this.img, controls);

    this.keyHandler = (ev: KeyboardEvent) => {
      if (ev.key === " " || ev.key === "Enter") {
        ev.preventDefault();
        this.onPrimitive({ dc: { kind: "keypress", key: "confirm" } });
      } else if (ev.key === "Escape") {
        this.onPrimitive({ dc: { kind: "keypress", key: "cancel" } });
      }
    };
    document.addEventListener("keydown", this.keyHandler);
  }

  setFrame(url: string): void {
    this.img.src = url;
  }

  dispose(): void {
    document.removeEventListener("keydown", this.keyHandler);
  }

  private handleClick(ev: MouseEvent): void {
    const rect = this.img.getBoundingClientRect();
    const point = unscaleClick(
      ev.clientX - rect.left,
      ev.clientY - rect.top,
      rect.width,
      rect.height,
    );
    this.onPrimitive({ dc: { kind: "click", x: point.x, y: point.y } });
  }
}
