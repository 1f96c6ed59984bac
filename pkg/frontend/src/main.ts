import { ServiceClient } from "./api.js";
import { SessionController } from "./app.js";

async function boot(): Promise<void> {
  const client = new ServiceClient("");
  const els = {
    view: document.getElementById("view")!,
    status: document.getElementById("status")!,
    score: document.getElementById("score")!,
    banner: document.getElementById("hint-banner")!,
    modal: document.getElementById("ask-modal")!,
  };
  const controller = new SessionController(client, els);

  const taskSelect = document.getElementById("task") as HTMLSelectElement;
  const regimeSelect = document.getElementById("regime") as HTMLSelectElement;
  const seedInput = document.getElementById("seed") as HTMLInputElement;
  const startButton = document.getElementById("start") as HTMLButtonElement;

  const { tasks } = await client.tasks();
  for (const task of tasks) {
    const opt = document.createElement("option");
    opt.value = String(task.task_id);
    opt.textContent = `${task.task_id}: ${task.name} (${task.family})`;
    taskSelect.appendChild(opt);
  }

  startButton.addEventListener("click", () => {
    void controller.start(
      Number(taskSelect.value),
      regimeSelect.value,
      Number(seedInput.value) || 0,
    );
  });
}

document.addEventListener("DOMContentLoaded", () => {
  void boot();
});
