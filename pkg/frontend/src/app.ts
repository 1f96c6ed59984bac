// Session controller: one episode per page session, all state authoritative
// on the service. The controller polls the pending request, routes it to the
// pointing view, the triple panel, or the ask modal, and posts whatever the
// player chooses.

import {
  AgentResponse,
  AskResponse,
  DecisionRequest,
  EpisodeResult,
  ServiceClient,
  StepRecord,
} from "./api.js";
import { AskModal, HintBanner } from "./askModal.js";
import { DcView } from "./dcView.js";
import { TaPanel } from "./taPanel.js";

export interface SessionElements {
  view: HTMLElement;
  status: HTMLElement;
  score: HTMLElement;
  banner: HTMLElement;
  modal: HTMLElement;
}

function describeResult(result: EpisodeResult): string {
  const bits = [`outcome: ${result.outcome}`];
  if (result.abort_reason) bits.push(`reason: ${result.abort_reason}`);
  bits.push(`steps: ${result.t_steps}`);
  const score = result.score as Record<string, unknown>;
  for (const key of ["r_scaled", "s_moc", "s_pf", "s_as"]) {
    const value = key === "r_scaled" ? result.r_scaled : score[key];
    if (value !== undefined && value !== null) {
      const num = typeof value === "number" ? value.toFixed(1) : String(value);
      bits.push(`${key}: ${num}`);
    }
  }
  return bits.join("  |  ");
}

export class SessionController {
  private client: ServiceClient;
  private els: SessionElements;
  private episodeId = "";
  private controller = "";
  private regime = "";
  private exchange = 0;
  private dcView: DcView | null = null;
  private taPanel: TaPanel | null = null;
  private banner: HintBanner;
  private modal: AskModal;
  private busy = false;

  constructor(client: ServiceClient, els: SessionElements) {
    this.client = client;
    this.els = els;
    this.banner = new HintBanner(els.banner);
    this.modal = new AskModal(els.modal);
  }

  async start(taskId: number, regime: string, seed: number): Promise<void> {
    const ref = await this.client.createEpisode(taskId, regime, seed);
    this.episodeId = ref.episode_id;
    this.controller = ref.controller;
    this.regime = regime;
    this.exchange = 0;
    this.banner.clear();
    this.setStatus(`episode ${ref.episode_id} (${regime}, seed ${seed})`);
    await this.refresh();
  }

  private setStatus(text: string): void {
    this.els.status.textContent = text;
  }

  private setScore(text: string): void {
    this.els.score.textContent = text;
  }

  private async refresh(): Promise<void> {
    const obs = await this.client.observation(this.episodeId);
    if (obs.status === "done") {
      if (obs.result) this.setScore(describeResult(obs.result));
      this.setStatus(`finished after ${this.exchange} inputs`);
      this.els.view.querySelectorAll("button").forEach((b) => (b.disabled = true));
      return;
    }
    if (obs.status === "ask_point") {
      this.modal.show((response) => void this.postAsk(response));
      return;
    }
    const request = obs.request as DecisionRequest;
    if (request.hint && this.banner.text === "") {
      this.banner.set(request.hint);
    }
    if (this.regime === "dc") {
      if (!this.dcView) {
        this.dcView = new DcView(this.els.view, (r) => void this.post(r));
      }
      this.dcView.setFrame(this.client.frameUrl(this.episodeId, this.exchange));
    } else {
      if (!this.taPanel) {
        this.taPanel = new TaPanel(this.els.view, (r) => void this.post(r));
      }
      this.taPanel.render(request);
    }
  }

  private noteRecord(record: StepRecord): void {
    this.exchange += 1;
    const res = record.record.resolution;
    let note = `input ${this.exchange}: ${res.kind}`;
    if (res.reason) note += ` (${res.reason})`;
    if (res.consecutive_failures) note += ` [misses: ${res.consecutive_failures}]`;
    this.setStatus(note);
    if (record.result) {
      this.setScore(describeResult(record.result));
    }
  }

  private async post(response: AgentResponse): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    try {
      const record = await this.client.act(this.episodeId, this.controller, response);
      this.noteRecord(record);
      await this.refresh();
    } finally {
      this.busy = false;
    }
  }

  private async postAsk(response: AskResponse): Promise<void> {
    const out = await this.client.ask(this.episodeId, this.controller, response);
    const record = out.record as unknown as {
      hint?: { text: string } | null;
    };
    if (record.hint?.text) {
      this.banner.set(record.hint.text);
    }
    await this.refresh();
  }
}
