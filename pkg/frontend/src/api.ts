// Typed client for the episode service. All game state lives server-side;
// this module only relays envelopes and inputs.

export interface TaskInfo {
  task_id: number;
  name: string;
  family: string;
  no_assistance: boolean;
  waves: number;
}

export interface EpisodeRef {
  episode_id: string;
  controller: string;
  status: string;
  task_id: number;
  regime: string;
  seed: number;
}

export interface DecisionInfo {
  actor: string;
  slot: number;
  is_interrupt: boolean;
}

export interface DecisionRequest {
  type: "decision";
  regime: string;
  episode: { exchange: number; episode_index: number; task_id: number };
  observation: Record<string, unknown>;
  decision?: DecisionInfo;
  mask?: number[][];
  hint?: string;
}

export interface AskRequest {
  type: "ask_point";
  episode: { episode_index: number; task_id: number };
  decision_log: Record<string, unknown>[];
}

export type PendingRequest = DecisionRequest | AskRequest;

export interface ObservationEnvelope {
  status: "ask_point" | "running" | "done";
  request: PendingRequest | null;
  result?: EpisodeResult;
}

export interface EpisodeResult {
  outcome: string;
  abort_reason: string | null;
  t_steps: number | "inf";
  av_used: number;
  score: Record<string, unknown>;
  r_scaled: number;
  exchanges: number;
}

export interface StepRecord {
  status: string;
  record: {
    resolution: { kind: string; reason?: string; consecutive_failures?: number };
  };
  result?: EpisodeResult;
}

export type DcResponse = { dc: { kind: string; x?: number; y?: number; key?: string } };
export type TaResponse = { ta: number[] };
export type AskResponse = { ask: { choice: "ask" | "act"; question?: string } };
export type AgentResponse = DcResponse | TaResponse | AskResponse;

export class ServiceClient {
  constructor(
    private base: string = "",
    private fetchFn: typeof fetch = fetch,
  ) {}

  private async json<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await this.fetchFn(`${this.base}${path}`, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) {
      const text = await resp.text();
      throw new Error(`${method} ${path} -> ${resp.status}: ${text}`);
    }
    return (await resp.json()) as T;
  }

  tasks(): Promise<{ tasks: TaskInfo[] }> {
    return this.json("GET", "/api/tasks");
  }

  createEpisode(
    taskId: number,
    regime: string,
    seed: number,
    controller?: string,
  ): Promise<EpisodeRef> {
    return this.json("POST", "/api/episodes", {
      task_id: taskId,
      regime,
      seed,
      ...(controller ? { controller } : {}),
      agent_id: "human",
    });
  }

  observation(episodeId: string): Promise<ObservationEnvelope> {
    return this.json("GET", `/api/episodes/${episodeId}/observation`);
  }

  act(episodeId: string, controller: string, response: AgentResponse): Promise<StepRecord> {
    return this.json("POST", `/api/episodes/${episodeId}/action`, {
      controller,
      response,
    });
  }

  ask(episodeId: string, controller: string, response: AskResponse): Promise<StepRecord> {
    return this.json("POST", `/api/episodes/${episodeId}/ask`, {
      controller,
      response,
    });
  }

  result(episodeId: string): Promise<EpisodeResult> {
    return this.json("GET", `/api/episodes/${episodeId}/result`);
  }

  async logText(episodeId: string): Promise<string> {
    const resp = await this.fetchFn(`${this.base}/api/episodes/${episodeId}/log`);
    return resp.text();
  }

  frameUrl(episodeId: string, cacheKey: number): string {
    return `${this.base}/api/episodes/${episodeId}/frame.png?t=${cacheKey}`;
  }
}
