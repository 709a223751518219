/** Typed client for the session service HTTP+JSON API (api_version 1). */

export interface Mention {
  label: string;
  preference: number;
}

export interface TurnView {
  agent_topic: string;
  response: { kind: string; mentions: Mention[] } | null;
}

export interface DiagnosticsRow {
  turn: number;
  agent_topic: string;
  gw: number | null;
  cd: number | null;
  factors: { turn_norm: number; gcd_norm: number; eus: number };
  est_distance_to_goal: number;
  est_satisfaction: number;
}

export interface CandidateRow {
  label: string;
  est_distance: number;
  est_preference: number;
  rank_d: number;
  rank_p: number;
  score: number;
}

export interface SessionView {
  api_version: number;
  session_id: string;
  status: string;
  outcome: string | null;
  start: string;
  goal: string;
  policy: string;
  tolerance_hint: number | null;
  turn_limit: number;
  pending_topic: string | null;
  turns: TurnView[];
  diagnostics: DiagnosticsRow[];
  candidates: CandidateRow[];
}

export interface NeighborRow {
  label: string;
  hops: number;
}

export interface StartForm {
  start: string;
  goal: string;
  policy: string;
  checkpoint?: string;
}

export type RespondBody =
  | { mode: "cooperative"; preference?: number }
  | { mode: "topics"; mentions: Mention[] }
  | { mode: "quit" };

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

async function decode(resp: Response): Promise<any> {
  const doc = await resp.json().catch(() => ({}));
  if (!resp.ok) {
    throw new ApiError(resp.status, typeof doc.error === "string" ? doc.error : resp.statusText);
  }
  return doc;
}

/** POST bodies carry an `agent_topic` alias of pending_topic; drop it so the
 * client model always matches the canonical GET /api/sessions/{id} shape. */
function canonicalView(doc: any): SessionView {
  const { agent_topic: _alias, ...view } = doc;
  return view as SessionView;
}

export class SessionApi {
  constructor(readonly base: string, private readonly fetchFn: typeof fetch = fetch) {}

  private url(path: string): string {
    return this.base.replace(/\/$/, "") + path;
  }

  async createSession(form: StartForm): Promise<SessionView> {
    const body: Record<string, string> = {
      start: form.start,
      goal: form.goal,
      policy: form.policy,
    };
    if (form.checkpoint) body.checkpoint = form.checkpoint;
    const resp = await this.fetchFn(this.url("/api/sessions"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return canonicalView(await decode(resp));
  }

  async respond(sessionId: string, body: RespondBody): Promise<SessionView> {
    const resp = await this.fetchFn(this.url(`/api/sessions/${sessionId}/respond`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return canonicalView(await decode(resp));
  }

  async getState(sessionId: string): Promise<SessionView> {
    const resp = await this.fetchFn(this.url(`/api/sessions/${sessionId}`));
    return decode(resp);
  }

  async neighbors(topic: string, hops: number): Promise<NeighborRow[]> {
    const resp = await this.fetchFn(
      this.url(`/api/graph/neighbors?topic=${encodeURIComponent(topic)}&hops=${hops}`),
    );
    const doc = await decode(resp);
    return doc.neighbors as NeighborRow[];
  }
}
