/** Console wiring: a single live session per page, server as the only
 * source of truth. The console never computes policy values; it renders
 * what the API returns. */

import { ApiError, SessionApi } from "./api.js";
import type { Mention, RespondBody, SessionView, StartForm } from "./api.js";
import { renderGauges } from "./gauges.js";
import {
  MAX_MENTIONS,
  PickerState,
  makePicker,
  renderPicker,
  setPreference,
  toggleTopic,
} from "./picker.js";

export class ConsoleApp {
  api: SessionApi | null = null;
  view: SessionView | null = null;
  picker: PickerState | null = null;
  hops = 3;
  lastError: string | null = null;
  retryable: (() => Promise<void>) | null = null;

  constructor(
    readonly root: HTMLElement,
    private readonly makeApi: (base: string) => SessionApi,
  ) {
    this.mount();
  }

  private el<T extends HTMLElement>(selector: string): T {
    const node = this.root.querySelector(selector);
    if (!node) throw new Error(`missing element ${selector}`);
    return node as T;
  }

  private mount(): void {
    this.root.innerHTML = `
      <section class="start-form">
        <input data-testid="api-base" placeholder="http://127.0.0.1:8023" value="http://127.0.0.1:8023"/>
        <input data-testid="start-topic" placeholder="start topic"/>
        <input data-testid="goal-topic" placeholder="goal topic"/>
        <select data-testid="policy">
          <option value="goal_weight">goal_weight (trained)</option>
          <option value="scalar_blend">scalar_blend (trained)</option>
          <option value="greedy_goal">greedy_goal</option>
          <option value="greedy_pref">greedy_pref</option>
          <option value="random">random</option>
        </select>
        <input data-testid="checkpoint" placeholder="checkpoint path (server-side, optional)"/>
        <button data-testid="start-button">start session</button>
      </section>
      <div class="banner" data-testid="error-banner" hidden></div>
      <section class="session" data-testid="session" hidden>
        <div class="headline" data-testid="headline"></div>
        <div class="gauges" data-testid="gauges"></div>
        <ol class="transcript" data-testid="transcript"></ol>
        <div class="proposal" data-testid="proposal"></div>
        <section class="controls" data-testid="controls">
          <div>
            <label>your preference for it
              <input type="range" min="0" max="1" step="0.05" value="0.8" data-testid="coop-pref"/>
            </label>
            <button data-testid="cooperative-button">sounds good (cooperative)</button>
            <button data-testid="quit-button">quit</button>
          </div>
          <div class="picker-header">
            <span>or steer to topics you prefer (max ${MAX_MENTIONS}):</span>
            <select data-testid="hops-select">
              <option value="1">1 hop</option><option value="2">2 hops</option>
              <option value="3" selected>3 hops</option>
            </select>
            <button data-testid="picker-refresh">load neighborhood</button>
            <button data-testid="topics-button">send selected topics</button>
          </div>
          <div class="picker" data-testid="picker"></div>
        </section>
        <div class="outcome" data-testid="outcome" hidden></div>
        <button data-testid="refresh-button">refresh from server</button>
      </section>`;

    this.el<HTMLButtonElement>('[data-testid="start-button"]').addEventListener("click", () => {
      void this.startSession();
    });
    this.el<HTMLButtonElement>('[data-testid="cooperative-button"]').addEventListener("click", () => {
      const pref = Number(this.el<HTMLInputElement>('[data-testid="coop-pref"]').value);
      void this.submit({ mode: "cooperative", preference: pref });
    });
    this.el<HTMLButtonElement>('[data-testid="quit-button"]').addEventListener("click", () => {
      void this.submit({ mode: "quit" });
    });
    this.el<HTMLButtonElement>('[data-testid="topics-button"]').addEventListener("click", () => {
      void this.submitTopics();
    });
    this.el<HTMLButtonElement>('[data-testid="picker-refresh"]').addEventListener("click", () => {
      void this.loadPicker();
    });
    this.el<HTMLSelectElement>('[data-testid="hops-select"]').addEventListener("change", (ev) => {
      this.hops = Number((ev.target as HTMLSelectElement).value);
      void this.loadPicker();
    });
    this.el<HTMLButtonElement>('[data-testid="refresh-button"]').addEventListener("click", () => {
      void this.refresh();
    });
  }

  readForm(): StartForm & { base: string } {
    return {
      base: this.el<HTMLInputElement>('[data-testid="api-base"]').value.trim(),
      start: this.el<HTMLInputElement>('[data-testid="start-topic"]').value.trim(),
      goal: this.el<HTMLInputElement>('[data-testid="goal-topic"]').value.trim(),
      policy: this.el<HTMLSelectElement>('[data-testid="policy"]').value,
      checkpoint: this.el<HTMLInputElement>('[data-testid="checkpoint"]').value.trim() || undefined,
    };
  }

  async startSession(): Promise<void> {
    const form = this.readForm();
    if (!form.base || !form.start || !form.goal || !form.policy) {
      this.showError("fill in server, start, goal and policy first");
      return;
    }
    this.api = this.makeApi(form.base);
    await this.guard(async () => {
      this.view = await this.api!.createSession(form);
      this.picker = null;
      this.render();
    }, () => this.startSession());
  }

  async submit(body: RespondBody): Promise<void> {
    if (!this.api || !this.view) return;
    if (this.view.status !== "active") {
      this.showError("session has ended; submissions are locked");
      return;
    }
    const id = this.view.session_id;
    await this.guard(async () => {
      this.view = await this.api!.respond(id, body);
      this.picker = null;
      this.render();
    }, null, async (err) => {
      // 4xx/409: trust the server, re-sync the whole view, surface the reason
      this.view = await this.api!.getState(id);
      this.render();
      this.showError(err.message);
    });
  }

  async submitTopics(): Promise<void> {
    if (!this.picker || this.picker.selected.size === 0) {
      this.showError("select 1 to 3 topics first");
      return;
    }
    if (this.picker.selected.size > MAX_MENTIONS) {
      this.showError(`at most ${MAX_MENTIONS} topics may be mentioned`);
      return;
    }
    const mentions: Mention[] = [...this.picker.selected.entries()].map(([label, preference]) => ({
      label,
      preference,
    }));
    await this.submit({ mode: "topics", mentions });
  }

  async loadPicker(): Promise<void> {
    if (!this.api || !this.view || this.view.status !== "active") return;
    const center = this.view.pending_topic;
    if (!center) return;
    await this.guard(async () => {
      const rows = await this.api!.neighbors(center, this.hops);
      this.picker = makePicker(this.hops, rows, center);
      this.renderPickerPane();
    }, () => this.loadPicker(), async (err) => {
      if (err.status === 404) {
        await this.refresh(); // stale topic: re-sync then surface
      }
      this.showError(err.message);
    });
  }

  async refresh(): Promise<void> {
    if (!this.api || !this.view) return;
    const id = this.view.session_id;
    await this.guard(async () => {
      this.view = await this.api!.getState(id);
      this.render();
    }, () => this.refresh());
  }

  private async guard(work: () => Promise<void>, retry: (() => Promise<void>) | null = null,
                      onApiError?: (err: ApiError) => Promise<void>): Promise<void> {
    try {
      this.clearError();
      await work();
    } catch (err) {
      if (err instanceof ApiError) {
        if (onApiError) await onApiError(err);
        else this.showError(err.message);
      } else {
        this.retryable = retry;
        this.showError(`network failure: ${(err as Error).message}` + (retry ? " (retry available)" : ""));
      }
    }
  }

  showError(message: string): void {
    this.lastError = message;
    const banner = this.el<HTMLDivElement>('[data-testid="error-banner"]');
    banner.hidden = false;
    banner.textContent = message;
  }

  clearError(): void {
    this.lastError = null;
    const banner = this.el<HTMLDivElement>('[data-testid="error-banner"]');
    banner.hidden = true;
    banner.textContent = "";
  }

  render(): void {
    const view = this.view;
    if (!view) return;
    this.el<HTMLElement>('[data-testid="session"]').hidden = false;
    this.el<HTMLDivElement>('[data-testid="headline"]').textContent =
      `${view.start} -> ${view.goal} | policy ${view.policy} | ${view.status}`;

    renderGauges(this.el('[data-testid="gauges"]'), view);

    const transcript = this.el<HTMLOListElement>('[data-testid="transcript"]');
    transcript.innerHTML = "";
    for (const turn of view.turns) {
      const item = document.createElement("li");
      const agent = document.createElement("div");
      agent.className = "agent-line";
      agent.textContent = `agent: ${turn.agent_topic}`;
      item.append(agent);
      const user = document.createElement("div");
      user.className = "user-line";
      if (turn.response === null) {
        user.textContent = "(goal reached)";
      } else if (turn.response.kind === "cooperative") {
        user.textContent = `you: sounds good (${turn.response.mentions[0]?.preference ?? ""})`;
      } else if (turn.response.kind === "quit") {
        user.textContent = "you: quit";
      } else {
        user.textContent =
          "you: " + turn.response.mentions.map((m) => `${m.label}=${m.preference}`).join(", ");
      }
      item.append(user);
      transcript.append(item);
    }

    this.el<HTMLDivElement>('[data-testid="proposal"]').textContent = view.pending_topic
      ? `agent proposes: ${view.pending_topic}`
      : "";

    const active = view.status === "active";
    for (const selector of ["cooperative-button", "quit-button", "topics-button",
                            "picker-refresh", "coop-pref", "hops-select"]) {
      this.el<HTMLButtonElement>(`[data-testid="${selector}"]`).toggleAttribute("disabled", !active);
    }
    const outcome = this.el<HTMLDivElement>('[data-testid="outcome"]');
    outcome.hidden = active;
    outcome.textContent = active ? "" : `session over: ${view.status}`;
    if (!active) this.picker = null;
    this.renderPickerPane();
  }

  private renderPickerPane(): void {
    const pane = this.el<HTMLDivElement>('[data-testid="picker"]');
    if (!this.picker) {
      pane.innerHTML = "";
      return;
    }
    renderPicker(pane, this.picker, (label) => {
      if (!toggleTopic(this.picker!, label)) {
        this.showError(`at most ${MAX_MENTIONS} topics may be mentioned`);
      }
      this.renderPickerPane();
    }, (label, value) => {
      setPreference(this.picker!, label, value);
    });
  }
}

export function mountConsole(root: HTMLElement): ConsoleApp {
  return new ConsoleApp(root, (base) => new SessionApi(base));
}
