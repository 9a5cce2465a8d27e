import { ApiError, ElicitationApi } from "./api.js";
import type { Choice, PosteriorPayload, QueryPayload } from "./types.js";

export type ViewState =
  | { phase: "loading" }
  | { phase: "query"; query: QueryPayload; submitting: boolean; posterior: PosteriorPayload | null }
  | { phase: "done"; estimate: number[] | null; iteration: number }
  | { phase: "error"; message: string; canRetry: boolean; bugReport: boolean };

export type Listener = (view: ViewState) => void;

/**
 * Drives the elicitation loop: one in-flight request at a time, the only
 * mutation is POST /preference, and every view derives from service
 * responses. The in-flight token is the only client-side session state.
 */
export class SessionController {
  private view: ViewState = { phase: "loading" };
  private listeners: Listener[] = [];
  /** iterations shown, in display order; used to verify loop progression */
  readonly shownIterations: number[] = [];

  constructor(private api: ElicitationApi) {}

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
    listener(this.view);
  }

  current(): ViewState {
    return this.view;
  }

  private setView(view: ViewState): void {
    this.view = view;
    for (const l of this.listeners) l(view);
  }

  async start(): Promise<void> {
    this.setView({ phase: "loading" });
    try {
      const session = await this.api.getSession();
      if (session.done) {
        this.setView({
          phase: "done",
          estimate: session.estimate,
          iteration: session.iteration,
        });
        return;
      }
      await this.loadQuery();
    } catch (err) {
      this.fail(err, true);
    }
  }

  private async loadQuery(): Promise<void> {
    const query = await this.api.getQuery();
    let posterior: PosteriorPayload | null = null;
    try {
      posterior = await this.api.getPosterior();
    } catch {
      posterior = null; // the heat map is optional decoration
    }
    this.shownIterations.push(query.iteration);
    this.setView({ phase: "query", query, submitting: false, posterior });
  }

  /** Submit the expert's choice; ignored while a submission is pending. */
  async submit(choice: Choice): Promise<void> {
    if (this.view.phase !== "query" || this.view.submitting) return;
    const { query, posterior } = this.view;
    this.setView({ phase: "query", query, submitting: true, posterior });
    try {
      const result = await this.api.submitPreference(query.token, choice);
      if (result.done) {
        this.setView({
          phase: "done",
          estimate: result.estimate,
          iteration: result.iteration,
        });
        return;
      }
      await this.loadQuery();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // stale token: someone answered first, refresh to the live query
        try {
          const session = await this.api.getSession();
          if (session.done) {
            this.setView({
              phase: "done",
              estimate: session.estimate,
              iteration: session.iteration,
            });
            return;
          }
          await this.loadQuery();
        } catch (refreshErr) {
          this.fail(refreshErr, true);
        }
        return;
      }
      if (err instanceof ApiError && err.status === 400) {
        this.fail(err, false);
        return;
      }
      this.fail(err, true);
    }
  }

  async retry(): Promise<void> {
    await this.start();
  }

  private fail(err: unknown, canRetry: boolean): void {
    const message = err instanceof Error ? err.message : String(err);
    const bugReport = err instanceof ApiError && err.status === 400;
    this.setView({ phase: "error", message, canRetry, bugReport });
  }
}
