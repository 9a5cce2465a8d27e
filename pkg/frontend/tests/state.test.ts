import { describe, expect, it } from "vitest";

import { ApiError } from "../src/api.js";
import { SessionController } from "../src/state.js";
import type {
  PosteriorPayload,
  PreferenceResult,
  QueryPayload,
  SessionPayload,
} from "../src/types.js";

function makeQuery(iteration: number): QueryPayload {
  return {
    iteration,
    token: `tok-${iteration}`,
    time_step: 1,
    rollouts_a: [[{ time_s: 0, h_ft: 100, h_dot_fps: -8, x_dot_fps: 20, vertical_accel_fps2: 0, horizontal_accel_fps2: 0 }]],
    rollouts_b: [[{ time_s: 0, h_ft: 100, h_dot_fps: -8, x_dot_fps: 20, vertical_accel_fps2: 0, horizontal_accel_fps2: 0 }]],
  };
}

const posterior: PosteriorPayload = {
  iteration: 0,
  acceptance_rate: 0.3,
  samples: [[0.1, 0.8, 0.1]],
  grid: { alpha: [0, 1], beta: [0, 1], density: [[1, 0], [0, 0]] },
};

/** Scripted fake service: queues of canned responses per endpoint. */
class FakeApi {
  sessions: SessionPayload[] = [];
  queries: (QueryPayload | ApiError)[] = [];
  preferences: (PreferenceResult | ApiError)[] = [];
  submitted: { token: string; choice: string }[] = [];

  getSession(): Promise<SessionPayload> {
    return Promise.resolve(this.sessions.shift()!);
  }

  getQuery(): Promise<QueryPayload> {
    const next = this.queries.shift()!;
    return next instanceof ApiError ? Promise.reject(next) : Promise.resolve(next);
  }

  getPosterior(): Promise<PosteriorPayload> {
    return Promise.resolve(posterior);
  }

  submitPreference(token: string, choice: "a" | "b"): Promise<PreferenceResult> {
    this.submitted.push({ token, choice });
    const next = this.preferences.shift()!;
    return next instanceof ApiError ? Promise.reject(next) : Promise.resolve(next);
  }
}

function session(partial: Partial<SessionPayload> = {}): SessionPayload {
  return {
    iteration: 0,
    max_iter: 5,
    done: false,
    method: "multiobjective",
    records: 0,
    estimate: null,
    ...partial,
  };
}

describe("SessionController", () => {
  it("loads the first query and tracks shown iterations", async () => {
    const api = new FakeApi();
    api.sessions.push(session());
    api.queries.push(makeQuery(1));
    const controller = new SessionController(api as never);
    await controller.start();
    const view = controller.current();
    expect(view.phase).toBe("query");
    expect(controller.shownIterations).toEqual([1]);
  });

  it("advances through queries and finishes on done", async () => {
    const api = new FakeApi();
    api.sessions.push(session());
    api.queries.push(makeQuery(1), makeQuery(2));
    api.preferences.push(
      { iteration: 1, done: false, estimate: [0.3, 0.4, 0.3] },
      { iteration: 2, done: true, estimate: [0.1, 0.8, 0.1] },
    );
    const controller = new SessionController(api as never);
    await controller.start();
    await controller.submit("a");
    expect(controller.shownIterations).toEqual([1, 2]);
    await controller.submit("b");
    const view = controller.current();
    expect(view.phase).toBe("done");
    if (view.phase === "done") {
      expect(view.estimate).toEqual([0.1, 0.8, 0.1]);
      expect(view.iteration).toBe(2);
    }
    expect(api.submitted).toEqual([
      { token: "tok-1", choice: "a" },
      { token: "tok-2", choice: "b" },
    ]);
  });

  it("ignores a second submit while one is pending", async () => {
    const api = new FakeApi();
    api.sessions.push(session());
    api.queries.push(makeQuery(1), makeQuery(2));
    let release: (value: PreferenceResult) => void = () => {};
    api.submitPreference = (token: string, choice: "a" | "b") => {
      api.submitted.push({ token, choice });
      return new Promise((resolve) => {
        release = resolve;
      });
    };
    const controller = new SessionController(api as never);
    await controller.start();
    const first = controller.submit("a");
    const second = controller.submit("b"); // rejected by the in-flight guard
    await second;
    expect(api.submitted).toHaveLength(1);
    release({ iteration: 1, done: false, estimate: [0.3, 0.4, 0.3] });
    await first;
    expect(controller.shownIterations).toEqual([1, 2]);
  });

  it("refreshes the live query on a 409 conflict", async () => {
    const api = new FakeApi();
    api.sessions.push(session(), session({ iteration: 1 }));
    api.queries.push(makeQuery(1), makeQuery(2));
    api.preferences.push(new ApiError(409, "stale or unknown query token"));
    const controller = new SessionController(api as never);
    await controller.start();
    await controller.submit("a");
    const view = controller.current();
    expect(view.phase).toBe("query");
    if (view.phase === "query") expect(view.query.iteration).toBe(2);
  });

  it("surfaces a bug-report prompt on 400", async () => {
    const api = new FakeApi();
    api.sessions.push(session());
    api.queries.push(makeQuery(1));
    api.preferences.push(new ApiError(400, "malformed request body"));
    const controller = new SessionController(api as never);
    await controller.start();
    await controller.submit("a");
    const view = controller.current();
    expect(view.phase).toBe("error");
    if (view.phase === "error") {
      expect(view.bugReport).toBe(true);
      expect(view.canRetry).toBe(false);
    }
  });

  it("shows a retryable banner on network failure without a partial render", async () => {
    const api = new FakeApi();
    api.sessions.push(session(), session());
    api.queries.push(new ApiError(503, "unreachable"), makeQuery(1));
    const controller = new SessionController(api as never);
    await controller.start();
    let view = controller.current();
    expect(view.phase).toBe("error");
    if (view.phase === "error") expect(view.canRetry).toBe(true);
    await controller.retry();
    view = controller.current();
    expect(view.phase).toBe("query");
  });

  it("goes straight to the completion screen for finished sessions", async () => {
    const api = new FakeApi();
    api.sessions.push(session({ done: true, iteration: 5, estimate: [0.1, 0.8, 0.1] }));
    const controller = new SessionController(api as never);
    await controller.start();
    expect(controller.current().phase).toBe("done");
  });
});
