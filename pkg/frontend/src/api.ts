import type {
  Choice,
  PosteriorPayload,
  PreferenceResult,
  QueryPayload,
  SessionPayload,
} from "./types.js";

/** Error carrying the HTTP status so the UI can branch on 409 vs 400. */
export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function parseOrThrow<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

/** Typed client for the elicitation service; the sole mutation is submitPreference. */
export class ElicitationApi {
  constructor(private baseUrl: string) {}

  getSession(): Promise<SessionPayload> {
    return fetch(`${this.baseUrl}/session`).then((r) => parseOrThrow<SessionPayload>(r));
  }

  getQuery(): Promise<QueryPayload> {
    return fetch(`${this.baseUrl}/query`).then((r) => parseOrThrow<QueryPayload>(r));
  }

  getPosterior(): Promise<PosteriorPayload> {
    return fetch(`${this.baseUrl}/posterior`).then((r) =>
      parseOrThrow<PosteriorPayload>(r),
    );
  }

  submitPreference(token: string, choice: Choice): Promise<PreferenceResult> {
    return fetch(`${this.baseUrl}/preference`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ token, choice }),
    }).then((r) => parseOrThrow<PreferenceResult>(r));
  }
}
