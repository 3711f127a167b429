/** Thin client for the control service; the only backend contact the UI has.
 *
 * `fetch` and the WebSocket constructor are injectable so tests can run
 * against fakes or a node-side implementation.
 */

import { FieldError } from "./types.js";
import type { PhysicsJson, StateJson, TelemetryFrame } from "./types.js";

export interface WebSocketLike {
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: { code?: number }) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  close(): void;
}

export type WebSocketFactory = (url: string) => WebSocketLike;

export interface TelemetryHandlers {
  onFrame: (frame: TelemetryFrame) => void;
  onStatus: (status: "open" | "closed") => void;
}

async function raiseForStatus(response: Response): Promise<Response> {
  if (response.ok) {
    return response;
  }
  if (response.status === 422) {
    const body = await response.json().catch(() => null);
    if (body && typeof body.field === "string" && typeof body.reason === "string") {
      throw new FieldError(body.field, body.reason);
    }
  }
  throw new Error(`service error ${response.status}`);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = globalThis.fetch,
    private readonly wsFactory: WebSocketFactory = (url) =>
      new WebSocket(url) as unknown as WebSocketLike,
  ) {}

  private async requestJson(path: string, init?: RequestInit): Promise<unknown> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    await raiseForStatus(response);
    return response.json();
  }

  getState(): Promise<StateJson> {
    return this.requestJson("/api/state") as Promise<StateJson>;
  }

  patchParams(patch: Record<string, unknown>): Promise<StateJson> {
    return this.requestJson("/api/params", {
      method: "PATCH",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(patch),
    }) as Promise<StateJson>;
  }

  trigger(pressed: boolean): Promise<{ pressed: boolean; muted: boolean }> {
    return this.requestJson("/api/trigger", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ pressed }),
    }) as Promise<{ pressed: boolean; muted: boolean }>;
  }

  physics(query: {
    d_daf_s: number;
    temperature_c?: number;
    distance_m?: number;
    path?: string;
  }): Promise<PhysicsJson> {
    const search = new URLSearchParams();
    for (const [key, value] of Object.entries(query)) {
      if (value !== undefined) {
        search.set(key, String(value));
      }
    }
    return this.requestJson(`/api/physics?${search}`) as Promise<PhysicsJson>;
  }

  /** Open the telemetry socket; returns a function that closes it. */
  connectTelemetry(handlers: TelemetryHandlers): () => void {
    const wsUrl = this.baseUrl.replace(/^http/, "ws") + "/api/telemetry";
    const socket = this.wsFactory(wsUrl);
    socket.onopen = () => handlers.onStatus("open");
    socket.onmessage = (ev) => {
      handlers.onFrame(JSON.parse(String(ev.data)) as TelemetryFrame);
    };
    socket.onclose = () => handlers.onStatus("closed");
    socket.onerror = () => handlers.onStatus("closed");
    return () => socket.close();
  }
}
