/** Panel state: a mirror of the server session plus the telemetry ring.
 *
 * Strictly server-authoritative: the panel renders only states the service
 * has confirmed (a GET/PATCH response or a telemetry frame), never a locally
 * guessed one.  A jamming device should show what the hardware is doing, not
 * what the operator hoped.
 */

import type { ApiClient } from "./api.js";
import { FieldError } from "./types.js";
import type { PhysicsJson, StateJson, TelemetryFrame } from "./types.js";

export const TELEMETRY_RING_CAPACITY = 600; // 60 s at 10 Hz
export const PLOT_MIN_DOMAIN_MS = 200; // keep the full delay-chip range visible

const ROTARY_MIN_MS = 9.2;
const ROTARY_MAX_MS = 192.0;

/** Delay in ms for each of the 8 rotary detents (linear between endpoints). */
export const ROTARY_DETENT_MS: readonly number[] = Array.from(
  { length: 8 },
  (_, position) => {
    const p = position / 7;
    return ROTARY_MIN_MS * (1 - p) + ROTARY_MAX_MS * p;
  },
);

/** Label a detent the way the dial is printed, e.g. "192 ms". */
export function detentLabel(position: number): string {
  const ms = ROTARY_DETENT_MS[position];
  const rounded = Math.round(ms * 10) / 10;
  return `${rounded} ms`;
}

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface MuteSpan {
  start_s: number;
  end_s: number;
}

export class PanelViewModel {
  confirmed: StateJson | null = null;
  frames: TelemetryFrame[] = [];
  connection: ConnectionStatus = "connecting";
  /** Per-control reason strings from rejected patches. */
  validation = new Map<string, string>();
  /** Set when a request failed at the transport level; clears on success. */
  networkError = false;
  physicsHint: PhysicsJson | null = null;

  private queueTail: Promise<unknown> = Promise.resolve();
  private closeTelemetry: (() => void) | null = null;
  private listeners: Array<() => void> = [];

  constructor(private readonly client: ApiClient) {}

  subscribe(listener: () => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) {
      listener();
    }
  }

  /** Fetch the initial state and start consuming telemetry. */
  async start(): Promise<void> {
    await this.refreshState();
    this.connectTelemetry();
  }

  stop(): void {
    this.closeTelemetry?.();
    this.closeTelemetry = null;
  }

  retry(): void {
    this.stop();
    this.connection = "connecting";
    this.emit();
    void this.refreshState().catch(() => undefined);
    this.connectTelemetry();
  }

  private connectTelemetry(): void {
    this.closeTelemetry = this.client.connectTelemetry({
      onFrame: (frame) => this.pushFrame(frame),
      onStatus: (status) => {
        this.connection = status;
        this.emit();
      },
    });
  }

  async refreshState(): Promise<void> {
    try {
      this.adopt(await this.client.getState());
    } catch (error) {
      this.noteTransportError(error);
      throw error;
    }
  }

  private adopt(state: StateJson): void {
    this.confirmed = state;
    this.networkError = false;
    this.emit();
    void this.refreshPhysicsHint();
  }

  /** Max-distance hint for the current target and temperature, served by the
   * backend so the panel never invents physics of its own. */
  async refreshPhysicsHint(): Promise<void> {
    const device = this.confirmed?.device;
    if (!device) {
      return;
    }
    try {
      this.physicsHint = await this.client.physics({
        d_daf_s: device.d_daf_target_s,
        temperature_c: device.temperature_c,
      });
    } catch {
      this.physicsHint = null; // target itself out of range; nothing to hint
    }
    this.emit();
  }

  /** Inline warning when the entered distance is beyond jamming reach. */
  distanceWarning(): string | null {
    const device = this.confirmed?.device;
    const hint = this.physicsHint;
    if (!device || !hint) {
      return null;
    }
    if (device.measured_distance_m > hint.max_distance_m) {
      return `exceeds max ${round2(hint.max_distance_m)} m`;
    }
    return null;
  }

  maxDistanceHint(): string | null {
    return this.physicsHint ? `max ${round2(this.physicsHint.max_distance_m)} m` : null;
  }

  controlsEnabled(): boolean {
    return this.connection === "open" && !this.networkError && this.confirmed !== null;
  }

  /** Queue a single-field patch; at most one request is in flight.
   *
   * Resolves once reconciled: on acceptance the confirmed mirror is replaced
   * by the server's response, on rejection the reason lands in `validation`
   * and the mirror stays on the last confirmed state (the revert).
   */
  applyChange(field: string, value: unknown): Promise<void> {
    return this.enqueue(async () => {
      try {
        const state = await this.client.patchParams({ [field]: value });
        this.validation.delete(field);
        this.adopt(state);
      } catch (error) {
        if (error instanceof FieldError) {
          this.validation.set(error.field, error.reason);
          this.emit();
          return;
        }
        this.noteTransportError(error);
      }
    });
  }

  /** Press-and-hold trigger: call with true on press, false on release. */
  setTriggerPressed(pressed: boolean): Promise<void> {
    return this.enqueue(async () => {
      try {
        await this.client.trigger(pressed);
        this.adopt(await this.client.getState());
      } catch (error) {
        this.noteTransportError(error);
      }
    });
  }

  private enqueue(task: () => Promise<void>): Promise<void> {
    const run = this.queueTail.then(task, task);
    this.queueTail = run;
    return run;
  }

  private noteTransportError(error: unknown): void {
    if (error instanceof FieldError) {
      return;
    }
    this.networkError = true;
    this.emit();
  }

  pushFrame(frame: TelemetryFrame): void {
    this.frames.push(frame);
    if (this.frames.length > TELEMETRY_RING_CAPACITY) {
      this.frames.splice(0, this.frames.length - TELEMETRY_RING_CAPACITY);
    }
    this.emit();
  }

  latestFrame(): TelemetryFrame | null {
    return this.frames.length ? this.frames[this.frames.length - 1] : null;
  }

  /** Muted indicator follows telemetry when present, else the mirror. */
  mutedIndicator(): boolean {
    const frame = this.latestFrame();
    if (frame) {
      return frame.muted;
    }
    return this.confirmed?.params.gains.muted ?? true;
  }

  /** Plot y-domain in ms; never narrower than the delay chip's range. */
  plotDomainMs(): [number, number] {
    let top = PLOT_MIN_DOMAIN_MS;
    for (const frame of this.frames) {
      if (frame.instantaneous_delay_ms > top) {
        top = frame.instantaneous_delay_ms;
      }
    }
    return [0, top];
  }

  /** Telemetry values verbatim; any resampling happens at the pixel stage. */
  delaySeries(): Array<{ t: number; ms: number }> {
    return this.frames.map((f) => ({ t: f.wall_time_s, ms: f.instantaneous_delay_ms }));
  }

  /** Contiguous muted intervals, for shading behind the delay trace. */
  muteSpans(): MuteSpan[] {
    const spans: MuteSpan[] = [];
    let open: MuteSpan | null = null;
    for (const frame of this.frames) {
      if (frame.muted) {
        if (!open) {
          open = { start_s: frame.wall_time_s, end_s: frame.wall_time_s };
          spans.push(open);
        } else {
          open.end_s = frame.wall_time_s;
        }
      } else {
        open = null;
      }
    }
    return spans;
  }
}

function round2(x: number): number {
  return Math.round(x * 100) / 100;
}
