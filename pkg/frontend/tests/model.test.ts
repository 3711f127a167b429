import { describe, expect, it } from "vitest";

import type { ApiClient } from "../src/api.js";
import {
  PLOT_MIN_DOMAIN_MS,
  PanelViewModel,
  ROTARY_DETENT_MS,
  TELEMETRY_RING_CAPACITY,
  detentLabel,
} from "../src/model.js";
import { FieldError } from "../src/types.js";
import type { StateJson, TelemetryFrame } from "../src/types.js";

function baseState(overrides: Partial<StateJson["device"]> = {}): StateJson {
  const device = {
    rotary: 0,
    mode: "manual_delay",
    trigger_pressed: false,
    laser_on: false,
    measured_distance_m: 0,
    d_daf_target_s: 0.2,
    temperature_c: 20,
    input_gain_db: 0,
    output_gain_db: 0,
    periodic_base_s: 0.1,
    periodic_amplitude_s: 0.05,
    periodic_frequency_hz: 1,
    ...overrides,
  };
  return {
    device,
    engine_config: { sample_rate_hz: 48000, max_delay_s: 2 },
    running: true,
    source: { kind: "live_stub" },
    telemetry_seq: 0,
    params: {
      modulation: { kind: "fixed", base_s: 0.0092, amplitude_s: 0, frequency_hz: 0 },
      gains: { input_gain_db: 0, output_gain_db: 0, muted: !device.trigger_pressed },
      environment: { temperature_c: 20, distance_m: 0 },
      path: "round_trip",
      epoch_s: 0,
    },
    clamped: false,
    version: 1,
  };
}

function frame(overrides: Partial<TelemetryFrame> = {}): TelemetryFrame {
  return {
    seq: 1,
    wall_time_s: 0,
    instantaneous_delay_ms: 100,
    muted: true,
    rms_in_db: -20,
    rms_out_db: -120,
    distance_m: 0,
    clamped: false,
    ...overrides,
  };
}

interface FakeOptions {
  patchImpl?: (patch: Record<string, unknown>) => Promise<StateJson>;
  physicsMax?: number;
}

function fakeClient(options: FakeOptions = {}) {
  const calls: Array<Record<string, unknown>> = [];
  let inFlight = 0;
  let maxInFlight = 0;
  const client = {
    async getState() {
      return baseState();
    },
    async patchParams(patch: Record<string, unknown>) {
      calls.push(patch);
      inFlight += 1;
      maxInFlight = Math.max(maxInFlight, inFlight);
      try {
        if (options.patchImpl) {
          return await options.patchImpl(patch);
        }
        return baseState(patch as Partial<StateJson["device"]>);
      } finally {
        inFlight -= 1;
      }
    },
    async trigger(pressed: boolean) {
      return { pressed, muted: !pressed };
    },
    async physics() {
      return {
        v_mps: 343.7,
        artificial_delay_s: 0.2,
        max_distance_m: options.physicsMax ?? 34.37,
      };
    },
    connectTelemetry() {
      return () => undefined;
    },
  };
  return {
    client: client as unknown as ApiClient,
    calls,
    maxInFlight: () => maxInFlight,
  };
}

const tick = () => new Promise((resolve) => setTimeout(resolve, 0));

describe("rotary detents", () => {
  it("has 8 positions with exact endpoints", () => {
    expect(ROTARY_DETENT_MS).toHaveLength(8);
    expect(ROTARY_DETENT_MS[0]).toBe(9.2);
    expect(ROTARY_DETENT_MS[7]).toBe(192);
  });

  it("labels match the printed dial", () => {
    const labels = Array.from({ length: 8 }, (_, p) => detentLabel(p));
    expect(labels).toEqual([
      "9.2 ms", "35.3 ms", "61.4 ms", "87.5 ms",
      "113.7 ms", "139.8 ms", "165.9 ms", "192 ms",
    ]);
  });
});

describe("telemetry ring", () => {
  it("keeps only the newest 600 frames", () => {
    const model = new PanelViewModel(fakeClient().client);
    for (let seq = 1; seq <= 700; seq += 1) {
      model.pushFrame(frame({ seq, wall_time_s: seq / 10 }));
    }
    expect(model.frames).toHaveLength(TELEMETRY_RING_CAPACITY);
    expect(model.frames[0].seq).toBe(101);
    expect(model.latestFrame()?.seq).toBe(700);
  });

  it("plot domain always covers the delay-chip range", () => {
    const model = new PanelViewModel(fakeClient().client);
    expect(model.plotDomainMs()).toEqual([0, PLOT_MIN_DOMAIN_MS]);
    model.pushFrame(frame({ instantaneous_delay_ms: 38 }));
    expect(model.plotDomainMs()).toEqual([0, 200]);
    model.pushFrame(frame({ instantaneous_delay_ms: 450 }));
    expect(model.plotDomainMs()).toEqual([0, 450]);
  });

  it("series carries payload values verbatim", () => {
    const model = new PanelViewModel(fakeClient().client);
    model.pushFrame(frame({ wall_time_s: 1.5, instantaneous_delay_ms: 123.456 }));
    expect(model.delaySeries()).toEqual([{ t: 1.5, ms: 123.456 }]);
  });

  it("groups contiguous muted frames into spans", () => {
    const model = new PanelViewModel(fakeClient().client);
    const pattern = [true, true, false, true, false, false, true, true, true];
    pattern.forEach((muted, i) => {
      model.pushFrame(frame({ seq: i, wall_time_s: i, muted }));
    });
    expect(model.muteSpans()).toEqual([
      { start_s: 0, end_s: 1 },
      { start_s: 3, end_s: 3 },
      { start_s: 6, end_s: 8 },
    ]);
  });
});

describe("server-authoritative changes", () => {
  it("adopts exactly the server response on success", async () => {
    const fake = fakeClient();
    const model = new PanelViewModel(fake.client);
    await model.refreshState();
    await model.applyChange("rotary", 5);
    expect(fake.calls).toEqual([{ rotary: 5 }]);
    expect(model.confirmed?.device.rotary).toBe(5);
    expect(model.validation.size).toBe(0);
  });

  it("never shows an optimistic value while the patch is in flight", async () => {
    let release: (state: StateJson) => void = () => undefined;
    const fake = fakeClient({
      patchImpl: () => new Promise((resolve) => {
        release = resolve;
      }),
    });
    const model = new PanelViewModel(fake.client);
    await model.refreshState();
    const pending = model.applyChange("rotary", 7);
    await tick();
    expect(model.confirmed?.device.rotary).toBe(0); // still the confirmed state
    release(baseState({ rotary: 7 }));
    await pending;
    expect(model.confirmed?.device.rotary).toBe(7);
  });

  it("stores the field reason and reverts on 422", async () => {
    const fake = fakeClient({
      patchImpl: async () => {
        throw new FieldError("rotary", "out of range 0..7");
      },
    });
    const model = new PanelViewModel(fake.client);
    await model.refreshState();
    await model.applyChange("rotary", 9);
    expect(model.validation.get("rotary")).toBe("out of range 0..7");
    expect(model.confirmed?.device.rotary).toBe(0); // the revert
    expect(model.networkError).toBe(false);
  });

  it("clears a field's validation once a later patch succeeds", async () => {
    let failNext = true;
    const fake = fakeClient({
      patchImpl: async (patch) => {
        if (failNext) {
          failNext = false;
          throw new FieldError("rotary", "out of range 0..7");
        }
        return baseState(patch as Partial<StateJson["device"]>);
      },
    });
    const model = new PanelViewModel(fake.client);
    await model.refreshState();
    await model.applyChange("rotary", 9);
    expect(model.validation.has("rotary")).toBe(true);
    await model.applyChange("rotary", 3);
    expect(model.validation.has("rotary")).toBe(false);
  });

  it("serializes patches: at most one in flight", async () => {
    const fake = fakeClient({
      patchImpl: (patch) =>
        new Promise((resolve) =>
          setTimeout(() => resolve(baseState(patch as Partial<StateJson["device"]>)), 5),
        ),
    });
    const model = new PanelViewModel(fake.client);
    await model.refreshState();
    await Promise.all([
      model.applyChange("rotary", 1),
      model.applyChange("rotary", 2),
      model.applyChange("rotary", 3),
    ]);
    expect(fake.maxInFlight()).toBe(1);
    expect(fake.calls.map((c) => c.rotary)).toEqual([1, 2, 3]);
  });

  it("freezes controls and raises the retry banner on transport failure", async () => {
    const fake = fakeClient({
      patchImpl: async () => {
        throw new TypeError("network down");
      },
    });
    const model = new PanelViewModel(fake.client);
    await model.refreshState();
    model.connection = "open";
    expect(model.controlsEnabled()).toBe(true);
    await model.applyChange("rotary", 2);
    expect(model.networkError).toBe(true);
    expect(model.controlsEnabled()).toBe(false);
  });
});

describe("physics hint", () => {
  it("warns when the entered distance exceeds jamming reach", async () => {
    const fake = fakeClient({ physicsMax: 34.370000000000005 });
    const model = new PanelViewModel(fake.client);
    await model.refreshState();
    await tick();
    expect(model.distanceWarning()).toBeNull();
    model.confirmed = baseState({ measured_distance_m: 50 });
    expect(model.distanceWarning()).toBe("exceeds max 34.37 m");
    expect(model.maxDistanceHint()).toBe("max 34.37 m");
  });
});

describe("connection and mute", () => {
  it("controls stay disabled until the socket is open", async () => {
    const model = new PanelViewModel(fakeClient().client);
    expect(model.controlsEnabled()).toBe(false);
    await model.refreshState();
    expect(model.controlsEnabled()).toBe(false); // still connecting
    model.connection = "open";
    expect(model.controlsEnabled()).toBe(true);
    model.connection = "closed";
    expect(model.controlsEnabled()).toBe(false);
  });

  it("mute indicator follows the newest telemetry frame", async () => {
    const model = new PanelViewModel(fakeClient().client);
    await model.refreshState();
    expect(model.mutedIndicator()).toBe(true); // mirror says muted
    model.pushFrame(frame({ muted: false }));
    expect(model.mutedIndicator()).toBe(false);
    model.pushFrame(frame({ seq: 2, muted: true }));
    expect(model.mutedIndicator()).toBe(true);
  });
});
