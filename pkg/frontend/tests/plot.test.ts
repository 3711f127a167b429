import { describe, expect, it } from "vitest";

import { delayPolyline, muteBands, timeWindow } from "../src/plot.js";
import type { TelemetryFrame } from "../src/types.js";

function frame(seq: number, t: number, ms: number, muted = false): TelemetryFrame {
  return {
    seq,
    wall_time_s: t,
    instantaneous_delay_ms: ms,
    muted,
    rms_in_db: -20,
    rms_out_db: -20,
    distance_m: 0,
    clamped: false,
  };
}

describe("coordinate mapping", () => {
  it("is an affine map of the payload values, nothing resampled", () => {
    const frames = [frame(1, 0, 0), frame(2, 5, 100), frame(3, 10, 200)];
    const points = delayPolyline(frames, { width: 100, height: 50 }, [0, 200]);
    expect(points).toEqual([
      { x: 0, y: 50 },
      { x: 50, y: 25 },
      { x: 100, y: 0 },
    ]);
  });

  it("a flat trace maps to a horizontal line", () => {
    const frames = [frame(1, 0, 192), frame(2, 1, 192), frame(3, 2, 192)];
    const points = delayPolyline(frames, { width: 90, height: 60 }, [0, 200]);
    const ys = new Set(points.map((p) => p.y));
    expect(ys.size).toBe(1);
  });

  it("mute spans project onto x bands", () => {
    const frames = [frame(1, 0, 0), frame(2, 10, 0)];
    const bands = muteBands([{ start_s: 2.5, end_s: 5 }], frames, 100);
    expect(bands).toEqual([{ x0: 25, x1: 50 }]);
  });

  it("an empty ring yields a sane window", () => {
    expect(timeWindow([])).toEqual({ start_s: 0, end_s: 1 });
  });
});
