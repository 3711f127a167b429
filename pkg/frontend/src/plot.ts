/** Telemetry chart: pure coordinate mapping, then a thin canvas painter.
 *
 * The mapping functions carry the payload values through untouched so the
 * plotted numbers equal the telemetry; only the final pixel projection
 * quantizes.
 */

import type { MuteSpan } from "./model.js";
import type { TelemetryFrame } from "./types.js";

export interface PlotPoint {
  x: number;
  y: number;
}

export interface Viewport {
  width: number;
  height: number;
}

export interface TimeWindow {
  start_s: number;
  end_s: number;
}

export function timeWindow(frames: readonly TelemetryFrame[]): TimeWindow {
  if (!frames.length) {
    return { start_s: 0, end_s: 1 };
  }
  const start = frames[0].wall_time_s;
  const end = frames[frames.length - 1].wall_time_s;
  return { start_s: start, end_s: end > start ? end : start + 1 };
}

function xAt(t: number, window: TimeWindow, width: number): number {
  return ((t - window.start_s) / (window.end_s - window.start_s)) * width;
}

export function delayPolyline(
  frames: readonly TelemetryFrame[],
  viewport: Viewport,
  domainMs: readonly [number, number],
): PlotPoint[] {
  const window = timeWindow(frames);
  const [lo, hi] = domainMs;
  return frames.map((frame) => ({
    x: xAt(frame.wall_time_s, window, viewport.width),
    y: viewport.height * (1 - (frame.instantaneous_delay_ms - lo) / (hi - lo)),
  }));
}

export function levelPolyline(
  frames: readonly TelemetryFrame[],
  viewport: Viewport,
  pick: (frame: TelemetryFrame) => number,
  floorDb = -120,
  ceilDb = 6,
): PlotPoint[] {
  const window = timeWindow(frames);
  return frames.map((frame) => {
    const db = Math.min(ceilDb, Math.max(floorDb, pick(frame)));
    return {
      x: xAt(frame.wall_time_s, window, viewport.width),
      y: viewport.height * (1 - (db - floorDb) / (ceilDb - floorDb)),
    };
  });
}

export function muteBands(
  spans: readonly MuteSpan[],
  frames: readonly TelemetryFrame[],
  width: number,
): Array<{ x0: number; x1: number }> {
  const window = timeWindow(frames);
  return spans.map((span) => ({
    x0: xAt(span.start_s, window, width),
    x1: xAt(span.end_s, window, width),
  }));
}

function stroke(
  ctx: CanvasRenderingContext2D,
  points: readonly PlotPoint[],
  color: string,
): void {
  if (points.length < 2) {
    return;
  }
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ctx.moveTo(points[0].x, points[0].y);
  for (const point of points.slice(1)) {
    ctx.lineTo(point.x, point.y);
  }
  ctx.stroke();
}

export function renderDelayPlot(
  canvas: HTMLCanvasElement,
  frames: readonly TelemetryFrame[],
  domainMs: readonly [number, number],
  spans: readonly MuteSpan[],
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) {
    return;
  }
  const viewport = { width: canvas.width, height: canvas.height };
  ctx.clearRect(0, 0, viewport.width, viewport.height);

  ctx.fillStyle = "rgba(128, 128, 128, 0.25)";
  for (const band of muteBands(spans, frames, viewport.width)) {
    ctx.fillRect(band.x0, 0, Math.max(1, band.x1 - band.x0), viewport.height);
  }

  // horizontal guides every 50 ms
  ctx.strokeStyle = "rgba(0, 0, 0, 0.12)";
  ctx.lineWidth = 1;
  for (let ms = 0; ms <= domainMs[1]; ms += 50) {
    const y = viewport.height * (1 - (ms - domainMs[0]) / (domainMs[1] - domainMs[0]));
    ctx.beginPath();
    ctx.moveTo(0, y);
    ctx.lineTo(viewport.width, y);
    ctx.stroke();
  }

  stroke(ctx, delayPolyline(frames, viewport, domainMs), "#0a6cff");
}

export function renderLevelPlot(
  canvas: HTMLCanvasElement,
  frames: readonly TelemetryFrame[],
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) {
    return;
  }
  const viewport = { width: canvas.width, height: canvas.height };
  ctx.clearRect(0, 0, viewport.width, viewport.height);
  stroke(ctx, levelPolyline(frames, viewport, (f) => f.rms_in_db), "#3c9d46");
  stroke(ctx, levelPolyline(frames, viewport, (f) => f.rms_out_db), "#c2401e");
}
