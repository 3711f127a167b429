/** JSON shapes exchanged with the control service. */

export interface ModulationJson {
  kind: string;
  base_s: number;
  amplitude_s: number;
  frequency_hz: number;
}

export interface GainsJson {
  input_gain_db: number;
  output_gain_db: number;
  muted: boolean;
}

export interface ParamsJson {
  modulation: ModulationJson;
  gains: GainsJson;
  environment: { temperature_c: number; distance_m: number };
  path: string;
  epoch_s: number;
}

export interface DeviceJson {
  rotary: number;
  mode: string;
  trigger_pressed: boolean;
  laser_on: boolean;
  measured_distance_m: number;
  d_daf_target_s: number;
  temperature_c: number;
  input_gain_db: number;
  output_gain_db: number;
  periodic_base_s: number;
  periodic_amplitude_s: number;
  periodic_frequency_hz: number;
}

export interface StateJson {
  device: DeviceJson;
  engine_config: { sample_rate_hz: number; max_delay_s: number };
  running: boolean;
  source: { kind: string; [key: string]: unknown };
  telemetry_seq: number;
  params: ParamsJson;
  clamped: boolean;
  version: number;
}

export interface TelemetryFrame {
  seq: number;
  wall_time_s: number;
  instantaneous_delay_ms: number;
  muted: boolean;
  rms_in_db: number;
  rms_out_db: number;
  distance_m: number;
  clamped: boolean;
}

export interface PhysicsJson {
  v_mps: number;
  artificial_delay_s: number;
  max_distance_m: number;
}

/** A 422 from the service: one offending field plus the reason. */
export class FieldError extends Error {
  constructor(
    public readonly field: string,
    public readonly reason: string,
  ) {
    super(`${field}: ${reason}`);
    this.name = "FieldError";
  }
}
