/** DOM control builders.  All handlers go through the view model; nothing
 * here mutates displayed values directly. */

import { PanelViewModel, detentLabel } from "./model.js";

const MODES = [
  "manual_delay",
  "auto_distance",
  "periodic_sine",
  "periodic_triangle",
  "periodic_square",
];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function fieldErrorNote(model: PanelViewModel, field: string): HTMLElement {
  const note = el("div", "field-error");
  note.dataset.field = field;
  const reason = model.validation.get(field);
  note.textContent = reason ?? "";
  note.style.display = reason ? "block" : "none";
  return note;
}

export function renderBanner(model: PanelViewModel): HTMLElement {
  const banner = el("div", "banner");
  if (model.connection !== "open") {
    banner.textContent = "disconnected from control service";
    banner.classList.add("banner-error");
  } else if (model.networkError) {
    banner.textContent = "request failed; check the connection and retry";
    banner.classList.add("banner-error");
    const retry = el("button", "retry", "retry");
    retry.onclick = () => model.retry();
    banner.append(" ", retry);
  } else {
    banner.style.display = "none";
  }
  return banner;
}

export function renderTrigger(model: PanelViewModel): HTMLElement {
  const wrap = el("div", "control trigger-wrap");
  const button = el("button", "trigger", "hold to jam");
  button.disabled = !model.controlsEnabled();
  // press-and-hold: jamming runs only while the pointer is down
  button.onpointerdown = () => void model.setTriggerPressed(true);
  button.onpointerup = () => void model.setTriggerPressed(false);
  button.onpointerleave = () => {
    if (model.confirmed?.device.trigger_pressed) {
      void model.setTriggerPressed(false);
    }
  };
  const indicator = el(
    "span",
    model.mutedIndicator() ? "mute-indicator muted" : "mute-indicator live",
    model.mutedIndicator() ? "muted" : "LIVE",
  );
  wrap.append(button, indicator);
  return wrap;
}

export function renderRotary(model: PanelViewModel): HTMLElement {
  const wrap = el("fieldset", "control rotary");
  wrap.append(el("legend", undefined, "delay detent"));
  const current = model.confirmed?.device.rotary;
  for (let position = 0; position < 8; position += 1) {
    const label = el("label", "detent");
    const radio = el("input");
    radio.type = "radio";
    radio.name = "rotary";
    radio.value = String(position);
    radio.checked = position === current;
    radio.disabled = !model.controlsEnabled();
    radio.onchange = () => void model.applyChange("rotary", position);
    label.append(radio, ` ${detentLabel(position)}`);
    wrap.append(label);
  }
  wrap.append(fieldErrorNote(model, "rotary"));
  return wrap;
}

export function renderModeSelect(model: PanelViewModel): HTMLElement {
  const wrap = el("div", "control mode");
  const select = el("select");
  for (const mode of MODES) {
    const option = el("option", undefined, mode.replace("_", " "));
    option.value = mode;
    select.append(option);
  }
  select.value = model.confirmed?.device.mode ?? MODES[0];
  select.disabled = !model.controlsEnabled();
  select.onchange = () => void model.applyChange("mode", select.value);
  wrap.append(el("label", undefined, "mode "), select, fieldErrorNote(model, "mode"));
  return wrap;
}

function numberInput(
  model: PanelViewModel,
  field: string,
  label: string,
  value: number | undefined,
  step: string,
): HTMLElement {
  const wrap = el("div", "control");
  const input = el("input");
  input.type = "number";
  input.step = step;
  input.value = value !== undefined ? String(value) : "";
  input.disabled = !model.controlsEnabled();
  input.onchange = () => void model.applyChange(field, Number(input.value));
  wrap.append(el("label", undefined, `${label} `), input, fieldErrorNote(model, field));
  return wrap;
}

function gainSlider(
  model: PanelViewModel,
  field: string,
  label: string,
  value: number | undefined,
): HTMLElement {
  const wrap = el("div", "control gain");
  const slider = el("input");
  slider.type = "range";
  slider.min = "-60";
  slider.max = "24";
  slider.step = "0.5";
  slider.value = value !== undefined ? String(value) : "0";
  slider.disabled = !model.controlsEnabled();
  slider.onchange = () => void model.applyChange(field, Number(slider.value));
  const readout = el("span", "readout", `${value ?? 0} dB`);
  wrap.append(el("label", undefined, `${label} `), slider, readout,
              fieldErrorNote(model, field));
  return wrap;
}

export function renderEnvironment(model: PanelViewModel): HTMLElement {
  const device = model.confirmed?.device;
  const wrap = el("fieldset", "control environment");
  wrap.append(el("legend", undefined, "target"));
  wrap.append(
    numberInput(model, "distance_m", "distance (m)", device?.measured_distance_m, "0.1"),
    numberInput(model, "d_daf_target_s", "target delay (s)", device?.d_daf_target_s, "0.01"),
    numberInput(model, "temperature_c", "temperature (C)", device?.temperature_c, "0.5"),
  );
  const hint = model.maxDistanceHint();
  if (hint) {
    wrap.append(el("div", "hint", hint));
  }
  const warning = model.distanceWarning();
  if (warning) {
    wrap.append(el("div", "warning", warning));
  }
  return wrap;
}

export function renderGains(model: PanelViewModel): HTMLElement {
  const device = model.confirmed?.device;
  const wrap = el("fieldset", "control gains");
  wrap.append(el("legend", undefined, "gain"));
  wrap.append(
    gainSlider(model, "input_gain_db", "input", device?.input_gain_db),
    gainSlider(model, "output_gain_db", "output", device?.output_gain_db),
  );
  return wrap;
}

export function renderModulationEditor(model: PanelViewModel): HTMLElement {
  const device = model.confirmed?.device;
  const wrap = el("fieldset", "control modulation");
  wrap.append(el("legend", undefined, "periodic schedule"));
  wrap.append(
    numberInput(model, "periodic_base_s", "base (s)", device?.periodic_base_s, "0.01"),
    numberInput(model, "periodic_amplitude_s", "depth (s)", device?.periodic_amplitude_s, "0.01"),
    numberInput(model, "periodic_frequency_hz", "rate (Hz)", device?.periodic_frequency_hz, "0.1"),
  );
  if (model.confirmed?.clamped) {
    wrap.append(el("div", "hint", "values clamped into the 9.2..192 ms range"));
  }
  return wrap;
}

export function renderControls(model: PanelViewModel, root: HTMLElement): void {
  root.replaceChildren(
    renderBanner(model),
    renderTrigger(model),
    renderRotary(model),
    renderModeSelect(model),
    renderEnvironment(model),
    renderGains(model),
    renderModulationEditor(model),
  );
}
