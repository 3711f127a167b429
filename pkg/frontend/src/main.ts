import { ApiClient } from "./api.js";
import { renderControls } from "./controls.js";
import { PanelViewModel } from "./model.js";
import { renderDelayPlot, renderLevelPlot } from "./plot.js";

const client = new ApiClient(window.location.origin);
const model = new PanelViewModel(client);

const controlsRoot = document.getElementById("controls") as HTMLElement;
const delayCanvas = document.getElementById("delay-plot") as HTMLCanvasElement;
const levelCanvas = document.getElementById("level-plot") as HTMLCanvasElement;

let scheduled = false;
model.subscribe(() => {
  if (scheduled) {
    return;
  }
  scheduled = true;
  requestAnimationFrame(() => {
    scheduled = false;
    renderControls(model, controlsRoot);
    renderDelayPlot(delayCanvas, model.frames, model.plotDomainMs(), model.muteSpans());
    renderLevelPlot(levelCanvas, model.frames);
  });
});

void model.start().catch(() => {
  // start() already surfaces the failure through the banner state
});
