// Console wiring: ?server=ws://host:port/ws selects the gateway endpoint.

import { PilotInput } from "./input.js";
import { TeleopLink } from "./net.js";
import { commandMessage, modeMessage, Mode } from "./protocol.js";
import { ConsoleRenderer } from "./render.js";
import { ConsoleStore } from "./store.js";
import { CommandScheduler } from "./throttle.js";

function serverUrl(): string {
  const param = new URLSearchParams(window.location.search).get("server");
  if (param) return param;
  return `ws://${window.location.host}/ws`;
}

function init(): void {
  const store = new ConsoleStore();
  const input = new PilotInput();
  const renderer = new ConsoleRenderer(document);

  const link = new TeleopLink(serverUrl(), {
    onState: (frame) => store.applyFrame(frame),
    onConnection: (state) => {
      store.setConnection(state);
      if (state === "live") scheduler.reset();
    },
    onError: (msg) => {
      store.lastError = msg;
      console.warn("server error:", msg);
    },
  });

  const scheduler = new CommandScheduler((cmd) => {
    if (link.send(commandMessage(cmd.surge, cmd.yaw))) store.setCommand(cmd);
  });

  const surgeSlider = document.getElementById("slider-surge") as HTMLInputElement;
  const yawSlider = document.getElementById("slider-yaw") as HTMLInputElement;
  const sliderEnable = document.getElementById("slider-enable") as HTMLInputElement;

  const applySliders = () => {
    if (sliderEnable.checked) {
      input.setSliders(parseFloat(surgeSlider.value), parseFloat(yawSlider.value));
    } else {
      input.clearSliders();
    }
  };
  surgeSlider.addEventListener("input", applySliders);
  yawSlider.addEventListener("input", applySliders);
  sliderEnable.addEventListener("change", applySliders);

  document.addEventListener("keydown", (ev) => {
    if ((ev.target as HTMLElement)?.tagName === "INPUT") return;
    if (input.keyDown(ev.key)) ev.preventDefault();
  });
  document.addEventListener("keyup", (ev) => {
    if (input.keyUp(ev.key)) ev.preventDefault();
  });
  window.addEventListener("blur", () => input.releaseAll());

  const holdEnable = document.getElementById("hold-enable") as HTMLInputElement;
  const holdSetpoint = document.getElementById("hold-setpoint") as HTMLInputElement;
  const sendMode = () => {
    const mode: Mode = holdEnable.checked ? "heading_hold" : "open_loop";
    const setpoint = parseFloat(holdSetpoint.value) || 0;
    if (link.send(modeMessage(mode, setpoint))) store.setMode(mode, setpoint);
  };
  holdEnable.addEventListener("change", sendMode);
  holdSetpoint.addEventListener("change", () => {
    if (holdEnable.checked) sendMode();
  });

  // command pump (<= 20 Hz sends inside the scheduler) and display loop
  setInterval(() => scheduler.update(input.command(), Date.now()), 25);
  const paint = () => {
    renderer.render(store);
    requestAnimationFrame(paint);
  };
  requestAnimationFrame(paint);

  link.connect();
}

init();
