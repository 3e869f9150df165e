/** Page bootstrap: builds the console skeleton, wires the session
 * creation form, and connects controllers.  The same mount function
 * drives the browser page and the scripted tests, so the tests exercise
 * the real page.
 */

import { ApiClient } from "./api.js";
import { SessionController } from "./controller.js";
import { byId, el } from "./dom.js";
import { renderBanner } from "./panels.js";

export const PRESETS: Record<string, object> = {
  "tabletop (4 boxes)": {
    scenario: { kind: "tabletop", n_boxes: 4, seed: 42 },
    gateway: { backend: "oracle" },
    mode: "sequence",
    beta: 1.0,
    task_spec: {
      id: "console-tabletop",
      n_boxes: 4,
      instruction: "put the blue cube in the sink",
      goals: [{ kind: "in_zone", subject: "blue cube", target: "sink" }],
      seed: 42,
    },
  },
  "coffee (long horizon)": {
    scenario: { kind: "coffee", seed: 0 },
    gateway: { backend: "oracle" },
    mode: "sequence",
    beta: 1.0,
  },
  "supervisory (jog grid)": {
    scenario: { kind: "supervisory" },
    gateway: { backend: "supervisory_script" },
    mode: "sequence",
    beta: 1.0,
    latency_mean_s: 0.05,
    latency_jitter_s: 0.01,
    task_spec: {
      id: "console-jog",
      n_boxes: 0,
      instruction: "put the blue cube in the blue bowl",
      goals: [{ kind: "on", subject: "blue cube", target: "blue bowl" }],
      seed: 0,
    },
  },
};

const SKELETON = `
  <div id="banner" class="banner" style="display:none"></div>
  <header class="topbar">
    <label>service <input id="base-url" size="28"></label>
    <label>preset <select id="preset"></select></label>
    <button id="create-session">create session</button>
    <label>or connect to <input id="session-id" size="14" placeholder="session id"></label>
    <button id="connect-session">connect</button>
  </header>
  <details class="config-box"><summary>session config</summary>
    <textarea id="config-json" rows="12" cols="60"></textarea>
  </details>
  <div class="session-head">
    <span id="session-label">no session</span>
    <span id="status-chip" class="chip"></span>
    <span id="pipeline"></span>
  </div>
  <main class="columns">
    <section class="chat-column">
      <div id="transcript" class="transcript"></div>
      <form id="composer" class="composer">
        <div class="composer-label">Describe the task</div>
        <textarea class="composer-input" rows="2"></textarea>
        <button type="submit" class="composer-send" disabled>send</button>
      </form>
    </section>
    <section class="world-column">
      <h3>observation</h3>
      <div id="observation" class="observation"></div>
      <h3>workspace</h3>
      <div id="workspace" class="workspace"></div>
      <div id="supervisory-extras" style="display:none">
        <div class="latency-line">link latency: <span id="latency-readout"></span></div>
      </div>
      <div class="world-tools">
        <input id="perturb-object" size="12" placeholder="object id">
        <input id="perturb-zone" size="12" placeholder="new zone">
        <input id="perturb-step" size="6" placeholder="at step">
        <button id="perturb-apply">perturb</button>
        <button id="reset-world">reset world</button>
      </div>
    </section>
    <section class="detail-column">
      <h3>behavior</h3>
      <div id="behavior" class="behavior"></div>
      <h3>return ledger</h3>
      <div id="ledger" class="ledger"></div>
      <details open><summary>event stream</summary>
        <div id="event-log" class="event-log"></div>
      </details>
    </section>
  </main>
`;

export interface ConsoleHandle {
  root: HTMLElement;
  controller: SessionController | null;
  connectTo(sessionId: string): Promise<SessionController>;
}

export function mountConsole(root: HTMLElement, defaultBase: string): ConsoleHandle {
  root.innerHTML = SKELETON;
  const baseInput = byId<HTMLInputElement>(root, "base-url");
  baseInput.value = defaultBase;
  const preset = byId<HTMLSelectElement>(root, "preset");
  const configBox = byId<HTMLTextAreaElement>(root, "config-json");
  for (const name of Object.keys(PRESETS)) {
    const option = el("option");
    option.value = name;
    option.textContent = name;
    preset.appendChild(option);
  }
  const fillPreset = () => {
    configBox.value = JSON.stringify(PRESETS[preset.value], null, 2);
  };
  preset.addEventListener("change", fillPreset);
  fillPreset();

  const handle: ConsoleHandle = {
    root,
    controller: null,
    async connectTo(sessionId: string): Promise<SessionController> {
      handle.controller?.stop();
      const controller = new SessionController(
        new ApiClient(baseInput.value),
        sessionId,
        root,
      );
      handle.controller = controller;
      await controller.connect();
      return controller;
    },
  };

  byId<HTMLButtonElement>(root, "create-session").addEventListener("click", (eventObj) => {
    eventObj.preventDefault();
    void (async () => {
      let config: unknown;
      try {
        config = JSON.parse(configBox.value);
      } catch (error) {
        renderBanner(byId(root, "banner"), `config is not valid JSON: ${String(error)}`);
        return;
      }
      try {
        const created = await new ApiClient(baseInput.value).createSession(config);
        byId<HTMLInputElement>(root, "session-id").value = created.id;
        await handle.connectTo(created.id);
      } catch (error) {
        renderBanner(byId(root, "banner"), String(error));
      }
    })();
  });

  byId<HTMLButtonElement>(root, "connect-session").addEventListener("click", (eventObj) => {
    eventObj.preventDefault();
    void handle.connectTo(byId<HTMLInputElement>(root, "session-id").value.trim());
  });

  const composer = byId<HTMLFormElement>(root, "composer");
  const input = composer.querySelector(".composer-input") as HTMLTextAreaElement;
  input.addEventListener("input", () => handle.controller?.setDraft(input.value));
  composer.addEventListener("submit", (eventObj) => {
    eventObj.preventDefault();
    void handle.controller?.send();
  });

  byId<HTMLButtonElement>(root, "perturb-apply").addEventListener("click", (eventObj) => {
    eventObj.preventDefault();
    const stepRaw = byId<HTMLInputElement>(root, "perturb-step").value.trim();
    void handle.controller?.perturb(
      byId<HTMLInputElement>(root, "perturb-object").value.trim(),
      byId<HTMLInputElement>(root, "perturb-zone").value.trim(),
      stepRaw === "" ? null : Number(stepRaw),
    );
  });
  byId<HTMLButtonElement>(root, "reset-world").addEventListener("click", (eventObj) => {
    eventObj.preventDefault();
    void handle.controller?.resetWorld();
  });

  return handle;
}

declare global {
  interface Window {
    robochatConsole?: ConsoleHandle;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  const origin = typeof location !== "undefined" ? location.origin : "http://127.0.0.1:8000";
  window.robochatConsole = mountConsole(
    document.getElementById("app") as HTMLElement,
    origin.startsWith("file") ? "http://127.0.0.1:8000" : origin,
  );
}
