// Entry point: session picker + live console wired to the service.

import { ApiError, SessionApi } from "./api.js";
import { attachConsole, pinCurrentToken, type ConsoleController } from "./console.js";
import { renderSpec, validateForm, type ConstraintForm } from "./form.js";
import { renderConsole } from "./render.js";

const api = new SessionApi("");
const picker = document.getElementById("picker") as HTMLElement;
const consoleRoot = document.getElementById("console") as HTMLElement;
const noticeBox = document.getElementById("notice") as HTMLElement;

let controller: ConsoleController | null = null;

function notice(message: string): void {
  noticeBox.textContent = message;
  if (message) {
    setTimeout(() => {
      if (noticeBox.textContent === message) {
        noticeBox.textContent = "";
      }
    }, 6000);
  }
}

async function guard<T>(action: () => Promise<T>): Promise<T | undefined> {
  try {
    return await action();
  } catch (error) {
    if (error instanceof ApiError) {
      const where = error.position !== undefined ? ` (position ${error.position})` : "";
      notice(`${error.code}: ${error.message}${where}`);
    } else {
      notice(String(error));
    }
    return undefined;
  }
}

function openSession(sessionId: string): void {
  controller?.stop();
  controller = attachConsole(api, sessionId, (view) => {
    renderConsole(consoleRoot, view, {
      onPin: (position) => void guard(() => pinCurrentToken(api, view, position)),
      onStart: () => void guard(() => api.control(sessionId, { command: "start" })),
      onPause: () => void guard(() => api.control(sessionId, { command: "pause" })),
      onStep: (n) => void guard(() => api.control(sessionId, { command: "step", n })),
      onReset: () => void guard(() => api.control(sessionId, { command: "reset" })),
      onEditSpec: (spec) => void guard(() => api.putConstraints(sessionId, spec)),
      onExport: () => {
        window.open(`${api.baseUrl}/sessions/${sessionId}/export`, "_blank");
      },
    });
  });
}

async function refreshSessions(): Promise<void> {
  const sessions = (await guard(() => api.listSessions())) ?? [];
  const list = picker.querySelector(".sessions") as HTMLElement;
  list.innerHTML = sessions
    .map(
      (s) =>
        `<button class="session-link" data-sid="${s.id}">` +
        `${s.id} &middot; ${s.status} &middot; l=${s.length}</button>`,
    )
    .join("");
  list.querySelectorAll<HTMLButtonElement>("button[data-sid]").forEach((button) => {
    button.addEventListener("click", () => openSession(button.dataset.sid as string));
  });
}

function readForm(): ConstraintForm {
  const int = (id: string) => Number((picker.querySelector(`#${id}`) as HTMLInputElement).value);
  const str = (id: string) => (picker.querySelector(`#${id}`) as HTMLInputElement).value.trim();
  const form: ConstraintForm = { length: int("f-length") };
  if (str("f-pin-surface")) {
    form.pins = [{ position: int("f-pin-pos"), surface: str("f-pin-surface") }];
  }
  if (str("f-lipogram")) {
    form.lipogramLetters = str("f-lipogram");
  }
  if (str("f-rhyme-suffix")) {
    form.rhymes = [{ position: int("f-rhyme-pos"), suffix: str("f-rhyme-suffix") }];
  }
  return form;
}

function refreshFormPreview(): void {
  const preview = picker.querySelector("#f-preview") as HTMLElement;
  const create = picker.querySelector("#create") as HTMLButtonElement;
  const form = readForm();
  const errors = validateForm(form);
  if (errors.length > 0) {
    preview.textContent = errors.map((e) => `${e.field}: ${e.message}`).join("\n");
    create.disabled = true;
  } else {
    preview.textContent = renderSpec(form);
    create.disabled = false;
  }
}

function wirePicker(): void {
  picker.innerHTML = `
    <div class="create">
      <label>length <input id="f-length" type="number" value="" placeholder="5" /></label>
      <label>lipogram <input id="f-lipogram" placeholder="letters" size="6" /></label>
      <label>pin <input id="f-pin-pos" type="number" value="0" size="3" />
        <input id="f-pin-surface" placeholder="surface" size="10" /></label>
      <label>rhyme <input id="f-rhyme-pos" type="number" value="0" size="3" />
        <input id="f-rhyme-suffix" placeholder="suffix" size="6" /></label>
      <label>provider <input id="new-provider" value="toy" size="8" /></label>
      <label>seed <input id="new-seed" type="number" value="0" size="6" /></label>
      <button id="create" disabled>new session</button>
      <button id="refresh">refresh</button>
    </div>
    <pre id="f-preview" class="preview"></pre>
    <div class="sessions"></div>`;
  picker.querySelectorAll("input").forEach((input) => {
    input.addEventListener("input", refreshFormPreview);
  });
  refreshFormPreview(); // empty form: submit starts disabled
  (picker.querySelector("#create") as HTMLButtonElement).addEventListener("click", async () => {
    const provider = (picker.querySelector("#new-provider") as HTMLInputElement).value;
    const seed = Number((picker.querySelector("#new-seed") as HTMLInputElement).value) || 0;
    let spec: string;
    try {
      spec = renderSpec(readForm()); // server remains the sole spec validator
    } catch (error) {
      notice(String(error));
      return;
    }
    const session = await guard(() => api.createSession(spec, provider, { rng_seed: seed }));
    if (session) {
      await refreshSessions();
      openSession(session.id);
    }
  });
  (picker.querySelector("#refresh") as HTMLButtonElement).addEventListener("click", () => {
    void refreshSessions();
  });
}

wirePicker();
void refreshSessions();
