// DOM rendering. No state lives here: every render is a pure pass over the
// current view, and every control fires a request handled elsewhere.

import type { ConsoleSessionView } from "./types.js";

export interface Handlers {
  onPin(position: number): void;
  onStart(): void;
  onPause(): void;
  onStep(n: number): void;
  onReset(): void;
  onEditSpec(spec: string): void;
  onExport(): void;
}

function sparkline(values: number[], width = 220, height = 40): string {
  if (values.length === 0) {
    return "";
  }
  const min = Math.min(...values);
  const max = Math.max(...values);
  const span = max - min || 1;
  const step = values.length > 1 ? width / (values.length - 1) : 0;
  const points = values
    .map((v, i) => `${(i * step).toFixed(1)},${(height - ((v - min) / span) * height).toFixed(1)}`)
    .join(" ");
  return (
    `<svg viewBox="0 0 ${width} ${height}" class="spark" preserveAspectRatio="none">` +
    `<polyline points="${points}" fill="none" stroke="currentColor" stroke-width="1.2"/></svg>`
  );
}

function esc(text: string): string {
  return text.replace(/[&<>"]/g, (c) => ({ "&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;" }[c] as string));
}

export function renderConsole(root: HTMLElement, view: ConsoleSessionView, handlers: Handlers): void {
  const canEdit = view.status === "idle" || view.status === "paused";
  const cells = view.grid
    .map((cell, position) => {
      const pinClass = cell.pinned ? "pinned" : "";
      const pinButton = cell.pinned
        ? `<button class="pin" disabled>pinned</button>`
        : `<button class="pin" data-pin="${position}">pin</button>`;
      return (
        `<div class="cell ${pinClass}">` +
        `<div class="surface">${esc(cell.surface)}</div>` +
        `<div class="meta">#${position} &middot; step ${cell.lastChanged}</div>` +
        pinButton +
        `</div>`
      );
    })
    .join("");

  root.innerHTML = `
    <div class="session">
      <div class="bar">
        <span class="badge ${view.status}">${view.status}</span>
        <span class="sid">${esc(view.sessionId)}</span>
        <span class="step">step ${view.step} &middot; emission ${view.emissionIndex}</span>
        <span class="controls">
          <button data-act="start" ${view.status === "running" ? "disabled" : ""}>start</button>
          <button data-act="pause" ${view.status !== "running" ? "disabled" : ""}>pause</button>
          <button data-act="step" ${canEdit ? "" : "disabled"}>step 10</button>
          <button data-act="reset">reset</button>
          <button data-act="export">export</button>
        </span>
      </div>
      ${view.error ? `<div class="error">${esc(view.error)}</div>` : ""}
      <div class="grid">${cells}</div>
      <div class="traces">
        <div><h3>energy ${view.energy.toFixed(3)}</h3>${sparkline(view.energyTrace)}</div>
        <div><h3>acceptance ${view.acceptRate.toFixed(3)}</h3>${sparkline(view.acceptTrace)}</div>
      </div>
      <div class="constraints">
        <h3>constraints</h3>
        <ul>${view.constraints.map((line) => `<li><code>${esc(line)}</code></li>`).join("")}</ul>
        <textarea class="spec" rows="6" ${canEdit ? "" : "disabled"}>${esc(view.spec)}</textarea>
        <button data-act="edit" ${canEdit ? "" : "disabled"}>apply constraints</button>
      </div>
    </div>`;

  root.querySelectorAll<HTMLButtonElement>("button[data-pin]").forEach((button) => {
    button.addEventListener("click", () => handlers.onPin(Number(button.dataset.pin)));
  });
  const act = (name: string, fn: () => void) => {
    const button = root.querySelector<HTMLButtonElement>(`button[data-act="${name}"]`);
    button?.addEventListener("click", fn);
  };
  act("start", handlers.onStart);
  act("pause", handlers.onPause);
  act("step", () => handlers.onStep(10));
  act("reset", handlers.onReset);
  act("export", handlers.onExport);
  act("edit", () => {
    const spec = root.querySelector<HTMLTextAreaElement>("textarea.spec")?.value ?? "";
    handlers.onEditSpec(spec);
  });
}
