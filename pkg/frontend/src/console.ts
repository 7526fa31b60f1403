// Controller: one live session stream reduced into a view, plus the
// operator gestures (pin current token, pause/resume, edit, export).

import { SessionApi } from "./api.js";
import { addPinLine } from "./form.js";
import { connectSessionStream, type StreamHandle } from "./sse.js";
import { applyEvent, StreamGapError } from "./state.js";
import type { ConsoleSessionView, SessionEvent } from "./types.js";

export class NotPausedError extends Error {
  readonly code = "E_NOT_PAUSED";
}

/**
 * Pin the token currently shown at `position`. If the session is running,
 * the console issues the pause itself so the gesture stays one click; the
 * edit goes through the documented constraints endpoint.
 */
export async function pinCurrentToken(
  api: SessionApi,
  view: ConsoleSessionView,
  position: number,
  autoPause = true,
): Promise<string> {
  const cell = view.grid[position];
  if (cell === undefined) {
    throw new Error(`no position ${position}`);
  }
  if (cell.pinned) {
    throw new Error(`position ${position} is already pinned`);
  }
  if (view.status === "running") {
    if (!autoPause) {
      throw new NotPausedError("pause the session before pinning");
    }
    await api.control(view.sessionId, { command: "pause" });
  }
  const paused = await api.getSession(view.sessionId);
  const surface = paused.text.split(" ")[position];
  if (surface === undefined) {
    throw new Error(`no token at position ${position}`);
  }
  const spec = addPinLine(paused.spec, position, surface);
  await api.putConstraints(view.sessionId, spec);
  return spec;
}

export interface ConsoleController {
  readonly view: ConsoleSessionView | null;
  stop(): void;
  done: Promise<void>;
}

/**
 * Attach to a session stream and keep a view current. Gaps trigger an
 * automatic reconnect; the server's snapshot-first contract makes the
 * reconnect a resnapshot.
 */
export function attachConsole(
  api: SessionApi,
  sessionId: string,
  onView: (view: ConsoleSessionView) => void,
  fetchImpl?: (u: string, init?: RequestInit) => Promise<Response>,
): ConsoleController {
  let view: ConsoleSessionView | null = null;
  let handle: StreamHandle;

  const callbacks = {
    onEvent(event: SessionEvent) {
      view = applyEvent(view, event); // StreamGapError propagates: stream reconnects
      onView(view);
    },
    onError(error: unknown) {
      if (error instanceof StreamGapError) {
        view = null; // next snapshot rebuilds the grid from scratch
      }
    },
  };
  handle = connectSessionStream(api.streamUrl(sessionId), callbacks, fetchImpl);

  return {
    get view() {
      return view;
    },
    stop: () => handle.stop(),
    done: handle.done,
  };
}
