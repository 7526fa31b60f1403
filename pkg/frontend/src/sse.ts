// Server-sent-events reader over fetch, plus a reconnecting session stream.
//
// Works in browsers and node (both expose fetch + web streams), unlike
// EventSource. The server prefixes every reconnect with a snapshot, so a
// reconnect is also the resnapshot.

import type { SessionEvent } from "./types.js";

export interface SseFrame {
  event: string;
  id: string | null;
  data: string;
}

/** Parse one SSE byte stream; invoke onFrame per event frame until EOF. */
export async function readSseStream(
  stream: ReadableStream<Uint8Array>,
  onFrame: (frame: SseFrame) => void | boolean,
): Promise<void> {
  const reader = stream.getReader();
  const decoder = new TextDecoder();
  let buffer = "";
  try {
    for (;;) {
      const { done, value } = await reader.read();
      if (done) {
        return;
      }
      buffer += decoder.decode(value, { stream: true });
      let boundary: number;
      while ((boundary = buffer.indexOf("\n\n")) >= 0) {
        const raw = buffer.slice(0, boundary);
        buffer = buffer.slice(boundary + 2);
        const frame = parseFrame(raw);
        if (frame !== null && onFrame(frame) === false) {
          return;
        }
      }
    }
  } finally {
    await reader.cancel().catch(() => undefined);
  }
}

function parseFrame(raw: string): SseFrame | null {
  let event = "message";
  let id: string | null = null;
  const data: string[] = [];
  for (const line of raw.split("\n")) {
    if (line.startsWith(":")) {
      continue; // keepalive comment
    }
    const colon = line.indexOf(":");
    if (colon < 0) {
      continue;
    }
    const field = line.slice(0, colon);
    const value = line.slice(colon + 1).replace(/^ /, "");
    if (field === "event") {
      event = value;
    } else if (field === "id") {
      id = value;
    } else if (field === "data") {
      data.push(value);
    }
  }
  if (data.length === 0) {
    return null;
  }
  return { event, id, data: data.join("\n") };
}

export interface StreamHandle {
  stop(): void;
  done: Promise<void>;
}

export interface StreamCallbacks {
  onEvent(event: SessionEvent): void;
  /** Called when a connection attempt or stream read fails; return false to stop. */
  onError?(error: unknown): void;
  onReconnect?(): void;
}

/**
 * Keep one live stream to a session, reconnecting (hence resnapshotting)
 * whenever the connection drops or the consumer reports a gap by throwing.
 */
export function connectSessionStream(
  url: string,
  callbacks: StreamCallbacks,
  fetchImpl: (u: string, init?: RequestInit) => Promise<Response> = (u, init) => fetch(u, init),
  reconnectDelayMs = 250,
): StreamHandle {
  let stopped = false;
  let abort = new AbortController();

  const done = (async () => {
    while (!stopped) {
      abort = new AbortController();
      try {
        const response = await fetchImpl(url, { signal: abort.signal });
        if (!response.ok || response.body === null) {
          throw new Error(`stream http ${response.status}`);
        }
        await readSseStream(response.body, (frame) => {
          if (stopped) {
            return false;
          }
          const event = { type: frame.event, data: JSON.parse(frame.data) } as SessionEvent;
          callbacks.onEvent(event); // a thrown StreamGapError aborts this read
          return true;
        });
      } catch (error) {
        if (!stopped) {
          callbacks.onError?.(error);
        }
      }
      if (stopped) {
        break;
      }
      callbacks.onReconnect?.();
      await new Promise((resolve) => setTimeout(resolve, reconnectDelayMs));
    }
  })();

  return {
    stop() {
      stopped = true;
      abort.abort();
    },
    done,
  };
}
