// Pure reducer from the server event stream to the console view.
//
// Events carry a per-session `seq`; a snapshot carries the seq of the last
// event already applied to it. Anything out of order throws StreamGapError
// and the caller reconnects, which yields a fresh snapshot.

import type {
  ConsoleSessionView,
  ConstraintsPayload,
  EmissionPayload,
  SessionEvent,
  SnapshotPayload,
  StatusPayload,
} from "./types.js";

export class StreamGapError extends Error {
  readonly code = "E_STREAM_GAP";

  constructor(expected: number, got: number) {
    super(`expected event seq ${expected}, got ${got}`);
  }
}

function specLines(spec: string): string[] {
  return spec
    .split("\n")
    .map((line) => line.trim())
    .filter((line) => line.length > 0 && !line.startsWith("#"));
}

function fromSnapshot(snap: SnapshotPayload): ConsoleSessionView {
  const pinned = new Set(snap.pinned);
  const surfaces = snap.text.split(" ");
  return {
    sessionId: snap.id,
    status: snap.status,
    error: snap.error,
    length: snap.length,
    ids: [...snap.ids],
    grid: snap.ids.map((_, position) => ({
      surface: surfaces[position] ?? "",
      pinned: pinned.has(position),
      lastChanged: snap.step,
    })),
    spec: snap.spec,
    constraints: specLines(snap.spec),
    step: snap.step,
    emissionIndex: snap.emission_index,
    energy: snap.energy,
    acceptRate: snap.accept_rate,
    energyTrace: [snap.energy],
    acceptTrace: [snap.accept_rate],
    lastSeq: snap.seq,
  };
}

function withEmission(view: ConsoleSessionView, e: EmissionPayload): ConsoleSessionView {
  const surfaces = e.text.split(" ");
  const grid = view.grid.map((cell, position) => {
    const changed = view.ids[position] !== e.ids[position];
    return {
      surface: surfaces[position] ?? cell.surface,
      pinned: cell.pinned,
      lastChanged: changed ? e.step : cell.lastChanged,
    };
  });
  return {
    ...view,
    ids: [...e.ids],
    grid,
    step: e.step,
    emissionIndex: e.emission + 1,
    energy: e.energy,
    acceptRate: e.accept_rate,
    energyTrace: [...view.energyTrace, e.energy],
    acceptTrace: [...view.acceptTrace, e.accept_rate],
  };
}

function withStatus(view: ConsoleSessionView, s: StatusPayload): ConsoleSessionView {
  return {
    ...view,
    status: s.status,
    step: s.step,
    error: s.message ?? (s.status === "errored" ? view.error : null),
  };
}

function withConstraints(view: ConsoleSessionView, c: ConstraintsPayload): ConsoleSessionView {
  const pinned = new Set(c.pinned);
  const surfaces = c.text.split(" ");
  const grid = view.grid.map((cell, position) => {
    const changed = view.ids[position] !== c.ids[position];
    return {
      surface: surfaces[position] ?? cell.surface,
      pinned: pinned.has(position),
      lastChanged: changed ? c.step : cell.lastChanged,
    };
  });
  return {
    ...view,
    ids: [...c.ids],
    grid,
    spec: c.spec,
    constraints: specLines(c.spec),
    energy: c.energy,
  };
}

/**
 * Apply one stream event. A snapshot (re)initializes the view; every other
 * event must arrive with seq exactly lastSeq + 1 on an existing view.
 */
export function applyEvent(
  view: ConsoleSessionView | null,
  event: SessionEvent,
): ConsoleSessionView {
  if (event.type === "snapshot") {
    return fromSnapshot(event.data);
  }
  if (view === null) {
    throw new StreamGapError(0, event.data.seq);
  }
  if (event.data.seq !== view.lastSeq + 1) {
    throw new StreamGapError(view.lastSeq + 1, event.data.seq);
  }
  const advanced = { ...advance(view, event), lastSeq: event.data.seq };
  return advanced;
}

function advance(view: ConsoleSessionView, event: SessionEvent): ConsoleSessionView {
  switch (event.type) {
    case "emission":
      return withEmission(view, event.data);
    case "status":
      return withStatus(view, event.data);
    case "constraints":
      return withConstraints(view, event.data);
    default:
      return view;
  }
}
