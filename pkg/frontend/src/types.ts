// Wire types of the session service and the console's derived view state.

export type SessionStatus = "idle" | "running" | "paused" | "errored";

export interface SamplerConfigDoc {
  proposal_temperature: number;
  target_temperature: number;
  burn_in: number;
  thinning: number;
  max_steps: number | null;
  rng_seed: number;
}

export interface SnapshotPayload {
  seq: number;
  id: string;
  status: SessionStatus;
  error: string | null;
  length: number;
  ids: number[];
  text: string;
  step: number;
  energy: number;
  accept_rate: number;
  emission_index: number;
  pinned: number[];
  spec: string;
  config: SamplerConfigDoc;
  created: string;
  updated: string;
}

export interface EmissionPayload {
  seq: number;
  emission: number;
  step: number;
  ids: number[];
  text: string;
  energy: number;
  accept_rate: number;
}

export interface StatusPayload {
  seq: number;
  status: SessionStatus;
  step: number;
  message?: string;
}

export interface ConstraintsPayload {
  seq: number;
  spec: string;
  pinned: number[];
  ids: number[];
  text: string;
  energy: number;
  step: number;
}

export type SessionEvent =
  | { type: "snapshot"; data: SnapshotPayload }
  | { type: "emission"; data: EmissionPayload }
  | { type: "status"; data: StatusPayload }
  | { type: "constraints"; data: ConstraintsPayload };

export interface TokenCell {
  surface: string;
  pinned: boolean;
  lastChanged: number; // step at which this position last took a new token
}

/** View state; derives only from server events, never from local simulation. */
export interface ConsoleSessionView {
  sessionId: string;
  status: SessionStatus;
  error: string | null;
  length: number;
  ids: number[];
  grid: TokenCell[];
  spec: string;
  constraints: string[]; // spec lines, length first
  step: number;
  emissionIndex: number;
  energy: number;
  acceptRate: number;
  energyTrace: number[];
  acceptTrace: number[];
  lastSeq: number;
}

export interface RunLogDocument {
  session: string;
  entries: Array<
    | {
        type: "emission";
        emission: number;
        step: number;
        ids: number[];
        text: string;
        energy: number;
        accept_rate: number;
      }
    | { type: "constraints"; step: number; spec: string }
  >;
}
