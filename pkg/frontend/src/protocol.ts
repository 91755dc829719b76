// Wire protocol types: one JSON object per line/message, request then
// response in order on a single connection. These mirror the backend
// structures; the cockpit never computes semantic values of its own.

export type Value = number | string | { [field: string]: Value };

export interface StimulusMsg {
  channel: string;
  value: Value;
}

export interface CreateSessionRequest {
  op: "create_session";
  model_file?: string;
  model_files?: string[];
  network: string;
  seed: number;
  policy: "idle" | "strict";
}

export interface StepRequest {
  op: "step";
  session: string;
  stimuli: StimulusMsg[];
  branch?: number | "ask";
}

export interface SessionOnlyRequest {
  op: "snapshot" | "export_trace" | "close";
  session: string;
}

export type Request = CreateSessionRequest | StepRequest | SessionOnlyRequest;

export interface ErrorBody {
  code: string;
  message: string;
  findings?: Array<{
    code: string;
    severity: string;
    file: string;
    path: string;
    message: string;
  }>;
}

export interface ModelInfo {
  name: string;
  inputs: Array<{ name: string; type: string }>;
  outputs: Array<{ name: string; type: string }>;
  nodes: string[];
  wires: string[];
}

export interface NodeDeltaMsg {
  instance: string;
  fired: string;
  consumed: Array<{ channel: string; value: Value }>;
  emitted: Array<{ channel: string; value: Value }>;
  control_before: string;
  control_after: string;
  store_changes: Array<{ var: string; before: Value; after: Value }>;
}

export interface DeltaMsg {
  interval: number;
  nodes: NodeDeltaMsg[];
  external_outputs: Array<{ channel: string; values: Value[] }>;
  events: EventMsg[];
  branches: string[];
  branch_taken: number;
}

export interface EventMsg {
  sender: string;
  receiver: string;
  channel: string;
  value: Value;
  interval: number;
}

export interface SnapshotMsg {
  interval: number;
  nodes: Array<{
    instance: string;
    control: string;
    store: { [name: string]: Value };
    buffers: { [channel: string]: Value[] };
  }>;
  histories: { [channel: string]: Value[][] };
  inflight: { [wire: string]: Value[] };
  trace: { events: EventMsg[] };
}

export interface Response {
  session: string;
  interval: number;
  error?: ErrorBody;
  protocol?: number;
  model?: ModelInfo;
  delta?: DeltaMsg;
  pending?: boolean;
  branches?: string[];
  snapshot?: SnapshotMsg;
  trace?: { events: EventMsg[]; text: string };
  closed?: boolean;
}

// A transport carries raw JSON lines; implementations: WebSocket (browser)
// and TCP (tests, node tooling).
export interface Transport {
  send(line: string): void;
  onMessage(handler: (line: string) => void): void;
  onClose(handler: () => void): void;
  close(): void;
}
