// Session view model: a reorganization of protocol responses, nothing
// more. Lanes, node cards, and the event list are all read verbatim from
// the latest snapshot; the only client-side additions are presentation
// labels (column numbers, channel grouping).

import type {
  ModelInfo,
  SnapshotMsg,
  StimulusMsg,
  Value,
} from "./protocol.js";
import { valueKey } from "./audit.js";

export type LaneKind = "input" | "output" | "wire";

export interface LaneCell {
  texts: string[]; // rendered value texts, verbatim from the snapshot
}

export interface Lane {
  channel: string;
  kind: LaneKind;
  cells: LaneCell[];
}

export interface NodeCard {
  instance: string;
  control: string;
  store: Array<{ name: string; text: string }>;
  buffers: Array<{ channel: string; texts: string[] }>;
}

export class SessionViewModel {
  model: ModelInfo | null = null;
  snapshot: SnapshotMsg | null = null;
  sessionId = "";
  branchPrompt: string[] | null = null;
  pendingStimuli: StimulusMsg[] = [];
  lastError = "";
  connected = true;
  exportedText = "";

  applyCreate(session: string, model: ModelInfo): void {
    this.sessionId = session;
    this.model = model;
  }

  applySnapshot(snapshot: SnapshotMsg): void {
    this.snapshot = snapshot;
    this.branchPrompt = null;
  }

  applyBranchPrompt(branches: string[]): void {
    this.branchPrompt = branches;
  }

  queueStimulus(channel: string, value: Value): void {
    this.pendingStimuli.push({ channel, value });
  }

  takeStimuli(): StimulusMsg[] {
    const taken = this.pendingStimuli;
    this.pendingStimuli = [];
    return taken;
  }

  get interval(): number {
    return this.snapshot ? this.snapshot.interval : 0;
  }

  laneKinds(): Map<string, LaneKind> {
    const kinds = new Map<string, LaneKind>();
    if (!this.model) return kinds;
    for (const c of this.model.inputs) kinds.set(c.name, "input");
    for (const c of this.model.outputs) kinds.set(c.name, "output");
    for (const w of this.model.wires) {
      if (!kinds.has(w)) kinds.set(w, "wire");
    }
    return kinds;
  }

  lanes(): Lane[] {
    if (!this.snapshot) return [];
    const kinds = this.laneKinds();
    const order = (kind: LaneKind) => (kind === "input" ? 0 : kind === "wire" ? 1 : 2);
    const lanes: Lane[] = [];
    for (const [channel, lane] of Object.entries(this.snapshot.histories)) {
      const kind = kinds.get(channel) ?? "wire";
      lanes.push({
        channel,
        kind,
        cells: lane.map((interval) => ({ texts: interval.map(valueKey) })),
      });
    }
    lanes.sort((a, b) => order(a.kind) - order(b.kind)
      || a.channel.localeCompare(b.channel));
    return lanes;
  }

  nodes(): NodeCard[] {
    if (!this.snapshot) return [];
    return this.snapshot.nodes.map((n) => ({
      instance: n.instance,
      control: n.control,
      store: Object.entries(n.store).map(([name, value]) => ({
        name,
        text: valueKey(value),
      })),
      buffers: Object.entries(n.buffers).map(([channel, values]) => ({
        channel,
        texts: values.map(valueKey),
      })),
    }));
  }

  traceEventCount(): number {
    return this.snapshot ? this.snapshot.trace.events.length : 0;
  }
}

// Parse what the user typed into a stimulus value: an integer, a record
// as JSON, or a bare enumeration literal. The value is user input passed
// through verbatim; the backend is the only judge of its validity.
export function parseStimulusText(text: string): Value {
  const trimmed = text.trim();
  if (/^-?\d+$/.test(trimmed)) return Number(trimmed);
  if (trimmed.startsWith("{")) return JSON.parse(trimmed) as Value;
  return trimmed;
}
