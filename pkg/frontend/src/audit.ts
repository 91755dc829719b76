// Request/response audit log and the zero-client-semantics guard.
//
// Every UI action produces exactly one protocol request, and every
// semantic value the UI renders must be traceable to a value received in
// some protocol response. The test harness replays the log to enforce
// both properties.

import type { Request, Response, Value } from "./protocol.js";

export interface AuditEntry {
  direction: "request" | "response";
  action: string; // UI action for requests, op echo for responses
  payload: unknown;
}

export class AuditLog {
  readonly entries: AuditEntry[] = [];

  record(direction: "request" | "response", action: string, payload: unknown): void {
    this.entries.push({ direction, action, payload });
  }

  requests(): AuditEntry[] {
    return this.entries.filter((e) => e.direction === "request");
  }

  responses(): AuditEntry[] {
    return this.entries.filter((e) => e.direction === "response");
  }
}

function isValue(data: unknown): data is Value {
  if (typeof data === "number" || typeof data === "string") return true;
  if (typeof data !== "object" || data === null || Array.isArray(data)) return false;
  return Object.values(data).every(isValue);
}

export function valueKey(value: Value): string {
  if (typeof value === "object") {
    const fields = Object.keys(value).sort();
    return "{" + fields.map((f) => `${f}: ${valueKey(value[f]!)}`).join(", ") + "}";
  }
  return String(value);
}

// Fields of protocol responses that carry semantic message/store values.
const VALUE_FIELDS = new Set(["value", "values", "before", "after", "init"]);
const VALUE_MAPS = new Set(["store", "buffers", "histories", "inflight"]);

function collect(data: unknown, into: Set<string>, parentField: string): void {
  if (data === null || data === undefined) return;
  if (Array.isArray(data)) {
    for (const item of data) collect(item, into, parentField);
    return;
  }
  if (typeof data === "object") {
    for (const [field, inner] of Object.entries(data)) {
      if (VALUE_FIELDS.has(field) || VALUE_MAPS.has(field)) {
        harvest(inner, into);
      }
      collect(inner, into, field);
    }
    return;
  }
}

function harvest(data: unknown, into: Set<string>): void {
  if (Array.isArray(data)) {
    for (const item of data) harvest(item, into);
    return;
  }
  if (isValue(data)) {
    into.add(valueKey(data));
    return;
  }
  if (typeof data === "object" && data !== null) {
    for (const inner of Object.values(data)) harvest(inner, into);
  }
}

// Every value string the backend has ever sent in a response.
export function receivedValueKeys(audit: AuditLog): Set<string> {
  const keys = new Set<string>();
  for (const entry of audit.responses()) {
    collect(entry.payload, keys, "");
  }
  return keys;
}

// Rendered semantic texts (the UI marks them data-semantic) that cannot be
// traced to any received value. Empty means the invariant holds.
export function provenanceViolations(rendered: string[], audit: AuditLog): string[] {
  const received = receivedValueKeys(audit);
  return rendered.filter((text) => text !== "" && !received.has(text));
}

export function requestsByAction(audit: AuditLog, action: string): AuditEntry[] {
  return audit.requests().filter((e) => e.action === action);
}
