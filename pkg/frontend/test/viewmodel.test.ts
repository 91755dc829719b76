import { describe, expect, it } from "vitest";

import { AuditLog, provenanceViolations, receivedValueKeys, valueKey } from "../src/audit.js";
import { SessionClient } from "../src/client.js";
import { SessionViewModel, parseStimulusText } from "../src/viewmodel.js";
import { CREATED, FakeTransport, snapshotResponse } from "./fake.js";

describe("value rendering", () => {
  it("prints scalars verbatim and records canonically", () => {
    expect(valueKey(9)).toBe("9");
    expect(valueKey("red")).toBe("red");
    expect(valueKey({ lo: 0, hi: 1 })).toBe("{hi: 1, lo: 0}");
  });

  it("parses stimulus text without interpreting it", () => {
    expect(parseStimulusText("3")).toBe(3);
    expect(parseStimulusText("-2")).toBe(-2);
    expect(parseStimulusText("inc")).toBe("inc");
    expect(parseStimulusText('{"hi": 1, "lo": 0}')).toEqual({ hi: 1, lo: 0 });
  });
});

describe("view model derivation", () => {
  it("derives lanes only from the snapshot", async () => {
    const transport = new FakeTransport([
      CREATED,
      snapshotResponse(2, { In: [[3], []], Out: [[], [9]] }),
    ]);
    const client = new SessionClient(transport);
    const vm = new SessionViewModel();
    const created = await client.createSession("squarer.fks", "SqNet", 0, "strict");
    vm.applyCreate(created.session, created.model!);
    const snap = await client.snapshot();
    vm.applySnapshot(snap.snapshot!);

    const lanes = vm.lanes();
    expect(lanes.map((l) => [l.channel, l.kind])).toEqual([
      ["In", "input"],
      ["Out", "output"],
    ]);
    expect(lanes[1]!.cells.map((c) => c.texts)).toEqual([[], ["9"]]);
    expect(vm.interval).toBe(2);
  });

  it("every lane text is traceable to a response", async () => {
    const transport = new FakeTransport([
      CREATED,
      snapshotResponse(2, { In: [[3], []], Out: [[], [9]] }, { In: [5] }),
    ]);
    const client = new SessionClient(transport);
    const vm = new SessionViewModel();
    const created = await client.createSession("squarer.fks", "SqNet", 0, "strict");
    vm.applyCreate(created.session, created.model!);
    vm.applySnapshot((await client.snapshot()).snapshot!);

    const rendered = [
      ...vm.lanes().flatMap((l) => l.cells.flatMap((c) => c.texts)),
      ...vm.nodes().flatMap((n) => n.buffers.flatMap((b) => b.texts)),
    ];
    expect(provenanceViolations(rendered, client.audit)).toEqual([]);
    // A value the backend never sent is flagged.
    expect(provenanceViolations(["42"], client.audit)).toEqual(["42"]);
  });

  it("collects received values from deltas too", () => {
    const audit = new AuditLog();
    audit.record("response", "", {
      session: "s1",
      interval: 1,
      delta: {
        interval: 0,
        nodes: [{ instance: "sq", fired: "s0->s0", consumed: [
          { channel: "In", value: 3 }], emitted: [{ channel: "Out", value: 9 }],
          control_before: "s0", control_after: "s0", store_changes: [] }],
        external_outputs: [],
        events: [],
        branches: ["s0->s0"],
        branch_taken: 0,
      },
    });
    const keys = receivedValueKeys(audit);
    expect(keys.has("3")).toBe(true);
    expect(keys.has("9")).toBe(true);
  });
});

describe("protocol client", () => {
  it("rejects on error responses", async () => {
    const transport = new FakeTransport([
      { session: "", interval: 0,
        error: { code: "UnknownNetwork", message: "Nope" } },
    ]);
    const client = new SessionClient(transport);
    await expect(client.createSession("m.fks", "Nope", 0, "idle"))
      .rejects.toThrow("UnknownNetwork");
  });

  it("signals connection loss to the owner", async () => {
    let dropped = false;
    const transport = new FakeTransport([CREATED]);
    const client = new SessionClient(transport, new AuditLog(), () => {
      dropped = true;
    });
    await client.createSession("squarer.fks", "SqNet", 0, "idle");
    transport.dropConnection();
    expect(dropped).toBe(true);
    await expect(client.snapshot()).rejects.toThrow("connection closed");
  });

  it("records one audit request per call", async () => {
    const transport = new FakeTransport([
      CREATED,
      snapshotResponse(0, { In: [], Out: [] }),
    ]);
    const client = new SessionClient(transport);
    await client.createSession("squarer.fks", "SqNet", 0, "idle");
    await client.snapshot();
    expect(client.audit.requests().map((e) => e.action)).toEqual([
      "create-session", "snapshot",
    ]);
    expect(client.audit.responses()).toHaveLength(2);
  });
});
