// @vitest-environment happy-dom
//
// End-to-end squarer scenario against the real backend service: enter 3,
// step twice, observe 9 in the Out lane at interval 2, export the trace,
// and have `fks trace check` accept it. The audit log must show a 1:1
// action-to-request mapping and zero client-side-computed semantic values.

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { AuditLog, provenanceViolations, requestsByAction } from "../src/audit.js";
import { SessionClient } from "../src/client.js";
import { connectTcp } from "../src/tcp.js";
import { mountCockpit, renderedSemanticTexts, type Cockpit } from "../src/ui.js";
import { SessionViewModel } from "../src/viewmodel.js";

const FIXTURES = resolve(__dirname, "../../tests/fixtures");
const PORT = 24000 + (process.pid % 2000);

let backend: ChildProcess;

async function waitFor(cond: () => boolean, what: string, ms = 5000): Promise<void> {
  const start = Date.now();
  while (!cond()) {
    if (Date.now() - start > ms) throw new Error(`timeout waiting for ${what}`);
    await new Promise((r) => setTimeout(r, 25));
  }
}

async function connectWithRetry(): Promise<Awaited<ReturnType<typeof connectTcp>>> {
  for (let attempt = 0; attempt < 100; attempt++) {
    try {
      return await connectTcp("127.0.0.1", PORT);
    } catch {
      await new Promise((r) => setTimeout(r, 100));
    }
  }
  throw new Error("backend never became reachable");
}

beforeAll(async () => {
  backend = spawn("fks", ["sim", "serve", "--port", String(PORT),
                          "--base-dir", FIXTURES],
                  { stdio: ["ignore", "pipe", "pipe"] });
  const probe = await connectWithRetry();
  probe.close();
}, 30000);

afterAll(() => {
  backend?.kill();
});

function click(el: Element): void {
  (el as HTMLElement).dispatchEvent(new MouseEvent("click", { bubbles: true }));
}

describe("squarer scenario through the real service", () => {
  let root: HTMLElement;
  let client: SessionClient;
  let cockpit: Cockpit;

  it("connects and renders the initial state", async () => {
    const transport = await connectWithRetry();
    client = new SessionClient(transport, new AuditLog());
    const vm = new SessionViewModel();
    const created = await client.createSession("squarer.fks", "SqNet", 0, "strict");
    vm.applyCreate(created.session, created.model!);
    root = document.createElement("div");
    document.body.appendChild(root);
    cockpit = mountCockpit(root, client, vm);
    await cockpit.refresh();
    expect(root.querySelector(".session")!.textContent).toBe(created.session);
    expect(root.querySelectorAll(".stimulus-row")).toHaveLength(1);
  });

  it("enter 3, step, step: the Out lane shows 9 at interval 2", async () => {
    const field = root.querySelector<HTMLInputElement>("[data-channel=In]")!;
    field.value = "3";
    click(root.querySelector(".queue-button")!);
    expect(cockpit.vm.pendingStimuli).toEqual([{ channel: "In", value: 3 }]);

    click(root.querySelector(".step-button")!);
    await waitFor(() => cockpit.vm.interval === 1, "first step");
    click(root.querySelector(".step-button")!);
    await waitFor(() => cockpit.vm.interval === 2, "second step");

    const outLane = root.querySelector('[data-lane="Out"]')!;
    const cell = outLane.querySelector('[data-interval="2"]')!;
    expect(cell.textContent).toBe("9");
    const inCell = root.querySelector('[data-lane="In"] [data-interval="1"]')!;
    expect(inCell.textContent).toBe("3");
  });

  it("stepping without stimuli advances the interval and changes no lane", async () => {
    const before = renderedSemanticTexts(root).sort();
    click(root.querySelector(".step-button")!);
    await waitFor(() => cockpit.vm.interval === 3, "idle step");
    expect(renderedSemanticTexts(root).sort()).toEqual(before);
  });

  it("maps UI actions one-to-one onto protocol requests", () => {
    expect(requestsByAction(client.audit, "create-session")).toHaveLength(1);
    expect(requestsByAction(client.audit, "step")).toHaveLength(3);
    // snapshots refresh the view after each committed step
    expect(requestsByAction(client.audit, "snapshot").length).toBeGreaterThanOrEqual(3);
  });

  it("renders zero client-side-computed semantic values", () => {
    const rendered = renderedSemanticTexts(root);
    expect(rendered).toContain("9");
    expect(provenanceViolations(rendered, client.audit)).toEqual([]);
  });

  it("exports a trace the toolkit accepts", async () => {
    const text = await cockpit.exportTrace();
    expect(text).toContain("event env -> sq In 3 @ 1");
    expect(text).toContain("event sq -> env Out 9 @ 2");
    const dir = mkdtempSync(join(tmpdir(), "cockpit-"));
    const traceFile = join(dir, "exported.fks");
    writeFileSync(traceFile, text);
    const checked = spawnSync(
      "fks", ["trace", "check", traceFile, join(FIXTURES, "squarer.fks")],
      { encoding: "utf-8" });
    expect(checked.status, checked.stdout + checked.stderr).toBe(0);
    expect(checked.stdout).toContain("member of SqNet");
  });

  it("surfaces protocol errors verbatim", async () => {
    const field = root.querySelector<HTMLInputElement>("[data-channel=In]")!;
    field.value = "5000";
    click(root.querySelector(".queue-button")!);
    click(root.querySelector(".step-button")!);
    await waitFor(() => cockpit.vm.lastError !== "", "error to surface");
    expect(cockpit.vm.lastError).toContain("TypeError");
    expect(root.querySelector(".error")!.classList.contains("hidden")).toBe(false);
    cockpit.vm.takeStimuli(); // clear the rejected stimulus
  });

  it("shows the reconnect banner when the connection drops", async () => {
    cockpit.markDisconnected();
    const banner = root.querySelector(".banner")!;
    expect(banner.classList.contains("hidden")).toBe(false);
    expect(banner.textContent).toContain("reconnect");
  });
});

describe("branch choice dialog", () => {
  it("lists branches on ask and commits the chosen index", async () => {
    const transport = await connectWithRetry();
    const client2 = new SessionClient(transport, new AuditLog());
    const vm = new SessionViewModel();
    const created = await client2.createSession("counter.fks", "CountNet", 0, "idle");
    vm.applyCreate(created.session, created.model!);
    const root2 = document.createElement("div");
    document.body.appendChild(root2);
    const cockpit2 = mountCockpit(root2, client2, vm, true);
    await cockpit2.refresh();

    const field = root2.querySelector<HTMLInputElement>("[data-channel=C]")!;
    field.value = "inc";
    click(root2.querySelector(".queue-button")!);
    click(root2.querySelector(".step-button")!);
    await waitFor(() => vm.branchPrompt !== null, "branch prompt");
    const choices = root2.querySelectorAll(".branch-choice");
    expect(choices).toHaveLength(2);
    expect(choices[0]!.textContent).toContain("emit Level!1");

    click(choices[0]!);
    await waitFor(() => vm.interval === 1, "committed branch");
    const lane = root2.querySelector('[data-lane="Level"]');
    expect(lane).not.toBeNull();
    await client2.close();
  });
});
