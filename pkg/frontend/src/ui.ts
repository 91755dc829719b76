// DOM rendering. Semantic values (lane cells, store values, buffer
// contents) are marked data-semantic so the audit harness can trace every
// one of them back to a protocol response.

import type { SessionClient } from "./client.js";
import type { Response } from "./protocol.js";
import { SessionViewModel, parseStimulusText } from "./viewmodel.js";

export interface Cockpit {
  vm: SessionViewModel;
  refresh(): Promise<void>;
  stepOnce(branch?: number | "ask"): Promise<void>;
  exportTrace(): Promise<string>;
  markDisconnected(): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, className = "", text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function semantic(tag: "td" | "span", text: string): HTMLElement {
  const node = el(tag, "value", text);
  node.setAttribute("data-semantic", "1");
  return node;
}

export function mountCockpit(root: HTMLElement, client: SessionClient,
                             vm: SessionViewModel,
                             interactiveBranches = false): Cockpit {
  const banner = el("div", "banner hidden");
  const header = el("div", "header");
  const stimuli = el("div", "stimuli");
  const lanes = el("div", "lanes");
  const nodesView = el("div", "nodes");
  const branchDialog = el("div", "branch-dialog hidden");
  const errorBox = el("pre", "error hidden");
  const exportBox = el("pre", "export hidden");
  root.replaceChildren(banner, header, errorBox, stimuli, branchDialog,
                       lanes, nodesView, exportBox);

  function showError(message: string): void {
    vm.lastError = message;
    errorBox.textContent = message;
    errorBox.classList.toggle("hidden", message === "");
  }

  function markDisconnected(): void {
    vm.connected = false;
    banner.textContent = "connection lost - reconnect to continue";
    banner.classList.remove("hidden");
  }

  async function refresh(): Promise<void> {
    const response = await client.snapshot();
    vm.applySnapshot(response.snapshot!);
    render();
  }

  async function stepOnce(branch?: number | "ask"): Promise<void> {
    const wanted = branch ?? (interactiveBranches ? "ask" : undefined);
    showError("");
    let response: Response;
    try {
      response = await client.step(vm.pendingStimuli, wanted);
    } catch (err) {
      showError(String(err instanceof Error ? err.message : err));
      render();
      return;
    }
    if (response.pending) {
      vm.applyBranchPrompt(response.branches ?? []);
      render();
      return;
    }
    vm.takeStimuli();
    vm.branchPrompt = null;
    await refresh();
  }

  async function exportTrace(): Promise<string> {
    const response = await client.exportTrace();
    vm.exportedText = response.trace!.text;
    exportBox.textContent = vm.exportedText;
    exportBox.classList.remove("hidden");
    triggerDownload(vm.exportedText);
    return vm.exportedText;
  }

  function triggerDownload(text: string): void {
    if (typeof URL.createObjectURL !== "function") return;
    const blob = new Blob([text], { type: "text/plain" });
    const anchor = el("a");
    anchor.href = URL.createObjectURL(blob);
    anchor.download = `${vm.sessionId || "session"}-trace.fks`;
    anchor.click();
  }

  function render(): void {
    renderHeader();
    renderStimuli();
    renderBranchDialog();
    renderLanes();
    renderNodes();
  }

  function renderHeader(): void {
    header.replaceChildren(
      el("span", "session", vm.sessionId || "no session"),
      el("span", "interval", `interval ${vm.interval}`),
      el("span", "trace-count", `${vm.traceEventCount()} events recorded`),
    );
    const exportButton = el("button", "export-button", "Export trace");
    exportButton.addEventListener("click", () => void exportTrace());
    header.appendChild(exportButton);
  }

  function renderStimuli(): void {
    stimuli.replaceChildren();
    if (!vm.model) return;
    for (const input of vm.model.inputs) {
      const row = el("div", "stimulus-row");
      row.appendChild(el("label", "", `${input.name}: ${input.type}`));
      const field = el("input", "stimulus-field");
      field.setAttribute("data-channel", input.name);
      row.appendChild(field);
      const add = el("button", "queue-button", "Queue");
      add.addEventListener("click", () => {
        if (field.value.trim() === "") return;
        try {
          vm.queueStimulus(input.name, parseStimulusText(field.value));
        } catch (err) {
          showError(String(err));
          return;
        }
        field.value = "";
        render();
      });
      row.appendChild(add);
      stimuli.appendChild(row);
    }
    const queued = el("div", "queued");
    for (const s of vm.pendingStimuli) {
      queued.appendChild(el("span", "queued-stimulus",
                            `${s.channel}=${JSON.stringify(s.value)}`));
    }
    stimuli.appendChild(queued);
    const stepButton = el("button", "step-button", "Step");
    stepButton.addEventListener("click", () => void stepOnce());
    stimuli.appendChild(stepButton);
  }

  function renderBranchDialog(): void {
    branchDialog.replaceChildren();
    if (!vm.branchPrompt) {
      branchDialog.classList.add("hidden");
      return;
    }
    branchDialog.classList.remove("hidden");
    branchDialog.appendChild(el("div", "", "Several behaviors are enabled - pick one:"));
    vm.branchPrompt.forEach((label, index) => {
      const choice = el("button", "branch-choice", label);
      choice.setAttribute("data-branch", String(index));
      choice.addEventListener("click", () => void stepOnce(index));
      branchDialog.appendChild(choice);
    });
  }

  function renderLanes(): void {
    const table = el("table", "lane-table");
    const horizon = vm.interval;
    const head = el("tr");
    head.appendChild(el("th", "", "channel"));
    for (let i = 1; i <= horizon; i++) {
      head.appendChild(el("th", "tick", String(i)));
    }
    table.appendChild(head);
    for (const lane of vm.lanes()) {
      const row = el("tr", `lane lane-${lane.kind}`);
      row.setAttribute("data-lane", lane.channel);
      row.appendChild(el("td", "lane-name", `${lane.channel} (${lane.kind})`));
      lane.cells.forEach((cell, index) => {
        const td = semantic("td", cell.texts.join(" "));
        td.setAttribute("data-interval", String(index + 1));
        row.appendChild(td);
      });
      table.appendChild(row);
    }
    lanes.replaceChildren(table);
  }

  function renderNodes(): void {
    nodesView.replaceChildren();
    for (const node of vm.nodes()) {
      const card = el("div", "node-card");
      card.setAttribute("data-node", node.instance);
      card.appendChild(el("div", "node-title", `${node.instance} @ ${node.control}`));
      for (const entry of node.store) {
        const line = el("div", "store-entry", `${entry.name} = `);
        line.appendChild(semantic("span", entry.text));
        card.appendChild(line);
      }
      for (const buffer of node.buffers) {
        const line = el("div", "buffer-entry", `${buffer.channel} buffer: `);
        if (buffer.texts.length === 0) {
          line.appendChild(el("span", "empty", "(empty)"));
        }
        for (const text of buffer.texts) {
          line.appendChild(semantic("span", text));
        }
        card.appendChild(line);
      }
      nodesView.appendChild(card);
    }
  }

  render();
  return { vm, refresh, stepOnce, exportTrace, markDisconnected };
}

export function renderedSemanticTexts(root: HTMLElement): string[] {
  return Array.from(root.querySelectorAll("[data-semantic]"))
    .flatMap((node) => {
      const text = node.textContent ?? "";
      return text === "" ? [] : text.split(" ");
    });
}
