// Browser entry point: connect form, then the cockpit proper.

import { AuditLog } from "./audit.js";
import { SessionClient } from "./client.js";
import { mountCockpit } from "./ui.js";
import { SessionViewModel } from "./viewmodel.js";
import { connectWebSocket } from "./ws.js";

function field(form: HTMLElement, label: string, value: string): HTMLInputElement {
  const wrap = document.createElement("div");
  const text = document.createElement("label");
  text.textContent = label;
  const input = document.createElement("input");
  input.value = value;
  wrap.append(text, input);
  form.appendChild(wrap);
  return input;
}

async function start(): Promise<void> {
  const root = document.getElementById("app")!;
  const form = document.createElement("div");
  form.className = "connect-form";
  const url = field(form, "service", `ws://${location.host}/ws`);
  const model = field(form, "model file", "squarer.fks");
  const network = field(form, "network", "SqNet");
  const seed = field(form, "seed", "0");
  const policy = field(form, "policy (idle|strict)", "idle");
  const interactive = document.createElement("input");
  interactive.type = "checkbox";
  const interactiveLabel = document.createElement("label");
  interactiveLabel.textContent = "choose branches interactively";
  interactiveLabel.prepend(interactive);
  form.appendChild(interactiveLabel);
  const connect = document.createElement("button");
  connect.textContent = "Connect";
  form.appendChild(connect);
  const status = document.createElement("div");
  status.className = "status";
  form.appendChild(status);
  root.replaceChildren(form);

  connect.addEventListener("click", () => {
    void (async () => {
      try {
        const transport = await connectWebSocket(url.value);
        const vm = new SessionViewModel();
        let cockpitRef: { markDisconnected(): void } | null = null;
        const client = new SessionClient(transport, new AuditLog(),
                                         () => cockpitRef?.markDisconnected());
        const created = await client.createSession(
          model.value, network.value, Number(seed.value),
          policy.value === "strict" ? "strict" : "idle");
        vm.applyCreate(created.session, created.model!);
        const shell = document.createElement("div");
        root.replaceChildren(shell);
        const cockpit = mountCockpit(shell, client, vm, interactive.checked);
        cockpitRef = cockpit;
        await cockpit.refresh();
      } catch (err) {
        status.textContent = String(err instanceof Error ? err.message : err);
      }
    })();
  });
}

if (typeof document !== "undefined") {
  void start();
}
