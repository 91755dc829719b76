// Session client: serializes requests onto the transport, pairs responses
// FIFO (the service answers in order), and records everything in the
// audit log.

import type {
  Request,
  Response,
  StimulusMsg,
  Transport,
} from "./protocol.js";
import { AuditLog } from "./audit.js";

export class ProtocolError extends Error {
  constructor(readonly body: NonNullable<Response["error"]>) {
    super(`${body.code}: ${body.message}`);
  }
}

export class SessionClient {
  private pending: Array<{
    resolve: (r: Response) => void;
    reject: (e: Error) => void;
  }> = [];
  session = "";
  private closedByPeer = false;

  constructor(
    private readonly transport: Transport,
    readonly audit: AuditLog = new AuditLog(),
    private readonly onDrop: () => void = () => {},
  ) {
    transport.onMessage((line) => this.receive(line));
    transport.onClose(() => {
      this.closedByPeer = true;
      const waiting = this.pending.splice(0);
      for (const p of waiting) p.reject(new Error("connection closed"));
      this.onDrop();
    });
  }

  private receive(line: string): void {
    const response = JSON.parse(line) as Response;
    this.audit.record("response", String((response as { op?: string }).op ?? ""), response);
    const waiter = this.pending.shift();
    if (waiter) waiter.resolve(response);
  }

  request(action: string, body: Request): Promise<Response> {
    if (this.closedByPeer) {
      return Promise.reject(new Error("connection closed"));
    }
    this.audit.record("request", action, body);
    const promise = new Promise<Response>((resolve, reject) => {
      this.pending.push({ resolve, reject });
    });
    this.transport.send(JSON.stringify(body));
    return promise;
  }

  private async checked(action: string, body: Request): Promise<Response> {
    const response = await this.request(action, body);
    if (response.error) throw new ProtocolError(response.error);
    return response;
  }

  async createSession(modelFile: string, network: string, seed: number,
                      policy: "idle" | "strict"): Promise<Response> {
    const response = await this.checked("create-session", {
      op: "create_session",
      model_file: modelFile,
      network,
      seed,
      policy,
    });
    this.session = response.session;
    return response;
  }

  step(stimuli: StimulusMsg[], branch?: number | "ask"): Promise<Response> {
    const body: Request = { op: "step", session: this.session, stimuli };
    if (branch !== undefined) body.branch = branch;
    return this.checked("step", body);
  }

  snapshot(): Promise<Response> {
    return this.checked("snapshot", { op: "snapshot", session: this.session });
  }

  exportTrace(): Promise<Response> {
    return this.checked("export-trace", { op: "export_trace", session: this.session });
  }

  close(): Promise<Response> {
    return this.checked("close", { op: "close", session: this.session });
  }
}
