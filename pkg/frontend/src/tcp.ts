// Node-only transport speaking the TCP line protocol directly; used by
// the test harness and command-line tooling, never shipped to browsers.

import { Socket, createConnection } from "node:net";

import type { Transport } from "./protocol.js";

export function connectTcp(host: string, port: number): Promise<Transport> {
  return new Promise((resolve, reject) => {
    const socket: Socket = createConnection({ host, port });
    let buffer = "";
    let messageHandler: (line: string) => void = () => {};
    let closeHandler: () => void = () => {};
    socket.setEncoding("utf-8");
    socket.on("connect", () => resolve({
      send: (line) => socket.write(line + "\n"),
      onMessage: (handler) => { messageHandler = handler; },
      onClose: (handler) => { closeHandler = handler; },
      close: () => socket.end(),
    }));
    socket.on("error", (err) => reject(err));
    socket.on("data", (chunk: string) => {
      buffer += chunk;
      let newline = buffer.indexOf("\n");
      while (newline >= 0) {
        const line = buffer.slice(0, newline);
        buffer = buffer.slice(newline + 1);
        if (line.trim() !== "") messageHandler(line);
        newline = buffer.indexOf("\n");
      }
    });
    socket.on("close", () => closeHandler());
  });
}
