// Browser transport: one JSON object per WebSocket text message.

import type { Transport } from "./protocol.js";

export function connectWebSocket(url: string): Promise<Transport> {
  return new Promise((resolve, reject) => {
    const socket = new WebSocket(url);
    let messageHandler: (line: string) => void = () => {};
    let closeHandler: () => void = () => {};
    socket.onopen = () => resolve({
      send: (line) => socket.send(line),
      onMessage: (handler) => { messageHandler = handler; },
      onClose: (handler) => { closeHandler = handler; },
      close: () => socket.close(),
    });
    socket.onerror = () => reject(new Error(`cannot reach ${url}`));
    socket.onmessage = (event) => messageHandler(String(event.data));
    socket.onclose = () => closeHandler();
  });
}
