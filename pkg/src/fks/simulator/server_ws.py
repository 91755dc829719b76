"""Optional WebSocket bridge for browser clients.

Speaks exactly the TCP line protocol, one JSON object per WebSocket text
message, against the same in-process dispatcher. Requires the `ws` extra
(fastapi + uvicorn). Optionally serves a static directory (the cockpit
build) at the root path.
"""

from __future__ import annotations

import json

from .server import Dispatcher


def build_app(base_dir: str = ".", static_dir: str | None = None):
    try:
        from fastapi import FastAPI, WebSocket, WebSocketDisconnect
    except ImportError as err:  # pragma: no cover - environment-dependent
        raise RuntimeError(
            "the WebSocket bridge needs the 'ws' extra (pip install fks[ws])"
        ) from err

    app = FastAPI()
    dispatcher = Dispatcher(base_dir)

    @app.websocket("/ws")
    async def bridge(socket: WebSocket) -> None:
        await socket.accept()
        try:
            while True:
                line = await socket.receive_text()
                try:
                    request = json.loads(line)
                except json.JSONDecodeError as err:
                    response = {"session": "", "interval": 0,
                                "error": {"code": "BadRequest", "message": str(err)}}
                else:
                    response = dispatcher.handle(request)
                await socket.send_text(json.dumps(response))
        except WebSocketDisconnect:
            pass

    if static_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="cockpit")
    return app


def serve_ws(host: str = "127.0.0.1", port: int = 4712, base_dir: str = ".",
             static_dir: str | None = None) -> None:  # pragma: no cover - blocking
    import uvicorn

    uvicorn.run(build_app(base_dir, static_dir), host=host, port=port,
                log_level="warning")
