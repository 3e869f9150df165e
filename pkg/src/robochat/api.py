"""HTTP surface for the session service.

All routes live under /v1.  Sessions are created from a JSON config,
messages run episodes, state and trace are plain JSON views, and the
events route streams server-sent events so a console can follow along.
Demonstrations arrive as CSV text in a JSON body and become callable
learned skills.
"""
from __future__ import annotations

import json
import time

from fastapi import Body, FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse

from .dmp import fit, parse_demo_csv, register_skill
from .errors import BadConfig, RobochatError, SessionClosed, UnknownSession
from .session import SessionConfig, SessionService


def create_app(service: SessionService | None = None) -> FastAPI:
    service = service or SessionService()
    app = FastAPI(title="robochat", version="0.1.0")
    app.state.service = service

    @app.exception_handler(RobochatError)
    async def _domain_error(request: Request, exc: RobochatError):
        status = 400
        if isinstance(exc, UnknownSession):
            status = 404
        elif isinstance(exc, SessionClosed):
            status = 409
        return JSONResponse(status_code=status,
                            content={"error": type(exc).__name__, "detail": str(exc)})

    @app.post("/v1/sessions", status_code=201)
    def create_session(payload: dict = Body(...)):
        try:
            config = SessionConfig.from_dict(payload)
        except (KeyError, TypeError, ValueError) as exc:
            raise BadConfig(f"bad session config: {exc}") from exc
        session = service.create_session(config)
        return {"id": session.id, "status": session.status}

    @app.post("/v1/sessions/{session_id}/message")
    def post_message(session_id: str, payload: dict = Body(...)):
        record = service.submit_message(session_id, str(payload.get("text", "")))
        return record.to_dict()

    @app.post("/v1/sessions/{session_id}/perturb")
    def post_perturb(session_id: str, payload: dict = Body(...)):
        cell = payload.get("new_cell")
        service.inject_perturbation(
            session_id,
            object_id=str(payload.get("object_id", "")),
            at_step=payload.get("at_step"),
            new_zone=payload.get("new_zone"),
            new_cell=tuple(cell) if cell else None,
        )
        return {"ok": True}

    @app.post("/v1/sessions/{session_id}/reset_world")
    def post_reset(session_id: str):
        service.reset_world(session_id)
        return {"ok": True}

    @app.get("/v1/sessions/{session_id}/state")
    def get_state(session_id: str):
        return service.get_state(session_id)

    @app.get("/v1/sessions/{session_id}/trace")
    def get_trace(session_id: str):
        return service.get_trace(session_id)

    @app.get("/v1/actions")
    def get_actions():
        return [
            {
                "name": s.name, "type": s.type, "description": s.description,
                "endpoint": {"kind": s.endpoint.kind, "target": s.endpoint.target,
                             "timeout_s": s.endpoint.timeout_s},
            }
            for s in service.library
        ]

    @app.post("/v1/actions/demonstrate", status_code=201)
    def post_demonstrate(payload: dict = Body(...)):
        demo = parse_demo_csv(str(payload.get("csv", "")))
        model = fit(demo, n_basis=int(payload.get("n_basis", 20)))
        name = register_skill(model, str(payload.get("description", "")),
                              service.library, service.skills)
        return {"name": name, "dims": model.dims, "n_basis": model.n_basis}

    @app.get("/v1/sessions/{session_id}/events")
    def get_events(session_id: str, after: int = -1, follow: bool = False):
        service.get(session_id)  # 404 before the stream starts

        def stream():
            last = after
            while True:
                for event in service.events_after(session_id, last):
                    last = event.id
                    yield (f"id: {event.id}\nevent: {event.type}\n"
                           f"data: {json.dumps(event.to_dict())}\n\n")
                if not follow:
                    return
                time.sleep(0.25)

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app


app = create_app()
