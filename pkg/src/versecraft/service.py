"""Session service: live composition runs over HTTP.

Each session owns one chain. A per-session lock serializes every mutation,
so a running chain, control commands and constraint edits never interleave
mid-step; streaming is a broadcast of ordered events (snapshot | emission |
status | constraints) with per-session sequence numbers, which is what lets
clients detect gaps and resnapshot. Run logs are append-only files, one per
session, durable across service restarts.
"""

from __future__ import annotations

import json
import queue
import threading
import time
import uuid
from contextlib import asynccontextmanager
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel

from . import sampler
from .constraints import compile_masks, parse_constraint_spec, render_constraint_spec
from .errors import (
    BadTransitionError,
    ConflictingPinsError,
    InfeasibleError,
    LengthChangedError,
    NoSessionError,
    SpecParseError,
    VersecraftError,
)
from .providers import pseudo_loglik_energy
from .registry import ProviderRegistry
from .runlog import ConstraintMarker, RunLogWriter, SessionEmission, read_log
from .sampler import ALL_MASK, ChainState, SamplerConfig
from .vocabulary import detokenize

IDLE, RUNNING, PAUSED, ERRORED = "idle", "running", "paused", "errored"


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class Session:
    """One composition run; every mutation happens under the session lock."""

    def __init__(
        self,
        session_id: str,
        provider,
        spec_text: str,
        cfg: SamplerConfig,
        log_path: Path,
        step_delay: float = 0.0,
    ):
        self.id = session_id
        self.provider = provider
        self.vocab = provider.vocabulary
        self.cfg = cfg
        self.step_delay = step_delay
        self.constraint_set = parse_constraint_spec(spec_text, self.vocab)
        self.masks = compile_masks(self.constraint_set, self.vocab)
        self.spec_text = render_constraint_spec(self.constraint_set, self.vocab)
        self.chain: ChainState = sampler.init_chain(ALL_MASK, self.masks, provider, cfg)
        self.status = IDLE
        self.error: str | None = None
        self.created = _now()
        self.updated = self.created
        self.emission_index = 0
        self.accepted = 0
        self.total_steps = 0
        self.event_seq = 0
        self.log = RunLogWriter(log_path)
        self.log.append(ConstraintMarker(step=0, spec=self.spec_text))
        self._lock = threading.RLock()
        self._subscribers: list[queue.SimpleQueue] = []
        self._worker: threading.Thread | None = None

    # -- events ---------------------------------------------------------

    def _publish(self, kind: str, data: dict) -> None:
        self.event_seq += 1
        event = {"type": kind, "seq": self.event_seq, "data": {"seq": self.event_seq, **data}}
        for q in self._subscribers:
            q.put(event)

    def snapshot(self) -> dict:
        rate = self.accepted / self.total_steps if self.total_steps else 0.0
        return {
            "id": self.id,
            "status": self.status,
            "error": self.error,
            "length": self.constraint_set.length,
            "ids": list(self.chain.seq.ids),
            "text": detokenize(self.chain.seq),
            "step": self.chain.step,
            "energy": self.chain.energy,
            "accept_rate": rate,
            "emission_index": self.emission_index,
            "pinned": sorted(self.masks.pinned),
            "spec": self.spec_text,
            "config": {
                "proposal_temperature": self.cfg.proposal_temperature,
                "target_temperature": self.cfg.target_temperature,
                "burn_in": self.cfg.burn_in,
                "thinning": self.cfg.thinning,
                "max_steps": self.cfg.max_steps,
                "rng_seed": self.cfg.rng_seed,
            },
            "created": self.created,
            "updated": self.updated,
        }

    def subscribe(self) -> queue.SimpleQueue:
        with self._lock:
            q: queue.SimpleQueue = queue.SimpleQueue()
            # A snapshot carries the seq of the last event already applied to
            # it, so identical subscribers see identical streams and gap
            # detection composes: the next live event is seq + 1.
            q.put({
                "type": "snapshot",
                "seq": self.event_seq,
                "data": {"seq": self.event_seq, **self.snapshot()},
            })
            if self.status == ERRORED:
                q.put(None)  # snapshot then end
            else:
                self._subscribers.append(q)
            return q

    def unsubscribe(self, q: queue.SimpleQueue) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    # -- stepping -------------------------------------------------------

    def _step_once(self) -> None:
        self.chain, record = sampler.step(self.chain, self.masks, self.provider, self.cfg)
        self.total_steps += 1
        self.accepted += record.accepted
        self.updated = _now()
        k = self.chain.step
        if k >= self.cfg.burn_in and (k - self.cfg.burn_in) % self.cfg.thinning == 0:
            rate = self.accepted / self.total_steps
            entry = SessionEmission(
                emission=self.emission_index,
                step=k,
                energy=self.chain.energy,
                accept_rate=rate,
                ids=self.chain.seq.ids,
                text=detokenize(self.chain.seq),
            )
            self.log.append(entry)
            self._publish("emission", {
                "emission": entry.emission,
                "step": entry.step,
                "ids": list(entry.ids),
                "text": entry.text,
                "energy": entry.energy,
                "accept_rate": entry.accept_rate,
            })
            self.emission_index += 1

    def _set_status(self, status: str, message: str | None = None) -> None:
        self.status = status
        self.error = message
        self.updated = _now()
        data = {"status": status, "step": self.chain.step}
        if message:
            data["message"] = message
        self._publish("status", data)

    def _run_loop(self) -> None:
        while True:
            with self._lock:
                if self.status != RUNNING:
                    return
                if self.cfg.max_steps is not None and self.chain.step >= self.cfg.max_steps:
                    self._set_status(PAUSED)
                    return
                try:
                    self._step_once()
                except VersecraftError as exc:
                    self._set_status(ERRORED, f"{exc.code}: {exc}")
                    return
            if self.step_delay:
                time.sleep(self.step_delay)

    # -- control --------------------------------------------------------

    def start(self) -> None:
        with self._lock:
            if self.status not in (IDLE, PAUSED):
                raise BadTransitionError(f"cannot start from {self.status}")
            self._set_status(RUNNING)
            self._worker = threading.Thread(target=self._run_loop, daemon=True)
            self._worker.start()

    def pause(self) -> None:
        with self._lock:
            if self.status != RUNNING:
                raise BadTransitionError(f"cannot pause from {self.status}")
            self._set_status(PAUSED)  # worker exits before its next step
        if self._worker is not None:
            self._worker.join(timeout=10)
            self._worker = None

    def step_n(self, n: int) -> None:
        if n < 1:
            raise ValueError("n must be >= 1")
        with self._lock:
            if self.status not in (IDLE, PAUSED):
                raise BadTransitionError(f"cannot step from {self.status}")
            try:
                for _ in range(n):
                    self._step_once()
            except VersecraftError as exc:
                self._set_status(ERRORED, f"{exc.code}: {exc}")
                raise

    def reset(self, seed: int | None) -> None:
        with self._lock:
            if self.status == RUNNING:
                raise BadTransitionError("pause before reset")
            if seed is not None:
                cfg = SamplerConfig(
                    proposal_temperature=self.cfg.proposal_temperature,
                    target_temperature=self.cfg.target_temperature,
                    burn_in=self.cfg.burn_in,
                    thinning=self.cfg.thinning,
                    max_steps=self.cfg.max_steps,
                    rng_seed=seed,
                )
                self.cfg = cfg
            self.chain = sampler.init_chain(ALL_MASK, self.masks, self.provider, self.cfg)
            self.accepted = 0
            self.total_steps = 0
            self.error = None
            self._set_status(IDLE)
            self._publish("snapshot", self.snapshot())

    def edit_constraints(self, spec_text: str) -> None:
        with self._lock:
            if self.status not in (IDLE, PAUSED):
                raise BadTransitionError("pause before editing constraints")
            cs = parse_constraint_spec(spec_text, self.vocab)
            if cs.length != self.constraint_set.length:
                raise LengthChangedError(
                    f"session length is {self.constraint_set.length}, spec says {cs.length}"
                )
            masks = compile_masks(cs, self.vocab)
            # Re-repair with the chain's own rng: the random stream continues.
            seq = sampler.repair(self.chain.seq, masks, self.provider, self.chain.rng)
            energy = pseudo_loglik_energy(self.provider, seq)
            self.constraint_set = cs
            self.masks = masks
            self.spec_text = render_constraint_spec(cs, self.vocab)
            self.chain = ChainState(seq=seq, energy=energy, step=self.chain.step, rng=self.chain.rng)
            self.updated = _now()
            self.log.append(ConstraintMarker(step=self.chain.step, spec=self.spec_text))
            self._publish("constraints", {
                "spec": self.spec_text,
                "pinned": sorted(masks.pinned),
                "ids": list(seq.ids),
                "text": detokenize(seq),
                "energy": energy,
                "step": self.chain.step,
            })

    def close(self) -> None:
        with self._lock:
            if self.status == RUNNING:
                self._set_status(PAUSED)
        if self._worker is not None:
            self._worker.join(timeout=10)
        for q in list(self._subscribers):
            q.put(None)
        self.log.close()
        if hasattr(self.provider, "close"):
            self.provider.close()


_HTTP_CODES = {
    "E_NO_SESSION": 404,
    "E_BAD_TRANSITION": 409,
    "E_LENGTH_CHANGED": 409,
    "E_INFEASIBLE": 422,
    "E_CONFLICTING_PINS": 422,
    "E_PROVIDER_FAILURE": 502,
}


class CreateSessionBody(BaseModel):
    spec: str
    provider: str
    config: dict = {}


class ControlBody(BaseModel):
    command: str
    n: int | None = None
    seed: int | None = None


class ConstraintsBody(BaseModel):
    spec: str


def create_app(
    registry: ProviderRegistry,
    log_dir: str | Path,
    step_delay: float = 0.0,
    static_dir: str | Path | None = None,
) -> FastAPI:
    log_dir = Path(log_dir)
    log_dir.mkdir(parents=True, exist_ok=True)
    sessions: dict[str, Session] = {}
    sessions_lock = threading.Lock()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        with sessions_lock:
            handles = list(sessions.values())
        for s in handles:
            s.close()

    app = FastAPI(title="versecraft session service", lifespan=lifespan)

    @app.exception_handler(VersecraftError)
    async def versecraft_error(request: Request, exc: VersecraftError):
        body = {"error": exc.code, "message": str(exc)}
        if isinstance(exc, (InfeasibleError, ConflictingPinsError)):
            body["position"] = exc.position
        if isinstance(exc, SpecParseError):
            body["line"] = exc.line
        return JSONResponse(status_code=_HTTP_CODES.get(exc.code, 400), content=body)

    @app.exception_handler(ValueError)
    async def value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"error": "E_BAD_REQUEST", "message": str(exc)})

    def get_session(session_id: str) -> Session:
        with sessions_lock:
            try:
                return sessions[session_id]
            except KeyError:
                raise NoSessionError(session_id) from None

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody) -> dict:
        provider = registry.create(body.provider)
        cfg = SamplerConfig(**body.config)
        session_id = uuid.uuid4().hex[:12]
        session = Session(
            session_id,
            provider,
            body.spec,
            cfg,
            log_dir / f"{session_id}.log",
            step_delay=step_delay,
        )
        with sessions_lock:
            sessions[session_id] = session
        return {"session": session.snapshot()}

    @app.get("/sessions")
    def list_sessions() -> dict:
        with sessions_lock:
            handles = list(sessions.values())
        return {"sessions": [s.snapshot() for s in handles]}

    @app.get("/sessions/{session_id}")
    def get_session_doc(session_id: str) -> dict:
        return {"session": get_session(session_id).snapshot()}

    @app.post("/sessions/{session_id}/control")
    def control(session_id: str, body: ControlBody) -> dict:
        session = get_session(session_id)
        if body.command == "start":
            session.start()
        elif body.command == "pause":
            session.pause()
        elif body.command == "step":
            session.step_n(body.n if body.n is not None else 1)
        elif body.command == "reset":
            session.reset(body.seed)
        else:
            raise ValueError(f"unknown command: {body.command!r}")
        return {"id": session.id, "status": session.status, "step": session.chain.step}

    @app.put("/sessions/{session_id}/constraints")
    def put_constraints(session_id: str, body: ConstraintsBody) -> dict:
        session = get_session(session_id)
        session.edit_constraints(body.spec)
        return {"session": session.snapshot()}

    @app.get("/sessions/{session_id}/stream")
    def stream(session_id: str) -> StreamingResponse:
        session = get_session(session_id)
        q = session.subscribe()

        def gen():
            try:
                while True:
                    try:
                        event = q.get(timeout=0.5)
                    except queue.Empty:
                        yield ": keepalive\n\n"
                        continue
                    if event is None:
                        return
                    payload = json.dumps(event["data"])
                    yield f"event: {event['type']}\nid: {event['seq']}\ndata: {payload}\n\n"
            finally:
                session.unsubscribe(q)

        return StreamingResponse(gen(), media_type="text/event-stream")

    @app.get("/sessions/{session_id}/export")
    def export(session_id: str) -> dict:
        log_path = log_dir / f"{session_id}.log"
        if not log_path.exists():
            raise NoSessionError(session_id)
        entries = []
        for entry in read_log(log_path):
            if isinstance(entry, SessionEmission):
                entries.append({
                    "type": "emission",
                    "emission": entry.emission,
                    "step": entry.step,
                    "ids": list(entry.ids),
                    "text": entry.text,
                    "energy": entry.energy,
                    "accept_rate": entry.accept_rate,
                })
            elif isinstance(entry, ConstraintMarker):
                entries.append({"type": "constraints", "step": entry.step, "spec": entry.spec})
        return {"session": session_id, "entries": entries}

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="console")

    return app
