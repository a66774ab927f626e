"""Runtime assembly: wire config, storage, accounts, store, and sync.

A ``Runtime`` owns every long-lived object for one process. Node mode
gets a Store plus (optionally) a background SyncWorker pointed at the
central; central mode additionally gets the consolidated CentralState.
The central also runs a regular Store, so it can host collections of
its own like any other node.
"""

from __future__ import annotations

import os
from typing import Optional

from .accounts import Directory, ScryptParams
from .config import NodeConfig
from .federation import CentralState, HttpTransport, SyncWorker, Transport
from .logs import LogWriter
from .storage import EventLog
from .store import Store


class Runtime:
    def __init__(
        self,
        config: NodeConfig,
        *,
        transport: Optional[Transport] = None,
        scrypt_params: Optional[ScryptParams] = None,
    ):
        config.validate()
        self.config = config
        os.makedirs(config.data_dir, exist_ok=True)
        self.logs = LogWriter(config.log_path)

        directory_args = {"session_ttl_hours": config.session_ttl_hours}
        if scrypt_params is not None:
            directory_args["scrypt_params"] = scrypt_params
        self.directory = Directory(EventLog(config.accounts_log_path), **directory_args)
        self.store = Store(EventLog(config.store_log_path), self.directory)

        self.central: Optional[CentralState] = None
        if config.mode == "central":
            self.central = CentralState(
                config.admin_token, log=EventLog(config.central_log_path)
            )

        self.worker: Optional[SyncWorker] = None
        if config.sync_enabled:
            self.worker = SyncWorker(
                self.store,
                config.node_id,
                config.central_endpoint,
                config.central_token,
                transport or HttpTransport(),
                interval=float(config.sync_interval_seconds),
                on_event=self._sync_event,
            )

    def _sync_event(self, event: dict) -> None:
        fields = {k: v for k, v in event.items() if k != "event"}
        self.logs.emit("warn", event.get("event", "sync"), **fields)

    def start(self) -> None:
        if self.worker is not None:
            self.worker.start()

    def stop(self) -> None:
        if self.worker is not None:
            self.worker.stop()
        self.store.close()
        self.directory.close()
        if self.central is not None and self.central.log is not None:
            self.central.log.close()
        self.logs.close()
