"""Simulator state: task control blocks, ready queue, resources, trace."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from ..frontend.oil import OilConfig


class TaskState(str, enum.Enum):
    SUSPENDED = "SUSPENDED"
    READY = "READY"
    RUNNING = "RUNNING"
    WAITING = "WAITING"


@dataclass(frozen=True)
class ApiCall:
    name: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"{self.name}({','.join(self.args)})"

    @classmethod
    def parse(cls, text: str) -> "ApiCall":
        text = text.strip()
        name, sep, rest = text.partition("(")
        if not sep or not rest.endswith(")"):
            raise ValueError(f"malformed call {text!r}")
        inner = rest[:-1].strip()
        args = tuple(a.strip() for a in inner.split(",")) if inner else ()
        return cls(name.strip(), args)


@dataclass(frozen=True)
class Violation:
    """A failed precondition: which table row, and why."""

    api: str
    row: str
    reason: str

    def __str__(self) -> str:
        return f"{self.api}: {self.reason} [{self.row}]"


@dataclass(frozen=True)
class MonitorViolation:
    monitor: str  # "M1", "M2" or "M3"
    step: int
    detail: str

    def __str__(self) -> str:
        return f"{self.monitor}@{self.step}: {self.detail}"


@dataclass(frozen=True)
class TraceEntry:
    step: int
    call: ApiCall
    running: str | None
    violations: tuple[MonitorViolation, ...] = ()
    precondition: Violation | None = None
    changes: tuple[str, ...] = ()

    @property
    def n_violations(self) -> int:
        return len(self.violations) + (self.precondition is not None)

    def to_line(self) -> str:
        return f"{self.step}\t{self.call}\trunning={self.running or 'none'}\tviolations={self.n_violations}"


@dataclass
class Tcb:
    name: str
    static_priority: int
    extended: bool
    max_activations: int
    events: tuple[str, ...] = ()
    state: TaskState = TaskState.SUSPENDED
    activation_count: int = 0  # wraps at the configured counter width
    shadow_activations: int = 0  # same bookkeeping without wrap-around
    pending_events: frozenset[str] = frozenset()
    waiting_mask: frozenset[str] = frozenset()
    held_resources: tuple[str, ...] = ()
    body: list[ApiCall] = field(default_factory=list)

    def copy(self) -> "Tcb":
        c = Tcb.__new__(Tcb)
        c.__dict__.update(self.__dict__)
        c.body = list(self.body)
        return c

    def key(self) -> tuple:
        return (
            self.name,
            self.state.value,
            self.activation_count,
            self.shadow_activations,
            tuple(sorted(self.pending_events)),
            tuple(sorted(self.waiting_mask)),
            self.held_resources,
            tuple(self.body),
        )


@dataclass
class SimState:
    cfg: OilConfig
    tasks: dict[str, Tcb]
    ready_queue: dict[int, list[str]]
    running: str | None = None
    resources: dict[str, str | None] = field(default_factory=dict)
    events: tuple[str, ...] = ()
    counter_bits: int = 8
    started: bool = False
    trace: list[TraceEntry] = field(default_factory=list)

    @property
    def counter_mask(self) -> int:
        return (1 << self.counter_bits) - 1

    @property
    def step(self) -> int:
        return len(self.trace)

    @property
    def violations(self) -> list[MonitorViolation]:
        return [v for e in self.trace for v in e.violations]

    def copy(self) -> "SimState":
        return SimState(
            cfg=self.cfg,
            tasks={n: t.copy() for n, t in self.tasks.items()},
            ready_queue={p: list(q) for p, q in self.ready_queue.items()},
            running=self.running,
            resources=dict(self.resources),
            events=self.events,
            counter_bits=self.counter_bits,
            started=self.started,
            trace=list(self.trace),
        )

    def scheduling_key(self) -> tuple:
        """Everything the scheduler reads or writes."""
        return (
            tuple(t.key() for t in self.tasks.values()),
            tuple((p, tuple(q)) for p, q in sorted(self.ready_queue.items())),
            self.running,
            tuple(sorted(self.resources.items(), key=lambda kv: kv[0])),
            self.started,
        )

    def fingerprint(self) -> int:
        return hash((self.scheduling_key(), tuple(self.trace)))

    # -- ready queue helpers
    def highest_ready_priority(self) -> int:
        """Highest priority with a nonempty FIFO, or -1 when nothing is ready."""
        for p in sorted(self.ready_queue, reverse=True):
            if self.ready_queue[p]:
                return p
        return -1

    def ready_names(self) -> list[str]:
        return [n for p in sorted(self.ready_queue, reverse=True) for n in self.ready_queue[p]]

    def enqueue_back(self, name: str) -> None:
        self.ready_queue.setdefault(self.tasks[name].static_priority, []).append(name)

    def enqueue_front(self, name: str) -> None:
        self.ready_queue.setdefault(self.tasks[name].static_priority, []).insert(0, name)

    def dequeue(self, name: str) -> None:
        self.ready_queue[self.tasks[name].static_priority].remove(name)


def new_state(cfg: OilConfig, counter_bits: int | None = None) -> SimState:
    """An unstarted system: every task SUSPENDED, OS not running."""
    tasks = {
        t.name: Tcb(t.name, t.priority, t.extended, t.max_activations, tuple(t.events))
        for t in cfg.tasks
    }
    return SimState(
        cfg=cfg,
        tasks=tasks,
        ready_queue={p: [] for p in sorted({t.priority for t in cfg.tasks})},
        resources={r: None for r in cfg.resources},
        events=tuple(cfg.events),
        counter_bits=cfg.counter_bits if counter_bits is None else counter_bits,
    )
