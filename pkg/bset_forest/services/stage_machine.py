"""State machine tracking the tasks of a chain construction."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum, auto
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Callable

logger = logging.getLogger(__name__)


class TaskType(Enum):
    """Kinds of scheduled chain tasks."""

    JOINT = auto()
    EXTEND = auto()


class TaskState(Enum):
    """Enum representing possible task states."""

    # Scheduled, not yet attempted
    PENDING = auto()

    # Outcomes
    DONE = auto()
    DEFERRED = auto()


class DeferReason(Enum):
    """Why a task was left undone."""

    ROOT_CAP = auto()
    NO_EMBEDDING = auto()


@dataclass
class StageTransition:
    """Data class for stage transition information."""

    from_state: TaskState
    to_state: TaskState
    success_message: str
    failure_message: str


DISCHARGE = StageTransition(TaskState.PENDING, TaskState.DONE, "task discharged", "task already settled")
DEFER = StageTransition(TaskState.PENDING, TaskState.DEFERRED, "task deferred", "task already settled")


@dataclass
class ChainTask:
    """One scheduled task: a stage number, its type, a short description and why it was deferred."""

    step: int
    task_type: TaskType
    description: str
    state: TaskState = TaskState.PENDING
    reason: DeferReason | None = None


class ChainStageMachine:
    """Moves chain tasks from PENDING to DONE or DEFERRED and keeps the record."""

    def __init__(self) -> None:
        """Initialize the state machine."""
        self._tasks: list[ChainTask] = []
        self._handlers: dict[TaskState, Callable[[ChainTask], None]] = {}
        self._errors: list[str] = []

    @property
    def tasks(self) -> list[ChainTask]:
        """Tasks in scheduling order."""
        return list(self._tasks)

    @property
    def errors(self) -> list[str]:
        """Rejected transitions."""
        return list(self._errors)

    def register_handler(self, state: TaskState, handler: Callable[[ChainTask], None]) -> None:
        """Register a handler called when a task enters a state.

        Args:
            state: The state to handle transitions for
            handler: The handler function to call
        """
        self._handlers[state] = handler

    def schedule(self, step: int, task_type: TaskType, description: str) -> ChainTask:
        """Add a pending task."""
        task = ChainTask(step, task_type, description)
        self._tasks.append(task)
        return task

    def transition(self, task: ChainTask, transition: StageTransition) -> bool:
        """Move a task along a transition.

        Args:
            task: The task to move
            transition: Expected source state and the target state

        Returns:
            bool: False if the task was not in the transition's source state
        """
        if task.state != transition.from_state:
            error_msg = (
                f"Invalid stage transition for step {task.step} from {task.state} to {transition.to_state}: "
                f"{transition.failure_message}"
            )
            logger.error(error_msg)
            self._errors.append(error_msg)
            return False

        old_state = task.state
        task.state = transition.to_state
        logger.info("Stage transition: %s -> %s (step %d, %s)", old_state, task.state, task.step, transition.success_message)

        handler = self._handlers.get(task.state)
        if handler is not None:
            try:
                handler(task)
            except Exception:
                logger.exception("Error in stage handler")
        return True

    def count(self, state: TaskState, task_type: TaskType | None = None) -> int:
        """Number of tasks in a state, optionally of one type."""
        return sum(1 for t in self._tasks if t.state is state and (task_type is None or t.task_type is task_type))
