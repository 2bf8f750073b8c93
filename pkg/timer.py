"""A timer for measuring how long computations take."""
import time


class Timer:
    """Measure elapsed wall-clock time against an optional budget."""

    def __init__(self, budget: float = 0) -> None:
        """
        Start the timer.

        :param budget: How many seconds the timed work is allowed to take. 0 means no budget.
        """
        self.budget = budget
        self.reset()

    def reset(self) -> None:
        """Restart the timer."""
        self.starting_time = time.perf_counter()

    def time_since_reset(self) -> float:
        """How many seconds have passed."""
        return time.perf_counter() - self.starting_time

    def is_over_budget(self) -> bool:
        """Check if the work took longer than its budget."""
        return self.budget > 0 and self.time_since_reset() > self.budget
