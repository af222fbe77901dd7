import math
from typing import Iterable, Sequence


class HarqLabError(Exception):
    pass


class InvalidArgument(HarqLabError, ValueError):
    pass


class ConfigError(InvalidArgument):
    pass


class NotApplicable(HarqLabError):
    pass


class InsufficientTrials(HarqLabError):
    pass


class CovarianceError(HarqLabError):
    """Raised when a constructed covariance is not PSD; signals a construction bug."""


class CodeNotFound(HarqLabError, KeyError):
    def __init__(self, name: str, known: Sequence[str]):
        self.name = name
        self.known = list(known)
        super().__init__(f"unknown code '{name}', known codes: {', '.join(self.known)}")

    def __str__(self):
        return self.args[0]


class BudgetExceeded(HarqLabError):
    def __init__(self, required: float, allowed: float, what: str = "work"):
        self.required = required
        self.allowed = allowed
        super().__init__(
            f"{what} budget exceeded: {required:.3g} elementary terms requested, "
            f"{allowed:.3g} allowed; shrink the constellation, round index or samples"
        )


def require(condition: bool, message: str):
    if not condition:
        raise InvalidArgument(message)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(linear: float) -> float:
    if linear == 0:
        return -math.inf
    return 10.0 * math.log10(linear)


def parse_db_grid(text: str) -> list[float]:
    """Parses "0,4,8" or "start:step:stop" (inclusive stop) into a strictly increasing grid."""
    text = (text or "").strip()
    if not text:
        raise InvalidArgument("empty SNR grid")

    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InvalidArgument(f"bad SNR range '{text}', expected start:step:stop")
        start, step, stop = (float(p) for p in parts)
        require(step > 0, f"SNR step must be positive, got {step}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        require(count >= 1, f"empty SNR range '{text}'")
        grid = [round(start + i * step, 12) for i in range(count)]
    else:
        grid = [float(p) for p in text.split(",") if p.strip()]

    check_increasing(grid)
    return grid


def check_increasing(grid: Iterable[float]):
    grid = list(grid)
    if not grid:
        raise InvalidArgument("empty SNR grid")
    for prev, cur in zip(grid, grid[1:]):
        if not cur > prev:
            raise InvalidArgument(f"SNR grid must be strictly increasing: {grid}")


def start_all_threads(threads):
    for thread in threads:
        thread.start()


def stop_all_threads(threads):
    for thread in threads:
        thread.stop()

    for thread in threads:
        thread.join()

