"""
Logging setup and timing helpers for solvers and reports.

Timings are collected only between enable_profiling() and
enable_profiling(False); otherwise the decorators pass calls straight through.
"""
from __future__ import annotations
import time
import functools
import logging
from typing import Callable, Dict, List

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# name -> list of elapsed milliseconds
timing_data: Dict[str, List[float]] = {}
_enabled = False


def configure_logging(level: str = "WARNING") -> None:
    """Install a root handler. Only the CLI calls this."""
    logging.basicConfig(level=getattr(logging, level.upper(), logging.WARNING), format=LOG_FORMAT)


def enable_profiling(on: bool = True) -> None:
    """Switch timing collection on or off. Switching off keeps what was recorded."""
    global _enabled
    _enabled = on


def profiling_enabled() -> bool:
    return _enabled


def _record(name: str, elapsed_ms: float) -> None:
    timing_data.setdefault(name, []).append(elapsed_ms)
    logger.debug("%s: %.2fms", name, elapsed_ms)


def profile_function(func: Callable) -> Callable:
    """Decorator to profile function execution time."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        if not _enabled:
            return func(*args, **kwargs)
        start_time = time.perf_counter()
        try:
            return func(*args, **kwargs)
        finally:
            _record(func.__name__, (time.perf_counter() - start_time) * 1000)
    return wrapper


class profile_section:
    """Context manager to profile a code section."""

    def __init__(self, name: str):
        self.name = name
        self.start_time = 0.0

    def __enter__(self):
        self.start_time = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if _enabled:
            _record(self.name, (time.perf_counter() - self.start_time) * 1000)
        return False


def get_timing_stats() -> Dict[str, Dict[str, float]]:
    """Get statistics for all profiled functions and sections."""
    stats = {}
    for name, times in timing_data.items():
        if times:
            stats[name] = {
                'count': len(times),
                'total_ms': sum(times),
                'avg_ms': sum(times) / len(times),
                'min_ms': min(times),
                'max_ms': max(times),
            }
    return stats


def format_timing_report() -> str:
    """Timing table sorted by total time."""
    stats = get_timing_stats()
    if not stats:
        return "No timing data collected."

    lines = [
        "=" * 80,
        "TIMING REPORT",
        "=" * 80,
        f"{'Function/Section':<32} {'Calls':>8} {'Total(ms)':>12} {'Avg(ms)':>12} {'Min(ms)':>12}",
        "-" * 80,
    ]
    for name, data in sorted(stats.items(), key=lambda x: x[1]['total_ms'], reverse=True):
        lines.append(
            f"{name:<32} {data['count']:>8} {data['total_ms']:>12.2f} "
            f"{data['avg_ms']:>12.2f} {data['min_ms']:>12.2f}"
        )
    lines.append("=" * 80)
    return "\n".join(lines)


def clear_timing_data() -> None:
    """Clear all collected timing data."""
    timing_data.clear()
