"""
Process-pool fan-out of independent simulation jobs.

Jobs are keyed; results come back ordered by key regardless of completion
order, so downstream aggregation is deterministic.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Any, Callable, Dict, Hashable, List, Tuple

from opentelemetry import trace


LOGGER = logging.getLogger(__name__)


def run_jobs(
	func: Callable[..., Any],
	jobs: Dict[Hashable, Tuple[Any, ...]],
	workers: int = 1,
	span_name: str = "run_jobs",
) -> List[Tuple[Hashable, Any]]:
	"""
	Evaluate func(*args) for every job and return (key, result) pairs sorted by key.

	workers == 1 runs inline. A failing job cancels the remaining ones and
	re-raises its exception.
	"""
	tracer = trace.get_tracer(__name__)
	results: List[Tuple[Hashable, Any]] = []
	with tracer.start_as_current_span(span_name) as span:
		span.set_attribute("job_count", len(jobs))
		span.set_attribute("workers", workers)
		if workers <= 1 or len(jobs) <= 1:
			for key, args in jobs.items():
				results.append((key, func(*args)))
		else:
			with ProcessPoolExecutor(max_workers=workers) as executor:
				futures = {executor.submit(func, *args): key for key, args in jobs.items()}
				for future in as_completed(futures):
					key = futures[future]
					try:
						results.append((key, future.result()))
					except Exception as exc:
						span.add_event("job_failed", {"job": str(key), "error": str(exc)})
						LOGGER.error("Job %s failed: %s", key, exc)
						for pending in futures:
							pending.cancel()
						raise
	return sorted(results, key=lambda item: item[0])
