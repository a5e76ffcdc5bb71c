"""Ordered evaluation of sweep rows, optionally on a thread pool.

A row that fails with a toolkit error is recorded and the sweep goes on; results always
come back in input order, whatever order the workers finish in.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Iterable, List, Optional, Sequence

from .errors import InvalidInputError, TegSimError

logger = logging.getLogger(__name__)


@dataclass
class RowOutcome:
    index: int
    item: Any
    value: Any = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _evaluate(func: Callable[[Any], Any], index: int, item: Any) -> RowOutcome:
    try:
        return RowOutcome(index=index, item=item, value=func(item))
    except (TegSimError, ValueError) as e:
        logger.warning("row %d (%s) failed: %s", index, item, e)
        return RowOutcome(index=index, item=item, error=str(e))


def run_rows(func: Callable[[Any], Any], items: Iterable[Any], parallelism: int = 1) -> List[RowOutcome]:
    """Apply ``func`` to every item; ``parallelism`` > 1 uses that many worker threads."""
    items: Sequence[Any] = list(items)
    if not items:
        raise InvalidInputError("sweep needs at least one value")
    logger.debug("running %d sweep rows with parallelism %d", len(items), parallelism)
    if parallelism <= 1 or len(items) == 1:
        return [_evaluate(func, i, item) for i, item in enumerate(items)]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        # map yields in submission order
        return list(pool.map(lambda pair: _evaluate(func, *pair), enumerate(items)))
