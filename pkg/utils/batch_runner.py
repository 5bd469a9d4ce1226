import asyncio
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Sequence

import config

logger = logging.getLogger(__name__)


class BatchRunner:
    """Runs independent sweep points concurrently, in batches, preserving input order"""

    def __init__(self, batch_size: int = config.BATCH_SIZE, max_workers: int = config.MAX_CONCURRENT_WORKERS):
        self.batch_size = batch_size
        self.max_workers = max_workers

    async def process_batch(
        self,
        items: Sequence[Any],
        worker: Callable[[Any], Dict[str, Any]],
        progress_callback: Optional[Callable[[int], None]] = None,
    ) -> List[Dict[str, Any]]:
        """Apply `worker` to every item; failures become {"error": ..., "item": ...} records"""
        results: List[Dict[str, Any]] = []
        semaphore = asyncio.Semaphore(self.max_workers)
        loop = asyncio.get_running_loop()

        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:

            async def process_item(item):
                async with semaphore:
                    return await loop.run_in_executor(executor, worker, item)

            for i in range(0, len(items), self.batch_size):
                batch = items[i:i + self.batch_size]
                batch_results = await asyncio.gather(*(process_item(item) for item in batch), return_exceptions=True)

                for item, result in zip(batch, batch_results):
                    if isinstance(result, Exception):
                        logger.error("Sweep point %s failed: %s", item, result)
                        results.append({"error": f"{type(result).__name__}: {result}", "item": item, "exception": result})
                    else:
                        results.append(result)

                if progress_callback:
                    progress_callback(len(batch))

        return results

    def run(self, items: Sequence[Any], worker: Callable[[Any], Dict[str, Any]], progress_callback=None) -> List[Dict[str, Any]]:
        """Synchronous wrapper around process_batch"""
        return asyncio.run(self.process_batch(list(items), worker, progress_callback))


def failed(results: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
    return [r for r in results if isinstance(r, dict) and "error" in r]


def error_rows(results: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
    """Results with the raw exception objects dropped, ready for writing"""
    return [{k: v for k, v in r.items() if k != "exception"} for r in results]
