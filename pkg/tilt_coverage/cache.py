"""
Caching of evaluated experiment points.

Entries are keyed by a digest of the canonical JSON of everything that
determines a point's value (network, evaluator, quadrature or campaign,
tilt search), so a changed setting never returns a stale value.
"""

import hashlib
import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

logger = logging.getLogger(__name__)


class EvaluationCache:
    """Memory + JSON-file cache of point evaluations."""

    CACHE_VERSION = "1.0"

    def __init__(self, cache_dir: str = "./cache"):
        """Initialize the cache in the specified directory."""
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self.cache_file = self.cache_dir / "evaluations_cache.json"

        # In-memory cache for faster access
        self._memory_cache: Dict[str, Dict[str, Any]] = {}
        self.hits = 0
        self.misses = 0

        self._load_cache()
        logger.info(f"EvaluationCache initialized with cache_dir={cache_dir}")

    @staticmethod
    def get_cache_key(descriptor: Dict[str, Any]) -> str:
        """Digest of the descriptor's canonical JSON."""
        canonical = json.dumps(descriptor, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def get(self, descriptor: Dict[str, Any]) -> Optional[Dict[str, Any]]:
        """Cached values for the descriptor, or None."""
        entry = self._memory_cache.get(self.get_cache_key(descriptor))
        if entry is None:
            self.misses += 1
            return None
        self.hits += 1
        return dict(entry["values"])

    def store(self, descriptor: Dict[str, Any], values: Dict[str, Any], persist: bool = True) -> None:
        """Store values for the descriptor; persist=False defers the disk write to flush()."""
        cache_key = self.get_cache_key(descriptor)
        self._memory_cache[cache_key] = {
            "cache_key": cache_key,
            "values": dict(values),
            "timestamp": datetime.now().isoformat(),
        }
        if persist:
            self._save_cache()

    def flush(self) -> None:
        """Write the memory cache to disk."""
        self._save_cache()

    def clear_cache(self) -> int:
        """Clear all cached entries and return the number of entries cleared."""
        cleared_count = len(self._memory_cache)
        self._memory_cache.clear()
        if self.cache_file.exists():
            self.cache_file.unlink()
        logger.info(f"Cleared {cleared_count} cache entries")
        return cleared_count

    def get_cache_stats(self) -> Dict[str, Any]:
        """Get cache statistics."""
        size = self.cache_file.stat().st_size if self.cache_file.exists() else 0
        return {
            "total_entries": len(self._memory_cache),
            "hits": self.hits,
            "misses": self.misses,
            "cache_file_size_bytes": size,
            "cache_dir": str(self.cache_dir),
        }

    def _load_cache(self) -> None:
        """Load cache from disk."""
        if not self.cache_file.exists():
            logger.info("No existing cache file found")
            return
        try:
            with open(self.cache_file, "r", encoding="utf-8") as f:
                cache_data = json.load(f)
            if cache_data.get("version") != self.CACHE_VERSION:
                logger.warning("Ignoring cache file with a different version")
                return
            for entry in cache_data.get("entries", []):
                cache_key = entry.get("cache_key")
                if cache_key:
                    self._memory_cache[cache_key] = entry
            logger.info(f"Loaded {len(self._memory_cache)} cache entries from disk")
        except (OSError, ValueError) as e:
            logger.error(f"Failed to load cache from disk: {e}")
            self._memory_cache = {}

    def _save_cache(self) -> None:
        """Save cache to disk."""
        try:
            cache_data = {
                "version": self.CACHE_VERSION,
                "created_at": datetime.now().isoformat(),
                "entries": list(self._memory_cache.values()),
            }
            with open(self.cache_file, "w", encoding="utf-8") as f:
                json.dump(cache_data, f, indent=2)
            logger.debug(f"Saved {len(self._memory_cache)} cache entries to disk")
        except OSError as e:
            logger.error(f"Failed to save cache to disk: {e}")
