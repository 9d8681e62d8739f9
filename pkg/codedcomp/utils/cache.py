"""
codedcomp Artifact Cache

On-disk JSON cache for generator matrices and projection plans, keyed by
their construction parameters. Unreadable entries count as misses.
"""

import json
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from loguru import logger

from ..codes.constructions import GeneratorMatrix
from ..decoders.projective import ProjectionPlan, build_projection_plan, plan_from_dict, plan_to_dict


def _key(kind: str, params: Dict[str, Any]) -> str:
    parts = [kind] + [f"{name}={params[name]}" for name in sorted(params)]
    return "__".join(parts).replace("/", "_").replace(" ", "")


class ArtifactCache:
    """JSON files under `<workspace>/cache`, one per construction."""

    def __init__(self, cache_dir: Path, enabled: bool = True):
        self.cache_dir = Path(cache_dir)
        self.enabled = enabled
        self.hits = 0
        self.misses = 0
        if enabled:
            self.cache_dir.mkdir(parents=True, exist_ok=True)

    def path_for(self, kind: str, params: Dict[str, Any]) -> Path:
        return self.cache_dir / f"{_key(kind, params)}.json"

    def _load_entry(self, path: Path) -> Optional[Any]:
        """Load one cache entry from file."""
        try:
            if path.exists():
                with open(path, "r") as f:
                    return json.load(f)
            return None
        except Exception as e:
            logger.warning(f"Ignoring unreadable cache entry {path.name}: {e}")
            return None

    def _save_entry(self, path: Path, payload: Any) -> None:
        """Save one cache entry to file."""
        try:
            tmp = path.with_suffix(".tmp")
            with open(tmp, "w") as f:
                json.dump(payload, f)
            tmp.replace(path)
        except Exception as e:
            logger.error(f"Error saving cache entry {path.name}: {e}")

    def generator(self, build: Callable[..., GeneratorMatrix], family: str, **params: Any) -> GeneratorMatrix:
        """Cached `build(**params)`."""
        if not self.enabled:
            return build(**params)
        path = self.path_for(f"generator-{family}", params)
        data = self._load_entry(path)
        if data is not None:
            try:
                G = GeneratorMatrix.from_dict(data)
                self.hits += 1
                return G
            except Exception as e:
                logger.warning(f"Cached generator {path.name} is corrupt: {e}")
        self.misses += 1
        G = build(**params)
        self._save_entry(path, G.to_dict())
        logger.debug(f"cached generator {path.name}")
        return G

    def projection_plans(self, m: int, r: int, generator: Optional[GeneratorMatrix] = None) -> List[ProjectionPlan]:
        """Cached `build_projection_plan(m, r)`."""
        if not self.enabled:
            return build_projection_plan(m, r, generator)
        path = self.path_for("plans", {"m": m, "r": r})
        data = self._load_entry(path)
        if data is not None:
            try:
                plans = [plan_from_dict(item) for item in data]
                self.hits += 1
                return plans
            except Exception as e:
                logger.warning(f"Cached plans {path.name} are corrupt: {e}")
        self.misses += 1
        plans = build_projection_plan(m, r, generator)
        self._save_entry(path, [plan_to_dict(p) for p in plans])
        return plans

    def clear(self) -> int:
        """Delete every cache entry; returns the number removed."""
        removed = 0
        for path in self.cache_dir.glob("*.json"):
            path.unlink()
            removed += 1
        return removed
