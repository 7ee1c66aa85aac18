"""On-disk cache for computed term counts and polynomials.

Two layers: a JSON counts index (always written, tiny) and binary
polynomial files for results below a size threshold.  A warm cache run
answers term-count queries from the index alone, with no polynomial
multiplications; the global multiplication counter makes that observable.
Concurrent processes sharing a cache directory are serialized with an
advisory file lock.
"""
from __future__ import annotations

import json
import os
from typing import Dict, List, Optional

from filelock import FileLock

from . import sparsepoly
from .sparsepoly import SparsePoly

# Polynomials above this many terms are not materialized to disk; their
# counts still land in the index.
POLY_CACHE_TERM_LIMIT = 1 << 20

# Counter of dict/kernel polynomial multiplications, for the warm-cache
# observability contract (a warm run must leave it untouched).
count_multiplication = sparsepoly.count_multiplication
multiplications = sparsepoly.multiplications
reset_multiplications = sparsepoly.reset_multiplications


class Cache:
    def __init__(self, directory: str):
        self.directory = directory
        os.makedirs(directory, exist_ok=True)
        self.index_path = os.path.join(directory, "counts.json")
        self.lock = FileLock(os.path.join(directory, "cache.lock"))

    # index entries are keyed "name|gap|k|mode" with decimal-string values
    @staticmethod
    def _key(name: str, gap_id, k: int, exact: bool) -> str:
        gap = f"{gap_id[0]}-{gap_id[1]}" if gap_id else "-"
        return f"{name}|{gap}|{k}|{'exact' if exact else 'modprime'}"

    def _read_index(self) -> Dict[str, str]:
        if not os.path.exists(self.index_path):
            return {}
        with open(self.index_path) as fh:
            return json.load(fh)

    def get_count(self, name: str, gap_id, k: int, exact: bool) -> Optional[int]:
        with self.lock:
            val = self._read_index().get(self._key(name, gap_id, k, exact))
        return None if val is None else int(val)

    def put_counts(self, name: str, gap_id, counts: List[int],
                   exact: bool, first_k: int = 1) -> None:
        with self.lock:
            index = self._read_index()
            for j, c in enumerate(counts, start=first_k):
                index[self._key(name, gap_id, j, exact)] = str(c)
            tmp = self.index_path + ".tmp"
            with open(tmp, "w") as fh:
                json.dump(index, fh, indent=0, sort_keys=True)
            os.replace(tmp, self.index_path)

    def _poly_path(self, name: str, gap_id, k: int, exact: bool) -> str:
        slug = self._key(name, gap_id, k, exact)
        slug = "".join(c if c.isalnum() or c in "-_^" else "_" for c in slug)
        return os.path.join(self.directory, slug + ".gdp")

    def get_poly(self, name: str, gap_id, k: int, exact: bool) -> Optional[SparsePoly]:
        path = self._poly_path(name, gap_id, k, exact)
        if not os.path.exists(path):
            return None
        with self.lock:
            with open(path, "rb") as fh:
                return sparsepoly.deserialize(fh.read())

    def put_poly(self, name: str, gap_id, k: int, poly: SparsePoly) -> bool:
        if poly.term_count > POLY_CACHE_TERM_LIMIT:
            return False
        data = sparsepoly.serialize(poly)
        path = self._poly_path(name, gap_id, k, poly.modulus is None)
        with self.lock:
            tmp = path + ".tmp"
            with open(tmp, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        return True
