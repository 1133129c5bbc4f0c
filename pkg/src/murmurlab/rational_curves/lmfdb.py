"""Optional LMFDB client: network-gated, rate-limited, cached on disk."""
from __future__ import annotations

import hashlib
import json
import os
import time
from pathlib import Path
from typing import Optional

import httpx

from .arith import AP_PRIMES
from .records import CurveRecord, computed_ap, record_from_dict

BASE_URL = "https://www.lmfdb.org/api"
CACHE_ENV = "MURMURLAB_CACHE"


class NetworkDisabledError(RuntimeError):
    pass


def default_cache_dir() -> Path:
    return Path(os.environ.get(CACHE_ENV, Path.home() / ".cache" / "murmurlab")) / "lmfdb"


class LMFDBClient:
    """Fetch curve pages from the LMFDB JSON API.

    Network use must be switched on explicitly; every response is cached under
    a hash of (table, params) and the cache is written only after a successful
    response, so failures never leave partial entries.
    """

    def __init__(self, allow_network: bool = False, cache_dir: Optional[Path] = None,
                 min_interval: float = 1.0, transport: Optional[httpx.BaseTransport] = None,
                 base_url: str = BASE_URL, timeout: float = 30.0):
        self.allow_network = allow_network
        self.cache_dir = Path(cache_dir) if cache_dir else default_cache_dir()
        self.min_interval = min_interval
        self.base_url = base_url
        self._client = httpx.Client(transport=transport, timeout=timeout)
        self._last = -float("inf")
        self.requests = 0

    def _key(self, table: str, params: dict) -> Path:
        blob = json.dumps([table, sorted(params.items())], default=str).encode()
        return self.cache_dir / f"{table}-{hashlib.sha256(blob).hexdigest()[:24]}.json"

    def get(self, table: str, params: dict) -> list[dict]:
        path = self._key(table, params)
        if path.exists():
            return json.loads(path.read_text())
        if not self.allow_network:
            raise NetworkDisabledError(
                "LMFDB access is off; pass --fetch (or allow_network=True) to enable it")
        wait = self.min_interval - (time.monotonic() - self._last)
        if wait > 0:
            time.sleep(wait)
        self._last = time.monotonic()
        self.requests += 1
        resp = self._client.get(f"{self.base_url}/{table}/", params={**params, "_format": "json"})
        resp.raise_for_status()
        data = resp.json().get("data", [])
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(data))
        tmp.replace(path)
        return data

    def close(self):
        self._client.close()


def _to_record(curve: dict, bsd: dict) -> CurveRecord:
    ainvs = [int(a) for a in curve["ainvs"]]
    N = int(curve["conductor"])
    return record_from_dict({
        "label": curve["lmfdb_label"],
        "conductor": N,
        "ainvs": ainvs,
        "rank": int(curve["rank"]),
        "ap": computed_ap(ainvs, N),
        "omega": float(bsd["real_period"]),
        "tamagawa_product": int(curve["tamagawa_product"]),
        "sha": int(curve.get("sha") or 1),
        "torsion": int(curve["torsion"]),
        "l1": float(bsd.get("special_value") or 0.0) if int(curve["rank"]) == 0 else 0.0,
    })


def fetch_lmfdb(conductor_min: int, conductor_max: int, client: Optional[LMFDBClient] = None,
                rank: Optional[int] = 0, page_size: int = 100) -> list[CurveRecord]:
    """Curves with conductor in [min, max]; a_p are recomputed by point counting."""
    client = client or LMFDBClient()
    params = {"conductor": f"{conductor_min}-{conductor_max}", "_limit": page_size}
    if rank is not None:
        params["rank"] = rank
    curves, offset = [], 0
    while True:
        page = client.get("ec_curvedata", {**params, "_offset": offset})
        curves += page
        if len(page) < page_size:
            break
        offset += page_size
    out = []
    for c in curves:
        bsd = client.get("ec_mwbsd", {"lmfdb_label": c["lmfdb_label"]})
        out.append(_to_record(c, bsd[0] if bsd else {}))
    return out


def served_ap(client: LMFDBClient, iso_label: str) -> dict[int, int]:
    """a_p for the first primes as served by ec_classdata (used for cross-checks)."""
    rows = client.get("ec_classdata", {"lmfdb_iso": iso_label})
    if not rows:
        return {}
    return dict(zip(AP_PRIMES, (int(a) for a in rows[0]["aplist"])))
