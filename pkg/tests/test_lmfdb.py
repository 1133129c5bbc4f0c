import json

import httpx
import pytest

from murmurlab.rational_curves import LMFDBClient, NetworkDisabledError, fetch_lmfdb
from murmurlab.rational_curves.lmfdb import served_ap

CURVE = {"lmfdb_label": "11.a2", "ainvs": [0, -1, 1, -10, -20], "conductor": 11, "rank": 0,
         "tamagawa_product": 5, "sha": 1, "torsion": 5}
BSD = {"lmfdb_label": "11.a2", "real_period": 1.26920930427955, "special_value": 0.253841860855911}


def handler(calls):
    def respond(request: httpx.Request) -> httpx.Response:
        calls.append(request)
        table = request.url.path.strip("/").split("/")[-1]
        if table == "ec_curvedata":
            data = [CURVE] if request.url.params.get("_offset") == "0" else []
        elif table == "ec_mwbsd":
            data = [BSD]
        elif table == "ec_classdata":
            data = [{"aplist": [-2, -1, 1, -2, 1, 4]}]
        else:
            return httpx.Response(404)
        return httpx.Response(200, json={"data": data})
    return respond


def client(tmp_path, calls, **kw):
    return LMFDBClient(allow_network=True, cache_dir=tmp_path, min_interval=0.0,
                       transport=httpx.MockTransport(handler(calls)), **kw)


def test_fetch_and_cache(tmp_path):
    calls = []
    c = client(tmp_path, calls)
    recs = fetch_lmfdb(1, 20, c, page_size=100)
    assert len(recs) == 1 and recs[0].ap[2] == -2 and recs[0].l1 == pytest.approx(0.2538418608559)
    assert c.requests == 2
    # second client on the same cache: zero requests, even with network switched off
    c2 = LMFDBClient(allow_network=False, cache_dir=tmp_path)
    again = fetch_lmfdb(1, 20, c2)
    assert again == recs and c2.requests == 0


def test_network_disabled(tmp_path):
    c = LMFDBClient(cache_dir=tmp_path)
    with pytest.raises(NetworkDisabledError, match="--fetch"):
        fetch_lmfdb(1, 20, c)


def test_http_error_leaves_no_cache(tmp_path):
    c = LMFDBClient(allow_network=True, cache_dir=tmp_path, min_interval=0.0,
                    transport=httpx.MockTransport(lambda r: httpx.Response(503)))
    with pytest.raises(httpx.HTTPStatusError):
        c.get("ec_curvedata", {"conductor": "1-2"})
    assert not list(tmp_path.glob("*"))


def test_cache_env(monkeypatch, tmp_path):
    monkeypatch.setenv("MURMURLAB_CACHE", str(tmp_path))
    assert LMFDBClient().cache_dir == tmp_path / "lmfdb"


def test_rate_limit(tmp_path, monkeypatch):
    import murmurlab.rational_curves.lmfdb as mod

    sleeps = []
    monkeypatch.setattr(mod.time, "sleep", lambda s: sleeps.append(s))
    calls = []
    c = client(tmp_path, calls)
    c.min_interval = 5.0
    c.get("ec_classdata", {"lmfdb_iso": "11.a"})
    c.get("ec_classdata", {"lmfdb_iso": "14.a"})
    assert len(sleeps) == 1 and 0 < sleeps[0] <= 5.0


def test_served_ap(tmp_path):
    calls = []
    assert served_ap(client(tmp_path, calls), "11.a") == {2: -2, 3: -1, 5: 1, 7: -2, 11: 1, 13: 4}
