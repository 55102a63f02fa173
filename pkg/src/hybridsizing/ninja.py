"""Client for renewables-ninja style hourly generation APIs.

Responses are cached on disk keyed by a hash of the request. The cache
directory comes from ``HYBRIDSIZING_CACHE_DIR`` and the token from
``HYBRIDSIZING_NINJA_TOKEN``.
"""
from __future__ import annotations

import hashlib
import json
import os
import time
import urllib.error
import urllib.parse
import urllib.request
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from filelock import FileLock

from .timeseries import NORMALIZED_CF, HourlySeries, SeriesError

DEFAULT_ENDPOINT = "https://www.renewables.ninja/api/data"
CACHE_ENV = "HYBRIDSIZING_CACHE_DIR"
TOKEN_ENV = "HYBRIDSIZING_NINJA_TOKEN"

PV_DEFAULTS = {"capacity": 1.0, "system_loss": 0.1, "tracking": 0, "tilt": 35, "azim": 180}
WIND_DEFAULTS = {"capacity": 1.0, "height": 100, "turbine": "Vestas V90 2000"}


class FetchError(RuntimeError):
    pass


class RateLimitError(FetchError):
    pass


def cache_dir() -> Path:
    d = Path(os.environ.get(CACHE_ENV) or Path.home() / ".cache" / "hybridsizing")
    d.mkdir(parents=True, exist_ok=True)
    return d


def request_key(url: str, params: dict) -> str:
    blob = json.dumps({"url": url, "params": params}, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:32]


def _urllib_get(url, headers, timeout):
    req = urllib.request.Request(url, headers=headers)
    try:
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            return resp.status, resp.read()
    except urllib.error.HTTPError as e:
        return e.code, e.read()


def _hour_stamp(key) -> str:
    """Normalize a timestamp key (epoch milliseconds or ISO text) to ``YYYY-MM-DD HH``."""
    if isinstance(key, (int, float)) or str(key).isdigit():
        dt = datetime.fromtimestamp(int(key) / 1000.0, tz=timezone.utc)
        return dt.strftime("%Y-%m-%d %H")
    return str(key).replace("T", " ")[:13]


def parse_payload(payload) -> np.ndarray:
    """Hourly values from a JSON payload ``{"data": {stamp: {"electricity": v}}}``.

    Feb-29 hours are dropped; every remaining year must have 8760 hours.
    """
    try:
        data = payload["data"]
        items = [(_hour_stamp(k), float(v["electricity"] if isinstance(v, dict) else v))
                 for k, v in data.items()]
    except (KeyError, TypeError, ValueError) as exc:
        raise SeriesError(f"unexpected payload schema: {exc}") from None
    items.sort(key=lambda kv: kv[0])
    vals = np.array([v for stamp, v in items if stamp[5:10] != "02-29"])
    if vals.size == 0 or vals.size % 8760:
        raise SeriesError(f"payload has {vals.size} hours after leap-day removal")
    return vals


def fetch_series(location, technology, *, endpoint=DEFAULT_ENDPOINT, config=None,
                 date_from="2019-01-01", date_to="2019-12-31", token=None,
                 retries=4, backoff=1.0, timeout=60.0, transport=None,
                 sleep=time.sleep) -> HourlySeries:
    """Fetch one hourly capacity-factor series for ``(lat, lon)``.

    ``transport(url, headers, timeout) -> (status, body)`` may be supplied
    for testing. HTTP 429 and 5xx responses are retried with exponential
    backoff; persistent 429 raises :class:`RateLimitError`.
    """
    if technology not in ("solar", "wind"):
        raise ValueError("technology must be 'solar' or 'wind'")
    lat, lon = location
    params = dict(PV_DEFAULTS if technology == "solar" else WIND_DEFAULTS)
    params.update(config or {})
    params.update(lat=lat, lon=lon, date_from=date_from, date_to=date_to,
                  dataset="merra2", format="json")
    path = "pv" if technology == "solar" else "wind"
    url = f"{endpoint.rstrip('/')}/{path}?" + urllib.parse.urlencode(sorted(params.items()))

    target = cache_dir() / f"{request_key(url, params)}.json"
    with FileLock(str(target) + ".lock"):
        if target.exists():
            payload = json.loads(target.read_text())
        else:
            payload = _download(url, token, retries, backoff, timeout,
                                transport or _urllib_get, sleep)
            tmp = target.with_suffix(".tmp")
            tmp.write_text(json.dumps(payload))
            tmp.replace(target)
    vals = parse_payload(payload)
    cap = float(params.get("capacity", 1.0)) or 1.0
    return HourlySeries(np.clip(vals / cap, 0.0, 1.0), unit=NORMALIZED_CF,
                        label=f"{technology}@{lat},{lon}")


def _download(url, token, retries, backoff, timeout, transport, sleep):
    token = token or os.environ.get(TOKEN_ENV)
    headers = {"Authorization": f"Token {token}"} if token else {}
    last = None
    for attempt in range(retries + 1):
        try:
            status, body = transport(url, headers, timeout)
        except OSError as exc:
            status, body, last = None, b"", exc
        if status == 200:
            try:
                return json.loads(body)
            except ValueError as exc:
                raise SeriesError(f"response is not JSON: {exc}") from None
        if status is not None and status not in (429,) and status < 500:
            raise FetchError(f"HTTP {status}: {body[:200]!r}")
        last = last if status is None else status
        if attempt < retries:
            sleep(backoff * 2 ** attempt)
    if last == 429:
        raise RateLimitError(f"rate limited after {retries + 1} attempts")
    raise FetchError(f"request failed after {retries + 1} attempts: {last}")
