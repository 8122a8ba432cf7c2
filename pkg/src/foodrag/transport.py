"""HTTP plumbing shared by the remote embedding and LLM backends."""

from __future__ import annotations

import logging
import os
import time

import requests

logger = logging.getLogger(__name__)


class BackendUnavailable(Exception):
    """A remote backend could not produce a usable response."""


def auth_headers(env_var: str | None) -> dict[str, str]:
    """Bearer-token header from the named environment variable, if set."""
    if not env_var:
        return {}
    token = os.environ.get(env_var)
    return {"Authorization": f"Bearer {token}"} if token else {}


def post_json(
    url: str,
    payload: dict,
    *,
    headers: dict | None = None,
    timeout: float = 30.0,
    max_retries: int = 2,
    backoff_s: float = 0.5,
) -> dict:
    """POST JSON and decode the JSON reply.

    Connection errors, timeouts and 5xx responses are retried with
    exponential backoff (transport concern only — invalid content is never
    retried). Raises BackendUnavailable once retries are exhausted or on
    any non-retryable failure.
    """
    last_error = "no attempt made"
    for attempt in range(max_retries + 1):
        if attempt:
            time.sleep(backoff_s * 2 ** (attempt - 1))
        try:
            response = requests.post(url, json=payload, headers=headers or {}, timeout=timeout)
        except requests.RequestException as exc:
            last_error = f"{type(exc).__name__}: {exc}"
            logger.warning("POST %s failed (attempt %d): %s", url, attempt + 1, last_error)
            continue
        if response.status_code >= 500:
            last_error = f"HTTP {response.status_code}"
            logger.warning("POST %s failed (attempt %d): %s", url, attempt + 1, last_error)
            continue
        if response.status_code != 200:
            raise BackendUnavailable(
                f"{url}: HTTP {response.status_code}: {response.text[:200]}"
            )
        try:
            return response.json()
        except ValueError:
            raise BackendUnavailable(f"{url}: response is not JSON") from None
    raise BackendUnavailable(f"{url}: giving up after {max_retries + 1} attempts ({last_error})")
