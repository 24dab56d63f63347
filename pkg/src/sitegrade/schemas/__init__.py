"""Response schemas shipped with the package.

Every JSON body the HTTP service emits validates against one of these
documents. They are plain JSON Schema (draft 2020-12) files so clients
can fetch and reuse them without importing this package.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources as importlib_resources
from typing import Any

SCHEMA_NAMES = (
    "catalog",
    "error",
    "export",
    "healthz",
    "history",
    "list_collection",
    "ranking",
    "results",
    "scan_list",
    "scan_outcomes",
    "scan_single",
    "scheme",
    "scheme_collection",
    "site_detail",
)


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict[str, Any]:
    if name not in SCHEMA_NAMES:
        raise KeyError(name)
    text = (importlib_resources.files("sitegrade") / "schemas" /
            f"{name}.json").read_text(encoding="utf-8")
    return json.loads(text)
