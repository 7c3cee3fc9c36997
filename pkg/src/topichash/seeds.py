"""Deterministic seed derivation.

Every random stage of the pipeline draws its seed from the single run seed
through :func:`derive_seed`, so a run is fully reproducible from one
configuration value.  The derivation is documented and stable:

    derive_seed(master, stage, *parts)
        = first 63 bits of SHA-256(f"{master}:{stage}:{part1}:{part2}...")

Stage names used by the CLI: ``train`` and ``train-labeled`` (one per
language), ``infer`` (one per language and document id) and ``eval``
(query sampling).
"""

from __future__ import annotations

import hashlib


def derive_seed(master: int, stage: str, *parts: object) -> int:
    """Derive a 63-bit stage seed from the master run seed."""
    payload = ":".join([str(master), stage, *(str(p) for p in parts)])
    digest = hashlib.sha256(payload.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1
