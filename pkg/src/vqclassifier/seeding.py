"""Key-derivation for reproducible sub-seeds.

Every random component draws from the single user-facing seed expanded with
a purpose label, so e.g. changing the SHAP sample count never perturbs the
training shuffle: derive_seed(seed, "init"), (seed, "shuffle"), (seed, "shap").
"""

import hashlib


def derive_seed(seed: int, label: str) -> int:
    digest = hashlib.sha256(f"{int(seed)}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")
