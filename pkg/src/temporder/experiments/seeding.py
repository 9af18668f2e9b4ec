import hashlib

import numpy as np


def derive_seed(master: int, *labels) -> int:
    """Stable 63-bit seed from the master seed and a label path."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(master)).encode())
    for lab in labels:
        h.update(b"/")
        h.update(repr(lab).encode())
    return int.from_bytes(h.digest(), "little") >> 1


def rng_for(master: int, *labels) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, *labels))
