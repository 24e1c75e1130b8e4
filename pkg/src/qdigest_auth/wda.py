"""Whole-digest authentication: hash the canonical serialization.

The trusted source publishes the hash of a digest's canonical bytes; a
user who receives the digest from an untrusted responder recomputes the
hash and additionally checks that what arrived is structurally a valid
digest within the size bound, so that even a (hypothetical) hash
collision would have to be a well-formed digest to be accepted.
"""

import hashlib
import hmac
from dataclasses import dataclass

from .digest import QDigest, ValidityReport, validate
from .serialize import digest_to_bytes

# Any 256-bit hashlib algorithm name; deployments may swap it, but both
# sides must agree since the hash preimage is the canonical digest file.
WDA_HASH_ALGORITHM = "sha256"


def hash_digest_bytes(data: bytes) -> bytes:
    return hashlib.new(WDA_HASH_ALGORITHM, data).digest()


@dataclass(frozen=True)
class WdaAuthInfo:
    digest_hash: bytes
    sigma: int
    k: int

    def encode(self) -> str:
        return f"wda1:{self.digest_hash.hex()} sigma={self.sigma} k={self.k}"

    @classmethod
    def parse(cls, text: str) -> "WdaAuthInfo":
        parts = text.strip().split(" ")
        if len(parts) != 3 or not parts[0].startswith("wda1:"):
            raise ValueError(f"malformed WDA auth info: {text!r}")
        hexpart = parts[0][len("wda1:"):]
        if len(hexpart) != 64:
            raise ValueError("WDA hash must be 64 hex characters")
        try:
            digest_hash = bytes.fromhex(hexpart)
        except ValueError:
            raise ValueError("WDA hash is not valid hexadecimal") from None
        fields = {}
        for part in parts[1:]:
            key, eq, value = part.partition("=")
            if not eq or not value.isdigit():
                raise ValueError(f"malformed WDA auth info: {text!r}")
            fields[key] = int(value)
        if set(fields) != {"sigma", "k"}:
            raise ValueError(f"malformed WDA auth info: {text!r}")
        return cls(digest_hash=digest_hash, sigma=fields["sigma"], k=fields["k"])


@dataclass(frozen=True)
class WdaVerdict:
    accepted: bool
    reason: str
    report: ValidityReport


def wda_authinfo(q: QDigest) -> WdaAuthInfo:
    return WdaAuthInfo(digest_hash=hash_digest_bytes(digest_to_bytes(q)), sigma=q.sigma, k=q.k)


def wda_verify(received: QDigest, auth: WdaAuthInfo) -> WdaVerdict:
    """Accept iff parameters echo, the hash matches, and the digest validates."""
    report = validate(received)
    if (received.sigma, received.k) != (auth.sigma, auth.k):
        return WdaVerdict(False, "parameter-mismatch", report)
    actual = hash_digest_bytes(digest_to_bytes(received))
    if not hmac.compare_digest(actual, auth.digest_hash):
        return WdaVerdict(False, "hash-mismatch", report)
    if not report.ok or not report.size_bound_ok:
        return WdaVerdict(False, "invalid-structure", report)
    return WdaVerdict(True, "ok", report)


def dump_authinfo(auth: WdaAuthInfo, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(auth.encode() + "\n")


def load_authinfo(path) -> WdaAuthInfo:
    with open(path, "r", encoding="ascii") as fh:
        return WdaAuthInfo.parse(fh.read())
