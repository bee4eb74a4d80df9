"""Regenerates the derived-oracle records in aes128.kat.

AES-128 comes from the `cryptography` package; each variant is composed
from it exactly as its formula reads, so no code is shared with the crate.
"""
import random

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes


def enc(k, p):
    e = Cipher(algorithms.AES(k), modes.ECB()).encryptor()
    return e.update(p) + e.finalize()


def dec(k, c):
    d = Cipher(algorithms.AES(k), modes.ECB()).decryptor()
    return d.update(c) + d.finalize()


def xor(a, b):
    return bytes(i ^ j for i, j in zip(a, b))


FORMULAS = {
    "single": lambda k, p: enc(k[0], p),
    "double": lambda k, p: enc(k[1], enc(k[0], p)),
    "triple2": lambda k, p: enc(k[0], dec(k[1], enc(k[0], p))),
    "aesx": lambda k, p: xor(k[2], enc(k[1], xor(p, k[0]))),
    "aes-exe": lambda k, p: enc(k[2], xor(k[1], enc(k[0], p))),
}


def record(rid, variant, keys, pt):
    ct = FORMULAS[variant](keys, pt)
    lines = [f"id = {rid}", f"variant = {variant}", "strategy = all"]
    lines += [f"key{i + 1} = {k.hex()}" for i, k in enumerate(keys)]
    lines += [f"pt = {pt.hex()}", f"ct = {ct.hex()}", "provenance = derived-oracle", ""]
    print("\n".join(lines))


def main():
    rng = random.Random(2024)
    block = lambda: bytes(rng.getrandbits(8) for _ in range(16))
    for variant, arity in [("double", 2), ("triple2", 2), ("aesx", 3), ("aes-exe", 3)]:
        for j in range(2):
            record(f"{variant}-{j + 1}", variant, [block() for _ in range(arity)], block())
    record("single-zero", "single", [bytes(16)], bytes(16))


if __name__ == "__main__":
    main()
