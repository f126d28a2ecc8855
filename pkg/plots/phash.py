"""Perceptual image hashing for loose visual regression.

Average hash (aHash): downsample to a small grayscale grid and
threshold each cell at the grid mean.  Robust against font and
antialiasing differences while catching layout-level regressions.
"""

from PIL import Image

HASH_SIZE = 16  # 16x16 grid -> 256-bit hash


def perceptual_hash(path, hash_size=HASH_SIZE):
    """Hex digest of the average hash of the image at path."""
    img = Image.open(path).convert("L").resize(
        (hash_size, hash_size), Image.LANCZOS)
    pixels = img.tobytes()
    mean = sum(pixels) / len(pixels)
    bits = 0
    for p in pixels:
        bits = (bits << 1) | (p > mean)
    return f"{bits:0{hash_size * hash_size // 4}x}"


def hamming(hash_a, hash_b):
    """Number of differing bits between two hex digests."""
    return bin(int(hash_a, 16) ^ int(hash_b, 16)).count("1")
