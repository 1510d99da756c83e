"""3x3 periodic mean filter (applied to real and imaginary parts)."""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))
from plugin_lib import serve


def blur(data, header):
    acc = np.zeros_like(data)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            acc += np.roll(data, (dy, dx), axis=(0, 1))
    return acc / 9.0


if __name__ == "__main__":
    sys.exit(serve(blur))
