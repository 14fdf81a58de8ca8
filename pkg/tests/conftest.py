import os
from pathlib import Path

import pytest

MNIST_FILES = (
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
)


@pytest.fixture(scope="session")
def mnist_dir():
    """Directory holding the four IDX files; set MEMSC_MNIST_DIR to override."""
    path = Path(os.environ.get("MEMSC_MNIST_DIR", "/root/data/mnist"))
    if not all((path / name).exists() for name in MNIST_FILES):
        pytest.skip(f"MNIST IDX files not found under {path} (set MEMSC_MNIST_DIR)")
    return path
