import hashlib
import os

__all__ = ['ensure_parent_dir', 'fingerprint_file']


def ensure_parent_dir(path):
    """Create the parent directory of `path` if it does not exist."""
    parent_dir = os.path.split(os.path.abspath(path))[0]
    os.makedirs(parent_dir, exist_ok=True)
    return path


def fingerprint_file(path, algorithm=hashlib.sha1, buffer_size=16*1024):
    """
    Compute the fingerprint of the content of `path`.

    Args:
        path (str): Path of the file.
        algorithm: The hash algorithm. (default ``hashlib.sha1``)
        buffer_size: Size of IO buffer. (default ``16*1024``)

    Returns:
        str: The hex digest.
    """
    h = algorithm()
    with open(path, 'rb') as f:
        while True:
            buf = f.read(buffer_size)
            if not buf:
                break
            h.update(buf)
    return h.hexdigest()
