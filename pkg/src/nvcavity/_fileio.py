"""Small file-output helpers shared by the writer routines."""

import contextlib
import os
import tempfile


def atomic_write_text(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temp file + rename.

    The temp file lives in the target directory so the final
    ``os.replace`` never crosses a filesystem boundary.
    """
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=os.path.basename(path) + ".", dir=directory)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise
