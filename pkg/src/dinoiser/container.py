"""Flat key->array container with a JSON header.

One on-disk format backs both backbone weight files and head checkpoints:
a stored (uncompressed) zip holding ``meta.json`` plus one ``.npy`` entry
per array.  Entries are written in sorted order with a fixed timestamp so
that identical content produces identical bytes.
"""

from __future__ import annotations

import io
import json
import zipfile

import numpy as np

from .errors import DinoiserError

FORMAT_NAME = "dinoiser-container"
FORMAT_VERSION = 1

_FIXED_DATE = (1980, 1, 1, 0, 0, 0)


class ContainerError(DinoiserError, IOError):
    """Container file is truncated, malformed, or of an unsupported version."""


def save_container(path, arrays: dict, meta: dict | None = None) -> None:
    """Write ``arrays`` and ``meta`` to ``path``.

    Writes are byte-deterministic: same content in, same bytes out.
    """
    header = dict(meta or {})
    header["format"] = FORMAT_NAME
    header["format_version"] = FORMAT_VERSION
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as zf:
        info = zipfile.ZipInfo("meta.json", date_time=_FIXED_DATE)
        zf.writestr(info, json.dumps(header, sort_keys=True, indent=1))
        for key in sorted(arrays):
            buf = io.BytesIO()
            np.lib.format.write_array(buf, np.ascontiguousarray(arrays[key]))
            info = zipfile.ZipInfo(f"arrays/{key}.npy", date_time=_FIXED_DATE)
            zf.writestr(info, buf.getvalue())


def load_container(path):
    """Read a container back as ``(arrays, meta)``.

    Raises ContainerError on truncated files, missing headers, or a
    format version this build does not understand.
    """
    try:
        with zipfile.ZipFile(path, "r") as zf:
            names = set(zf.namelist())
            if "meta.json" not in names:
                raise ContainerError(f"{path}: not a {FORMAT_NAME} file (no meta.json)")
            meta = json.loads(zf.read("meta.json").decode("utf-8"))
            if meta.get("format") != FORMAT_NAME:
                raise ContainerError(f"{path}: unexpected format {meta.get('format')!r}")
            if meta.get("format_version") != FORMAT_VERSION:
                raise ContainerError(
                    f"{path}: format version {meta.get('format_version')!r} "
                    f"not supported (expected {FORMAT_VERSION})"
                )
            arrays = {}
            for name in sorted(names):
                if name.startswith("arrays/") and name.endswith(".npy"):
                    key = name[len("arrays/") : -len(".npy")]
                    arrays[key] = np.lib.format.read_array(io.BytesIO(zf.read(name)))
    except (zipfile.BadZipFile, json.JSONDecodeError, EOFError, OSError) as exc:
        if isinstance(exc, ContainerError):
            raise
        raise ContainerError(f"{path}: unreadable container ({exc})") from exc
    return arrays, meta
