"""Small filesystem helpers."""

from __future__ import annotations

from pathlib import Path


def read_text_or_literal(source: str | Path) -> tuple[str, str | None]:
    """Return (text, stem) where `source` is either a path to read or the
    literal content itself (multi-line strings are never paths)."""
    if isinstance(source, Path):
        return source.read_text(), source.stem
    s = str(source)
    if "\n" not in s and len(s) < 4096:
        p = Path(s)
        try:
            if p.exists():
                return p.read_text(), p.stem
        except OSError:
            pass
    return s, None
