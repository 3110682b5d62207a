from abc import ABC
from pathlib import Path
from typing import Union

import aiofiles

PathLike = Union[str, Path]


class BaseRepository(ABC):
    """File-backed repository rooted at a directory; relative paths resolve against it."""

    def __init__(self, root: PathLike = "."):
        self.root = Path(root)

    def resolve(self, path: PathLike) -> Path:
        path = Path(path)
        return path if path.is_absolute() else self.root / path

    async def read_bytes(self, path: PathLike) -> bytes:
        async with aiofiles.open(self.resolve(path), "rb") as f:
            return await f.read()

    async def write_text(self, path: PathLike, text: str) -> Path:
        target = self.resolve(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        # newline="" keeps the "\n" row terminators byte-exact on every platform
        async with aiofiles.open(target, "w", encoding="utf-8", newline="") as f:
            await f.write(text)
        return target
