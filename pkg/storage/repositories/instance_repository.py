import logging
import re
from pathlib import Path

import msgspec

from core.constants import VALIDATION_PATH_PATTERN
from core.exceptions import InstanceFormatError
from domain.models import InstanceDocument, ProblemInstance
from services.problem_service import instance_from_document, instance_to_document
from storage.repositories.base import BaseRepository, PathLike

logger = logging.getLogger(__name__)

_encoder = msgspec.json.Encoder()
_decoder = msgspec.json.Decoder(InstanceDocument)


def _field_of(error: msgspec.ValidationError) -> str:
    match = re.search(VALIDATION_PATH_PATTERN, str(error))
    return match.group(1) if match and match.group(1) else "$"


class InstanceRepository(BaseRepository):
    async def save(self, instance: ProblemInstance, path: PathLike) -> Path:
        """Write an instance as a versioned JSON document."""
        payload = _encoder.encode(instance_to_document(instance))
        target = await self.write_text(path, payload.decode("utf-8") + "\n")
        logger.info(f"Saved instance seed={instance.seed} to {target}")
        return target

    async def load(self, path: PathLike) -> ProblemInstance:
        """Read and validate an instance document.

        Raises:
            FileNotFoundError: If the file does not exist.
            InstanceFormatError: If the document is not valid JSON, has a
                missing, unknown or mistyped field, or inconsistent shapes.
        """
        raw = await self.read_bytes(path)
        try:
            doc = _decoder.decode(raw)
        except msgspec.ValidationError as e:
            raise InstanceFormatError(_field_of(e), str(e)) from e
        except msgspec.DecodeError as e:
            raise InstanceFormatError("$", f"not a JSON document ({e})") from e
        return instance_from_document(doc)
