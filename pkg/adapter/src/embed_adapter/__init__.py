"""embed-adapter: model-to-`.gbe` extraction bridge."""

from .backbones import available_backbones, get_backbone
from .errors import AdapterError, InputLayoutError, MissingDependencyError
from .extract import (
    ExtractionJob,
    extract_image_embeddings,
    extract_text_embeddings,
    load_manifest_categories,
    read_prompt_records,
)
from .gbe import encode_gbe, write_gbe_atomic

__version__ = "0.1.0"
