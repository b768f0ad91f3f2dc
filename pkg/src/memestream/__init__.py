"""Meme tracking over tweet-like record streams: ingest, cluster into
memes, build per-meme diffusion networks, compute dashboard statistics,
serve derived data over HTTP, and collect crowdsourced flags."""

from .engine import Pipeline, PipelineConfig, parse_meme_key
from .extraction import MemeKey, extract_entities, extract_memes
from .graph import DiffusionNetwork
from .ingest import ParseError, Tweet, parse_record
from .themes import Theme, load_themes

__version__ = "0.1.0"

__all__ = [
    "DiffusionNetwork",
    "MemeKey",
    "ParseError",
    "Pipeline",
    "PipelineConfig",
    "Theme",
    "Tweet",
    "extract_entities",
    "extract_memes",
    "load_themes",
    "parse_meme_key",
    "parse_record",
    "__version__",
]
