"""LLM gateway, prompt registry, JSON extraction, and the offline backend."""

from .gateway import Backend, HttpBackend, LlmGateway, LlmRequest, LlmResponse
from .jsonx import extract_json
from .mock import FlakyBackend, MockBackend, binding_key
from .prompts import REGISTRY, PromptTemplate, render_prompt

__all__ = [
    "Backend",
    "FlakyBackend",
    "HttpBackend",
    "LlmGateway",
    "LlmRequest",
    "LlmResponse",
    "MockBackend",
    "PromptTemplate",
    "REGISTRY",
    "binding_key",
    "extract_json",
    "render_prompt",
]
