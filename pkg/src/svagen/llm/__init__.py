"""Prompt construction, completion providers and reply extraction."""
from .extract import ExtractionFailure, extract_assertions
from .prompts import (GENERATE, REPAIR, ConversationHistory, InvalidFeedbackKind, Prompt,
                      PromptTemplates, ProviderResponse, TemplateError, build_format_repair_prompt,
                      build_generation_prompt, build_repair_prompt, failing_names)
from .providers import (API_KEY_ENV, CompletionProvider, ProviderError, ProviderRejected,
                        ProviderTimeout, RemoteProvider, ReplayProvider, TranscriptExhausted,
                        complete)

__all__ = [
    "API_KEY_ENV", "CompletionProvider", "ConversationHistory", "ExtractionFailure", "GENERATE",
    "InvalidFeedbackKind", "Prompt", "PromptTemplates", "ProviderError", "ProviderRejected",
    "ProviderResponse", "ProviderTimeout", "REPAIR", "RemoteProvider", "ReplayProvider",
    "TemplateError", "TranscriptExhausted", "build_format_repair_prompt",
    "build_generation_prompt", "build_repair_prompt", "complete", "extract_assertions",
    "failing_names",
]
