"""
Provider Selection Strategy

Defines provider priority order and fallback chain logic for the three
provider families (search, fetcher, extractor).
"""

from typing import Any, Callable, Dict, List, Optional, Tuple
import warnings


# Provider priority order for the "auto" strategy, per family.
# Providers are tried in this order; the fixture provider is the final fallback.
PROVIDER_PRIORITY: Dict[str, List[str]] = {
    "search": ["live"],
    "fetcher": ["live"],
    "extractor": ["pdfplumber", "command"],
}

FALLBACK_PROVIDER = "fixture"

# Maps (family, provider name) to a factory. Factories take keyword
# arguments and may raise; try_provider turns failures into messages.
_PROVIDER_FACTORIES: Dict[Tuple[str, str], Callable[..., Any]] = {}


def register_provider_factory(family: str, name: str, factory: Callable[..., Any]) -> None:
    """
    Register a provider factory function.

    Args:
        family: "search", "fetcher" or "extractor"
        name: Provider name (e.g., "live", "fixture")
        factory: Callable returning a provider instance
    """
    _PROVIDER_FACTORIES[(family, name)] = factory


def get_provider_factory(family: str, name: str) -> Optional[Callable[..., Any]]:
    return _PROVIDER_FACTORIES.get((family, name))


def registered_providers(family: str) -> List[str]:
    """Names registered for a family, in registration order."""
    return [name for fam, name in _PROVIDER_FACTORIES if fam == family]


def try_provider(family: str, name: str, **kwargs: Any) -> Tuple[Optional[Any], Optional[str]]:
    """
    Try to initialize a provider by name.

    Returns:
        Tuple of (provider_instance, error_message)
        - If successful: (provider, None)
        - If failed: (None, error_message)
    """
    factory = get_provider_factory(family, name)
    if factory is None:
        return None, f"Provider factory not found: {family}/{name}"

    try:
        return factory(**kwargs), None
    except Exception as e:
        return None, str(e)


def get_provider_with_fallback(
    family: str,
    provider_names: List[str],
    fallback_name: str = FALLBACK_PROVIDER,
    **kwargs: Any,
) -> Any:
    """
    Try providers in order until one succeeds, then fall back.

    Raises:
        RuntimeError: The fallback provider failed too (e.g. no fixture path
            was configured for the fixture search backend)
    """
    for provider_name in provider_names:
        provider, error = try_provider(family, provider_name, **kwargs)
        if provider is not None:
            return provider
        warnings.warn(
            f"Failed to initialize {family} provider '{provider_name}': {error}. "
            f"Trying next provider in chain.",
            UserWarning
        )

    fallback_provider, fallback_error = try_provider(family, fallback_name, **kwargs)
    if fallback_provider is not None:
        if provider_names:
            warnings.warn(
                f"All {family} providers failed. Using fallback: {fallback_name}",
                UserWarning
            )
        return fallback_provider
    raise RuntimeError(
        f"Critical error: fallback {family} provider '{fallback_name}' failed: {fallback_error}"
    )


def get_auto_provider(family: str, **kwargs: Any) -> Any:
    """Get a provider using the "auto" strategy for the given family."""
    return get_provider_with_fallback(
        family,
        provider_names=PROVIDER_PRIORITY.get(family, []),
        fallback_name=FALLBACK_PROVIDER,
        **kwargs,
    )


__all__ = [
    "PROVIDER_PRIORITY",
    "FALLBACK_PROVIDER",
    "register_provider_factory",
    "get_provider_factory",
    "registered_providers",
    "try_provider",
    "get_provider_with_fallback",
    "get_auto_provider",
]
