"""Explainer registry for pluggable attribution methods.

Explainers register under a name so evaluation commands can build them from
configuration (``--baselines``) without importing each implementation.
"""

from typing import Callable, Optional, TypeVar

from segcause.explainers.base import BaseExplainer
from segcause.utils.exceptions import ConfigurationError
from segcause.utils.logging_config import get_logger

logger = get_logger(__name__)

T = TypeVar("T", bound=BaseExplainer)

# Registry of explainer classes
_explainer_registry: dict[str, type[BaseExplainer]] = {}


def register_explainer(name: str) -> Callable[[type[T]], type[T]]:
    """Register an explainer class.

    Args:
        name: Unique name for the explainer (e.g., "integrated_gradients")

    Returns:
        Decorator function that registers the class

    Example:
        @register_explainer("grad_saliency")
        class GradSaliencyExplainer(BaseExplainer):
            ...
    """

    def decorator(cls: type[T]) -> type[T]:
        if name in _explainer_registry:
            logger.warning(f"Explainer '{name}' is already registered, overwriting")

        _explainer_registry[name] = cls
        logger.debug(f"Registered explainer: {name}")
        return cls

    return decorator


def get_explainer_class(name: str) -> Optional[type[BaseExplainer]]:
    """Get a registered explainer class by name, or None."""
    return _explainer_registry.get(name)


def get_all_explainer_classes() -> dict[str, type[BaseExplainer]]:
    """Get all registered explainer classes."""
    return _explainer_registry.copy()


def unregister_explainer(name: str) -> bool:
    """Unregister an explainer.

    Returns:
        True if the explainer was removed, False if not found
    """
    if name in _explainer_registry:
        del _explainer_registry[name]
        logger.debug(f"Unregistered explainer: {name}")
        return True
    return False


def clear_registry() -> None:
    """Clear all registered explainers."""
    _explainer_registry.clear()
    logger.debug("Cleared explainer registry")


def create_explainer(name: str, **kwargs) -> BaseExplainer:
    """Create an explainer instance by name.

    Raises:
        ConfigurationError: If the explainer is not registered
    """
    explainer_class = get_explainer_class(name)
    if explainer_class is None:
        raise ConfigurationError(
            f"Explainer '{name}' is not registered (available: {', '.join(list_explainers())})"
        )

    explainer = explainer_class(**kwargs)
    explainer.name = name
    return explainer


def list_explainers() -> list[str]:
    """List all registered explainer names."""
    return list(_explainer_registry.keys())
