"""Provider construction from selector strings and named registries.

Selectors:
  ``tabular:<table-path>``  needs a vocabulary file alongside
  ``bridge:<command>``      vocabulary arrives in the protocol handshake
"""

from __future__ import annotations

from typing import Callable

from .bridge import BridgeProvider
from .errors import ProviderFailureError
from .providers import MaskedModelProvider, load_tabular_model
from .vocabulary import load_vocabulary


def provider_from_selector(selector: str, vocab_path: str | None = None) -> MaskedModelProvider:
    if selector.startswith("tabular:"):
        table_path = selector[len("tabular:"):]
        if not vocab_path:
            raise ProviderFailureError("tabular provider needs a vocabulary file (--vocab)")
        vocab = load_vocabulary(vocab_path)
        return load_tabular_model(table_path, vocab)
    if selector.startswith("bridge:"):
        return BridgeProvider.spawn(selector[len("bridge:"):])
    raise ProviderFailureError(f"unknown provider selector: {selector!r}")


class ProviderRegistry:
    """Named provider factories; each session gets a fresh instance."""

    def __init__(self):
        self._factories: dict[str, Callable[[], MaskedModelProvider]] = {}

    def register(self, name: str, factory: Callable[[], MaskedModelProvider]) -> None:
        self._factories[name] = factory

    def register_tabular(self, name: str, vocab_path: str, table_path: str) -> None:
        self.register(name, lambda: provider_from_selector(f"tabular:{table_path}", vocab_path))

    def register_bridge(self, name: str, command: str) -> None:
        self.register(name, lambda: BridgeProvider.spawn(command))

    def names(self) -> list[str]:
        return sorted(self._factories)

    def create(self, name: str) -> MaskedModelProvider:
        try:
            factory = self._factories[name]
        except KeyError:
            raise ProviderFailureError(f"unknown provider: {name!r}") from None
        return factory()
