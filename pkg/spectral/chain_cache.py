"""
Модуль для кэширования базисов сингулярных цепочек.
Повторные анализы одной модели (pairing, adjoint, verify) не пересчитывают цепочки.
"""

import hashlib
import logging
import threading
from collections import OrderedDict
from contextlib import contextmanager

import numpy as np

from config import CACHE_SIZE, DEFAULT_TOLERANCES
from .local_chains import singular_chains

logger = logging.getLogger(__name__)


def chain_key(P, sigma0, tol, order):
    """sha256 от коэффициентов, точки, длины усечения и допусков."""
    digest = hashlib.sha256()
    digest.update(np.ascontiguousarray(P.coeffs).tobytes())
    digest.update(np.array([complex(sigma0)]).tobytes())
    digest.update(repr((order, sorted(tol.as_dict().items()))).encode("utf-8"))
    return digest.hexdigest()


class ChainCache:
    """
    LRU-кэш базисов цепочек.
    Экземпляры регистрируются по имени; доступ потокобезопасен.
    """

    _caches = {}  # Кэши по именам
    _lock = threading.RLock()  # Блокировка реестра

    @classmethod
    def get_cache(cls, name="default"):
        """
        Получить или создать кэш с указанным именем.

        Args:
            name (str): Имя кэша

        Returns:
            ChainCache: Экземпляр кэша
        """
        with cls._lock:
            if name not in cls._caches:
                cls._caches[name] = ChainCache(name)
            return cls._caches[name]

    def __init__(self, name, capacity=CACHE_SIZE):
        self.name = name
        self.capacity = capacity
        self.entries = OrderedDict()
        self.hits = 0
        self.misses = 0
        self.lock = threading.RLock()

    def chains(self, P, sigma0, tol=DEFAULT_TOLERANCES, order=None):
        """Базис цепочек из кэша либо вычисленный singular_chains."""
        key = chain_key(P, sigma0, tol, order)
        with self.lock:
            if key in self.entries:
                self.entries.move_to_end(key)
                self.hits += 1
                logger.debug(f"Кэш {self.name}: попадание для {complex(sigma0):.6g}")
                return self.entries[key]
        basis = singular_chains(P, sigma0, tol, order)
        with self.lock:
            self.misses += 1
            self.entries[key] = basis
            while len(self.entries) > self.capacity:
                evicted, _ = self.entries.popitem(last=False)
                logger.warning(f"Кэш {self.name} переполнен, вытеснен элемент {evicted[:12]}")
        return basis

    def __len__(self):
        return len(self.entries)

    def clear(self):
        with self.lock:
            self.entries.clear()
            self.hits = self.misses = 0
            logger.info(f"Кэш {self.name} очищен")


@contextmanager
def cache_scope(name="default"):
    """
    Контекстный менеджер для работы с именованным кэшем.

    Yields:
        ChainCache: Кэш; при ошибке вычислений запись в журнал и повторный выброс
    """
    cache = ChainCache.get_cache(name)
    try:
        yield cache
    except Exception as e:
        logger.error(f"Ошибка при работе с кэшем {name}: {e}")
        raise
