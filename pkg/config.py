import os
import logging
from dataclasses import dataclass, fields, replace
from dotenv import load_dotenv, dotenv_values

# Загрузка переменных из .env файла
load_dotenv()

logger = logging.getLogger(__name__)

TOOL_VERSION = "1.0.0"

# Основные настройки
ENV = os.getenv("CONE_EXT_ENV", "production")
LOG_LEVEL = os.getenv("CONE_EXT_LOG_LEVEL", "DEBUG" if ENV == "development" else "INFO")
CONFIG_PATH = os.getenv("CONE_EXT_CONFIG")
WORKERS = int(os.getenv("CONE_EXT_WORKERS", "4"))
CACHE_SIZE = int(os.getenv("CONE_EXT_CACHE_SIZE", "64"))

# Каталог с комплектными моделями
MODELS_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "models")


@dataclass(frozen=True)
class Tolerances:
    """Численные допуски, общие для всех модулей."""

    tol_cluster: float = 1e-7   # относительно max(1, |σ|)
    tol_edge: float = 1e-6
    tol_sym: float = 1e-10
    tol_pos: float = 1e-10
    tol_rank: float = 1e-8
    tol_res: float = 1e-9
    tol_det: float = 1e-8
    tol_angle: float = 1e-8
    quad_nodes: int = 256
    quad_max_nodes: int = 4096
    quad_rtol: float = 1e-10
    max_truncation: int = 64
    cutoff_lo: float = 0.25
    cutoff_hi: float = 0.75
    phi_radius: float = 0.5
    phi_nodes: int = 128
    cond_limit: float = 1e10
    merge_radius: float = 1e-3

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


DEFAULT_TOLERANCES = Tolerances()


def _coerce(name, raw):
    """Привести строковое значение к типу поля Tolerances."""
    from spectral.errors import ModelFormatError

    kind = {f.name: f.type for f in fields(Tolerances)}[name]
    try:
        if kind in (int, "int"):
            return int(float(raw))
        return float(raw)
    except (TypeError, ValueError):
        raise ModelFormatError(f"{name.upper()}: не удалось разобрать значение {raw!r}")


def load_tolerances(path=None, overrides=None):
    """
    Собрать допуски: встроенные значения, затем файл CONE_EXT_CONFIG, затем явные переопределения.

    Args:
        path (str): Путь к файлу KEY=VALUE; по умолчанию CONE_EXT_CONFIG
        overrides (dict): Значения из флагов --tol-* (None пропускаются)

    Returns:
        Tolerances: Итоговый набор допусков

    Raises:
        ModelFormatError: Если значение в файле не разбирается
    """
    known = {f.name for f in fields(Tolerances)}
    values = {}
    path = path if path is not None else CONFIG_PATH
    if path:
        if not os.path.exists(path):
            logger.warning(f"Файл допусков {path} не найден, используются значения по умолчанию")
        else:
            for key, raw in dotenv_values(path).items():
                name = key.lower()
                if name not in known:
                    logger.warning(f"Неизвестный ключ {key} в {path} пропущен")
                    continue
                values[name] = _coerce(name, raw)
            logger.debug(f"Загружены допуски из {path}: {values}")
    for name, value in (overrides or {}).items():
        if value is not None:
            values[name] = value
    return replace(DEFAULT_TOLERANCES, **values)
