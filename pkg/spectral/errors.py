"""
Исключения библиотеки. Каждый класс знает код завершения для командной строки.
"""


class ConeError(Exception):
    """Базовая ошибка вычислений с коническими операторами."""

    exit_code = 6


class ModelFormatError(ConeError):
    """Файл модели или параметров не соответствует схеме."""

    exit_code = 1


class RootOnBoundary(ConeError):
    """Корень det P̂_0 лежит на граничной прямой полосы."""

    exit_code = 2


class NotSymmetric(ConeError):
    exit_code = 3


class NotPositive(ConeError):
    exit_code = 4


class OddMultiplicity(ConeError):
    exit_code = 5


class NotSpectral(ConeError):
    """P̂(σ_0) численно обратим."""


class BlockNotInvertible(ConeError):
    """Блок P_22 плохо обусловлен: порог ранга выбран неверно."""


class TruncationTooShort(ConeError):
    """Порядок полюса достиг длины усечения ряда."""


class NotInSpan(ConeError):
    pass


class NotRealPoint(ConeError):
    pass


class BasePointMismatch(ConeError):
    pass


class ContourTouchesSpectrum(ConeError):
    pass


class ShiftCollision(ConeError):
    """Сдвиг σ_0 − iϑ почти совпадает с другой точкой спектра."""


class DegeneratePairing(ConeError):
    pass


class NotInvariant(ConeError):
    pass


class QuadratureFailure(ConeError):
    pass


class Divergent(ConeError):
    pass


class NotScalar(ConeError):
    pass


class ChainRankError(ConeError):
    """Построенные цепочки не согласуются с рангами тёплицевых матриц."""


class UnequalDeficiency(ConeError):
    """Форма на блоке не имеет сигнатуры (1, 1)."""


# Код завершения для непрошедшего набора reproduce-paper
SUITE_FAILURE_EXIT = 8
