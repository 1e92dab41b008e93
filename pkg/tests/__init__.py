"""
Тесты для расширений конических операторов.
"""
