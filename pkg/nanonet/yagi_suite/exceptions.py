class ConfigError(ValueError):
    """
    An invalid parameter or configuration value.
    When raised while reading a configuration document,
    `section` and `key` name the offending entry.
    """

    def __init__(self, message, section=None, key=None):
        if section and key:
            message = '{}.{}: {}'.format(section, key, message)
        elif section or key:
            message = '{}: {}'.format(section or key, message)

        super().__init__(message)
        self.section = section
        self.key = key


class InvalidParameterError(ConfigError):
    pass


class InvalidConfigError(ConfigError):
    pass


class EmptyPlanError(ConfigError):
    pass


class BudgetExceededError(ConfigError):
    pass


class VoltageOutOfRangeError(ConfigError):
    pass


class NumericalError(ArithmeticError):
    pass


class SingularConductivityError(NumericalError):
    pass


class NoRootError(NumericalError):
    pass


class SingularMatrixError(NumericalError):
    pass


class NoBandError(NumericalError):
    pass


class DegenerateError(NumericalError):
    pass


class DegeneratePatternError(NumericalError):
    pass


class UnknownStateError(KeyError):
    pass


class NoViableChannelError(LookupError):
    pass
