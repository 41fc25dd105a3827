# -*- coding: utf-8 -*-
"""errors

Exceptions raised by the food package. Each carries the process exit code
the command line front end reports for it.
"""

class FoodError(Exception):
    """ base class for all package errors """

    exit_code = 1

class UsageError(FoodError):
    """ invalid command line usage or invalid arguments """

    exit_code = 2

class ConfigError(UsageError):
    """ malformed or inconsistent configuration """

class NotCalibratedError(UsageError):
    """ OOD decisions requested from a checkpoint without thresholds """

class FormatError(FoodError):
    """ malformed FOODRAW1 or FOODMDL1 container """

    exit_code = 3

class DataError(FoodError):
    """ missing, empty or inconsistent data """

    exit_code = 3

class ShapeError(FoodError,ValueError):
    """ tensor shapes that do not fit an operation """

    exit_code = 3

class NumericError(FoodError,ArithmeticError):
    """ NaN or Inf produced by a computation """

    exit_code = 4

class MissingGradientError(NumericError):
    """ optimizer step on parameters without gradients """
